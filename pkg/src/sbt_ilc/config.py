"""Experiment configuration: flat TOML files of ``key = value`` pairs.

Example::

    num = [0.0, 1.0, -1.1]
    den = [1.0, 0.2, -0.0125]
    law = "modified"
    alpha = 0.45
    n = 200

Array values must share one type, so write ``[0.0, 1.0, -1.1]`` rather than
``[0, 1, -1.1]``. Every problem is reported as a :class:`ConfigError`
pointing at the offending line.
"""

import dataclasses
import logging
import re
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import toml

from sbt_ilc.analysis import DEFAULT_GRID
from sbt_ilc.errors import ConfigError
from sbt_ilc.factorization import DEFAULT_CIRCLE_TOL, DEFAULT_FACTOR_GRID
from sbt_ilc.laws import Arimoto, ModifiedRepetitive, PDType, Prototype
from sbt_ilc.lti import RationalPlant, ZeroPhaseFilter

logger = logging.getLogger(__name__)

LAWS = ("arimoto", "pd", "prototype", "modified")
REFERENCES = ("random", "step")
DEFAULT_SWEEP = (3, 5, 10, 20, 50, 100, 200, 500)


@dataclass(frozen=True)
class Config:
    num: Tuple[float, ...]
    den: Tuple[float, ...] = (1.0,)
    d: Optional[int] = None
    truth_num: Optional[Tuple[float, ...]] = None
    truth_den: Optional[Tuple[float, ...]] = None
    truth_d: Optional[int] = None
    law: str = "modified"
    alpha: float = 1.0
    beta: float = 0.0
    q_u: Tuple[float, ...] = (1.0,)
    q_e: Tuple[float, ...] = (1.0,)
    q_u_lowpass: Optional[Tuple[float, float]] = None
    q_e_lowpass: Optional[Tuple[float, float]] = None
    dc_convention: str = "symmetric"
    normalize: bool = False
    padded: bool = True
    n: int = 100
    iterations: int = 50
    grid_size: int = DEFAULT_GRID
    factor_grid: int = DEFAULT_FACTOR_GRID
    circle_tol: float = DEFAULT_CIRCLE_TOL
    sweep: Tuple[int, ...] = DEFAULT_SWEEP
    reference: Union[str, Tuple[float, ...]] = "random"
    seed: int = 0
    extension: str = "zero"
    tolerance: Optional[float] = None
    threads: int = 1
    out: Optional[str] = None
    vectors_out: Optional[str] = None

    # ---------------------------------------------------------------- parsing

    @classmethod
    def loads(cls, text, path=None):
        try:
            raw = toml.loads(text)
        except toml.TomlDecodeError as e:
            raise ConfigError(e.msg, getattr(e, "lineno", None), path) from e

        values = {}
        names = {f.name for f in dataclasses.fields(cls)}
        for key, value in raw.items():
            line = _key_line(text, key)
            if key not in names:
                raise ConfigError("unknown key {!r}".format(key), line, path)
            try:
                values[key] = _PARSERS[key](value)
            except (TypeError, ValueError) as e:
                raise ConfigError("{}: {}".format(key, e), line, path) from None
        if "num" not in values:
            raise ConfigError("missing required key 'num'", None, path)

        config = cls(**values)
        config._check_objects(text, path)
        return config

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                text = f.read()
        except OSError as e:
            raise ConfigError("cannot read config: {}".format(e.strerror), None, str(path)) from e
        return cls.loads(text, str(path))

    def _check_objects(self, text, path):
        """Build every derived object once so errors surface at load time."""
        checks = [
            ("num", self.plant),
            ("truth_num", self.truth_plant),
            ("q_u_lowpass" if self.q_u_lowpass else "q_u", lambda: self.filters()[0]),
            ("q_e_lowpass" if self.q_e_lowpass else "q_e", lambda: self.filters()[1]),
            ("reference", self.reference_signal),
        ]
        for key, build in checks:
            try:
                build()
            except ValueError as e:
                raise ConfigError("{}: {}".format(key, e), _key_line(text, key), path) from None
        if self.law == "pd" and self.n < 2:
            logger.warning("PD law with n = 1 has no derivative term")

    # ---------------------------------------------------------- serializing

    def to_dict(self):
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name.endswith("_lowpass"):
                value = (float(value[0]), value[1])
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    def dumps(self):
        return toml.dumps(self.to_dict())

    # ------------------------------------------------------- derived objects

    def plant(self):
        return RationalPlant(self.num, self.den, self.d)

    def truth_plant(self):
        if self.truth_num is None:
            return None
        den = self.den if self.truth_den is None else self.truth_den
        return RationalPlant(self.truth_num, den, self.truth_d)

    def filters(self):
        """``(Q_u, Q_e)``; a lowpass design replaces the explicit coefficients."""
        result = []
        for coeffs, lowpass in ((self.q_u, self.q_u_lowpass), (self.q_e, self.q_e_lowpass)):
            if lowpass is not None:
                order, cutoff = lowpass
                result.append(ZeroPhaseFilter.lowpass(int(order), cutoff))
            else:
                result.append(ZeroPhaseFilter(coeffs, self.dc_convention))
        return tuple(result)

    def law_object(self):
        if self.law == "arimoto":
            return Arimoto(self.alpha, self.normalize)
        if self.law == "pd":
            return PDType(self.alpha, self.beta, self.normalize)
        if self.law == "prototype":
            return Prototype(self.alpha, self.padded, self.normalize)
        q_u, q_e = self.filters()
        return ModifiedRepetitive(self.alpha, q_u, q_e, self.padded, self.normalize)

    def reference_signal(self):
        if isinstance(self.reference, tuple):
            if len(self.reference) != self.n:
                raise ValueError("reference has {} samples, expected n = {}".format(
                    len(self.reference), self.n))
            return np.array(self.reference)
        if self.reference == "step":
            return np.ones(self.n)
        return np.random.default_rng(self.seed).standard_normal(self.n)


def _key_line(text, key):
    match = re.search(r"^[ \t]*{}[ \t]*=".format(re.escape(key)), text, re.MULTILINE)
    return text.count("\n", 0, match.start()) + 1 if match else None


# ----------------------------------------------------------------- value parsers

def _number(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError("expected a number, got {!r}".format(value))
    value = float(value)
    if not np.isfinite(value):
        raise ValueError("expected a finite number, got {}".format(value))
    return value


def _positive_number(value):
    value = _number(value)
    if value <= 0:
        raise ValueError("expected a positive number, got {}".format(value))
    return value


def _integer(minimum):
    def parse(value):
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError("expected an integer, got {!r}".format(value))
        if value < minimum:
            raise ValueError("expected an integer >= {}, got {}".format(minimum, value))
        return value
    return parse


def _boolean(value):
    if not isinstance(value, bool):
        raise TypeError("expected true or false, got {!r}".format(value))
    return value


def _choice(options):
    def parse(value):
        if value not in options:
            raise ValueError("expected one of {}, got {!r}".format(", ".join(options), value))
        return value
    return parse


def _string(value):
    if not isinstance(value, str):
        raise TypeError("expected a string, got {!r}".format(value))
    return value


def _numbers(value):
    if not isinstance(value, list) or not value:
        raise TypeError("expected a nonempty array of numbers, got {!r}".format(value))
    return tuple(_number(v) for v in value)


def _sizes(value):
    if not isinstance(value, list):
        raise TypeError("expected an array of integers, got {!r}".format(value))
    return tuple(_integer(1)(v) for v in value)


def _lowpass(value):
    if not isinstance(value, list) or len(value) != 2:
        raise TypeError("expected [order, cutoff], got {!r}".format(value))
    order = _number(value[0])
    if not order.is_integer() or order < 0:
        raise ValueError("filter order must be a nonnegative integer, got {}".format(value[0]))
    order = int(order)
    cutoff = _number(value[1])
    if not 0.0 < cutoff < 1.0:
        raise ValueError("cutoff must lie in (0, 1), got {}".format(cutoff))
    return (order, cutoff)


def _reference(value):
    if isinstance(value, str):
        return _choice(REFERENCES)(value)
    return _numbers(value)


_PARSERS = {
    "num": _numbers,
    "den": _numbers,
    "d": _integer(0),
    "truth_num": _numbers,
    "truth_den": _numbers,
    "truth_d": _integer(0),
    "law": _choice(LAWS),
    "alpha": _number,
    "beta": _number,
    "q_u": _numbers,
    "q_e": _numbers,
    "q_u_lowpass": _lowpass,
    "q_e_lowpass": _lowpass,
    "dc_convention": _choice(("symmetric", "literal")),
    "normalize": _boolean,
    "padded": _boolean,
    "n": _integer(1),
    "iterations": _integer(1),
    "grid_size": _integer(2),
    "factor_grid": _integer(2),
    "circle_tol": _positive_number,
    "sweep": _sizes,
    "reference": _reference,
    "seed": _integer(0),
    "extension": _choice(("zero", "edge")),
    "tolerance": _positive_number,
    "threads": _integer(0),
    "out": _string,
    "vectors_out": _string,
}
