"""Trial-by-trial simulation of a learning law against a (possibly different) true plant.

Each trial starts from rest. The control ``u_bar`` is padded, passed through
``G+^-1`` of the design model where the law asks for it, and applied to the
true plant; the output window starts at the design relative degree.
"""

import csv
import logging
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from sbt_ilc.eigen import general_spectral_radius
from sbt_ilc.errors import DimensionError
from sbt_ilc.factorization import DEFAULT_CIRCLE_TOL, factor_plant, stable_inverse_matrix
from sbt_ilc.laws import zpetc_feedforward
from sbt_ilc.lti import RationalPlant, lift_plant, markov_params, simulate_response

logger = logging.getLogger(__name__)

_NORM_ORDERS = (1, 2, np.inf)
_EXTENSIONS = ("zero", "edge")


def norm_label(p):
    return "inf" if p == np.inf else str(int(p))


def extend_reference(reference, padding, extension="zero"):
    """Reference over the extended trial: ``nu`` zero (or edge) samples on each side."""
    if extension == "zero":
        return padding.pad(reference)
    if extension == "edge":
        return np.pad(np.asarray(reference, dtype=np.float64), padding.nu, mode="edge")
    raise ValueError("extension must be one of {}, got {!r}".format(_EXTENSIONS, extension))


@dataclass(frozen=True, eq=False)
class Scenario:
    """One simulated learning experiment.

    ``tolerance`` is the absolute 2-norm of ``F e`` below which the run counts
    as converged; by default ``1e-9 ||F r||``. The run is flagged diverged
    once ``||F e_k|| > divergence_factor * ||F e_0||``.
    """

    design_plant: RationalPlant
    law: object
    reference: np.ndarray
    iterations: int
    true_plant: Optional[RationalPlant] = None
    initial_control: Optional[np.ndarray] = None
    norms: tuple = _NORM_ORDERS
    tolerance: Optional[float] = None
    divergence_factor: float = 1e6
    stop_on_convergence: bool = True
    extension: str = "zero"
    circle_tol: float = DEFAULT_CIRCLE_TOL

    def __post_init__(self):
        ref = np.array(self.reference, dtype=np.float64)
        if ref.ndim != 1 or ref.size == 0:
            raise DimensionError("reference must be a nonempty vector")
        if not np.all(np.isfinite(ref)):
            raise ValueError("reference contains non-finite values")
        ref.setflags(write=False)
        object.__setattr__(self, "reference", ref)
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1, got {}".format(self.iterations))
        if self.initial_control is not None:
            u0 = np.array(self.initial_control, dtype=np.float64)
            if u0.shape != ref.shape:
                raise DimensionError("initial control has shape {}, expected {}".format(
                    u0.shape, ref.shape))
            object.__setattr__(self, "initial_control", u0)
        norms = tuple(float(p) for p in self.norms)
        if not norms or any(p not in _NORM_ORDERS for p in norms):
            raise ValueError("norms must be drawn from 1, 2 and inf, got {}".format(self.norms))
        object.__setattr__(self, "norms", norms)
        if self.extension not in _EXTENSIONS:
            raise ValueError("extension must be one of {}, got {!r}".format(_EXTENSIONS, self.extension))

    @property
    def truth(self):
        return self.design_plant if self.true_plant is None else self.true_plant

    @property
    def n(self):
        return self.reference.size


@dataclass(eq=False)
class IterationTrace:
    norm_orders: tuple = _NORM_ORDERS
    controls: list = field(default_factory=list)
    inputs: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    filtered_errors: list = field(default_factory=list)
    peak_errors: list = field(default_factory=list)
    norms: dict = field(default_factory=dict)
    converged: bool = False
    diverged: bool = False
    converged_at: Optional[int] = None

    def __post_init__(self):
        for p in self.norm_orders:
            self.norms.setdefault(p, [])

    def __len__(self):
        return len(self.errors)

    def record(self, u_bar, u, e, fe):
        self.controls.append(u_bar.copy())
        self.inputs.append(u)
        self.errors.append(e)
        self.filtered_errors.append(fe)
        self.peak_errors.append(float(np.max(np.abs(e))))
        for p in self.norm_orders:
            self.norms[p].append(float(np.linalg.norm(fe, p)))

    def norm_sequence(self, p):
        return np.array(self.norms[float(p)])

    def to_csv(self, file):
        """Write ``k, norm_<p>..., peak_error`` rows to a path or an open text file."""
        ctx = open(file, "w", newline="") if isinstance(file, (str, bytes)) or hasattr(
            file, "__fspath__") else nullcontext(file)
        with ctx as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["k"] + ["norm_" + norm_label(p) for p in self.norm_orders] + ["peak_error"])
            for k in range(len(self)):
                values = [self.norms[p][k] for p in self.norm_orders] + [self.peak_errors[k]]
                writer.writerow([k] + ["{:.12g}".format(v) for v in values])

    def save_vectors(self, path):
        """Write every recorded vector as one CSV column, short columns left blank."""
        columns = {}
        for k in range(len(self)):
            columns["control_{}".format(k)] = self.controls[k]
            columns["input_{}".format(k)] = self.inputs[k]
            columns["error_{}".format(k)] = self.errors[k]
            columns["filtered_error_{}".format(k)] = self.filtered_errors[k]
        length = max((v.size for v in columns.values()), default=0)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(list(columns))
            for t in range(length):
                writer.writerow(["{:.12g}".format(v[t]) if t < v.size else "" for v in columns.values()])


def _needs_factorization(law):
    return law.needs_factorization or getattr(law, "normalize", False)


def run(s):
    """Simulate ``s.iterations`` trials and return the :class:`IterationTrace`."""
    fp = factor_plant(s.design_plant, s.circle_tol) if _needs_factorization(s.law) else None
    ops = s.law.operators(fp, s.n)
    r_ext = extend_reference(s.reference, ops.padding, s.extension)
    start = s.design_plant.d
    truth = s.truth

    u_bar = np.zeros(s.n) if s.initial_control is None else s.initial_control.copy()
    tolerance = s.tolerance
    if tolerance is None:
        tolerance = 1e-9 * float(np.linalg.norm(ops.gain @ r_ext))
    trace = IterationTrace(s.norms)
    baseline = None

    for k in range(s.iterations):
        u = ops.to_input(u_bar)
        e = r_ext - simulate_response(truth, u, start)
        fe = ops.gain @ e
        if not all(np.all(np.isfinite(v)) for v in (u_bar, u, e, fe)):
            trace.diverged = True
            logger.warning("non-finite values at iteration %d; trace truncated", k)
            break
        trace.record(u_bar, u, e, fe)

        size = float(np.linalg.norm(fe))
        if baseline is None:
            baseline = size
        elif baseline > 0 and size > s.divergence_factor * baseline:
            trace.diverged = True
            logger.info("diverged at iteration %d: ||F e|| = %.3g", k, size)
            break
        if size <= tolerance and not trace.converged:
            trace.converged = True
            trace.converged_at = k
            logger.info("converged at iteration %d: ||F e|| = %.3g", k, size)
            if s.stop_on_convergence:
                break
        u_bar = ops.update(u_bar, e)
    return trace


def _dense(op):
    return op.todense() if hasattr(op, "todense") else np.asarray(op, dtype=np.float64)


def true_transition(fp, truth, law, n, start=None):
    """Control transition ``Q_u - F G_true G+^-1 N`` when the truth differs from the model.

    Generally nonsymmetric. ``start`` is the first observed output sample,
    ``fp.d`` by default; it is required when ``fp`` is None.
    """
    if start is None:
        if fp is None:
            raise ValueError("start is required without a factored design plant")
        start = fp.d
    ops = law.operators(fp, n)
    m = ops.m
    g_true = lift_plant(markov_params(truth, m, start)).todense()
    inverse = np.eye(m) if ops.gplus is None else stable_inverse_matrix(ops.gplus, m)
    return _dense(ops.q_u) - _dense(ops.gain) @ g_true @ inverse @ ops.padding.todense()


@dataclass(eq=False)
class MismatchReport:
    zpetc_peak: float
    zpetc_peak_nominal: float
    ilc_peaks: np.ndarray
    first_better: Optional[int]
    true_radius: float
    trace: IterationTrace


def mismatch_study(design, truth, law, reference, iterations, **options):
    """One-shot ZPETC against learning, both applied to ``truth``.

    ``options`` are passed on to :class:`Scenario`. ``first_better`` is the
    first learned trial (``k >= 1``) whose peak error is strictly below the
    ZPETC peak.
    """
    design.check_stable()
    truth.check_stable()
    options.setdefault("stop_on_convergence", False)
    s = Scenario(design, law, reference, iterations, true_plant=truth, **options)
    trace = run(s)

    fp = factor_plant(design, s.circle_tol)
    ops = law.operators(fp, s.n)
    r_ext = extend_reference(s.reference, ops.padding, s.extension)
    u_zpetc = zpetc_feedforward(fp, r_ext, 1.0, padded=ops.padding.nu > 0)

    def peak(plant):
        return float(np.max(np.abs(r_ext - simulate_response(plant, u_zpetc, design.d))))

    zpetc_peak = peak(truth)
    peaks = np.array(trace.peak_errors)
    # Trial 0 runs the initial control, before any learning
    better = np.flatnonzero(peaks[1:] < zpetc_peak) + 1
    report = MismatchReport(
        zpetc_peak=zpetc_peak,
        zpetc_peak_nominal=peak(design),
        ilc_peaks=peaks,
        first_better=int(better[0]) if better.size else None,
        true_radius=general_spectral_radius(true_transition(fp, truth, law, s.n)),
        trace=trace,
    )
    logger.info("mismatch study: zpetc peak %.6g, first better trial %s, true radius %.6g",
                report.zpetc_peak, report.first_better, report.true_radius)
    return report
