"""Discrete-time SISO plants and their lifted-domain operators.

Polynomials are coefficient arrays in ascending powers of the unit delay
``z^-1``: ``num = [n_0, n_1, ...]`` stands for ``n_0 + n_1 z^-1 + ...``.

A trial of length ``n`` turns a plant into the lower-triangular Toeplitz
matrix of its Markov parameters ``h_d .. h_{n+d-1}``, a causal all-zero
factor into a lower banded Toeplitz matrix, and a zero-phase filter into a
symmetric banded Toeplitz (SBT) matrix. The banded types here store only
their band and multiply in ``O(n * band)``; :meth:`todense` exists for
checking against plain matrix products.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg
import scipy.signal

from sbt_ilc.errors import DimensionError, UnstablePlantError

logger = logging.getLogger(__name__)

# Relative tolerance of the unit DC gain condition of zero-phase filters.
DC_GAIN_TOL = 1e-9


def _frozen_array(values, name):
    arr = np.array(values, dtype=np.float64, ndmin=1)
    if arr.ndim != 1:
        raise ValueError("{} must be one-dimensional, got shape {}".format(name, arr.shape))
    if arr.size == 0:
        raise ValueError("{} is empty".format(name))
    if not np.all(np.isfinite(arr)):
        raise ValueError("{} contains non-finite values".format(name))
    arr.setflags(write=False)
    return arr


def _as_vector(x, length, what="vector"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError("{} must be one-dimensional, got shape {}".format(what, x.shape))
    if x.shape[0] != length:
        raise DimensionError("{} has length {}, expected {}".format(what, x.shape[0], length))
    return x


def _check_size(n, name="n"):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError("{} must be an integer, got {!r}".format(name, n))
    if n < 1:
        raise ValueError("{} must be positive, got {}".format(name, n))
    return int(n)


def _leading_zeros(coeffs):
    nonzero = np.flatnonzero(coeffs)
    return int(nonzero[0]) if nonzero.size else len(coeffs)


def _window(full, start, length):
    """Return ``full[start:start+length]``, zero-filled past the end."""
    out = np.zeros(length)
    chunk = full[start:start + length]
    out[:chunk.size] = chunk
    return out


def polynomial_roots(coeffs):
    """Roots in ``z`` of ``c_0 + c_1 z^-1 + ... + c_m z^-m``.

    Computed as eigenvalues of the companion matrix. Trailing zero
    coefficients contribute roots at the origin.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=np.float64), "f")
    if c.size == 0:
        raise ValueError("the zero polynomial has no well-defined roots")
    trimmed = np.trim_zeros(c, "b")
    at_origin = np.zeros(c.size - trimmed.size, dtype=complex)
    if trimmed.size < 2:
        return at_origin
    roots = np.linalg.eigvals(scipy.linalg.companion(trimmed))
    return np.concatenate([roots.astype(complex), at_origin])


def cosine_series(coeffs, theta):
    """Evaluate ``c_0 + 2 * sum_k c_k cos(k theta)`` (scalar or array theta)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    k = np.arange(1, coeffs.size)
    result = coeffs[0] + 2.0 * np.cos(np.multiply.outer(theta, k)) @ coeffs[1:]
    return result if result.ndim else float(result)


# =============================================================================
# Plants
# =============================================================================

@dataclass(frozen=True, eq=False)
class RationalPlant:
    """Rational transfer function ``num(z^-1) / den(z^-1)``.

    ``d`` is the relative degree. When omitted it is the number of leading
    zeros of ``num``; an explicit value may be smaller (the first Markov
    parameters are then zero) but never larger.
    """

    num: np.ndarray
    den: np.ndarray
    d: Optional[int] = None

    def __post_init__(self):
        num = _frozen_array(self.num, "num")
        den = _frozen_array(self.den, "den")
        if den[0] == 0.0:
            raise ValueError("den[0] must be nonzero for a causal recursion")
        lead = _leading_zeros(num)
        if self.d is None:
            d = lead
        else:
            if isinstance(self.d, bool) or not isinstance(self.d, (int, np.integer)):
                raise TypeError("d must be an integer, got {!r}".format(self.d))
            d = int(self.d)
            if d < 0:
                raise ValueError("relative degree must be nonnegative, got {}".format(d))
            if lead < num.size and d > lead:
                raise ValueError(
                    "relative degree {} skips nonzero numerator coefficient num[{}]".format(d, lead))
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "d", d)

    def __repr__(self):
        return "RationalPlant(num={}, den={}, d={})".format(
            self.num.tolist(), self.den.tolist(), self.d)

    @property
    def poles(self):
        """Denominator roots in ``z``."""
        return polynomial_roots(self.den)

    @property
    def zeros(self):
        """Numerator roots in ``z`` (delays excluded)."""
        return polynomial_roots(self.num[self.d:])

    @property
    def is_stable(self):
        poles = self.poles
        return bool(poles.size == 0 or np.max(np.abs(poles)) < 1.0)

    def check_stable(self):
        """Raise :class:`UnstablePlantError` naming the largest unstable pole."""
        poles = self.poles
        if poles.size:
            worst = poles[np.argmax(np.abs(poles))]
            if abs(worst) >= 1.0:
                raise UnstablePlantError(worst)
        return self

    def frequency_response(self, omega):
        """Complex response at ``z = exp(j omega)``."""
        omega = np.atleast_1d(np.asarray(omega, dtype=np.float64))
        return scipy.signal.freqz(self.num, self.den, worN=omega)[1]


@dataclass(frozen=True, eq=False)
class MarkovSequence:
    """Impulse response samples ``h_d .. h_{n+d-1}`` of a plant."""

    h: np.ndarray
    d: int
    n: int

    def __post_init__(self):
        h = _frozen_array(self.h, "h")
        if h.size != self.n:
            raise DimensionError("expected {} Markov parameters, got {}".format(self.n, h.size))
        object.__setattr__(self, "h", h)

    def __len__(self):
        return self.n

    def __getitem__(self, index):
        return self.h[index]


def markov_params(plant, n, start=None):
    """Markov parameters ``h_start .. h_{start+n-1}`` by impulse-response recursion.

    ``start`` defaults to the plant's relative degree.
    """
    n = _check_size(n)
    start = plant.d if start is None else int(start)
    if start < 0:
        raise ValueError("start must be nonnegative, got {}".format(start))
    impulse = np.zeros(n + start)
    impulse[0] = 1.0
    h = scipy.signal.lfilter(plant.num, plant.den, impulse)[start:]
    return MarkovSequence(h, start, n)


def simulate_response(plant, u, start=None):
    """Time-domain output window ``y(start) .. y(start+len(u)-1)``.

    The plant starts at rest and its input is zero after the trial.
    ``start`` defaults to the plant's relative degree.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1:
        raise DimensionError("input must be one-dimensional, got shape {}".format(u.shape))
    start = plant.d if start is None else int(start)
    extended = np.concatenate([u, np.zeros(start)])
    return scipy.signal.lfilter(plant.num, plant.den, extended)[start:]


# =============================================================================
# Lifted matrices
# =============================================================================

class _LiftedOperator:
    """Shared ``@`` support: vectors go through ``matvec``, matrices are dense."""

    def __matmul__(self, other):
        other = np.asarray(other, dtype=np.float64)
        if other.ndim == 1:
            return self.matvec(other)
        return self.todense() @ other

    def __rmatmul__(self, other):
        return np.asarray(other, dtype=np.float64) @ self.todense()


@dataclass(frozen=True, eq=False)
class LowerToeplitzMatrix(_LiftedOperator):
    """Lower-triangular Toeplitz matrix, ``entry(i, j) = first_col[i - j]``."""

    first_col: np.ndarray

    def __post_init__(self):
        col = _frozen_array(self.first_col, "first_col")
        object.__setattr__(self, "first_col", col)
        taps = np.trim_zeros(col, "b")
        object.__setattr__(self, "_taps", taps if taps.size else col[:1])

    @property
    def n(self):
        return self.first_col.size

    @property
    def shape(self):
        return (self.n, self.n)

    def entry(self, i, j):
        return float(self.first_col[i - j]) if i >= j else 0.0

    def matvec(self, x):
        x = _as_vector(x, self.n)
        return np.convolve(x, self._taps)[:self.n]

    def todense(self):
        return scipy.linalg.toeplitz(self.first_col, np.zeros(self.n))

    def solve(self, b):
        """Dense forward substitution against ``b``."""
        b = _as_vector(b, self.n)
        return scipy.linalg.solve_triangular(self.todense(), b, lower=True)


@dataclass(frozen=True, eq=False)
class BandedCausalMatrix(_LiftedOperator):
    """Lower banded Toeplitz matrix, ``entry(i, j) = g[i - j]`` for ``0 <= i-j <= nu``."""

    g: np.ndarray
    n_rows: int
    n_cols: int

    def __post_init__(self):
        object.__setattr__(self, "g", _frozen_array(self.g, "g"))
        object.__setattr__(self, "n_rows", _check_size(self.n_rows, "n_rows"))
        object.__setattr__(self, "n_cols", _check_size(self.n_cols, "n_cols"))

    @property
    def nu(self):
        return self.g.size - 1

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def entry(self, i, j):
        k = i - j
        return float(self.g[k]) if 0 <= k <= self.nu else 0.0

    def matvec(self, x):
        x = _as_vector(x, self.n_cols)
        return _window(np.convolve(x, self.g), 0, self.n_rows)

    def rmatvec(self, y):
        """Product with the transpose."""
        y = _as_vector(y, self.n_rows)
        return _window(np.convolve(y, self.g[::-1]), self.nu, self.n_cols)

    def todense(self):
        k = np.subtract.outer(np.arange(self.n_rows), np.arange(self.n_cols))
        inside = (k >= 0) & (k <= self.nu)
        return np.where(inside, self.g[np.clip(k, 0, self.nu)], 0.0)


@dataclass(frozen=True, eq=False)
class SBTMatrix(_LiftedOperator):
    """Symmetric banded Toeplitz matrix, ``entry(i, j) = band[|i - j|]``."""

    band: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "band", _frozen_array(self.band, "band"))
        object.__setattr__(self, "n", _check_size(self.n))

    def __repr__(self):
        return "SBTMatrix(band={}, n={})".format(self.band.tolist(), self.n)

    @property
    def r(self):
        return self.band.size - 1

    @property
    def shape(self):
        return (self.n, self.n)

    def entry(self, i, j):
        k = abs(i - j)
        return float(self.band[k]) if k <= self.r else 0.0

    def matvec(self, x):
        x = _as_vector(x, self.n)
        kernel = np.concatenate([self.band[:0:-1], self.band])
        return np.convolve(x, kernel)[self.r:self.r + self.n]

    def todense(self):
        k = np.abs(np.subtract.outer(np.arange(self.n), np.arange(self.n)))
        return np.where(k <= self.r, self.band[np.clip(k, 0, self.r)], 0.0)

    def banded_lower(self):
        """Lower band storage as used by LAPACK (``ab[k, j] = A[j + k, j]``)."""
        bw = min(self.r, self.n - 1)
        ab = np.zeros((bw + 1, self.n))
        for k in range(bw + 1):
            ab[k, :self.n - k] = self.band[k]
        return ab

    def banded_full(self):
        """Both bands in the ``(l, u) = (r, r)`` layout of ``solve_banded``."""
        bw = min(self.r, self.n - 1)
        ab = np.zeros((2 * bw + 1, self.n))
        for k in range(bw + 1):
            ab[bw - k, k:] = self.band[k]
            ab[bw + k, :self.n - k] = self.band[k]
        return ab

    def circulant(self):
        """Dense circulant embedding: the band wrapped around the corners."""
        if self.n < 2 * self.r + 1:
            raise ValueError("circulant embedding needs n >= 2r+1 = {}, got n = {}".format(
                2 * self.r + 1, self.n))
        first = np.zeros(self.n)
        first[0] = self.band[0]
        for k in range(1, self.r + 1):
            first[k] = first[self.n - k] = self.band[k]
        return scipy.linalg.circulant(first)


LiftedBanded = Union[BandedCausalMatrix, SBTMatrix]


def lift_plant(h):
    """Lower-triangular Toeplitz matrix ``G`` with ``y = G u`` over one trial."""
    return LowerToeplitzMatrix(h.h)


def banded_matvec(m, x):
    """Exact product of a banded lifted matrix with ``x`` without forming zeros."""
    if not isinstance(m, (BandedCausalMatrix, SBTMatrix)):
        raise TypeError("expected BandedCausalMatrix or SBTMatrix, got {}".format(type(m).__name__))
    return m.matvec(x)


# =============================================================================
# Zero-phase filters
# =============================================================================

@dataclass(frozen=True, eq=False)
class ZeroPhaseFilter:
    """Symmetric noncausal FIR ``q_0 + sum_i q_i (z^i + z^-i)`` with unit DC gain.

    With ``dc_convention="symmetric"`` the gain condition is
    ``q_0 + 2 * sum_{i>=1} q_i = 1``, the true response at DC. The
    ``"literal"`` convention checks ``sum_{i>=0} q_i = 1`` instead.
    """

    q: np.ndarray
    dc_convention: str = "symmetric"

    def __post_init__(self):
        q = _frozen_array(self.q, "q")
        if self.dc_convention == "symmetric":
            gain = q[0] + 2.0 * q[1:].sum()
        elif self.dc_convention == "literal":
            gain = q.sum()
        else:
            raise ValueError("dc_convention must be 'symmetric' or 'literal', got {!r}".format(
                self.dc_convention))
        if abs(gain - 1.0) > DC_GAIN_TOL * max(1.0, float(np.abs(q).sum())):
            raise ValueError("zero-phase filter DC gain is {:.12g}, expected 1 ({} convention)".format(
                gain, self.dc_convention))
        object.__setattr__(self, "q", q)

    def __repr__(self):
        return "ZeroPhaseFilter(q={})".format(self.q.tolist())

    @property
    def nq(self):
        return self.q.size - 1

    @classmethod
    def identity(cls):
        return cls([1.0])

    @classmethod
    def lowpass(cls, nq, cutoff):
        """Windowed-sinc lowpass of half-order ``nq``.

        ``cutoff`` is relative to the Nyquist frequency, in (0, 1).
        """
        if nq < 0:
            raise ValueError("nq must be nonnegative, got {}".format(nq))
        if nq == 0:
            return cls.identity()
        taps = scipy.signal.firwin(2 * nq + 1, cutoff)
        q = taps[nq:]
        return cls(q / (q[0] + 2.0 * q[1:].sum()))

    def response(self, theta):
        """Real (phase-free) frequency response."""
        return cosine_series(self.q, theta)

    def matrix(self, n):
        return filter_matrix(self, n)

    def apply(self, x):
        """Noncausal filtering of a finite record, zero outside the record."""
        x = np.asarray(x, dtype=np.float64)
        return filter_matrix(self, x.size) @ x


def filter_matrix(q, n):
    """``n x n`` SBT matrix ``Q_ij = q_|i-j|`` of a zero-phase filter."""
    return SBTMatrix(q.q, _check_size(n))
