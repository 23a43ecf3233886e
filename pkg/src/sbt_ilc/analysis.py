"""Convergence certificates for transition matrices.

A symmetric banded Toeplitz matrix with band ``a_0 .. a_r`` has the real
symbol ``a_0 + 2 sum_k a_k cos(k theta)``. Its spectral radius is strictly
below the sup of the symbol's magnitude (unless the band is constant), the
circulant embedding has the symbol sampled on the DFT grid as eigenvalues,
and ``|a_0| + 2 sum |a_k| < 1`` makes the filtered error shrink
monotonically.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
import scipy.fft
import scipy.optimize
import toml

from sbt_ilc import eigen
from sbt_ilc.errors import AsymmetryError, StructureError
from sbt_ilc.laws import TransitionMatrix, band_coefficients, build_transition, effective_alpha
from sbt_ilc.lti import SBTMatrix, cosine_series

logger = logging.getLogger(__name__)

DEFAULT_GRID = 2048
_METHODS = {
    "lapack": eigen.spectral_radius_lapack,
    "bisection": eigen.spectral_radius_bisection,
}


def symbol_value(band, theta):
    """``a_0 + 2 sum_k a_k cos(k theta)``."""
    return cosine_series(band, theta)


@dataclass(frozen=True)
class HinfResult:
    """Grid sup of ``|symbol|``.

    ``slack`` bounds how far the continuous sup can exceed the grid sup, so
    ``certified`` holds for the continuous condition. Unpacks as
    ``(sup, stable)``.
    """

    sup: float
    argmax: float
    slack: float
    grid_size: int

    @property
    def stable(self):
        return self.sup < 1.0

    @property
    def certified(self):
        return self.sup + self.slack < 1.0

    def __iter__(self):
        return iter((self.sup, self.stable))


def hinf_check(band, grid_size=DEFAULT_GRID, refine=False):
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2, got {}".format(grid_size))
    band = np.asarray(band, dtype=np.float64)
    theta = np.linspace(0.0, np.pi, grid_size)
    magnitude = np.abs(cosine_series(band, theta))
    best = int(np.argmax(magnitude))
    sup, argmax = float(magnitude[best]), float(theta[best])
    # Half a grid cell times the derivative bound 2 sum k |a_k|.
    slack = float(np.pi * np.sum(np.arange(band.size) * np.abs(band)) / (grid_size - 1))

    if refine and band.size > 1:
        step = np.pi / (grid_size - 1)
        res = scipy.optimize.minimize_scalar(
            lambda t: -abs(cosine_series(band, t)),
            bounds=(max(0.0, argmax - step), min(np.pi, argmax + step)),
            method="bounded", options=dict(xatol=1e-12))
        if -res.fun > sup:
            sup, argmax = float(-res.fun), float(res.x)
    logger.debug("symbol sup %.12g at theta=%.6g (slack %.3g)", sup, argmax, slack)
    return HinfResult(sup, argmax, slack, grid_size)


def circulant_eigenvalues(band, n):
    """Eigenvalues of the circulant embedding, as the DFT of its first row.

    Entry ``m`` belongs to frequency ``2 pi m / n``.
    """
    band = np.asarray(band, dtype=np.float64)
    r = band.size - 1
    if n < 2 * r + 1:
        raise ValueError("circulant embedding needs n >= 2r+1 = {}, got n = {}".format(2 * r + 1, n))
    first = np.zeros(n)
    first[0] = band[0]
    first[1:r + 1] = band[1:]
    if r:
        first[-r:] = band[:0:-1]
    return scipy.fft.fft(first).real


def tridiagonal_eigenvalues(a0, a1, n):
    """Closed-form eigenvalues ``a0 + 2 a1 cos(m pi / (n+1))``, ``m = 1..n``."""
    if n < 1:
        raise ValueError("n must be positive, got {}".format(n))
    m = np.arange(1, n + 1)
    return a0 + 2.0 * a1 * np.cos(m * np.pi / (n + 1))


def spectral_radius(matrix, method="lapack"):
    """Largest eigenvalue modulus of a symmetric matrix.

    Accepts :class:`TransitionMatrix`, :class:`SBTMatrix` or a dense array.
    Dense input must be symmetric to ``1e-12`` relative.
    """
    try:
        solver = _METHODS[method]
    except KeyError:
        raise ValueError("method must be one of {}, got {!r}".format(sorted(_METHODS), method))
    if isinstance(matrix, TransitionMatrix):
        matrix = matrix.matrix
    if not isinstance(matrix, SBTMatrix):
        matrix = eigen.check_symmetric(matrix)
    return solver(matrix)


@dataclass(frozen=True)
class GrayBound:
    spectral_radius: float
    symbol_sup: float
    degenerate: bool

    @property
    def margin(self):
        return self.symbol_sup - self.spectral_radius

    @property
    def holds(self):
        if self.degenerate:
            return self.spectral_radius <= self.symbol_sup + 1e-12
        return self.spectral_radius < self.symbol_sup

    def __bool__(self):
        return self.holds


def gray_bound_check(band, n, grid_size=DEFAULT_GRID, method="lapack"):
    """Compare the spectral radius at size ``n`` with the symbol sup.

    A constant band has the two equal; that case is flagged ``degenerate``
    and only equality is expected.
    """
    band = np.asarray(band, dtype=np.float64)
    rho = spectral_radius(SBTMatrix(band, n), method)
    sup = hinf_check(band, grid_size, refine=True).sup
    degenerate = bool(band.size == 1 or not np.any(band[1:]))
    if degenerate:
        logger.warning("constant band %s: spectral radius equals the symbol sup", band.tolist())
    return GrayBound(rho, sup, degenerate)


@dataclass(frozen=True)
class MonotonicityResult:
    one_norm: float
    monotonic: bool

    def __iter__(self):
        return iter((self.one_norm, self.monotonic))


def monotonicity_check(band, grid_size=DEFAULT_GRID):
    band = np.asarray(band, dtype=np.float64)
    one_norm = float(abs(band[0]) + 2.0 * np.abs(band[1:]).sum())
    sup = hinf_check(band, grid_size).sup
    if sup > one_norm + 1e-12 * max(1.0, one_norm):
        raise StructureError("symbol sup {:.12g} exceeds the 1-norm {:.12g}".format(sup, one_norm))
    return MonotonicityResult(one_norm, one_norm < 1.0)


# =============================================================================
# Reports
# =============================================================================

@dataclass(frozen=True)
class StabilityReport:
    """Stability verdicts for one transition matrix.

    Symbol fields are None for transitions without banded Toeplitz structure.
    """

    law: str
    n: int
    spectral_radius: float
    one_norm: float
    true_stable: bool
    monotonic: bool
    grid_size: int
    symbol_sup: Optional[float] = None
    symbol_argmax: Optional[float] = None
    symbol_slack: Optional[float] = None
    circulant_radius: Optional[float] = None
    approx_stable: Optional[bool] = None
    certified: Optional[bool] = None

    CSV_FIELDS = (
        "law", "n", "spectral_radius", "symbol_sup", "symbol_argmax", "circulant_radius",
        "one_norm", "true_stable", "approx_stable", "monotonic", "grid_size",
    )

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_toml(self):
        return toml.dumps(self.to_dict())

    def csv_row(self):
        row = []
        for name in self.CSV_FIELDS:
            value = getattr(self, name)
            if value is None:
                row.append("")
            elif isinstance(value, float):
                row.append("{:.12g}".format(value))
            else:
                row.append(str(value).lower() if isinstance(value, bool) else str(value))
        return row


def analyze(transition, grid_size=DEFAULT_GRID, method="lapack"):
    """Build a :class:`StabilityReport` for a :class:`TransitionMatrix`."""
    if transition.is_sbt:
        band = transition.band
        rho = spectral_radius(transition, method)
        hinf = hinf_check(band, grid_size)
        mono = monotonicity_check(band, grid_size)
        circ = None
        if transition.n >= 2 * (band.size - 1) + 1:
            circ = float(np.max(np.abs(circulant_eigenvalues(band, transition.n))))
        return StabilityReport(
            law=transition.law, n=transition.n, spectral_radius=rho, one_norm=mono.one_norm,
            true_stable=rho < 1.0, monotonic=mono.monotonic, grid_size=grid_size,
            symbol_sup=hinf.sup, symbol_argmax=hinf.argmax, symbol_slack=hinf.slack,
            circulant_radius=circ, approx_stable=hinf.stable, certified=hinf.certified)

    dense = transition.todense()
    try:
        rho = spectral_radius(dense, method)
    except AsymmetryError:
        rho = eigen.general_spectral_radius(dense)
    one_norm = float(np.linalg.norm(dense, 1))
    return StabilityReport(
        law=transition.law, n=transition.n, spectral_radius=rho, one_norm=one_norm,
        true_stable=rho < 1.0, monotonic=one_norm < 1.0, grid_size=grid_size)


@dataclass(frozen=True)
class SweepRow:
    n: int
    rho_A1: float
    rho_A2: float
    hinf_sup: float

    CSV_FIELDS = ("n", "rho_A1", "rho_A2", "hinf_sup")

    def csv_row(self):
        return [str(self.n)] + ["{:.12g}".format(v) for v in (self.rho_A1, self.rho_A2, self.hinf_sup)]


def resolve_threads(threads):
    """Worker count: 0 means one per CPU."""
    if threads < 0:
        raise ValueError("threads must be nonnegative, got {}".format(threads))
    return threads or os.cpu_count() or 1


def zero_padding_sweep(fp, alpha, q_u, q_e, sizes, grid_size=DEFAULT_GRID, threads=1,
                       method="lapack", normalize=False):
    """Spectral radius with (A2) and without (A1) zero-padding, per trial length.

    Rows come back in the order of ``sizes``.
    """
    sizes = [int(n) for n in sizes]
    if not sizes:
        raise ValueError("sweep needs at least one trial length")
    alpha = effective_alpha(alpha, fp, normalize)
    sup = hinf_check(band_coefficients(fp, alpha, q_u, q_e), grid_size).sup

    def one(n):
        unpadded = build_transition(fp, alpha, q_u, q_e, n, padded=False)
        padded = build_transition(fp, alpha, q_u, q_e, n, padded=True)
        row = SweepRow(n, spectral_radius(unpadded, method), spectral_radius(padded, method), sup)
        logger.info("sweep n=%d: rho_A1=%.12g rho_A2=%.12g", n, row.rho_A1, row.rho_A2)
        return row

    workers = resolve_threads(threads)
    if workers == 1:
        return [one(n) for n in sizes]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, sizes))
