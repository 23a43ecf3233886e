"""Split a stable plant as ``G = z^-d G+ G-``.

``G+`` is minimum phase and biproper, so it has a stable causal inverse.
``G-`` is the all-zero factor holding every numerator root on or outside the
unit circle. It is normalized monic (``g_0 = 1``) and ``G+`` carries the
overall gain.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.signal

from sbt_ilc.errors import FactorizationError
from sbt_ilc.lti import BandedCausalMatrix, RationalPlant, _frozen_array, polynomial_roots

logger = logging.getLogger(__name__)

DEFAULT_CIRCLE_TOL = 1e-9
DEFAULT_FACTOR_GRID = 4096

# Conjugate-pair matching tolerance, relative to the root modulus.
_PAIRING_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FactoredPlant:
    gplus: RationalPlant
    gminus: np.ndarray
    d: int
    b: float

    def __post_init__(self):
        g = _frozen_array(self.gminus, "gminus")
        if g[0] == 0.0:
            raise ValueError("gminus[0] must be nonzero")
        if not self.b > 0.0:
            raise ValueError("normalization constant must be positive, got {}".format(self.b))
        object.__setattr__(self, "gminus", g)
        object.__setattr__(self, "b", float(self.b))

    def __repr__(self):
        return "FactoredPlant(nu={}, gminus={}, d={}, b={:.6g})".format(
            self.nu, self.gminus.tolist(), self.d, self.b)

    @property
    def nu(self):
        """Number of non-invertible zeros."""
        return self.gminus.size - 1

    @classmethod
    def from_gminus(cls, g, d=1, grid_size=DEFAULT_FACTOR_GRID):
        """A bare non-invertible factor with unity ``G+``."""
        g = _frozen_array(g, "gminus")
        unity = RationalPlant([1.0], [1.0], d=0)
        return cls(unity, g, d, normalization_constant(g, grid_size))

    def recombine(self):
        """The plant ``z^-d G+ G-`` as a single rational transfer function."""
        num = np.concatenate([np.zeros(self.d), np.convolve(self.gplus.num, self.gminus)])
        return RationalPlant(num, self.gplus.den, d=self.d)

    def gminus_matrix(self, n_rows, n_cols=None):
        return BandedCausalMatrix(self.gminus, n_rows, n_rows if n_cols is None else n_cols)


def _expand_real(roots):
    """Monic ``prod (1 - z_i z^-1)`` with conjugate roots combined in real arithmetic."""
    poly = np.array([1.0])
    upper, lower = [], []
    for z in roots:
        tol = _PAIRING_TOL * max(1.0, abs(z))
        if abs(z.imag) <= tol:
            poly = np.convolve(poly, [1.0, -z.real])
        elif z.imag > 0:
            upper.append(z)
        else:
            lower.append(z)
    for z in upper:
        if not lower:
            raise FactorizationError("complex root {:.6g} has no conjugate partner".format(z))
        dist = [abs(np.conj(z) - w) for w in lower]
        best = int(np.argmin(dist))
        if dist[best] > _PAIRING_TOL * max(1.0, abs(z)):
            raise FactorizationError("complex root {:.6g} has no conjugate partner".format(z))
        partner = lower.pop(best)
        mid = 0.5 * (z + np.conj(partner))
        poly = np.convolve(poly, [1.0, -2.0 * mid.real, abs(mid) ** 2])
    if lower:
        raise FactorizationError("complex root {:.6g} has no conjugate partner".format(lower[0]))
    return poly


def factor_plant(plant, circle_tol=DEFAULT_CIRCLE_TOL, grid_size=DEFAULT_FACTOR_GRID):
    """Split ``plant`` into invertible and non-invertible parts.

    Numerator roots with modulus ``>= 1 - circle_tol`` go to ``G-``.

    Raises:
        UnstablePlantError: if a pole lies on or outside the unit circle.
        FactorizationError: if the numerator vanishes, root finding fails or
            complex roots cannot be paired.
    """
    plant.check_stable()
    core = np.trim_zeros(plant.num[plant.d:], "b")
    if core.size == 0:
        raise FactorizationError("numerator is identically zero")
    if core[0] == 0.0:
        raise FactorizationError(
            "relative degree {} is below the numerator delay; h_d would vanish".format(plant.d))
    try:
        roots = polynomial_roots(core)
    except np.linalg.LinAlgError as e:
        raise FactorizationError("numerator root finding did not converge") from e

    outside = np.abs(roots) >= 1.0 - circle_tol
    gminus = _expand_real(roots[outside])
    stable_num = core[0] * _expand_real(roots[~outside])
    gplus = RationalPlant(stable_num, plant.den, d=0)
    b = normalization_constant(gminus, grid_size)
    logger.debug("factored plant: nu=%d gminus=%s b=%.6g", gminus.size - 1, gminus.tolist(), b)
    return FactoredPlant(gplus, gminus, plant.d, b)


def mirror(gminus):
    """Causal coefficients of ``z^-nu G-(z)``: the reversed list."""
    g = np.asarray(gminus, dtype=np.float64)
    if g.size == 0:
        raise ValueError("gminus is empty")
    return g[::-1].copy()


def anticausal_apply(gminus, x):
    """``G-^T x`` for the square lifted ``G-`` of size ``len(x)``.

    Filtering through the mirrored factor and advancing by ``nu`` samples.
    """
    g = np.asarray(gminus, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be one-dimensional")
    nu = g.size - 1
    return np.convolve(x, mirror(g))[nu:nu + x.size]


def stable_inverse_apply(gplus, x):
    """``G+^-1 x`` by running the swapped difference equation from rest."""
    if gplus.num[0] == 0.0:
        raise FactorizationError("G+ numerator has a leading zero; its inverse is not causal")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be one-dimensional")
    return scipy.signal.lfilter(gplus.den, gplus.num, x)


def stable_inverse_matrix(gplus, n):
    """Lifted ``G+^-1`` as a dense lower-triangular matrix."""
    return np.column_stack([stable_inverse_apply(gplus, col) for col in np.eye(n)])


def normalization_constant(gminus, grid_size=DEFAULT_FACTOR_GRID, refine=False):
    """``max |G-(e^-jw)|^2`` over a uniform grid on ``[0, pi]``.

    With ``refine`` the best grid point is polished by a bounded scalar
    maximization over its two neighbouring cells.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2, got {}".format(grid_size))
    g = np.asarray(gminus, dtype=np.float64)
    omega = np.linspace(0.0, np.pi, grid_size)
    power = np.abs(scipy.signal.freqz(g, worN=omega)[1]) ** 2
    best = int(np.argmax(power))
    value = float(power[best])
    if refine:
        step = np.pi / (grid_size - 1)
        bounds = (max(0.0, omega[best] - step), min(np.pi, omega[best] + step))

        def negative_power(w):
            return -abs(scipy.signal.freqz(g, worN=[w])[1][0]) ** 2

        res = scipy.optimize.minimize_scalar(
            negative_power, bounds=bounds, method="bounded", options=dict(xatol=1e-12))
        value = max(value, float(-res.fun))
    return value
