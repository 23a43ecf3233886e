"""Learning laws, their lifted operators and transition matrices.

Every law updates a control vector ``u_bar`` of trial length ``n`` as::

    u_bar[k+1] = Q_u @ u_bar[k] + F @ e[k]

where ``e[k]`` is the tracking error of trial ``k``. The modified
repetitive law works on extended signals of length ``n + 2 nu``: the control
is zero-padded by ``nu`` samples on each side (the padding map ``N``), passed
through ``G+^-1`` and applied to the plant, and the gain is
``F = alpha N^T G-^T Q_e``. With the padding the transition matrix
``A = Q_u - alpha N^T G-^T Q_e G- N`` is exactly symmetric banded Toeplitz,
with half-width ``max(nq_u, nq_e + nu)``; without it the corners differ.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import ClassVar, Optional, Union

import numpy as np
import scipy.linalg

from sbt_ilc.errors import DimensionError, StructureError
from sbt_ilc.factorization import anticausal_apply, factor_plant, stable_inverse_apply
from sbt_ilc.lti import (
    BandedCausalMatrix,
    LowerToeplitzMatrix,
    RationalPlant,
    SBTMatrix,
    ZeroPhaseFilter,
    _LiftedOperator,
    _as_vector,
    _check_size,
    cosine_series,
    filter_matrix,
    lift_plant,
    markov_params,
)

logger = logging.getLogger(__name__)

# Allowed disagreement between the closed-form band and the dense product,
# relative to the largest entry.
BAND_CHECK_TOL = 1e-12


def effective_alpha(alpha, fp=None, normalize=False):
    """The learning gain, divided by ``fp.b`` when ``normalize`` is set."""
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite, got {}".format(alpha))
    if normalize:
        if fp is None:
            raise ValueError("normalize=True needs a factored plant")
        return alpha / fp.b
    return alpha


def transition_bandwidth(nu, nq_u, nq_e):
    return max(nq_u, nq_e + nu)


# =============================================================================
# Padding and gain operators
# =============================================================================

@dataclass(frozen=True)
class PaddingMap:
    """The zero-padding map ``N``: ``nu`` zeros on both sides of an ``n``-vector."""

    nu: int
    n: int

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("pad width must be nonnegative, got {}".format(self.nu))
        object.__setattr__(self, "nu", int(self.nu))
        object.__setattr__(self, "n", _check_size(self.n))

    @property
    def size(self):
        """Extended length ``n + 2 nu``."""
        return self.n + 2 * self.nu

    @property
    def shape(self):
        return (self.size, self.n)

    def pad(self, x):
        x = _as_vector(x, self.n)
        return np.concatenate([np.zeros(self.nu), x, np.zeros(self.nu)])

    def unpad(self, y):
        """``N^T y``: the trial window of an extended signal."""
        y = _as_vector(y, self.size)
        return y[self.nu:self.nu + self.n].copy()

    def todense(self):
        return np.eye(self.size, self.n, k=-self.nu)


@dataclass(frozen=True, eq=False)
class LearningGain(_LiftedOperator):
    """``F = alpha N^T G-^T Q_e``, mapping extended errors to control updates."""

    gminus: np.ndarray
    alpha: float
    q_e: ZeroPhaseFilter
    padding: PaddingMap

    @property
    def shape(self):
        return (self.padding.n, self.padding.size)

    def matvec(self, e):
        m = self.padding.size
        e = _as_vector(e, m, "error")
        filtered = filter_matrix(self.q_e, m) @ e
        return self.alpha * self.padding.unpad(anticausal_apply(self.gminus, filtered))

    def todense(self):
        m = self.padding.size
        gm = BandedCausalMatrix(self.gminus, m, m).todense()
        qe = filter_matrix(self.q_e, m).todense()
        return self.alpha * self.padding.todense().T @ gm.T @ qe


def build_F(fp, alpha, q_e, n, padded=True, normalize=False):
    """Learning gain of the modified law for trials of length ``n``."""
    alpha = effective_alpha(alpha, fp, normalize)
    padding = PaddingMap(fp.nu if padded else 0, _check_size(n))
    return LearningGain(fp.gminus, alpha, q_e, padding)


@dataclass(frozen=True, eq=False)
class LearningOperators:
    """Everything the simulator needs to run a law for one trial length.

    ``q_u`` and ``gain`` accept ``@`` with vectors. ``gplus`` is the factor
    inverted before the control reaches the plant; None means no inversion.
    """

    q_u: object
    gain: object
    padding: PaddingMap
    gplus: Optional[RationalPlant] = None

    @property
    def n(self):
        return self.padding.n

    @property
    def m(self):
        return self.padding.size

    def to_input(self, u_bar):
        """Plant input over the extended trial for control ``u_bar``."""
        u = self.padding.pad(u_bar)
        return u if self.gplus is None else stable_inverse_apply(self.gplus, u)

    def update(self, u_bar, e):
        return self.q_u @ u_bar + self.gain @ e


# =============================================================================
# Transition matrices
# =============================================================================

@dataclass(frozen=True, eq=False)
class TransitionMatrix(_LiftedOperator):
    """Iteration-domain transition ``u_bar[k+1] = A u_bar[k] + F r``.

    ``matrix`` is an :class:`SBTMatrix` for the padded modified law and a
    dense array otherwise.
    """

    matrix: Union[SBTMatrix, np.ndarray]
    law: str
    n: int
    padded: bool = False

    def __post_init__(self):
        if not isinstance(self.matrix, SBTMatrix):
            dense = np.array(self.matrix, dtype=np.float64)
            if dense.shape != (self.n, self.n):
                raise DimensionError("transition matrix has shape {}, expected {}".format(
                    dense.shape, (self.n, self.n)))
            dense.setflags(write=False)
            object.__setattr__(self, "matrix", dense)

    @property
    def is_sbt(self):
        return isinstance(self.matrix, SBTMatrix)

    @property
    def band(self):
        return self.matrix.band if self.is_sbt else None

    @property
    def shape(self):
        return (self.n, self.n)

    def matvec(self, x):
        if self.is_sbt:
            return self.matrix.matvec(x)
        return self.matrix @ _as_vector(x, self.n)

    def todense(self):
        return self.matrix.todense() if self.is_sbt else np.array(self.matrix)


def arimoto_transition(h, alpha):
    """Error transition ``I - alpha G`` of the P-type law."""
    g = lift_plant(h).todense()
    return np.eye(g.shape[0]) - float(alpha) * g


def pd_transition(h, alpha, beta):
    """Error transition ``I - G T_e`` of the PD-type law ``alpha e(t) + beta e(t-1)``."""
    n = len(h)
    col = np.zeros(n)
    col[0] = alpha
    if n > 1:
        col[1] = beta
    g = lift_plant(h).todense()
    return np.eye(n) - g @ LowerToeplitzMatrix(col).todense()


def arimoto_converges(h, alpha):
    """Whether ``|1 - alpha h_d| < 1``, the P-type convergence condition."""
    return bool(abs(1.0 - alpha * h[0]) < 1.0)


def arimoto_monotonicity_bound(h, alpha):
    """``|1 - alpha h_d| + |alpha| sum |h_{d+i}|``; monotonic in the 1-norm below 1."""
    h = np.asarray(h.h if hasattr(h, "h") else h, dtype=np.float64)
    return float(abs(1.0 - alpha * h[0]) + abs(alpha) * np.abs(h[1:]).sum())


def _weighted_gram_band(g, qe):
    """Band of ``N^T G-^T Q_e G- N``, summed at an interior row.

    Row ``l = width + 1`` (1-based) keeps every index clamp inside the matrix,
    so the sums describe the Toeplitz band rather than a clipped edge row.
    """
    nu = g.size - 1
    nqe = qe.size - 1
    width = nqe + nu
    row = width + 1
    band = np.zeros(width + 1)
    for k in range(width + 1):
        col = row + k
        total = 0.0
        for i in range(max(row, col - nqe), min(row + nu, col + nu + nqe) + 1):
            inner = 0.0
            for j in range(max(i - nqe, col), min(i + nqe, col + nu) + 1):
                inner += qe[abs(i - j)] * g[j - col]
            total += g[i - row] * inner
        band[k] = total
    return band


def band_coefficients(fp, alpha, q_u, q_e, normalize=False):
    """Closed-form band ``a_0 .. a_r`` of the padded transition matrix."""
    alpha = effective_alpha(alpha, fp, normalize)
    nu, nq_u, nq_e = fp.nu, q_u.nq, q_e.nq
    r = transition_bandwidth(nu, nq_u, nq_e)
    gram = _weighted_gram_band(fp.gminus, q_e.q)
    band = np.zeros(r + 1)
    if nq_u > nq_e + nu:
        w = nq_e + nu
        band[:w + 1] = q_u.q[:w + 1] - alpha * gram
        band[w + 1:] = q_u.q[w + 1:]
    else:
        band[:nq_u + 1] = q_u.q - alpha * gram[:nq_u + 1]
        band[nq_u + 1:] = -alpha * gram[nq_u + 1:]
    logger.debug("transition band r=%d: %s", r, band.tolist())
    return band


def dense_transition(fp, alpha, q_u, q_e, n, padded=True):
    """``Q_u - alpha N^T G-^T Q_e G- N`` by explicit dense products."""
    padding = PaddingMap(fp.nu if padded else 0, n)
    m = padding.size
    gn = BandedCausalMatrix(fp.gminus, m, m).todense() @ padding.todense()
    qe = filter_matrix(q_e, m).todense()
    qu = filter_matrix(q_u, n).todense()
    return qu - alpha * gn.T @ qe @ gn


def build_transition(fp, alpha, q_u, q_e, n, padded=True, verify=True, normalize=False):
    """Transition matrix of the modified law.

    The padded matrix is returned as an :class:`SBTMatrix` built from the
    closed-form band; with ``verify`` the band is checked against the dense
    product and a mismatch raises :class:`StructureError`.
    """
    alpha = effective_alpha(alpha, fp, normalize)
    n = _check_size(n)
    r = transition_bandwidth(fp.nu, q_u.nq, q_e.nq)
    if n < r + 1:
        raise ValueError("trial length {} is too short for transition half-width {}".format(n, r))
    if not padded:
        return TransitionMatrix(dense_transition(fp, alpha, q_u, q_e, n, padded=False),
                                "modified", n, padded=False)

    sbt = SBTMatrix(band_coefficients(fp, alpha, q_u, q_e), n)
    if verify:
        dense = dense_transition(fp, alpha, q_u, q_e, n, padded=True)
        err = np.max(np.abs(sbt.todense() - dense))
        scale = max(1.0, float(np.max(np.abs(dense))))
        if err > BAND_CHECK_TOL * scale:
            raise StructureError(
                "closed-form band differs from the dense transition by {:.3g}".format(err))
    return TransitionMatrix(sbt, "modified", n, padded=True)


def transition_symbol(fp, alpha, q_u, q_e, theta, normalize=False):
    """``Q_u(theta) - alpha Q_e(theta) |G-(e^-j theta)|^2`` straight from the filters."""
    alpha = effective_alpha(alpha, fp, normalize)
    g = fp.gminus
    power = cosine_series(np.correlate(g, g, "full")[g.size - 1:], theta)
    return q_u.response(theta) - alpha * q_e.response(theta) * power


# =============================================================================
# Fixed points and feedforward
# =============================================================================

def _solve_normal(solver, *args, **kwargs):
    try:
        return solver(*args, **kwargs)
    except np.linalg.LinAlgError as e:
        raise ValueError("normal equations are singular") from e


def prototype_fixed_point(fp, r, padded=True, q_e=None):
    """Least-squares control ``argmin ||r - G- N u||``, optionally ``Q_e``-weighted.

    With ``padded`` the reference is an extended signal of length
    ``n + 2 nu`` and the banded normal equations are solved directly; the
    unpadded case is square.
    """
    g = fp.gminus
    nu = fp.nu
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1:
        raise DimensionError("reference must be one-dimensional")

    if padded:
        n = r.size - 2 * nu
        if n < 1:
            raise DimensionError("extended reference of length {} leaves no trial window".format(r.size))
        padding = PaddingMap(nu, n)
        weighted = r if q_e is None else filter_matrix(q_e, r.size) @ r
        rhs = padding.unpad(anticausal_apply(g, weighted))
        if q_e is None:
            gram = SBTMatrix(np.correlate(g, g, "full")[nu:], n)
            return _solve_normal(scipy.linalg.solveh_banded, gram.banded_lower(), rhs, lower=True)
        gram = SBTMatrix(_weighted_gram_band(g, q_e.q), n)
        bw = min(gram.r, n - 1)
        return _solve_normal(scipy.linalg.solve_banded, (bw, bw), gram.banded_full(), rhs)

    n = r.size
    if q_e is None:
        bw = min(nu, n - 1)
        ab = np.zeros((bw + 1, n))
        for k in range(bw + 1):
            ab[k, :n - k] = g[k]
        return _solve_normal(scipy.linalg.solve_banded, (bw, 0), ab, r)
    gm = BandedCausalMatrix(g, n, n).todense()
    qe = filter_matrix(q_e, n).todense()
    return _solve_normal(scipy.linalg.solve, gm.T @ qe @ gm, gm.T @ qe @ r)


def zpetc_feedforward(fp, r, alpha=1.0, padded=False):
    """``alpha G+^-1 G-^T r``, the zero phase error tracking input.

    With ``padded`` the reference is extended (length ``n + 2 nu``) and the
    preview is cut to the trial window first, which gives exactly the first
    input of the padded modified law.
    """
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1:
        raise DimensionError("reference must be one-dimensional")
    v = anticausal_apply(fp.gminus, r)
    if padded:
        padding = PaddingMap(fp.nu, r.size - 2 * fp.nu)
        v = padding.pad(padding.unpad(v))
    return float(alpha) * stable_inverse_apply(fp.gplus, v)


# =============================================================================
# Law variants
# =============================================================================

def _identity_operators(gain, n):
    return LearningOperators(SBTMatrix([1.0], n), gain, PaddingMap(0, n))


@dataclass(frozen=True)
class Arimoto:
    """P-type law ``u[k+1](t) = u[k](t) + alpha e[k](t)``."""

    alpha: float
    normalize: bool = False

    name: ClassVar[str] = "arimoto"
    needs_factorization: ClassVar[bool] = False

    def operators(self, fp, n):
        n = _check_size(n)
        col = np.zeros(n)
        col[0] = effective_alpha(self.alpha, fp, self.normalize)
        return _identity_operators(LowerToeplitzMatrix(col), n)

    def transition(self, plant, n, fp=None):
        alpha = effective_alpha(self.alpha, fp, self.normalize)
        return TransitionMatrix(arimoto_transition(markov_params(plant, n), alpha), self.name, n)


@dataclass(frozen=True)
class PDType:
    """PD-type law ``u[k+1](t) = u[k](t) + alpha e[k](t) + beta e[k](t-1)``."""

    alpha: float
    beta: float
    normalize: bool = False

    name: ClassVar[str] = "pd"
    needs_factorization: ClassVar[bool] = False

    def _gains(self, fp):
        scale = effective_alpha(1.0, fp, self.normalize)
        return scale * float(self.alpha), scale * float(self.beta)

    def operators(self, fp, n):
        n = _check_size(n)
        alpha, beta = self._gains(fp)
        col = np.zeros(n)
        col[0] = alpha
        if n > 1:
            col[1] = beta
        return _identity_operators(LowerToeplitzMatrix(col), n)

    def transition(self, plant, n, fp=None):
        alpha, beta = self._gains(fp)
        return TransitionMatrix(pd_transition(markov_params(plant, n), alpha, beta), self.name, n)


@dataclass(frozen=True)
class Prototype:
    """Prototype law ``u'[k+1] = u'[k] + alpha G-^T e[k]`` with ``u = G+^-1 u'``."""

    alpha: float
    padded: bool = False
    normalize: bool = False

    name: ClassVar[str] = "prototype"
    needs_factorization: ClassVar[bool] = True

    def operators(self, fp, n):
        unity = ZeroPhaseFilter.identity()
        gain = build_F(fp, self.alpha, unity, n, self.padded, self.normalize)
        return LearningOperators(SBTMatrix([1.0], n), gain, gain.padding, fp.gplus)

    def transition(self, plant, n, fp=None):
        fp = factor_plant(plant) if fp is None else fp
        unity = ZeroPhaseFilter.identity()
        t = build_transition(fp, self.alpha, unity, unity, n, self.padded, normalize=self.normalize)
        return TransitionMatrix(t.matrix, self.name, n, self.padded)


@dataclass(frozen=True)
class ModifiedRepetitive:
    """Modified repetitive law ``u_bar[k+1] = Q_u u_bar[k] + alpha N^T G-^T Q_e e[k]``."""

    alpha: float
    q_u: ZeroPhaseFilter
    q_e: ZeroPhaseFilter
    padded: bool = True
    normalize: bool = False

    name: ClassVar[str] = "modified"
    needs_factorization: ClassVar[bool] = True

    def operators(self, fp, n):
        gain = build_F(fp, self.alpha, self.q_e, n, self.padded, self.normalize)
        return LearningOperators(filter_matrix(self.q_u, n), gain, gain.padding, fp.gplus)

    def transition(self, plant, n, fp=None):
        fp = factor_plant(plant) if fp is None else fp
        return build_transition(fp, self.alpha, self.q_u, self.q_e, n, self.padded,
                                normalize=self.normalize)


@dataclass(frozen=True, eq=False)
class GenericLaw:
    """Generic update ``u[k+1] = T_u u[k] + T_e e[k]`` with arbitrary matrices.

    Accepted by the simulator; no banded structure is assumed.
    """

    t_u: np.ndarray
    t_e: np.ndarray

    name: ClassVar[str] = "generic"
    needs_factorization: ClassVar[bool] = False

    def __post_init__(self):
        t_u = np.array(self.t_u, dtype=np.float64)
        t_e = np.array(self.t_e, dtype=np.float64)
        if t_u.ndim != 2 or t_u.shape[0] != t_u.shape[1] or t_e.shape != t_u.shape:
            raise DimensionError("T_u and T_e must be square of equal size, got {} and {}".format(
                t_u.shape, t_e.shape))
        object.__setattr__(self, "t_u", t_u)
        object.__setattr__(self, "t_e", t_e)

    def _check(self, n):
        if self.t_u.shape[0] != n:
            raise DimensionError("law is sized for n = {}, got n = {}".format(self.t_u.shape[0], n))

    def operators(self, fp, n):
        self._check(n)
        return LearningOperators(self.t_u, self.t_e, PaddingMap(0, n))

    def transition(self, plant, n, fp=None):
        self._check(n)
        g = lift_plant(markov_params(plant, n)).todense()
        return TransitionMatrix(self.t_u - self.t_e @ g, self.name, n)


IlcLaw = Union[Arimoto, PDType, Prototype, ModifiedRepetitive, GenericLaw]
