"""Symmetric eigenvalue extremes by two independent routes.

``lapack`` uses the banded (or dense) symmetric LAPACK drivers.
``bisection`` reduces the matrix to tridiagonal form by Householder
similarity and bisects with Sturm counts, using the compiled kernel from
``sbt_ilc._sturm`` when it has been built.
"""

import logging

import numpy as np
import scipy.linalg

from sbt_ilc.errors import AsymmetryError, ConvergenceError
from sbt_ilc.lti import SBTMatrix

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
BISECTION_MAX_ITER = 200
_SAFMIN = np.finfo(np.float64).tiny

try:
    from sbt_ilc._sturm import bisect_eigenvalue, sturm_count
except ImportError:
    logger.warning("sbt_ilc._sturm is not built; using the pure-Python Sturm kernel")

    def sturm_count(diag, offdiag, x, pivmin):
        count = 0
        q = diag[0] - x
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
        for i in range(1, len(diag)):
            q = diag[i] - x - offdiag[i - 1] * offdiag[i - 1] / q
            if abs(q) < pivmin:
                q = -pivmin
            if q < 0.0:
                count += 1
        return count

    def bisect_eigenvalue(diag, offdiag, k, lo, hi, tol, max_iter, pivmin):
        it = 0
        while hi - lo > tol and it < max_iter:
            mid = 0.5 * (lo + hi)
            if sturm_count(diag, offdiag, mid, pivmin) > k:
                hi = mid
            else:
                lo = mid
            it += 1
        return 0.5 * (lo + hi), it


def check_symmetric(dense, tol=SYMMETRY_TOL):
    dense = np.asarray(dense, dtype=np.float64)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
        raise AsymmetryError("expected a square matrix, got shape {}".format(dense.shape))
    scale = max(1.0, float(np.max(np.abs(dense))) if dense.size else 1.0)
    err = float(np.max(np.abs(dense - dense.T))) if dense.size else 0.0
    if err > tol * scale:
        raise AsymmetryError("matrix is not symmetric: max |A - A^T| = {:.3g}".format(err))
    return dense


def symmetric_eigenvalues(matrix):
    """All eigenvalues (ascending) through LAPACK."""
    try:
        if isinstance(matrix, SBTMatrix):
            return scipy.linalg.eigvals_banded(matrix.banded_lower(), lower=True)
        return scipy.linalg.eigvalsh(check_symmetric(matrix))
    except np.linalg.LinAlgError as e:
        raise ConvergenceError("symmetric eigensolver did not converge") from e


def tridiagonalize(matrix):
    """Diagonal and off-diagonal of a tridiagonal matrix similar to ``matrix``."""
    if isinstance(matrix, SBTMatrix) and matrix.r <= 1:
        off = matrix.band[1] if matrix.r == 1 else 0.0
        return np.full(matrix.n, matrix.band[0]), np.full(matrix.n - 1, off)
    dense = matrix.todense() if isinstance(matrix, SBTMatrix) else check_symmetric(matrix)
    if dense.shape[0] < 3:
        return dense.diagonal().copy(), dense.diagonal(-1).copy()
    t = scipy.linalg.hessenberg(dense)
    return np.ascontiguousarray(t.diagonal()), np.ascontiguousarray(t.diagonal(-1))


def bisection_extremes(diag, offdiag):
    """Smallest and largest eigenvalue of a symmetric tridiagonal matrix."""
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    offdiag = np.ascontiguousarray(offdiag, dtype=np.float64)
    n = diag.size
    radius = np.zeros(n)
    radius[:-1] += np.abs(offdiag)
    radius[1:] += np.abs(offdiag)
    lo = float(np.min(diag - radius))
    hi = float(np.max(diag + radius))
    scale = max(abs(lo), abs(hi), _SAFMIN)
    lo -= 2e-15 * scale + _SAFMIN
    hi += 2e-15 * scale + _SAFMIN
    tol = 1e-15 * max(1.0, scale)
    pivmin = _SAFMIN * max(1.0, float(np.max(offdiag ** 2)) if offdiag.size else 1.0)

    extremes = []
    for k in (0, n - 1):
        value, iterations = bisect_eigenvalue(diag, offdiag, k, lo, hi, tol, BISECTION_MAX_ITER, pivmin)
        if iterations >= BISECTION_MAX_ITER:
            raise ConvergenceError("bisection for eigenvalue {} hit {} iterations".format(
                k, BISECTION_MAX_ITER))
        logger.debug("bisection eigenvalue %d = %.15g after %d steps", k, value, iterations)
        extremes.append(value)
    return tuple(extremes)


def spectral_radius_lapack(matrix):
    return float(np.max(np.abs(symmetric_eigenvalues(matrix))))


def spectral_radius_bisection(matrix):
    lo, hi = bisection_extremes(*tridiagonalize(matrix))
    return max(abs(lo), abs(hi))


def general_spectral_radius(dense):
    """Largest eigenvalue modulus of a possibly nonsymmetric matrix."""
    try:
        return float(np.max(np.abs(np.linalg.eigvals(np.asarray(dense, dtype=np.float64)))))
    except np.linalg.LinAlgError as e:
        raise ConvergenceError("eigensolver did not converge") from e
