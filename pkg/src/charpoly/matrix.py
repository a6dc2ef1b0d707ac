"""Sampling M_n = X / sqrt(n) and log |det(M - z)|^2 via pivoted LU."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor

from .distributions import EntryDistributionSpec, sample_entries
from .logvalue import LogValue


def sample_matrix(n: int, spec: EntryDistributionSpec, seed) -> np.ndarray:
    """One n x n matrix of i.i.d. entries scaled by n^{-1/2}.

    ``seed`` is anything ``numpy.random.default_rng`` accepts; a fixed
    integer gives a fixed matrix.
    """
    if n < 1:
        raise ValueError("matrix order must be >= 1")
    rng = np.random.default_rng(seed)
    return sample_entries(spec, rng, (n, n)) / math.sqrt(n)


def sample_matrices(count: int, n: int, spec: EntryDistributionSpec, rng: np.random.Generator) -> np.ndarray:
    """A stack of ``count`` independent matrices, shape (count, n, n)."""
    x = sample_entries(spec, rng, (count, n, n))
    x /= math.sqrt(n)
    return x


def _shift(M: np.ndarray, z: complex) -> np.ndarray:
    A = np.array(M, dtype=complex)
    idx = np.arange(A.shape[-1])
    A[..., idx, idx] -= z
    return A


def log_abs_det_sq(M: np.ndarray, z: complex = 0.0) -> LogValue:
    """log |det(M - z I)|^2 as twice the summed log-moduli of the LU pivots.

    A pivot that is exactly zero yields ``LogValue.zero()`` instead of an error.
    """
    A = _shift(M, z)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, _ = lu_factor(A, check_finite=False)
    pivots = np.abs(np.diagonal(lu))
    if np.any(pivots == 0.0):
        return LogValue.zero()
    return LogValue(2.0 * float(np.sum(np.log(pivots))))


def char_poly_log_product(M: np.ndarray, zs) -> LogValue:
    """log prod_j |det(M - z_j)|^2, one factorization per shift."""
    zs = list(zs)
    if not zs:
        raise ValueError("need at least one shift")
    terms = [log_abs_det_sq(M, z) for z in zs]
    if any(t.is_zero for t in terms):
        return LogValue.zero()
    # fsum is exactly rounded, so the result does not depend on the order of zs
    return LogValue(math.fsum(t.log_abs for t in terms))


def batched_log_abs_det_sq(Ms: np.ndarray, z: complex) -> np.ndarray:
    """log |det(M_k - z)|^2 for a stack of matrices; -inf marks a singular one."""
    _, logabs = np.linalg.slogdet(_shift(Ms, z))
    return 2.0 * logabs
