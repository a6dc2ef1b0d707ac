"""Exact finite-n correlation functions of characteristic polynomials for GinUE.

For unnormalized X with i.i.d. standard complex Gaussian entries,

    E prod_j det(X - z_j) det(X - w_j)^*
        = (prod_{l=n}^{n+m-1} l!) det[K_n(z_j, w_k)] / (Vand(z) Vand(conj w)),

    K_n(z, w) = sum_{l=0}^{n+m-1} (z conj(w))^l / l!.

Everything is evaluated in log domain. Kernel entries are rescaled by the
square roots of the diagonal values K_n(z, z); because K_n is a Gram kernel
the rescaled entries are bounded by one, so nothing overflows even when
n |z|^2 is in the thousands. Coinciding points are handled by derivative
rows and columns (the confluent limit) rather than by differencing.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor
from scipy.special import gammaln

from .logvalue import LogValue
from .points import PointConfig


class NearConfluentError(ValueError):
    """Raised when points are too close for the divided form to be trusted."""


def confluence_threshold(points) -> float:
    return 1e-6 * (1.0 + max((abs(p) for p in points), default=0.0))


def _kernel_terms(z: complex, u: complex, top: int, a: int = 0, b: int = 0):
    """Log-moduli and phases of the terms of d^a/dz^a d^b/du^b sum_l (z u)^l / l! / (a! b!)."""
    l = np.arange(max(a, b), top + 1)
    logc = gammaln(l + 1) - gammaln(a + 1) - gammaln(l - a + 1)
    logc += gammaln(l + 1) - gammaln(b + 1) - gammaln(l - b + 1)
    logc -= gammaln(l + 1)
    pa, pb = l - a, l - b
    logt = logc + _power_log(pa, z) + _power_log(pb, u)
    phase = pa * np.angle(z) + pb * np.angle(u)
    return logt, phase


def _power_log(p: np.ndarray, x: complex) -> np.ndarray:
    """log |x|^p elementwise with 0^0 = 1."""
    if x == 0:
        return np.where(p > 0, -np.inf, 0.0)
    return p * math.log(abs(x))


def _kernel_log(z: complex, u: complex, top: int, a: int = 0, b: int = 0):
    """Return (log scale, mantissa) with the kernel derivative = mantissa * exp(scale)."""
    logt, phase = _kernel_terms(z, u, top, a, b)
    finite = np.isfinite(logt)
    if not finite.any():
        return -math.inf, 0.0
    shift = float(logt[finite].max())
    mant = np.sum(np.exp(logt[finite] - shift + 1j * phase[finite]))
    return shift, complex(mant)


def kernel_Kn(z: complex, w: complex, n: int, m: int) -> complex:
    """sum_{l=0}^{n+m-1} (z conj(w))^l / l!."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    shift, mant = _kernel_log(complex(z), complex(w).conjugate(), n + m - 1)
    return mant * math.exp(shift) if mant else 0.0j


def _log_det(A: np.ndarray) -> LogValue:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=False)
    d = np.diagonal(lu)
    mod = np.abs(d)
    if np.any(mod == 0.0):
        return LogValue.zero()
    swaps = int(np.sum(piv != np.arange(len(piv))))
    phase = complex(np.prod(d / mod)) * (-1.0) ** swaps
    return LogValue(float(np.sum(np.log(mod))), phase / abs(phase))


def _scaled_kernel(rows, cols, top: int):
    """Kernel (derivative) matrix with entry (j, k) divided by exp(sr[j] + sc[k]).

    ``rows`` holds (z, a) pairs and ``cols`` holds (w, b) pairs; entry (j, k)
    is the a-th z-derivative and b-th conj(w)-derivative of K, divided by a! b!.
    The scales are half the log of the matching diagonal entries, so by
    Cauchy-Schwarz every scaled entry has modulus at most one.
    """
    m = len(rows)
    diag_r = [_kernel_log(z, complex(z).conjugate(), top, a, a) for z, a in rows]
    diag_c = [_kernel_log(w, complex(w).conjugate(), top, b, b) for w, b in cols]
    sr = [0.5 * (s + math.log(mt.real)) for s, mt in diag_r]
    sc = [0.5 * (s + math.log(mt.real)) for s, mt in diag_c]
    A = np.empty((m, m), dtype=complex)
    for j, (z, a) in enumerate(rows):
        for k, (w, b) in enumerate(cols):
            s, mt = _kernel_log(complex(z), complex(w).conjugate(), top, a, b)
            A[j, k] = mt * math.exp(s - sr[j] - sc[k]) if mt else 0.0
    return A, sr, sc


def scaled_kernel_matrix(zs, n: int) -> np.ndarray:
    """D^{-1/2} [K_n(z_j, z_k)] D^{-1/2} with D the diagonal; Hermitian PSD with unit diagonal."""
    rows = [(complex(z), 0) for z in zs]
    return _scaled_kernel(rows, rows, n + len(rows) - 1)[0]


def _kernel_determinant(rows, cols, top: int) -> LogValue:
    A, sr, sc = _scaled_kernel(rows, cols, top)
    return _log_det(A).scale(math.fsum(sr) + math.fsum(sc))


def _log_vandermonde(groups) -> LogValue:
    """prod_{p > q} (x_p - x_q)^{k_p k_q} over (point, multiplicity) groups."""
    log_abs, phase = 0.0, 1.0 + 0.0j
    for p in range(len(groups)):
        for q in range(p):
            d = complex(groups[p][0]) - complex(groups[q][0])
            if d == 0:
                return LogValue.zero()
            e = groups[p][1] * groups[q][1]
            log_abs += e * math.log(abs(d))
            phase *= (d / abs(d)) ** e
    return LogValue(log_abs, phase / abs(phase))


def _log_prefactor(n: int, m: int) -> float:
    return math.fsum(math.lgamma(l + 1) for l in range(n, n + m))


def _expand(groups):
    return [(complex(z), a) for z, k in groups for a in range(k)]


def _check_separation(points, label):
    delta = confluence_threshold(points)
    for j in range(len(points)):
        for k in range(j):
            if abs(points[j] - points[k]) < delta:
                raise NearConfluentError(
                    f"{label}[{k}] and {label}[{j}] are closer than {delta:.3g}; use av_confluent"
                )


def av_correlation(zs, ws, n: int) -> LogValue:
    """E prod_j det(X - z_j) det(X - w_j)^* for an n x n unnormalized Ginibre X.

    Points within each list must be separated by more than
    ``confluence_threshold``; otherwise ``NearConfluentError`` is raised.
    """
    zs = [complex(z) for z in zs]
    ws = [complex(w) for w in ws]
    if len(zs) != len(ws) or not zs:
        raise ValueError("zs and ws must be nonempty lists of equal length")
    _check_separation(zs, "zs")
    _check_separation(ws, "ws")
    return av_confluent([(z, 1) for z in zs], n, [(w, 1) for w in ws])


def av_confluent(groups, n: int, w_groups=None) -> LogValue:
    """Confluent-safe form of ``av_correlation``.

    ``groups`` is a list of (point, multiplicity) pairs; ``w_groups`` defaults
    to the same list, which gives E prod_j |det(X - z_j)|^2. A point of
    multiplicity k contributes rows with the derivatives of orders 0..k-1
    (each divided by its factorial), and the Vandermonde factor becomes
    prod_{p>q} (x_p - x_q)^{k_p k_q}. Distinct points reproduce
    ``av_correlation`` exactly.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    groups = [(complex(z), int(k)) for z, k in groups]
    w_groups = groups if w_groups is None else [(complex(w), int(k)) for w, k in w_groups]
    hermitian = w_groups == groups
    m = sum(k for _, k in groups)
    if m != sum(k for _, k in w_groups) or m == 0:
        raise ValueError("both sides must carry the same positive total multiplicity")
    if any(k < 1 for _, k in groups + w_groups):
        raise ValueError("multiplicities must be positive")
    det = _kernel_determinant(_expand(groups), _expand(w_groups), n + m - 1)
    vz = _log_vandermonde(groups)
    vw = _log_vandermonde([(w.conjugate(), k) for w, k in w_groups])
    out = (det / (vz * vw)).scale(_log_prefactor(n, m))
    if hermitian and not out.is_zero:
        # a Gram determinant over |Vand|^2: real and positive up to rounding
        out = LogValue(out.log_abs)
    return out


def group_points(points, tol: float = 0.0):
    """Merge points closer than ``tol`` (exact repeats by default) into (point, multiplicity) pairs."""
    groups = []
    for p in points:
        p = complex(p)
        for g in groups:
            if abs(g[0] - p) <= tol:
                g[1] += 1
                break
        else:
            groups.append([p, 1])
    return [(p, k) for p, k in groups]


def ginue_Fm_scaled(points: PointConfig) -> LogValue:
    """F_m(Z) = E prod_j |det(M_n - z_j)|^2 for M_n = X / sqrt(n), X Ginibre.

    det(M_n - z) = n^{-n/2} det(X - sqrt(n) z), so the unnormalized
    correlation is evaluated at the points sqrt(n) z_j and scaled by n^{-mn}.
    """
    n, m = points.n, points.m
    # canonical order makes the result independent of how zetas are listed
    scaled = sorted(points.scaled, key=lambda z: (z.real, z.imag))
    if len(group_points(points.zetas)) < m:
        val = av_confluent(group_points(scaled), n)
    else:
        val = av_correlation(scaled, scaled, n)
    return val.scale(-m * n * math.log(n))


def ginue_theorem_ratio_exact(points: PointConfig) -> LogValue:
    """n^{-(m^2-m)/2} F_m(Z) / (F_1(z_1) ... F_1(z_m)) at finite n."""
    m, n = points.m, points.n
    _check_separation(list(points.zetas), "zetas")
    num = ginue_Fm_scaled(points)
    den = math.fsum(ginue_Fm_scaled(PointConfig(points.z0, (zeta,), n)).log_abs for zeta in points.zetas)
    return LogValue(num.log_abs - den - 0.5 * (m * m - m) * math.log(n))
