"""Closed-form large-n predictions and the numerical pieces they rest on."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

from .logvalue import LogValue

LOG_2PI = math.log(2.0 * math.pi)
# zeta'(-1) = 1/12 - log(Glaisher's constant)
ZETA_PRIME_M1 = -0.16542114370045092921391966024278

_BERNOULLI = bernoulli(60)


def asymptotic_kernel(z: complex, w: complex) -> complex:
    """exp(-|z|^2/2 - |w|^2/2 + z conj(w)); its squared modulus is exp(-|z - w|^2)."""
    z, w = complex(z), complex(w)
    return complex(np.exp(-0.5 * abs(z) ** 2 - 0.5 * abs(w) ** 2 + z * w.conjugate()))


def kernel_matrix(zetas) -> np.ndarray:
    zetas = [complex(z) for z in zetas]
    return np.array([[asymptotic_kernel(a, b) for b in zetas] for a in zetas])


def _check_distinct(zetas, tol=1e-12):
    for j in range(len(zetas)):
        for k in range(j):
            if abs(complex(zetas[j]) - complex(zetas[k])) <= tol:
                raise ValueError(f"zetas[{k}] and zetas[{j}] coincide; the Vandermonde factor vanishes")


def _kappa_exponent(m: int, z0: complex, kappa22: float) -> float:
    return 0.5 * (m * m - m) * (1.0 - abs(z0) ** 2) ** 2 * kappa22


@dataclass(frozen=True)
class Theorem1Prediction:
    log_value: float
    kernel_det: float
    vandermonde_sq: float
    kappa_factor: float

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def theorem1_prediction(zetas, z0: complex = 0.0, kappa22: float = 0.0) -> Theorem1Prediction:
    """Limit of n^{-(m^2-m)/2} F_m / prod F_1 for pairwise distinct zetas."""
    if abs(z0) >= 1.0:
        raise ValueError("z0 must lie in the bulk |z0| < 1")
    zetas = [complex(z) for z in zetas]
    _check_distinct(zetas)
    m = len(zetas)
    kdet = float(np.linalg.det(kernel_matrix(zetas)).real) if m > 1 else 1.0
    vsq = 1.0
    for j in range(m):
        for k in range(j):
            vsq *= abs(zetas[j] - zetas[k]) ** 2
    expo = _kappa_exponent(m, z0, kappa22)
    log_value = math.log(kdet) - math.log(vsq) + expo
    return Theorem1Prediction(log_value, kdet, vsq, math.exp(expo))


def moment_prediction(m: int, z0: complex, n: int, kappa22: float = 0.0) -> LogValue:
    """Leading asymptotics of E|det(M_n - z0)|^{2m}, constant included."""
    if abs(z0) >= 1.0:
        raise ValueError("z0 must lie in the bulk |z0| < 1")
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    log_c = 0.5 * m * LOG_2PI - math.fsum(math.lgamma(j + 1) for j in range(1, m))
    return LogValue(
        log_c + _kappa_exponent(m, z0, kappa22) + 0.5 * m * m * math.log(n) + m * n * (abs(z0) ** 2 - 1.0)
    )


def webb_wong_prediction(gamma: float, z0: complex, n: int) -> LogValue:
    """Leading asymptotics of E|det(M_n - z0)|^gamma for Gaussian entries, gamma > -2."""
    if gamma <= -2:
        raise ValueError("gamma must exceed -2")
    if abs(z0) >= 1.0:
        raise ValueError("z0 must lie in the bulk |z0| < 1")
    return LogValue(
        gamma**2 / 8.0 * math.log(n)
        + 0.5 * gamma * n * (abs(z0) ** 2 - 1.0)
        + 0.25 * gamma * LOG_2PI
        - barnes_g_log(1.0 + 0.5 * gamma)
    )


def _log_g_asymptotic(z: float) -> float:
    """log G(1 + z) for large positive z."""
    lz = math.log(z)
    total = 0.5 * z * z * lz - 0.75 * z * z + 0.5 * z * LOG_2PI - lz / 12.0 + ZETA_PRIME_M1
    for k in range(1, 29):
        term = _BERNOULLI[2 * k + 2] / (4.0 * k * (k + 1) * z ** (2 * k))
        total += term
        if abs(term) < 1e-12 * max(1.0, abs(total)):
            break
    return total


def barnes_g_log(x: float, shift_to: float = 20.0) -> float:
    """log G(x) for real x > 0.

    Integers use log G(k) = sum_{j=1}^{k-2} log j!. Other arguments are pushed
    up with G(x + 1) = Gamma(x) G(x) until the asymptotic series is accurate.
    """
    if x <= 0:
        raise ValueError("barnes_g_log needs x > 0")
    if float(x).is_integer():
        return math.fsum(math.lgamma(j + 1) for j in range(1, int(x) - 1))
    acc = []
    y = float(x)
    while y < shift_to:
        acc.append(math.lgamma(y))
        y += 1.0
    return _log_g_asymptotic(y - 1.0) - math.fsum(acc)


def f_star(lam, z0: complex):
    """-lam^2 + log(|z0|^2 + lam^2)."""
    lam = np.asarray(lam, dtype=float)
    return -(lam**2) + np.log(abs(z0) ** 2 + lam**2)


def f_star_prime(lam, z0: complex):
    lam = np.asarray(lam, dtype=float)
    return -2.0 * lam + 2.0 * lam / (abs(z0) ** 2 + lam**2)


def f_star_second(lam, z0: complex):
    a = abs(z0) ** 2
    lam = np.asarray(lam, dtype=float)
    return -2.0 + 2.0 * (a - lam**2) / (a + lam**2) ** 2


def saddle_lambda0(z0: complex) -> float:
    """The maximizer sqrt(1 - |z0|^2) of f_star."""
    r2 = abs(complex(z0)) ** 2
    if r2 > 1.0:
        raise ValueError(f"|z0| = {math.sqrt(r2)} is outside the unit disc")
    return math.sqrt(1.0 - r2)


def _simpson_panel(f, a, b, fa, fb, tol, max_depth=40):
    """Adaptive Simpson on [a, b] with Richardson correction; returns (integral, evals)."""
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total, evals = 0.0, 1
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        evals += 2
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol or depth >= max_depth:
            total += left + right + delta / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
    return total, evals


def f1_quadrature(z: complex, n: int, rtol: float = 1e-10, full_output: bool = False):
    """F_1(z) = 2n int_0^inf r exp{n(-r^2 + log(|z|^2 + r^2))} dr by adaptive Simpson.

    The integrand is evaluated relative to its peak value so that the
    integration itself never leaves double range; the peak is restored in log
    domain. The range is cut at r_max = lambda0 + 12/sqrt(n) + 1, beyond which
    the remainder is bounded by (n/c) exp(n f_star(r_max)) with
    c = n (1 - 1/(|z|^2 + r_max^2)).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = abs(complex(z)) ** 2
    lam0 = math.sqrt(max(1.0 - a, 0.0))
    peak_base = max(a + lam0 * lam0, 1e-300)

    def g(r):
        s = a + r * r
        if s == 0.0:
            return 0.0
        u = r * r - lam0 * lam0
        x = u / peak_base
        # log((a + r^2) / peak_base) without cancellation near the peak
        lg = math.log1p(x) if abs(x) < 0.5 else math.log(s / peak_base)
        return r * math.exp(n * (-u + lg))

    w = 1.0 / math.sqrt(n)
    r_max = lam0 + 12.0 * w + 1.0
    nodes = {0.0, r_max}
    nodes.update(lam0 + k * w for k in range(-12, 13) if 0.0 < lam0 + k * w < r_max)
    nodes = sorted(nodes)
    fvals = [g(r) for r in nodes]
    coarse = sum(
        (b - a_) / 6.0 * (fa + 4.0 * g(0.5 * (a_ + b)) + fb)
        for a_, b, fa, fb in zip(nodes[:-1], nodes[1:], fvals[:-1], fvals[1:])
    )
    span = r_max
    integral, evals = 0.0, len(nodes) + len(nodes) - 1
    for a_, b, fa, fb in zip(nodes[:-1], nodes[1:], fvals[:-1], fvals[1:]):
        part, e = _simpson_panel(g, a_, b, fa, fb, rtol * coarse * (b - a_) / span)
        integral += part
        evals += e
    log_peak = n * float(f_star(lam0, z))
    log_value = math.log(2.0 * n) + log_peak + math.log(integral)
    value = LogValue(log_value)
    if not full_output:
        return value
    c = n * (1.0 - 1.0 / (a + r_max**2))
    log_tail = math.log(n / c) + n * float(f_star(r_max, z))
    return value, {"log_tail_bound": log_tail, "rel_tail_bound": math.exp(log_tail - log_value),
                   "evaluations": evals, "r_max": r_max}


def f1_asymptote(z: complex, n: int) -> LogValue:
    """sqrt(2 pi n) exp(n(|z|^2 - 1))."""
    return LogValue(0.5 * (LOG_2PI + math.log(n)) + n * (abs(complex(z)) ** 2 - 1.0))
