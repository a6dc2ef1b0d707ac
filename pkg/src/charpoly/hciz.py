"""Harish-Chandra/Itzykson-Zuber integral: closed form and Haar Monte Carlo.

    int_{U(d)} exp{z tr A U* B U} dmu(U)
        = (prod_{j=1}^{d-1} j!) det[exp(z a_j b_k)] / (z^{(d^2-d)/2} Vand(a) Vand(b))

with Vand(a) = prod_{j>k} (a_j - a_k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SEPARATION = 1e-6


@dataclass(frozen=True)
class HCIZInput:
    a_eigs: tuple
    b_eigs: tuple
    zscale: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "a_eigs", tuple(complex(x) for x in self.a_eigs))
        object.__setattr__(self, "b_eigs", tuple(complex(x) for x in self.b_eigs))
        object.__setattr__(self, "zscale", complex(self.zscale))
        if len(self.a_eigs) != len(self.b_eigs) or not self.a_eigs:
            raise ValueError("a_eigs and b_eigs must be nonempty and of equal length")

    @property
    def d(self) -> int:
        return len(self.a_eigs)


def _check_distinct(eigs, label):
    for j in range(len(eigs)):
        for k in range(j):
            if abs(eigs[j] - eigs[k]) < SEPARATION:
                raise ValueError(
                    f"{label}[{k}] = {eigs[k]} and {label}[{j}] = {eigs[j]} are closer than {SEPARATION:g}"
                )


def _vandermonde(x) -> complex:
    v = 1.0 + 0.0j
    for j in range(len(x)):
        for k in range(j):
            v *= x[j] - x[k]
    return v


def hciz_closed_form(inp: HCIZInput) -> complex:
    a, b, z, d = np.array(inp.a_eigs), np.array(inp.b_eigs), inp.zscale, inp.d
    if d == 1:
        return complex(np.exp(z * (a[0] * b[0])))
    _check_distinct(inp.a_eigs, "a_eigs")
    _check_distinct(inp.b_eigs, "b_eigs")
    if z == 0:
        raise ValueError("zscale must be nonzero for d >= 2")
    pref = math.prod(math.factorial(j) for j in range(1, d))
    det = np.linalg.det(np.exp(z * np.outer(a, b)))
    return complex(pref * det / (z ** ((d * d - d) // 2) * _vandermonde(a) * _vandermonde(b)))


def haar_unitaries(count: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar unitaries, shape (count, d, d): QR of a Ginibre matrix, R's diagonal phases folded into Q."""
    g = (rng.standard_normal((count, d, d)) + 1j * rng.standard_normal((count, d, d))) * math.sqrt(0.5)
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[:, None, :]


def haar_sample_unitary(d: int, seed) -> np.ndarray:
    if d < 1:
        raise ValueError("d must be >= 1")
    return haar_unitaries(1, d, np.random.default_rng(seed))[0]


@dataclass
class HCIZEstimate:
    mean: complex
    stderr_re: float
    stderr_im: float
    samples: int
    seed: int
    extra: dict = field(default_factory=dict)

    def z_score(self, target: complex) -> float:
        """Largest per-component deviation in standard errors (0 when exact)."""
        scores = []
        for dev, se in ((self.mean.real - target.real, self.stderr_re), (self.mean.imag - target.imag, self.stderr_im)):
            if se > 0:
                scores.append(abs(dev) / se)
            elif abs(dev) > 1e-12 * max(1.0, abs(target)):
                scores.append(math.inf)
        return max(scores, default=0.0)


def hciz_mc(inp: HCIZInput, samples: int = 10**6, seed: int = 0, batch: int = 50_000) -> HCIZEstimate:
    """Sample mean of exp{z tr(A U* B U)} over Haar U with A, B diagonal.

    tr(A U* B U) = sum_{j,k} a_j b_k |u_kj|^2, so only the squared moduli
    of U enter. Columns of |u|^2 are renormalized to sum to one, which
    removes rounding drift (and makes d = 1 exact).
    """
    if samples < 1000:
        raise ValueError("hciz_mc needs at least 1000 samples")
    a, b, z = np.array(inp.a_eigs), np.array(inp.b_eigs), inp.zscale
    ss = np.random.SeedSequence(seed)
    vals = []
    for k, child in enumerate(ss.spawn((samples + batch - 1) // batch)):
        count = min(batch, samples - k * batch)
        u = haar_unitaries(count, inp.d, np.random.default_rng(child))
        p = u.real**2 + u.imag**2
        p /= p.sum(axis=1, keepdims=True)
        tr = np.einsum("j,k,skj->s", a, b, p)
        vals.append(np.exp(z * tr))
    x = np.concatenate(vals)
    if np.all(x == x[0]):
        return HCIZEstimate(complex(x[0]), 0.0, 0.0, samples, seed)
    mean = complex(x.mean())
    se_re = float(x.real.std(ddof=1) / math.sqrt(samples))
    se_im = float(x.imag.std(ddof=1) / math.sqrt(samples))
    return HCIZEstimate(mean, se_re, se_im, samples, seed)
