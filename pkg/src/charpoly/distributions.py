"""Complex entry laws with E x = E x^2 = 0, E|x|^2 = 1 and a tunable fourth moment.

Every law here is rotation invariant (uniform phase, independent modulus), so
the vanishing first and second moments hold by symmetry and the fourth
cumulant kappa_{2,2} = E|x|^4 - 2 is fixed entirely by the radial law.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

KINDS = ("complex-gaussian", "uniform-phase", "four-point-lattice", "radial-two-point")

_RADIAL_RE = re.compile(r"^radial-two-point(?:\(q=([0-9.eE+-]+)\)|:q=([0-9.eE+-]+))?$")


@dataclass(frozen=True)
class EntryDistributionSpec:
    kind: str
    q: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "radial-two-point":
            if not 0.0 < self.q <= 1.0:
                raise ValueError(f"radial-two-point needs q in (0, 1], got {self.q}")
        elif self.q != 1.0:
            raise ValueError(f"parameter q only applies to radial-two-point, not {self.kind}")

    @property
    def label(self) -> str:
        if self.kind == "radial-two-point":
            return f"radial-two-point(q={self.q:g})"
        return self.kind

    @classmethod
    def parse(cls, label) -> "EntryDistributionSpec":
        """Build a spec from a label string or a ``{"kind": ..., "q": ...}`` mapping."""
        if isinstance(label, cls):
            return label
        if isinstance(label, dict):
            return cls(**label)
        label = str(label).strip()
        m = _RADIAL_RE.match(label)
        if m:
            q = m.group(1) or m.group(2)
            return cls("radial-two-point", float(q) if q else 1.0)
        return cls(label)


_LATTICE = np.array([1.0, 1j, -1.0, -1j])

GAUSSIAN = EntryDistributionSpec("complex-gaussian")


@dataclass(frozen=True)
class CumulantSet:
    kappa22: float
    absolute_moments: tuple


def sample_entries(spec: EntryDistributionSpec, rng: np.random.Generator, size) -> np.ndarray:
    """Draw an array of i.i.d. entries of shape ``size``."""
    if spec.kind == "complex-gaussian":
        z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        z *= math.sqrt(0.5)
        return z
    if spec.kind == "four-point-lattice":
        return _LATTICE[rng.integers(0, 4, size=size)]
    phase = np.exp(2j * np.pi * rng.random(size))
    if spec.kind == "uniform-phase":
        return phase
    # radial-two-point: |x|^2 = 1/q with probability q, else 0
    if spec.q == 1.0:
        return phase
    keep = rng.random(size) < spec.q
    return np.where(keep, phase / math.sqrt(spec.q), 0.0)


def sample_entry(spec: EntryDistributionSpec, rng: np.random.Generator) -> complex:
    return complex(sample_entries(spec, rng, ()))


def absolute_moment(spec: EntryDistributionSpec, k: float) -> float:
    """Analytic E|x|^k."""
    if spec.kind == "complex-gaussian":
        # |x|^2 ~ Exp(1)
        return math.gamma(1.0 + k / 2.0)
    if spec.kind == "radial-two-point":
        return spec.q ** (1.0 - k / 2.0)
    return 1.0


def cumulant_22(spec: EntryDistributionSpec) -> float:
    return absolute_moment(spec, 4) - 2.0


def cumulants(spec: EntryDistributionSpec, m: int = 2) -> CumulantSet:
    return CumulantSet(cumulant_22(spec), tuple(absolute_moment(spec, k) for k in range(1, 2 * m + 1)))


@dataclass
class MomentReport:
    label: str
    samples: int
    values: dict
    stderr: dict
    required: dict
    flagged: list

    @property
    def ok(self) -> bool:
        return not self.flagged


def verify_moment_conditions(spec: EntryDistributionSpec, samples: int = 10**6, seed=0,
                             nsigma: float = 4.0) -> MomentReport:
    """Empirical E x, E x^2, E|x|^2, E|x|^4 with CLT standard errors.

    A moment is flagged when it misses its required value by more than
    ``nsigma`` standard errors (plus a rounding allowance for laws whose
    moments are deterministic).
    """
    if samples < 1000:
        raise ValueError("verify_moment_conditions needs at least 1000 samples")
    x = sample_entries(spec, np.random.default_rng(seed), samples)
    a2 = (x * x.conj()).real
    columns = {"E x": x, "E x^2": x * x, "E|x|^2": a2, "E|x|^4": a2 * a2}
    required = {"E x": 0.0, "E x^2": 0.0, "E|x|^2": 1.0, "E|x|^4": absolute_moment(spec, 4)}
    values, stderr, flagged = {}, {}, []
    for name, col in columns.items():
        mean = col.mean()
        se = math.sqrt(np.mean(np.abs(col - mean) ** 2) / samples)
        values[name] = complex(mean) if np.iscomplexobj(col) else float(mean)
        stderr[name] = se
        if abs(mean - required[name]) > nsigma * se + 1e-12:
            flagged.append(name)
    return MomentReport(spec.label, samples, values, stderr, required, flagged)
