from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PointConfig:
    """Spectral parameters z_j = z0 + zeta_j / sqrt(n) around a bulk point z0."""

    z0: complex
    zetas: tuple
    n: int

    def __post_init__(self):
        object.__setattr__(self, "z0", complex(self.z0))
        object.__setattr__(self, "zetas", tuple(complex(z) for z in self.zetas))
        if abs(self.z0) >= 1.0:
            raise ValueError(f"z0 = {self.z0} is outside the bulk |z0| < 1")
        if not self.zetas:
            raise ValueError("need at least one zeta")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def m(self) -> int:
        return len(self.zetas)

    @property
    def zs(self) -> list:
        s = math.sqrt(self.n)
        return [self.z0 + zeta / s for zeta in self.zetas]

    @property
    def scaled(self) -> list:
        """The points sqrt(n) z_j, i.e. the shifts seen by the unnormalized matrix X."""
        s = math.sqrt(self.n)
        return [s * self.z0 + zeta for zeta in self.zetas]

    def with_n(self, n: int) -> "PointConfig":
        return PointConfig(self.z0, self.zetas, n)
