from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class LogValue:
    """A number stored as ``phase * exp(log_abs)``.

    ``phase`` is a unit complex number (``1.0`` for the nonnegative reals that
    make up almost every quantity in this package). ``is_zero`` marks an exact
    zero, which has no finite logarithm.
    """

    log_abs: float
    phase: complex = 1.0
    is_zero: bool = False

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(-math.inf, 1.0, True)

    @classmethod
    def from_value(cls, x) -> "LogValue":
        if x == 0:
            return cls.zero()
        return cls(math.log(abs(x)), x / abs(x))

    @property
    def value(self):
        if self.is_zero:
            return 0.0
        v = self.phase * math.exp(self.log_abs)
        return v.real if isinstance(v, complex) and v.imag == 0.0 else v

    @property
    def is_positive(self) -> bool:
        return not self.is_zero and abs(self.phase - 1.0) < 1e-9

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.is_zero or other.is_zero:
            return LogValue.zero()
        return LogValue(self.log_abs + other.log_abs, _unit(self.phase * other.phase))

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.is_zero:
            raise ZeroDivisionError("division by an exact zero LogValue")
        if self.is_zero:
            return LogValue.zero()
        return LogValue(self.log_abs - other.log_abs, _unit(self.phase / other.phase))

    def scale(self, log_factor: float) -> "LogValue":
        """Multiply by the positive real ``exp(log_factor)``."""
        if self.is_zero:
            return self
        return LogValue(self.log_abs + log_factor, self.phase)


def _unit(z) -> complex:
    r = abs(z)
    return z / r if r else 1.0
