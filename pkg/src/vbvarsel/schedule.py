"""Temperature schedules for annealed inference."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .exceptions import InvalidSchedule


class ScheduleKind(str, Enum):
    FIXED = "fixed"
    GEOMETRIC = "geometric"
    HARMONIC = "harmonic"


@dataclass(frozen=True)
class TemperatureSchedule:
    """Fixed, geometric or harmonic cooling from ``t0`` down to 1.

    Geometric: ``t0 * rate**i`` with ``rate = (1/t0)**(1/(i_a - 1))``, equal
    to exactly 1 from iteration ``i_a - 1`` on.  Harmonic:
    ``t0 / (1 + rate*i)`` with ``rate = (t0 - 1)/i_a``, exactly 1 from
    iteration ``i_a`` on.  Fixed: ``t0`` throughout.
    """

    kind: ScheduleKind = ScheduleKind.FIXED
    t0: float = 1.0
    annealed_iterations: int = 10

    def __post_init__(self):
        try:
            kind = ScheduleKind(self.kind)
        except ValueError:
            raise InvalidSchedule(f"unknown schedule kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if not (self.t0 >= 1):
            raise InvalidSchedule(f"t0 must be >= 1, got {self.t0}")
        if int(self.annealed_iterations) != self.annealed_iterations:
            raise InvalidSchedule("annealed_iterations must be an integer")
        if kind is ScheduleKind.GEOMETRIC and self.annealed_iterations < 2:
            raise InvalidSchedule("geometric schedule needs annealed_iterations >= 2")
        if kind is ScheduleKind.HARMONIC and self.annealed_iterations < 1:
            raise InvalidSchedule("harmonic schedule needs annealed_iterations >= 1")

    @classmethod
    def fixed(cls, t0=1.0):
        return cls(ScheduleKind.FIXED, t0)

    @classmethod
    def geometric(cls, t0, annealed_iterations):
        return cls(ScheduleKind.GEOMETRIC, t0, annealed_iterations)

    @classmethod
    def harmonic(cls, t0, annealed_iterations):
        return cls(ScheduleKind.HARMONIC, t0, annealed_iterations)

    @property
    def cooling_rate(self) -> float:
        if self.kind is ScheduleKind.GEOMETRIC:
            return (1.0 / self.t0) ** (1.0 / (self.annealed_iterations - 1))
        if self.kind is ScheduleKind.HARMONIC:
            return (self.t0 - 1.0) / self.annealed_iterations
        return 1.0

    def temperature(self, iteration: int) -> float:
        if iteration < 0:
            raise ValueError("iteration must be nonnegative")
        if self.kind is ScheduleKind.FIXED:
            return float(self.t0)
        if self.kind is ScheduleKind.GEOMETRIC:
            if iteration >= self.annealed_iterations - 1:
                return 1.0
            t = self.t0 * self.cooling_rate**iteration
        else:
            if iteration >= self.annealed_iterations:
                return 1.0
            t = self.t0 / (1.0 + self.cooling_rate * iteration)
        # rounding in rate**i must not push an intermediate value below 1
        return max(float(t), 1.0)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "t0": float(self.t0),
            "annealed_iterations": int(self.annealed_iterations),
        }
