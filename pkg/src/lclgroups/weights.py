"""Positive weight functions u, v on a homogeneous group."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .groups import QuasiNorm, ball_volume, log_ball_volume

__all__ = ["Weight", "WeightKind"]


class WeightKind(enum.Enum):
    ONE = "one"
    BALL_POWER = "ball_power"
    RADIAL_GENERAL = "radial"
    GENERAL = "general"


@dataclass(frozen=True)
class Weight:
    """A weight w(x) > 0 on G minus the origin.

    ``BALL_POWER`` is |B(0, |x|)|^exponent. ``RADIAL_GENERAL`` wraps a
    function of the radius, optionally with an exact logarithm. ``GENERAL``
    wraps a vectorised function of points.
    """

    kind: WeightKind
    exponent: float = 0.0
    func: Callable | None = None
    log_func: Callable[[float], float] | None = None
    label: str = ""

    @classmethod
    def one(cls) -> Weight:
        return cls(WeightKind.ONE, label="one")

    @classmethod
    def ball_power(cls, exponent: float) -> Weight:
        return cls(WeightKind.BALL_POWER, float(exponent), label=f"ball_power({exponent:g})")

    @classmethod
    def norm_power(cls, exponent: float) -> Weight:
        k = float(exponent)
        return cls(WeightKind.RADIAL_GENERAL, k, func=lambda r: r ** k,
                   log_func=lambda r: k * math.log(r), label=f"norm_power({k:g})")

    @classmethod
    def radial(cls, func: Callable[[float], float], log_func=None, label="radial") -> Weight:
        return cls(WeightKind.RADIAL_GENERAL, func=func, log_func=log_func, label=label)

    @classmethod
    def general(cls, func: Callable[[np.ndarray], np.ndarray], label="general") -> Weight:
        return cls(WeightKind.GENERAL, func=func, label=label)

    @property
    def radial_only(self) -> bool:
        return self.kind is not WeightKind.GENERAL

    def log_radial(self, n: QuasiNorm, r: float) -> float:
        if self.kind is WeightKind.ONE:
            return 0.0
        if self.kind is WeightKind.BALL_POWER:
            if self.exponent == 0:
                return 0.0
            return self.exponent * log_ball_volume(n, r)
        if self.kind is WeightKind.RADIAL_GENERAL:
            if self.log_func is not None:
                return self.log_func(r)
            w = self.func(r)
            return math.log(w) if w > 0 else -math.inf
        raise TypeError("a general weight has no radial profile; use sphere_average")

    def radial_value(self, n: QuasiNorm, r: float) -> float:
        if self.kind is WeightKind.RADIAL_GENERAL and self.log_func is None:
            return float(self.func(r))
        return math.exp(self.log_radial(n, r))

    def at_points(self, n: QuasiNorm, x: np.ndarray) -> np.ndarray:
        if self.kind is WeightKind.GENERAL:
            return np.asarray(self.func(x), dtype=float)
        r = np.atleast_1d(n(x))
        if self.kind is WeightKind.ONE:
            return np.ones_like(r)
        if self.kind is WeightKind.BALL_POWER:
            return ball_volume(n, r) ** self.exponent
        return np.array([self.radial_value(n, float(t)) for t in r])
