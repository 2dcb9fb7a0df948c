"""Geometric-mean type operators over quasi-balls and weighted L^p norms.

Each mean is computed in log space. The ``log_*`` functions return an
:class:`IntegralResult` holding the logarithm of the mean and its error.
The plain functions exponentiate it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .groups import DomainError, QuasiNorm, ball_volume, dilate
from .quadrature import (
    IntegralResult,
    IntegrationError,
    Method,
    QuadratureConfig,
    integrate_ball,
    integrate_complement,
    integrate_radial_group,
)
from .weights import Weight

__all__ = [
    "SupportHint",
    "TestFunction",
    "conjugate_lcl_mean",
    "geometric_mean",
    "lcl_mean",
    "log_conjugate_lcl_mean",
    "log_geometric_mean",
    "log_lcl_mean",
    "log_power_mean",
    "power_mean",
    "weighted_lp_integral",
    "weighted_lp_norm",
]

DEFAULT_CFG = QuadratureConfig()


class SupportHint(enum.Enum):
    WHOLE_GROUP = "whole_group"
    BALL = "ball"


@dataclass(frozen=True)
class TestFunction:
    """A positive function f on G (or on a ball B(0, support_radius)).

    Radial functions are given by ``log_profile`` (r ↦ log f) so that fast
    decay does not underflow. Non-radial ones are given by ``pointwise``,
    a vectorised map from points (M, N) to values.
    """

    __test__ = False  # not a pytest class

    id: str
    radial: bool
    log_profile: Callable[[float], float] | None = None
    pointwise: Callable[[np.ndarray], np.ndarray] | None = None
    support_radius: float | None = None
    breakpoints: tuple[float, ...] = ()
    scale: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)
    # power-law profile: integrate over the group in log r
    log_variable: bool = False
    # optional log f for non-radial functions, avoids underflow far out
    log_pointwise: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.radial and self.log_profile is None:
            raise DomainError(f"radial test function {self.id!r} needs a log profile")
        if not self.radial and self.pointwise is None:
            raise DomainError(f"test function {self.id!r} needs a pointwise evaluator")
        if self.support_radius is not None and not self.support_radius > 0:
            raise DomainError("support radius must be positive")

    @property
    def support_hint(self) -> SupportHint:
        return SupportHint.WHOLE_GROUP if self.support_radius is None else SupportHint.BALL

    def supported(self, r: float) -> bool:
        return self.support_radius is None or r < self.support_radius

    def log_radial(self, r: float) -> float:
        if not self.radial:
            raise TypeError(f"{self.id} is not radial")
        if not self.supported(r):
            return -math.inf
        return self.log_profile(r)

    def value_radial(self, r: float) -> float:
        return math.exp(self.log_radial(r))

    def log_at(self, n: QuasiNorm, x: np.ndarray) -> np.ndarray:
        if self.radial:
            r = np.atleast_1d(n(x))
            return np.array([self.log_radial(float(t)) for t in r])
        if self.log_pointwise is not None:
            out = np.asarray(self.log_pointwise(x), dtype=float)
        else:
            vals = np.asarray(self.pointwise(x), dtype=float)
            inside = (np.ones(vals.shape, bool) if self.support_radius is None
                      else np.atleast_1d(n(x)) < self.support_radius)
            if np.any(inside & ~(vals > 0)):
                raise DomainError(f"{self.id} is not positive at some sample point")
            with np.errstate(divide="ignore"):
                out = np.log(np.where(inside, vals, 1.0))
        if self.support_radius is not None:
            out = np.where(np.atleast_1d(n(x)) < self.support_radius, out, -np.inf)
        return out

    def at(self, n: QuasiNorm, x: np.ndarray) -> np.ndarray:
        return np.exp(self.log_at(n, x))

    def scaled(self, c: float) -> TestFunction:
        if not c > 0:
            raise DomainError("scaling constant must be positive")
        lc = math.log(c)
        if self.radial:
            lp = self.log_profile
            return replace(self, id=f"{c:g}*{self.id}", log_profile=lambda r: lc + lp(r))
        pw, lpw = self.pointwise, self.log_pointwise
        return replace(self, id=f"{c:g}*{self.id}", pointwise=lambda x: c * pw(x),
                       log_pointwise=None if lpw is None else (lambda x: lc + lpw(x)))

    def dilated(self, n: QuasiNorm, lam: float) -> TestFunction:
        """x ↦ f(D_{1/λ} x): the profile stretched outward by λ."""
        if not lam > 0:
            raise DomainError("dilation parameter must be positive")
        R = None if self.support_radius is None else self.support_radius * lam
        common = dict(id=f"{self.id}@{lam:g}", support_radius=R, scale=self.scale * lam,
                      breakpoints=tuple(b * lam for b in self.breakpoints))
        if self.radial:
            lp = self.log_profile
            return replace(self, log_profile=lambda r: lp(r / lam), **common)
        pw, lpw, g = self.pointwise, self.log_pointwise, n.group
        return replace(self, pointwise=lambda x: pw(dilate(g, 1.0 / lam, x)),
                       log_pointwise=None if lpw is None
                       else (lambda x: lpw(dilate(g, 1.0 / lam, x))), **common)


def _check_radius(r: float) -> float:
    r = float(r)
    if not r > 0 or not math.isfinite(r):
        raise DomainError(f"operators are defined for radii r > 0, got {r}")
    return r


def _ball_log_integral(n, f: TestFunction, r: float, kernel, cfg, tag) -> IntegralResult:
    """∫_{B(0,r)} kernel(|y|/r) log f(y) dy."""
    if f.radial:
        lp = f.log_radial
        return integrate_ball(n, lambda t: kernel(t / r) * lp(t), r, cfg, radial=True,
                              breakpoints=f.breakpoints, tag=tag)
    return integrate_ball(n, lambda x: kernel(np.atleast_1d(n(x)) / r) * f.log_at(n, x), r,
                          cfg, tag=tag)


def log_geometric_mean(n: QuasiNorm, f: TestFunction, r: float,
                       cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralResult:
    """log of exp((1/|B(0,r)|) ∫_{B(0,r)} log f)."""
    r = _check_radius(r)
    if not f.supported(r):
        return IntegralResult(-math.inf, 0.0)
    res = _ball_log_integral(n, f, r, lambda s: 1.0, cfg, f"gm:{f.id}")
    return res.scaled(1.0 / ball_volume(n, r))


def geometric_mean(n, f, r, cfg=DEFAULT_CFG) -> float:
    return math.exp(log_geometric_mean(n, f, r, cfg).value)


def log_lcl_mean(n: QuasiNorm, f: TestFunction, eps: float, r: float,
                 cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralResult:
    """log of exp(ε |B_r|^{-ε} ∫_{B(0,r)} |B(0,|y|)|^{ε-1} log f(y) dy).

    The kernel is rewritten as |B_r|^{ε-1} (|y|/r)^{Q(ε-1)} so the result
    is a scale-free average.
    """
    r = _check_radius(r)
    if not eps > 0:
        raise DomainError(f"ε must be positive, got {eps}")
    if not f.supported(r):
        return IntegralResult(-math.inf, 0.0)
    k = n.Q * (eps - 1.0)
    kernel = (lambda s: 1.0) if k == 0 else (lambda s: s ** k)
    res = _ball_log_integral(n, f, r, kernel, cfg, f"lcl:{f.id}")
    return res.scaled(eps / ball_volume(n, r))


def lcl_mean(n, f, eps, r, cfg=DEFAULT_CFG) -> float:
    return math.exp(log_lcl_mean(n, f, eps, r, cfg).value)


def _tail_exponent(h: Callable[[float], float], t1: float, t2: float) -> float | None:
    a, b = abs(h(t1)), abs(h(t2))
    if a == 0 or b == 0 or not (math.isfinite(a) and math.isfinite(b)):
        return None
    return math.log(b / a) / math.log(t2 / t1)


def log_conjugate_lcl_mean(n: QuasiNorm, f: TestFunction, eps: float, r: float,
                           cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralResult:
    """log of exp(ε |B_r|^{ε} ∫_{G\\B(0,r)} |B(0,|y|)|^{-ε-1} log f(y) dy)."""
    r = _check_radius(r)
    if not eps > 0:
        raise DomainError(f"ε must be positive, got {eps}")
    Q = n.Q
    k = -Q * (eps + 1.0)
    if f.support_radius is not None:
        # log f = -inf on a set of positive measure in the tail
        return IntegralResult(-math.inf, 0.0)
    tag = f"conj:{f.id}"
    if f.radial:
        lp = f.log_radial

        def h(t: float) -> float:
            w = (t / r) ** k
            # far out the kernel underflows before log f overflows
            return 0.0 if w == 0.0 else w * lp(t)

        kappa = _tail_exponent(lambda t: h(t) * t ** (Q - 1), max(r, 1.0) * 1e6, max(r, 1.0) * 1e8)
        if kappa is not None and kappa > -1.0 - 1e-3:
            raise IntegrationError(
                f"tail integral of |B|^(-ε-1) log f diverges for {f.id} "
                f"(tail exponent {kappa:.3f}, need < -1)")
        res = integrate_complement(n, h, r, cfg, radial=True, breakpoints=f.breakpoints,
                                   tag=tag)
    else:
        res = integrate_complement(
            n, lambda x: (np.atleast_1d(n(x)) / r) ** k * f.log_at(n, x), r, cfg,
            decay=-k, tag=tag)
    return res.scaled(eps / ball_volume(n, r))


def conjugate_lcl_mean(n, f, eps, r, cfg=DEFAULT_CFG) -> float:
    return math.exp(log_conjugate_lcl_mean(n, f, eps, r, cfg).value)


def log_power_mean(n: QuasiNorm, f: TestFunction, beta: float, r: float,
                   cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralResult:
    """log of ((1/|B_r|) ∫_{B(0,r)} f^β)^{1/β}.

    Integrates expm1(β log f) so that small β keeps full relative accuracy.
    """
    r = _check_radius(r)
    if not beta > 0:
        raise DomainError(f"β must be positive, got {beta}")
    tag = f"pm:{f.id}"
    if f.radial:
        lp = f.log_radial
        res = integrate_ball(n, lambda t: math.expm1(beta * lp(t)), r, cfg, radial=True,
                             breakpoints=f.breakpoints, tag=tag)
    else:
        res = integrate_ball(n, lambda x: np.expm1(beta * f.log_at(n, x)), r, cfg, tag=tag)
    m = res.value / ball_volume(n, r)
    if not m > -1.0:
        raise IntegrationError("power mean underflowed to zero")
    err = res.error_estimate / ball_volume(n, r) / (beta * (1.0 + m))
    return IntegralResult(math.log1p(m) / beta, err, res.method, res.samples_or_evals)


def power_mean(n, f, beta, r, cfg=DEFAULT_CFG) -> float:
    return math.exp(log_power_mean(n, f, beta, r, cfg).value)


def weighted_lp_integral(n: QuasiNorm, f: TestFunction, v: Weight, p: float,
                         cfg: QuadratureConfig = DEFAULT_CFG, *,
                         decay: float | None = None) -> IntegralResult:
    """∫_G f^p v."""
    if not p > 0:
        raise DomainError(f"p must be positive, got {p}")
    tag = f"lp:{f.id}:{v.label}"
    if f.radial and v.radial_only:
        lp = f.log_radial

        def h(t: float) -> float:
            lf = lp(t)
            if lf == -math.inf:
                return 0.0
            return math.exp(p * lf + v.log_radial(n, t))

        if f.support_radius is not None:
            return integrate_ball(n, h, f.support_radius, cfg, radial=True,
                                  breakpoints=f.breakpoints, tag=tag)
        return integrate_radial_group(n, h, cfg, breakpoints=f.breakpoints, scale=f.scale,
                                      log_variable=f.log_variable)

    def g(x):
        return np.exp(p * f.log_at(n, x)) * v.at_points(n, x)

    R = f.support_radius or f.scale
    inner = integrate_ball(n, g, R, cfg, tag=tag + ":in")
    if f.support_radius is not None:
        return inner
    return inner + integrate_complement(n, g, R, cfg, decay=decay, tag=tag + ":out")


def weighted_lp_norm(n, f, v, p, cfg=DEFAULT_CFG, **kw) -> float:
    val = weighted_lp_integral(n, f, v, p, cfg, **kw).value
    return val ** (1.0 / p)
