"""Integration on (0, ∞), over quasi-balls and their complements.

Radial integrands go through the polar decomposition and an adaptive 1D
rule (QUADPACK via scipy). Non-radial integrands are handled by Monte Carlo
with uniform quasi-ball samples obtained by rejection from the unit box.

Radial callables take a float radius. Non-radial callables take an array of
points of shape (M, N) and return M values.
"""

from __future__ import annotations

import enum
import math
import warnings
import zlib
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .groups import DomainError, NormKind, QuasiNorm, ball_volume, dilate

__all__ = [
    "IntegralResult",
    "IntegrationError",
    "Method",
    "QuadratureConfig",
    "integrate_ball",
    "integrate_complement",
    "integrate_halfline",
    "integrate_interval",
    "integrate_radial_group",
    "rng_for",
    "sample_unit_ball",
    "sample_unit_sphere",
    "sphere_average",
]


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 500
    mc_samples: int = 200_000
    seed: int = 0
    stream: str = ""  # case id; folded into every Monte Carlo seed

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.mc_samples < 1000:
            raise ValueError("mc_samples must be at least 1000")
        if self.max_subdivisions < 1 or self.seed < 0:
            raise ValueError("max_subdivisions must be positive and seed non-negative")

    def with_(self, **changes) -> QuadratureConfig:
        return replace(self, **changes)


class Method(enum.Enum):
    ADAPTIVE_1D = "adaptive_1d"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    method: Method = Method.ADAPTIVE_1D
    samples_or_evals: int = 0

    def __post_init__(self):
        if not math.isfinite(self.error_estimate) or self.error_estimate < 0:
            raise ValueError(f"bad error estimate {self.error_estimate}")

    @property
    def rel_error(self) -> float:
        if self.value == 0:
            return 0.0 if self.error_estimate == 0 else math.inf
        return self.error_estimate / abs(self.value)

    def scaled(self, c: float) -> IntegralResult:
        return replace(self, value=c * self.value, error_estimate=abs(c) * self.error_estimate)

    def __add__(self, other: IntegralResult) -> IntegralResult:
        method = self.method if self.method is other.method else Method.MONTE_CARLO
        if self.method is Method.MONTE_CARLO and other.method is Method.MONTE_CARLO:
            err = math.hypot(self.error_estimate, other.error_estimate)
        else:
            err = self.error_estimate + other.error_estimate
        return IntegralResult(self.value + other.value, err, method,
                              self.samples_or_evals + other.samples_or_evals)


class IntegrationError(ArithmeticError):
    """Quadrature failed; ``partial`` holds the last value (may be None)."""

    def __init__(self, message: str, partial: float | None = None, point: float | None = None):
        super().__init__(message)
        self.partial = partial
        self.point = point


class _Guard:
    """Wraps an integrand, counts calls, and pins the first non-finite value."""

    def __init__(self, f: Callable[[float], float], where: Callable[[float], float]):
        self.f = f
        self.where = where
        self.calls = 0
        self.bad: float | None = None

    def __call__(self, t: float) -> float:
        self.calls += 1
        y = self.f(t)
        if not math.isfinite(y):
            if self.bad is None:
                self.bad = self.where(t)
            return 0.0
        return y


def _quad(g: _Guard, lo: float, hi: float, cfg: QuadratureConfig, points=None) -> IntegralResult:
    kw = dict(epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions, full_output=1)
    pts = sorted(p for p in (points or ()) if lo < p < hi)
    if pts:
        kw["points"] = pts
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(g, lo, hi, **kw)
        v0, e0 = out[0], out[1]
        if v0 != 0.0 and e0 > cfg.rel_tol * abs(v0) and math.isfinite(v0):
            # abs_tol let a small-magnitude integral through; redo relative to it
            kw["epsabs"] = 0.1 * cfg.rel_tol * abs(v0)
            out = integrate.quad(g, lo, hi, **kw)
    value, err, info = out[0], out[1], out[2]
    if g.bad is not None:
        raise IntegrationError(
            f"integrand is not finite at r={g.bad!r}", partial=value, point=g.bad)
    ier = 0 if len(out) == 3 else out[3]
    tol = cfg.rel_tol * abs(value) + cfg.abs_tol
    # ier=2 (roundoff in the extrapolation table) is routine for power-law
    # endpoints; accept whenever the error estimate meets the tolerance
    if not err <= tol:
        msg = out[4] if len(out) > 4 else "quadrature failed"
        raise IntegrationError(
            f"adaptive quadrature did not converge (ier={ier}, value={value!r}, "
            f"error={err:.3g}): {msg.splitlines()[0] if isinstance(msg, str) else msg}",
            partial=value)
    if not math.isfinite(value):
        raise IntegrationError("quadrature returned a non-finite value", partial=value)
    return IntegralResult(value, err, Method.ADAPTIVE_1D, info["neval"])


def integrate_interval(f: Callable[[float], float], lo: float, hi: float,
                       cfg: QuadratureConfig = QuadratureConfig(),
                       breakpoints: Sequence[float] = ()) -> IntegralResult:
    """Adaptive quadrature of f over a finite interval [lo, hi]."""
    if not lo <= hi:
        raise DomainError(f"empty interval [{lo}, {hi}]")
    if lo == hi:
        return IntegralResult(0.0, 0.0)
    return _quad(_Guard(f, lambda t: t), lo, hi, cfg, breakpoints)


def integrate_halfline(f: Callable[[float], float], cfg: QuadratureConfig = QuadratureConfig(),
                       *, breakpoints: Sequence[float] = (), scale: float = 1.0,
                       start: float = 0.0) -> IntegralResult:
    """∫_start^∞ f(r) dr via r = start + scale·t/(1−t), t ∈ (0, 1).

    ``breakpoints`` are radii where f has kinks or jumps; ``scale`` puts the
    midpoint t = 1/2 at r = start + scale.
    """
    if not scale > 0:
        raise DomainError("scale must be positive")

    def g(t: float) -> float:
        if t >= 1.0:
            return 0.0
        u = 1.0 - t
        return f(start + scale * t / u) * scale / (u * u)

    pts = [(b - start) / (scale + b - start) for b in breakpoints if b > start]
    return _quad(_Guard(g, lambda t: start + scale * t / (1.0 - t)), 0.0, 1.0, cfg, pts)


# random streams -------------------------------------------------------------

def _tag_hash(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def rng_for(cfg: QuadratureConfig, tag: str) -> np.random.Generator:
    """Generator seeded from (seed, case stream, call-site tag)."""
    seq = np.random.SeedSequence([cfg.seed, _tag_hash(cfg.stream), _tag_hash(tag)])
    return np.random.default_rng(seq)


def sample_unit_ball(n: QuasiNorm, size: int, rng: np.random.Generator,
                     *, min_acceptance: float = 1e-3) -> np.ndarray:
    """Uniform samples in B(0, 1) by rejection from [-1, 1]^N (or (0, 1))."""
    dim = n.group.ambient_dim
    lo = 0.0 if n.kind is NormKind.HALF_LINE else -1.0
    out = []
    have = drawn = 0
    while have < size:
        m = max(2 * (size - have), 1024)
        pts = rng.uniform(lo, 1.0, size=(m, dim))
        keep = pts[n(pts) < 1.0]
        drawn += m
        have += len(keep)
        out.append(keep)
        if drawn >= 10_000 and have < min_acceptance * drawn:
            raise IntegrationError(
                f"rejection acceptance {have / drawn:.2e} below {min_acceptance:g} for {n!r}")
    return np.concatenate(out)[:size]


def sample_unit_sphere(n: QuasiNorm, size: int, rng: np.random.Generator) -> np.ndarray:
    """σ-distributed points on the unit quasi-sphere.

    Uniform ball points have polar density r^{Q-1} dr dσ, so projecting
    x ↦ D_{1/|x|} x yields the normalised surface measure σ/|S|.
    """
    x = sample_unit_ball(n, size, rng)
    r = n(x)
    r = np.where(r > 0, r, 1.0)
    return x / np.power(r[:, None], np.asarray(n.group.dilation_exponents))


def _mc_mean(values: np.ndarray) -> tuple[float, float]:
    if not np.all(np.isfinite(values)):
        bad = np.flatnonzero(~np.isfinite(values))[0]
        raise IntegrationError(f"integrand not finite at Monte Carlo sample {bad}")
    m = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(len(values)))
    return m, se


# group integrals -------------------------------------------------------------

_LOG_SPAN = 40.0


def _exp_tail(g: Callable[[float], float], end: float, sign: float) -> IntegralResult:
    """∫ beyond ``end`` (in direction ``sign``) assuming g decays exponentially there.

    The rate comes from two finite differences; their disagreement is the
    error estimate.
    """
    g0, g1, g2 = (g(end - sign * k) for k in (0.0, 1.0, 2.0))
    if g0 == 0.0:
        return IntegralResult(0.0, 0.0)
    if not (g1 > 0 and g2 > 0 and g0 > 0):
        raise IntegrationError(f"cannot fit the tail beyond s={end:g}", point=end)
    k1, k2 = math.log(g1 / g0), math.log(g2 / g1)
    if not (k1 > 0 and k2 > 0):
        raise IntegrationError(
            f"integrand does not decay beyond log-radius {end:g} (rate {k1:.3g})", point=end)
    return IntegralResult(g0 / k1, abs(g0 / k1 - g0 / k2))


def _local_exponent(h: Callable[[float], float], t1: float, t2: float) -> float | None:
    try:
        a, b = abs(h(t1)), abs(h(t2))
    except (OverflowError, ValueError, ZeroDivisionError):
        return None
    if a == 0 or b == 0 or not (math.isfinite(a) and math.isfinite(b)):
        return None
    return math.log(b / a) / math.log(t2 / t1)


def _check_power_tails(h: Callable[[float], float], scale: float) -> None:
    """Reject ∫_0^∞ h when h behaves like a non-integrable power at 0 or ∞."""
    k_inf = _local_exponent(h, scale * 1e6, scale * 1e8)
    if k_inf is not None and k_inf > -1.0 + 1e-3:
        raise IntegrationError(f"integral diverges at infinity (integrand ~ r^{k_inf:.3f})",
                               point=math.inf)
    k_0 = _local_exponent(h, scale * 1e-8, scale * 1e-6)
    if k_0 is not None and k_0 < -1.0 - 1e-3:
        raise IntegrationError(f"integral diverges at the origin (integrand ~ r^{k_0:.3f})",
                               point=0.0)


def integrate_radial_group(n: QuasiNorm, f_radial: Callable[[float], float],
                           cfg: QuadratureConfig = QuadratureConfig(),
                           *, breakpoints: Sequence[float] = (), scale: float = 1.0,
                           log_variable: bool = False) -> IntegralResult:
    """∫_G f(|x|) dx = |S| ∫_0^∞ f(r) r^{Q-1} dr.

    With ``log_variable`` the radius is written r = scale·e^s, which turns
    slowly decaying power laws at 0 and ∞ into exponentials in s.
    """
    Q = n.Q
    if not log_variable:
        _check_power_tails(lambda r: f_radial(r) * r ** (Q - 1), scale)
        res = integrate_halfline(lambda r: f_radial(r) * r ** (Q - 1), cfg,
                                 breakpoints=breakpoints, scale=scale)
        return res.scaled(n.sphere_measure)

    def g(s: float) -> float:
        r = scale * math.exp(s)
        return f_radial(r) * r ** Q

    guard = _Guard(g, lambda s: scale * math.exp(s))
    L = _LOG_SPAN
    cuts = sorted(c for c in (math.log(b / scale) for b in breakpoints if b > 0) if -L < c < L)
    edges = [-L, *cuts, L]
    res = IntegralResult(0.0, 0.0)
    for x0, x1 in zip(edges, edges[1:]):
        res = res + _quad(guard, x0, x1, cfg)
    for end, sign in ((L, 1.0), (-L, -1.0)):
        res = res + _exp_tail(guard, end, sign)
    return res.scaled(n.sphere_measure)


def integrate_ball(n: QuasiNorm, f: Callable, R: float,
                   cfg: QuadratureConfig = QuadratureConfig(), *, radial: bool = False,
                   breakpoints: Sequence[float] = (), tag: str = "ball") -> IntegralResult:
    """∫_{B(0,R)} f.

    Radial: |S| R^Q ∫_0^1 f(Rs) s^{Q-1} ds. Otherwise: Monte Carlo with
    uniform samples of B(0, R); the value is |B(0,R)| times the sample mean
    and the error is its standard error.
    """
    if not R > 0:
        raise DomainError(f"ball radius must be positive, got {R}")
    Q = n.Q
    if radial:
        # s = e^{-w}: the origin goes to w = ∞ where s^Q decays exponentially
        def h(w: float) -> float:
            if Q * w > 650.0:
                # s^Q underflows; kernels of order s^{-Q+} would overflow
                return 0.0
            s = math.exp(-w)
            if R * s == 0.0:
                return 0.0
            return f(R * s) * s ** Q

        guard = _Guard(h, lambda w: R * math.exp(-w))
        edges = [0.0, *sorted(-math.log(b / R) for b in breakpoints if 0 < b < R)]
        res = IntegralResult(0.0, 0.0)
        for w0, w1 in zip(edges, edges[1:]):
            res = res + _quad(guard, w0, w1, cfg)
        res = res + _quad(guard, edges[-1], math.inf, cfg)
        return res.scaled(n.sphere_measure * R ** Q)
    rng = rng_for(cfg, tag)
    x = dilate(n.group, R, sample_unit_ball(n, cfg.mc_samples, rng))
    m, se = _mc_mean(np.asarray(f(x), dtype=float))
    vol = ball_volume(n, R)
    return IntegralResult(vol * m, vol * se, Method.MONTE_CARLO, cfg.mc_samples)


def integrate_complement(n: QuasiNorm, f: Callable, R: float,
                         cfg: QuadratureConfig = QuadratureConfig(), *, radial: bool = False,
                         decay: float | None = None, breakpoints: Sequence[float] = (),
                         tag: str = "complement") -> IntegralResult:
    """∫_{G \\ B(0,R)} f.

    Radial: |S| ∫_R^∞ f(r) r^{Q-1} dr with r = R·e^w. Otherwise:
    Monte Carlo with σ-distributed directions and radii drawn from the
    density ∝ r^{Q-1-decay} on (R, ∞); ``decay`` must exceed Q and should
    match the integrand's decay rate in |x|.
    """
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R}")
    Q = n.Q
    if radial:
        # R^Q ∫_0^∞ f(R e^w) e^{Qw} dw keeps the integrand scale-free and
        # turns power-law tails into exponential ones
        def h(w: float) -> float:
            if Q * w > 600.0:
                # far beyond any integrable tail; u^Q would overflow
                return 0.0
            u = math.exp(w)
            if math.isinf(R * u):
                return 0.0
            return f(R * u) * u ** Q

        guard = _Guard(h, lambda w: R * math.exp(w))
        edges = [0.0, *sorted(math.log(b / R) for b in breakpoints if b > R)]
        res = IntegralResult(0.0, 0.0)
        for w0, w1 in zip(edges, edges[1:]):
            res = res + _quad(guard, w0, w1, cfg)
        res = res + _quad(guard, edges[-1], math.inf, cfg)
        return res.scaled(n.sphere_measure * R ** Q)
    s = 2.0 * Q if decay is None else float(decay)
    if not s > Q:
        raise DomainError(f"importance exponent {s} must exceed Q={Q}")
    rng = rng_for(cfg, tag)
    sigma = sample_unit_sphere(n, cfg.mc_samples, rng)
    # inverse CDF of (s-Q) R^{s-Q} r^{Q-1-s} on (R, ∞)
    u = rng.uniform(size=cfg.mc_samples)
    r = R * (1.0 - u) ** (-1.0 / (s - Q))
    x = sigma * np.power(r[:, None], np.asarray(n.group.dilation_exponents))
    w = r ** s / ((s - Q) * R ** (s - Q))
    m, se = _mc_mean(np.asarray(f(x), dtype=float) * w)
    S = n.sphere_measure
    return IntegralResult(S * m, S * se, Method.MONTE_CARLO, cfg.mc_samples)


def sphere_average(n: QuasiNorm, u: Callable, r: float,
                   cfg: QuadratureConfig = QuadratureConfig(), *, radial: bool = False,
                   tag: str = "sphere") -> IntegralResult:
    """(1/|S|) ∫_S u(D_r σ) dσ."""
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    if radial:
        val = float(u(r))
        if not math.isfinite(val):
            raise IntegrationError(f"weight not finite at radius {r}", point=r)
        return IntegralResult(val, 0.0, Method.ADAPTIVE_1D, 1)
    sigma = sample_unit_sphere(n, cfg.mc_samples, rng_for(cfg, tag))
    m, se = _mc_mean(np.asarray(u(dilate(n.group, r, sigma)), dtype=float))
    return IntegralResult(m, se, Method.MONTE_CARLO, cfg.mc_samples)
