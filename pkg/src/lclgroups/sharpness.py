"""Witness families for lower bounds on best constants, and the dilation test
showing that no finite constant exists without the balance condition."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .groups import DomainError, QuasiNorm, ball_volume, log_ball_volume
from .inequalities import (
    CaseError,
    InequalityCase,
    Sides,
    Theorem,
    VacuousInequality,
    _power_sides,
    check_balance,
    conjugate_power_bracket,
    exp_mean_sides,
    power_bracket,
)
from .operators import TestFunction, log_geometric_mean, log_lcl_mean
from .quadrature import IntegrationError, QuadratureConfig, integrate_ball
from .weights import Weight

__all__ = [
    "BlowupResult",
    "DEFAULT_DELTAS",
    "DEFAULT_LAMBDAS",
    "FamilyKind",
    "SharpnessFamily",
    "SharpnessReport",
    "classic_family_eval",
    "classic_sharpness_sweep",
    "converse_witness_lower_bound",
    "dilation_blowup",
    "extrapolate",
    "remark_family_eval",
    "sharpness_sweep",
    "witness_ball_integral",
]

DEFAULT_DELTAS = (0.2, 0.1, 0.05, 0.02, 0.01)
DEFAULT_LAMBDAS = (1e-2, 1e-1, 1.0, 1e1, 1e2)


class FamilyKind(enum.Enum):
    REMARK_DELTA = "RemarkDelta"
    CONVERSE_WITNESS = "ConverseWitness"
    CLASSIC_1D = "Classic1D"


@dataclass(frozen=True)
class SharpnessFamily:
    kind: FamilyKind
    b: float = 0.0
    eps: float = 1.0
    p: float = 1.0
    a: float = 0.0
    radius: float = 1.0

    @classmethod
    def remark_delta(cls, b, eps, p) -> SharpnessFamily:
        fam = cls(FamilyKind.REMARK_DELTA, b=float(b), eps=float(eps), p=float(p))
        if not fam.b + 1 > 0:
            raise DomainError(f"the δ family needs b+1 > 0, got b={b}")
        if not (fam.eps > 0 and fam.p > 0):
            raise DomainError("ε and p must be positive")
        return fam

    @classmethod
    def converse_witness(cls, b, eps, p, radius=1.0) -> SharpnessFamily:
        if not radius > 0:
            raise DomainError("witness radius must be positive")
        return cls(FamilyKind.CONVERSE_WITNESS, b=b, eps=eps, p=p, radius=radius)

    @classmethod
    def classic(cls, a, eps) -> SharpnessFamily:
        if not eps > 0:
            raise DomainError("ε must be positive")
        return cls(FamilyKind.CLASSIC_1D, a=a, eps=eps)

    def check_delta(self, delta: float) -> None:
        if not delta > 0:
            raise DomainError(f"δ must be positive, got {delta}")
        if self.kind is FamilyKind.REMARK_DELTA and not self.eps * delta < self.b + 1:
            raise DomainError(f"εδ = {self.eps * delta:g} must stay below b+1 = {self.b + 1:g}")
        if self.kind is FamilyKind.CLASSIC_1D and not self.eps * delta < self.a + 1:
            raise DomainError(f"εδ = {self.eps * delta:g} must stay below a+1 = {self.a + 1:g}")


def remark_family_eval(n: QuasiNorm, fam: SharpnessFamily, delta: float) -> TestFunction:
    """f_δ: a power of |x| with exponent -(Q/p)(b+1∓εδ) inside/outside B(0,1)."""
    if fam.kind is not FamilyKind.REMARK_DELTA:
        raise DomainError("expected a RemarkDelta family")
    fam.check_delta(delta)
    Q, b, eps, p = n.Q, fam.b, fam.eps, fam.p
    log_pre = (b + 1) / (eps * p) - (b + 1) * math.log(n.unit_ball_volume())
    k_in = -(Q / p) * (b + 1 - eps * delta)
    k_out = -(Q / p) * (b + 1 + eps * delta)

    def lp(r: float) -> float:
        return log_pre + (k_in if r < 1 else k_out) * math.log(r)

    return TestFunction(f"sharpness_delta({b:g},{eps:g},{p:g},{delta:g})", True, lp,
                        breakpoints=(1.0,), meta={"delta": delta}, log_variable=True)


def classic_family_eval(fam: SharpnessFamily, delta: float) -> TestFunction:
    """t^{-(a+1)+εδ} on (0,1), t^{-(a+1)-εδ} on [1,∞)."""
    fam.check_delta(delta)
    a, eps = fam.a, fam.eps
    k_in, k_out = -(a + 1) + eps * delta, -(a + 1) - eps * delta

    def lp(t: float) -> float:
        return (k_in if t < 1 else k_out) * math.log(t)

    return TestFunction(f"classic_delta({a:g},{eps:g},{delta:g})", True, lp,
                        breakpoints=(1.0,), meta={"delta": delta}, log_variable=True)


@dataclass
class SharpnessReport:
    deltas: list[float]
    ratios: list[float]
    extrapolated_limit: float
    target: float
    rel_gap: float
    lhs: list[float] = field(default_factory=list)
    rhs: list[float] = field(default_factory=list)
    errs: list[float] = field(default_factory=list)
    bracket: tuple[float, float] | None = None

    def rows(self) -> list[dict]:
        return [dict(delta=d, lhs=l, rhs=r, ratio=x, err=e)
                for d, l, r, x, e in zip(self.deltas, self.lhs, self.rhs, self.ratios, self.errs)]


def extrapolate(deltas: Sequence[float], ratios: Sequence[float]) -> float:
    """Linear extrapolation to δ = 0 through the two smallest δ."""
    (d1, r1), (d2, r2) = sorted(zip(deltas, ratios), reverse=True)[-2:]
    return r2 - d2 * (r1 - r2) / (d1 - d2)


def _grid(deltas) -> list[float]:
    ds = [float(d) for d in deltas]
    if len(ds) < 2:
        raise DomainError("a sweep needs at least two δ values")
    if any(x <= y for x, y in zip(ds, ds[1:])):
        raise DomainError("δ grid must be strictly decreasing")
    return ds


def _finish(ds, sides: list[Sides], target, bracket=None) -> SharpnessReport:
    ratios = [s.ratio for s in sides]
    lim = extrapolate(ds, ratios)
    return SharpnessReport(ds, ratios, lim, target, abs(lim - target) / target,
                           [s.lhs for s in sides], [s.rhs for s in sides],
                           [s.err_budget for s in sides], bracket)


def sharpness_sweep(case: InequalityCase, deltas: Sequence[float] = DEFAULT_DELTAS,
                    fam: SharpnessFamily | None = None) -> SharpnessReport:
    """Ratio of the conjugate power-weight inequality on f_δ as δ → 0⁺."""
    if case.theorem is not Theorem.CONJUGATE_POWER_LCL:
        raise CaseError("theorem", "the δ sweep runs on ConjugatePowerLCL cases")
    if case.p != case.q or case.a != case.b:
        raise CaseError("p/q/a/b", "the δ family is claimed for p = q and a = b only")
    fam = fam or SharpnessFamily.remark_delta(case.b, case.eps, case.p)
    ds = _grid(deltas)
    sides = []
    for d in ds:
        f = remark_family_eval(case.norm, fam, d)
        try:
            sides.append(_power_sides(case.with_f(f), conjugate=True))
        except (IntegrationError, VacuousInequality) as exc:
            raise IntegrationError(f"sweep failed at δ={d:g}: {exc}") from exc
    target = math.exp(-(case.b + 1) / (case.eps * case.p))
    return _finish(ds, sides, target,
                   conjugate_power_bracket(case.p, case.q, case.b, case.eps))


def classic_sharpness_sweep(a: float, eps: float, deltas: Sequence[float] = DEFAULT_DELTAS,
                            cfg: QuadratureConfig = QuadratureConfig()) -> SharpnessReport:
    """Half-line ratio lhs / ∫ x^a f for the classical power family."""
    fam = SharpnessFamily.classic(a, eps)
    n = QuasiNorm.half_line()
    w = Weight.ball_power(a)
    ds = _grid(deltas)
    sides = []
    for d in ds:
        f = classic_family_eval(fam, d)
        try:
            sides.append(exp_mean_sides(n, f, lambda r, f=f: log_lcl_mean(n, f, eps, r, cfg),
                                        w, w, 1.0, 1.0, cfg))
        except (IntegrationError, VacuousInequality) as exc:
            raise IntegrationError(f"sweep failed at δ={d:g}: {exc}") from exc
    target = math.exp((a + 1) / eps)
    return _finish(ds, sides, target)


def witness_ball_integral(n: QuasiNorm, p0: float, q: float, R: float,
                          cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """(∫_{B(0,R)} |B(0,|w|)|^{q/p0 - 1} dw)^{1/q}; equals |B(0,R)|^{1/p0} (p0/q)^{1/q}."""
    k = q / p0 - 1.0
    res = integrate_ball(n, lambda t: ball_volume(n, t) ** k, R, cfg, radial=True)
    return res.value ** (1.0 / q)


def converse_witness_lower_bound(case: InequalityCase, R: float = 1.0) -> float:
    """Lower bound on C implied by the witness |B(0,|z|)|^{(1-(b+1)/ε)/p} χ_{B(0,R)}.

    The inequality is tested in its equivalent form, where the operator is
    the plain geometric mean and the weights are |B|^{(a+1)/ε-1} and
    |B|^{(b+1)/ε-1}; that form carries the factor ε^{1/q-1/p}.
    """
    p, q, a, b, eps = case.p, case.q, case.a, case.b, case.eps
    if not check_balance(p, q, a, b):
        raise CaseError("a/b", "the witness bound assumes p(a+1) = q(b+1)")
    n, cfg = case.norm, case.cfg
    s = (1.0 - (b + 1) / eps) / p
    F = TestFunction(f"witness({s:g},{R:g})", True,
                     lambda r: s * log_ball_volume(n, r), support_radius=R)
    sides = exp_mean_sides(n, F, lambda r: log_geometric_mean(n, F, r, cfg),
                           Weight.ball_power((a + 1) / eps - 1), Weight.ball_power((b + 1) / eps - 1),
                           p, q, cfg)
    bound = sides.ratio / eps ** (1.0 / q - 1.0 / p)
    lower, _ = power_bracket(p, q, b, eps)
    if bound < lower * (1 - 1e-4):
        raise ArithmeticError(f"witness bound {bound:.10g} fell below {lower:.10g}")
    return bound


@dataclass
class BlowupResult:
    points: list[tuple[float, float]]
    slope: float
    predicted: float
    dropped: list[float] = field(default_factory=list)

    @property
    def usable(self) -> int:
        return len(self.points)

    def ratio_at(self, lam: float) -> float:
        for x, r in self.points:
            if math.isclose(x, lam):
                return r
        raise KeyError(lam)

    def __iter__(self):
        return iter(self.points)


def dilation_blowup(case: InequalityCase, lambdas: Sequence[float] = DEFAULT_LAMBDAS,
                    f: TestFunction | None = None) -> BlowupResult:
    """Ratio on x ↦ f(D_{1/λ}x) and the fitted slope of log ratio against log λ.

    Homogeneity forces slope Q((a+1)/q - (b+1)/p); a nonzero slope means the
    ratio is unbounded in λ, so no finite constant exists.
    """
    if case.theorem not in (Theorem.POWER_LCL, Theorem.CONJUGATE_POWER_LCL):
        raise CaseError("theorem", "dilation test runs on power-weight cases")
    conj = case.theorem is Theorem.CONJUGATE_POWER_LCL
    f = f or case.f
    n = case.norm
    pts, dropped = [], []
    for lam in lambdas:
        try:
            s = _power_sides(case.with_f(f.dilated(n, lam)), conjugate=conj)
            r = s.ratio
        except (IntegrationError, VacuousInequality, OverflowError, ZeroDivisionError):
            r = math.nan
        if math.isfinite(r) and r > 0:
            pts.append((float(lam), r))
        else:
            dropped.append(float(lam))
    if len(pts) < 3:
        raise IntegrationError(f"only {len(pts)} usable dilation points (need 3)")
    x = np.log([t[0] for t in pts])
    y = np.log([t[1] for t in pts])
    slope = float(np.polyfit(x, y, 1)[0])
    predicted = n.Q * ((case.a + 1) / case.q - (case.b + 1) / case.p)
    return BlowupResult(pts, slope, predicted, dropped)
