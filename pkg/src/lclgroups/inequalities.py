"""Per-theorem verifiers and the admissibility functionals D_Q, D̃_Q and A_Q.

A verifier evaluates both sides of one inequality for one test function and
returns a :class:`VerificationReport`. Pass/fail is multiplicative: the
ratio lhs/rhs must not exceed the theoretical upper constant by more than
the propagated quadrature error ``err_budget``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .groups import DomainError, Law, NormKind, QuasiNorm, ball_volume, log_ball_volume
from .operators import (
    TestFunction,
    log_conjugate_lcl_mean,
    log_geometric_mean,
    log_lcl_mean,
    weighted_lp_integral,
)
from .quadrature import (
    IntegralResult,
    IntegrationError,
    QuadratureConfig,
    integrate_ball,
    integrate_complement,
    integrate_radial_group,
    sphere_average,
)
from .weights import Weight, WeightKind

__all__ = [
    "CaseError",
    "InequalityCase",
    "SupResult",
    "Theorem",
    "VacuousInequality",
    "VerificationReport",
    "check_balance",
    "compute_AQ",
    "compute_DQ",
    "compute_DQ_tilde",
    "default_grid",
    "hardy_bracket",
    "power_bracket",
    "conjugate_power_bracket",
    "verify",
    "verify_conjugate_general",
    "verify_conjugate_power",
    "verify_euclidean_ball",
    "verify_general_lcl",
    "verify_hardy",
    "verify_levin_1d",
    "verify_love_1d",
    "verify_power_lcl",
]


class CaseError(ValueError):
    """Invalid case configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class VacuousInequality(ArithmeticError):
    """The right-hand side diverges, so the inequality says nothing."""


class Theorem(enum.Enum):
    LEVIN2_1D = "Levin2_1D"
    LEVIN1_1D = "Levin1_1D"
    KNOPP = "Knopp"
    EUCLIDEAN_BALL = "EuclideanBall"
    HARDY_TWO_WEIGHT = "HardyTwoWeight"
    GENERAL_LCL = "GeneralLCL"
    POWER_LCL = "PowerLCL"
    CONJUGATE_GENERAL_LCL = "ConjugateGeneralLCL"
    CONJUGATE_POWER_LCL = "ConjugatePowerLCL"


_HALF_LINE_THEOREMS = {Theorem.LEVIN2_1D, Theorem.LEVIN1_1D, Theorem.KNOPP}
_POWER_THEOREMS = {Theorem.POWER_LCL, Theorem.CONJUGATE_POWER_LCL, Theorem.EUCLIDEAN_BALL}


@dataclass
class InequalityCase:
    theorem: Theorem
    norm: QuasiNorm
    f: TestFunction
    p: float = 1.0
    q: float = 1.0
    a: float = 0.0
    b: float = 0.0
    eps: float = 1.0
    u: Weight | None = None
    v: Weight | None = None
    cfg: QuadratureConfig = field(default_factory=QuadratureConfig)
    case_id: str = "case"

    def __post_init__(self):
        self.theorem = Theorem(self.theorem)
        self.validate()

    @property
    def group(self):
        return self.norm.group

    def validate(self) -> None:
        p, q = self.p, self.q
        if self.theorem is Theorem.HARDY_TWO_WEIGHT:
            if not 1 < p <= q:
                raise CaseError("p/q", f"Hardy inequality needs 1 < p <= q, got p={p}, q={q}")
        elif not 0 < p <= q:
            raise CaseError("p/q", f"needs 0 < p <= q, got p={p}, q={q}")
        if not self.eps > 0:
            raise CaseError("epsilon", f"must be positive, got {self.eps}")
        on_half_line = self.norm.kind is NormKind.HALF_LINE
        if self.theorem in _HALF_LINE_THEOREMS and not on_half_line:
            raise CaseError("group", f"{self.theorem.value} needs half-line mode")
        if self.theorem is Theorem.KNOPP and (self.a != 0 or self.eps != 1):
            raise CaseError("a/epsilon", "Knopp's inequality is the case a=0, ε=1")
        if self.theorem is Theorem.EUCLIDEAN_BALL:
            n = self.norm
            if not (n.kind is NormKind.EUCLIDEAN_HOMOGENEOUS and n.group.law is Law.ABELIAN
                    and set(n.group.dilation_exponents) == {1.0}):
                raise CaseError("norm", "EuclideanBall needs the Euclidean norm on R^n")
        if self.theorem in (Theorem.GENERAL_LCL, Theorem.CONJUGATE_GENERAL_LCL,
                            Theorem.HARDY_TWO_WEIGHT):
            if self.u is None or self.v is None:
                raise CaseError("weights", f"{self.theorem.value} needs weights u and v")

    def with_f(self, f: TestFunction) -> InequalityCase:
        out = InequalityCase(**{**self.__dict__, "f": f})
        return out


@dataclass
class VerificationReport:
    case_id: str
    theorem: str
    test_function: str
    lhs: float
    rhs: float
    ratio: float
    upper_const: float
    lower_const: float | None = None
    functional: float | None = None
    err_budget: float = 0.0
    passed: bool | None = None
    normalized: bool = False  # rhs already carries the constant
    notes: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def threshold(self) -> float:
        return 1.0 if self.normalized else self.upper_const

    def decide(self) -> VerificationReport:
        vals = (self.lhs, self.rhs, self.upper_const, self.err_budget)
        if not all(math.isfinite(x) for x in vals):
            self.passed = None
        else:
            self.passed = bool(self.ratio <= self.threshold * (1.0 + self.err_budget))
        return self


# helpers ---------------------------------------------------------------------

@dataclass
class _Tracked:
    """Wraps a log-mean evaluator and records inner errors by radius.

    Only radii whose outer integrand is within e^{-25} of the largest one
    seen count towards the worst error; elsewhere the error cannot move the
    outer integral.
    """

    fn: Callable[[float], IntegralResult]
    seen: list = field(default_factory=list)

    def __call__(self, r: float) -> float:
        res = self.fn(r)
        self._last = (r, res)
        return res.value

    def record(self, log_weight: float, q: float) -> None:
        r, res = self._last
        if math.isfinite(res.value) and math.isfinite(log_weight):
            self.seen.append((log_weight, q * res.error_estimate))

    @property
    def worst(self) -> float:
        if not self.seen:
            return 0.0
        top = max(w for w, _ in self.seen)
        return max(e for w, e in self.seen if w >= top - 25.0)


def _log_u1(n: QuasiNorm, u: Weight, cfg: QuadratureConfig) -> Callable[[float], float]:
    if u.radial_only:
        return lambda r: u.log_radial(n, r)

    def lu(r):
        m = sphere_average(n, lambda x: u.at_points(n, x), r, cfg, tag=f"u1:{u.label}").value
        return math.log(m) if m > 0 else -math.inf

    return lu


def _outer(n: QuasiNorm, f: TestFunction, log_mean: Callable[[float], float],
           log_u: Callable[[float], float], q: float, cfg: QuadratureConfig,
           tail: bool = False) -> IntegralResult:
    """∫_G [M(|x|)]^q u(x) dx for a radial mean M given in log form."""

    Q = n.Q

    def h(r: float) -> float:
        lm = log_mean(r)
        if lm == -math.inf:
            return 0.0
        lw = q * lm + log_u(r)
        if isinstance(log_mean, _Tracked):
            log_mean.record(lw + Q * math.log(r), q)
        return math.exp(lw)

    if f.support_radius is not None and not tail:
        return integrate_ball(n, h, f.support_radius, cfg, radial=True,
                              breakpoints=f.breakpoints)
    return integrate_radial_group(n, h, cfg, breakpoints=f.breakpoints, scale=f.scale,
                                  log_variable=f.log_variable)


def _rhs(n, f, v: Weight, p, cfg) -> IntegralResult:
    try:
        res = weighted_lp_integral(n, f, v, p, cfg)
    except IntegrationError as exc:
        raise VacuousInequality(f"right-hand side diverges for {f.id}: {exc}") from exc
    if not math.isfinite(res.value):
        raise VacuousInequality(f"right-hand side diverges for {f.id}")
    return res


@dataclass
class Sides:
    lhs: float
    rhs: float
    err_budget: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs


def exp_mean_sides(n: QuasiNorm, f: TestFunction, log_mean_fn, u: Weight, v: Weight,
                   p: float, q: float, cfg: QuadratureConfig, *, tail: bool = False) -> Sides:
    """lhs = (∫ M^q u)^{1/q}, rhs = (∫ f^p v)^{1/p} for a log-mean operator M."""
    # a divergent right-hand side makes the inequality vacuous, so check it first
    rhs_p = _rhs(n, f, v, p, cfg)
    tracked = _Tracked(log_mean_fn)
    try:
        lhs_q = _outer(n, f, tracked, _log_u1(n, u, cfg), q, cfg, tail=tail)
    except IntegrationError as exc:
        raise IntegrationError(f"left-hand side failed for {f.id}: {exc}") from exc
    lhs = max(lhs_q.value, 0.0) ** (1.0 / q)
    rhs = max(rhs_p.value, 0.0) ** (1.0 / p)
    rel = lhs_q.rel_error / q + rhs_p.rel_error / p + tracked.worst
    return Sides(lhs, rhs, 3.0 * rel if math.isfinite(rel) else math.inf)


# brackets ----------------------------------------------------------------------

def check_balance(p: float, q: float, a: float, b: float) -> bool:
    lhs, rhs = p * (a + 1.0), q * (b + 1.0)
    return abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def power_bracket(p, q, b, eps) -> tuple[float, float]:
    """Lower and upper bounds on the best constant for power weights."""
    c = (p / q) ** (1.0 / q) * eps ** (1.0 / p - 1.0 / q)
    up = c * math.exp((b + 1.0) / (eps * p))
    return up * math.exp(-1.0 / p), up


def conjugate_power_bracket(p, q, b, eps) -> tuple[float, float]:
    c = (p / q) ** (1.0 / q) * eps ** (1.0 / p - 1.0 / q)
    up = c * math.exp(-(b + 1.0) / (eps * p))
    return up * math.exp(-1.0 / p), up


def hardy_bracket(A: float, p: float, q: float) -> tuple[float, float]:
    return A, A * (p / (p - 1.0)) ** ((p - 1.0) / p) * p ** (1.0 / q)


# sup functionals ---------------------------------------------------------------

def default_grid() -> np.ndarray:
    return np.logspace(-4.0, 4.0, 97)


@dataclass
class SupResult:
    value: float
    argmax: float
    grid: np.ndarray
    values: np.ndarray
    unbounded: bool = False
    trend: str | None = None

    def __iter__(self):
        # unpacks as (value, argmax)
        return iter((self.value, self.argmax))


def _sup(grid, values, window: int = 5, rise: float = 1e-6) -> SupResult:
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    i = int(np.nanargmax(values))
    out = SupResult(float(values[i]), float(grid[i]), grid, values)
    if math.isinf(out.value):
        out.unbounded, out.trend = True, "divergent"
        return out
    k = min(window, len(values))
    for name, seg in (("r->0", values[:k][::-1]), ("r->inf", values[-k:])):
        # seg runs toward the endpoint
        if np.all(np.diff(seg) > 0) and seg[-1] > seg[0] * (1 + rise) and seg[-1] >= out.value:
            out.unbounded, out.trend = True, f"increasing as {name}"
    return out


def _power_law_exponent(h: Callable[[float], float], t1: float, t2: float) -> float | None:
    a, b = h(t1), h(t2)
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        return None
    return math.log(b / a) / math.log(t2 / t1)


def compute_AQ(n: QuasiNorm, u: Weight, v: Weight, p: float, q: float,
               grid: Sequence[float] | None = None,
               cfg: QuadratureConfig = QuadratureConfig()) -> SupResult:
    """sup_r (∫_{G\\B(0,r)} u)^{1/q} (∫_{B(0,r)} v^{1/(1-p)})^{(p-1)/p}."""
    if not 1 < p <= q:
        raise CaseError("p/q", f"A_Q needs 1 < p <= q, got p={p}, q={q}")
    if not (u.radial_only and v.radial_only):
        raise DomainError("A_Q is evaluated for radial weights only")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    Q = n.Q
    e = 1.0 / (1.0 - p)

    def u_val(t):
        return u.radial_value(n, t)

    def w_val(t):
        lv = v.log_radial(n, t)
        return math.exp(e * lv)

    # divergence: tail of u or the origin singularity of v^{1/(1-p)}
    ku = _power_law_exponent(lambda t: u_val(t) * t ** (Q - 1), 1e8, 1e10)
    kw = _power_law_exponent(lambda t: w_val(t) * t ** (Q - 1), 1e-10, 1e-8)
    if ku is not None and ku >= -1.0 + 1e-6:
        return SupResult(math.inf, math.nan, grid, np.full(len(grid), math.inf), True,
                         "u not integrable at infinity")
    if kw is not None and kw <= -1.0 - 1e-6:
        return SupResult(math.inf, math.nan, grid, np.full(len(grid), math.inf), True,
                         "v^(1/(1-p)) not integrable at 0")
    vals = []
    for r in grid:
        tail = integrate_complement(n, u_val, r, cfg, radial=True).value
        if tail <= 0:
            vals.append(0.0)
            continue
        core = integrate_ball(n, w_val, r, cfg, radial=True).value
        vals.append(tail ** (1.0 / q) * core ** ((p - 1.0) / p))
    return _sup(grid, vals)


def _log_mean_inv_v(n: QuasiNorm, v: Weight, r: float, cfg: QuadratureConfig) -> float:
    """(1/|B_r|) ∫_{B(0,r)} log(1/v)."""
    if v.kind is WeightKind.ONE:
        return 0.0
    if v.radial_only:
        res = integrate_ball(n, lambda t: -v.log_radial(n, t), r, cfg, radial=True)
    else:
        res = integrate_ball(n, lambda x: -np.log(v.at_points(n, x)), r, cfg,
                             tag=f"dq:{v.label}")
    return res.value / ball_volume(n, r)


def compute_DQ(n: QuasiNorm, u: Weight, v: Weight, p: float, q: float,
               grid: Sequence[float] | None = None,
               cfg: QuadratureConfig = QuadratureConfig()) -> SupResult:
    """sup_r |B_r|^{1/q-1/p} u_1(r)^{1/q} exp(mean_{B_r} log(1/v))^{1/p}."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    log_u1 = _log_u1(n, u, cfg)
    vals = []
    for r in grid:
        try:
            m = _log_mean_inv_v(n, v, r, cfg)
        except IntegrationError as exc:
            raise IntegrationError(f"log(1/v) not integrable on B(0,{r:g}): {exc}") from exc
        logd = ((1.0 / q - 1.0 / p) * log_ball_volume(n, r)
                + log_u1(r) / q + m / p)
        vals.append(math.exp(logd))
    return _sup(grid, vals)


def transformed_weight(n: QuasiNorm, w: Weight, eps: float) -> Weight:
    """w̃(s) = w(|s|^{-1/ε}) (1/ε) |s|^{-Q(1+1/ε)} for a radial weight w."""
    if not w.radial_only:
        raise DomainError("the transformed weights are defined for radial weights only")
    Q = n.Q

    def log_w(rho: float) -> float:
        return (w.log_radial(n, rho ** (-1.0 / eps)) - math.log(eps)
                - Q * (1.0 + 1.0 / eps) * math.log(rho))

    return Weight.radial(lambda rho: math.exp(log_w(rho)), log_w, label=f"~{w.label}")


def compute_DQ_tilde(n: QuasiNorm, u: Weight, v: Weight, eps: float, p: float, q: float,
                     grid: Sequence[float] | None = None,
                     cfg: QuadratureConfig = QuadratureConfig()) -> SupResult:
    return compute_DQ(n, transformed_weight(n, u, eps), transformed_weight(n, v, eps),
                      p, q, grid, cfg)


# verifiers -----------------------------------------------------------------------

def _report(case: InequalityCase, sides: Sides, upper: float, lower=None, functional=None,
            normalized=False, notes="") -> VerificationReport:
    rep = VerificationReport(
        case_id=case.case_id, theorem=case.theorem.value, test_function=case.f.id,
        lhs=sides.lhs, rhs=sides.rhs, ratio=sides.ratio, upper_const=upper,
        lower_const=lower, functional=functional, err_budget=sides.err_budget,
        normalized=normalized, notes=notes)
    return rep.decide()


def _classical(case: InequalityCase, conjugate: bool) -> VerificationReport:
    n, f, eps, a = case.norm, case.f, case.eps, case.a
    if conjugate:
        def log_mean(r):
            return log_conjugate_lcl_mean(n, f, eps, r, case.cfg)
    else:
        def log_mean(r):
            return log_lcl_mean(n, f, eps, r, case.cfg)
    w = Weight.ball_power(a)  # x^a on the half-line
    sides = exp_mean_sides(n, f, log_mean, w, w, 1.0, 1.0, case.cfg, tail=conjugate)
    const = math.exp((a + 1.0) / eps)
    scaled = Sides(sides.lhs, const * sides.rhs, sides.err_budget)
    note = ("displayed constant exp((a+1)/eps); the theorem's prose names exp(a/eps) "
            f"= {math.exp(a / eps):.6g}")
    return _report(case, scaled, const, normalized=True, notes=note)


def verify_levin_1d(case: InequalityCase) -> VerificationReport:
    """Half-line Levin–Cochran–Lee inequality; Knopp's when a=0, ε=1.

    ``rhs`` includes the constant exp((a+1)/ε), so the ratio is compared
    against 1.
    """
    return _classical(case, conjugate=False)


def verify_love_1d(case: InequalityCase) -> VerificationReport:
    """Half-line complementary inequality with the tail mean
    exp(ε x^ε ∫_x^∞ t^{-ε-1} log f(t) dt)."""
    return _classical(case, conjugate=True)


def _power_sides(case: InequalityCase, conjugate: bool) -> Sides:
    n, f, eps = case.norm, case.f, case.eps
    op = log_conjugate_lcl_mean if conjugate else log_lcl_mean
    return exp_mean_sides(n, f, lambda r: op(n, f, eps, r, case.cfg),
                          Weight.ball_power(case.a), Weight.ball_power(case.b),
                          case.p, case.q, case.cfg, tail=conjugate)


def _power(case: InequalityCase, conjugate: bool) -> VerificationReport:
    p, q, a, b, eps = case.p, case.q, case.a, case.b, case.eps
    if not check_balance(p, q, a, b):
        from .sharpness import dilation_blowup

        blow = dilation_blowup(case)
        rep = VerificationReport(
            case_id=case.case_id, theorem=case.theorem.value, test_function=case.f.id,
            lhs=math.nan, rhs=math.nan, ratio=math.nan, upper_const=math.inf,
            functional=blow.slope, passed=None,
            notes=f"balance p(a+1)=q(b+1) violated; dilation slope {blow.slope:.4g} "
                  f"(predicted {blow.predicted:.4g})")
        rep.extra["blowup"] = blow
        return rep
    lo, up = (conjugate_power_bracket if conjugate else power_bracket)(p, q, b, eps)
    dq = math.exp(((b + 1.0) / eps - 1.0) / p)
    if conjugate:
        dq = eps ** (1.0 / p - 1.0 / q) * math.exp(-((b + 1.0) / eps + 1.0) / p)
    return _report(case, _power_sides(case, conjugate), up, lo, dq)


def verify_power_lcl(case: InequalityCase) -> VerificationReport:
    return _power(case, conjugate=False)


def verify_conjugate_power(case: InequalityCase) -> VerificationReport:
    return _power(case, conjugate=True)


def verify_euclidean_ball(case: InequalityCase) -> VerificationReport:
    """Power-weight inequality on R^n with p = q = 1 and a = b."""
    if case.p != 1 or case.q != 1 or case.a != case.b:
        raise CaseError("p/q/a/b", "the Euclidean-ball inequality has p=q=1 and a=b")
    rep = _power(case, conjugate=False)
    rep.notes = "constant exp((a+1)/eps) claimed sharp"
    return rep


def verify_general_lcl(case: InequalityCase) -> VerificationReport:
    n, f, p, q = case.norm, case.f, case.p, case.q
    dq = compute_DQ(n, case.u, case.v, p, q, cfg=case.cfg)
    return _general(case, dq, lambda r: log_geometric_mean(n, f, r, case.cfg), tail=False)


def verify_conjugate_general(case: InequalityCase) -> VerificationReport:
    n, f, p, q, eps = case.norm, case.f, case.p, case.q, case.eps
    dq = compute_DQ_tilde(n, case.u, case.v, eps, p, q, cfg=case.cfg)
    return _general(case, dq, lambda r: log_conjugate_lcl_mean(n, f, eps, r, case.cfg),
                    tail=True)


def _general(case, dq: SupResult, log_mean, tail: bool) -> VerificationReport:
    p, q = case.p, case.q
    if dq.unbounded or not math.isfinite(dq.value):
        return VerificationReport(
            case_id=case.case_id, theorem=case.theorem.value, test_function=case.f.id,
            lhs=math.nan, rhs=math.nan, ratio=math.nan, upper_const=math.inf,
            functional=dq.value, passed=None,
            notes=f"admissibility functional unbounded ({dq.trend})")
    up = (p / q) ** (1.0 / q) * math.exp(1.0 / p) * dq.value
    sides = exp_mean_sides(case.norm, case.f, log_mean, case.u, case.v, p, q, case.cfg,
                           tail=tail)
    return _report(case, sides, up, None, dq.value)


def verify_hardy(case: InequalityCase) -> VerificationReport:
    """Two-weight Hardy inequality for the ball integral ∫_{B(0,|x|)} f."""
    n, f, p, q, cfg = case.norm, case.f, case.p, case.q, case.cfg
    A = compute_AQ(n, case.u, case.v, p, q, cfg=cfg)
    lo, up = hardy_bracket(A.value, p, q)

    def inner(r: float) -> IntegralResult:
        R = r if f.support_radius is None else min(r, f.support_radius)
        if f.radial:
            return integrate_ball(n, f.value_radial, R, cfg, radial=True,
                                  breakpoints=f.breakpoints)
        return integrate_ball(n, lambda x: f.at(n, x), R, cfg, tag=f"hardy:{f.id}")

    worst = 0.0
    log_u = _log_u1(n, case.u, cfg)

    def h(r: float) -> float:
        nonlocal worst
        res = inner(r)
        if res.value <= 0:
            return 0.0
        worst = max(worst, res.rel_error)
        return math.exp(q * math.log(res.value) + log_u(r))

    rhs_p = _rhs(n, f, case.v, p, cfg)
    try:
        lhs_q = integrate_radial_group(n, h, cfg, breakpoints=f.breakpoints, scale=f.scale)
    except IntegrationError as exc:
        raise IntegrationError(f"left-hand side failed for {f.id}: {exc}") from exc
    lhs = max(lhs_q.value, 0.0) ** (1.0 / q)
    rhs = max(rhs_p.value, 0.0) ** (1.0 / p)
    rel = lhs_q.rel_error / q + rhs_p.rel_error / p + worst
    sides = Sides(lhs, rhs, 3.0 * rel)
    rep = _report(case, sides, up, lo, A.value)
    if lhs == 0 and rhs == 0:
        rep.passed, rep.ratio, rep.notes = True, 0.0, "f = 0: vacuous"
    return rep


_DISPATCH = {
    Theorem.LEVIN2_1D: verify_levin_1d,
    Theorem.KNOPP: verify_levin_1d,
    Theorem.LEVIN1_1D: verify_love_1d,
    Theorem.EUCLIDEAN_BALL: verify_euclidean_ball,
    Theorem.HARDY_TWO_WEIGHT: verify_hardy,
    Theorem.GENERAL_LCL: verify_general_lcl,
    Theorem.POWER_LCL: verify_power_lcl,
    Theorem.CONJUGATE_GENERAL_LCL: verify_conjugate_general,
    Theorem.CONJUGATE_POWER_LCL: verify_conjugate_power,
}


def verify(case: InequalityCase) -> VerificationReport:
    return _DISPATCH[case.theorem](case)
