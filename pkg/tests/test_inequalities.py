import math

import numpy as np
import pytest

from lclgroups.catalog import make_test_function
from lclgroups.groups import QuasiNorm
from lclgroups.inequalities import (
    CaseError,
    InequalityCase,
    Theorem,
    VacuousInequality,
    check_balance,
    compute_AQ,
    compute_DQ,
    compute_DQ_tilde,
    conjugate_power_bracket,
    hardy_bracket,
    power_bracket,
    verify,
    verify_levin_1d,
    verify_power_lcl,
)
from lclgroups.quadrature import IntegrationError
from lclgroups.weights import Weight

HALF = QuasiNorm.half_line()
R1 = QuasiNorm.euclidean(1)
R2 = QuasiNorm.euclidean(2)
H1 = QuasiNorm.koranyi()
ANISO = QuasiNorm.anisotropic(1, 2)
E = math.e
GRID = np.logspace(-3, 3, 25)


def case(theorem, n, f, **kw):
    return InequalityCase(Theorem(theorem), n, make_test_function(f, n), **kw)


# case validation ------------------------------------------------------------

@pytest.mark.parametrize("kw, field", [
    (dict(theorem="PowerLCL", n=R2, p=2.0, q=1.0), "p/q"),
    (dict(theorem="HardyTwoWeight", n=H1, p=1.0, q=2.0, u=Weight.one(), v=Weight.one()), "p/q"),
    (dict(theorem="PowerLCL", n=R2, eps=0.0), "epsilon"),
    (dict(theorem="Levin2_1D", n=R2), "group"),
    (dict(theorem="Knopp", n=HALF, a=1.0), "a/epsilon"),
    (dict(theorem="EuclideanBall", n=ANISO), "norm"),
    (dict(theorem="GeneralLCL", n=H1), "weights"),
])
def test_case_validation(kw, field):
    theorem, n = kw.pop("theorem"), kw.pop("n")
    with pytest.raises(CaseError) as info:
        case(theorem, n, "exp_decay", **kw)
    assert info.value.field == field


def test_check_balance_examples():
    assert check_balance(1, 1, 0, 0)
    assert check_balance(2, 4, 3, 1)
    assert not check_balance(2, 2, 1, 0)


# one-dimensional inequalities -------------------------------------------------

def test_knopp():
    rep = verify(case("Knopp", HALF, "exp_decay"))
    assert rep.lhs == pytest.approx(2.0, rel=1e-9)
    assert rep.rhs == pytest.approx(E, rel=1e-9)
    assert rep.ratio == pytest.approx(2 / E, rel=1e-9)
    assert rep.upper_const == pytest.approx(E) and rep.passed is True
    assert "exp(a/eps)" in rep.notes


@pytest.mark.parametrize("f, a, eps, expected", [
    ("gauss", 1.0, 2.0, 2 / E),
    ("min_one_power(3)", 1.0, 2.0, 0.851747023287820),
])
def test_levin_oracles(f, a, eps, expected):
    rep = verify(case("Levin2_1D", HALF, f, a=a, eps=eps))
    assert rep.ratio == pytest.approx(expected, rel=1e-7)
    assert rep.passed is True


@pytest.mark.parametrize("f, a, expected", [
    ("min_one_power(2)", -0.5, 0.292615758878554),
    ("love_tail", 0.0, 0.0984991859803010),
])
def test_love_oracles(f, a, expected):
    rep = verify(case("Levin1_1D", HALF, f, a=a))
    assert rep.ratio == pytest.approx(expected, rel=1e-7)
    assert rep.passed is True


def test_love_tail_sides():
    rep = verify(case("Levin1_1D", HALF, "love_tail"))
    assert rep.lhs == pytest.approx(0.166392234151690, rel=1e-7)
    # ∫ f = 0.6214..., times the constant e carried by the right-hand side
    assert rep.rhs == pytest.approx(E * 0.621449624235813, rel=1e-7)


def test_divergent_rhs_is_vacuous():
    with pytest.raises(VacuousInequality):
        verify(case("Levin2_1D", HALF, "shifted_norm"))


def test_knopp_reduction():
    lev = verify_levin_1d(case("Levin2_1D", HALF, "gauss"))
    pw = verify_power_lcl(case("PowerLCL", HALF, "gauss"))
    assert pw.lhs == pytest.approx(lev.lhs, rel=1e-9)
    assert pw.rhs * E == pytest.approx(lev.rhs, rel=1e-9)
    rep = verify_power_lcl(case("PowerLCL", HALF, "exp_decay"))
    # raw ratio 2 against the constant e; normalised 2/e
    assert rep.ratio == pytest.approx(2.0, rel=1e-9)
    assert rep.ratio / rep.upper_const == pytest.approx(2 / E, rel=1e-9)


# group inequalities --------------------------------------------------------------

@pytest.mark.parametrize("f, a, eps", [("exp_decay", 0.0, 1.0), ("gauss", 1.0, 2.0)])
def test_euclidean_ball(f, a, eps):
    rep = verify(case("EuclideanBall", R2, f, a=a, b=a, eps=eps))
    assert rep.ratio == pytest.approx(9 / 4, rel=1e-7)
    assert rep.upper_const == pytest.approx(math.exp((a + 1) / eps))
    assert rep.passed is True
    with pytest.raises(CaseError):
        verify(case("EuclideanBall", R2, f, p=2.0, q=2.0))


def test_power_anisotropic():
    rep = verify(case("PowerLCL", ANISO, "exp_decay", p=2.0, q=2.0, a=1.0, b=1.0))
    assert rep.ratio == pytest.approx(64 / 27, rel=1e-7)
    lo, up = power_bracket(2.0, 2.0, 1.0, 1.0)
    assert (rep.lower_const, rep.upper_const) == (lo, up)
    assert up == pytest.approx(E, rel=1e-15) and lo == pytest.approx(math.exp(0.5))
    assert rep.passed is True


def test_general_on_line_is_knopp():
    rep = verify(case("GeneralLCL", R1, "exp_decay", u=Weight.one(), v=Weight.one()))
    assert rep.ratio == pytest.approx(2.0, rel=1e-8)
    assert rep.functional == pytest.approx(1.0, rel=1e-12)
    assert rep.upper_const == pytest.approx(E) and rep.passed


def test_general_heisenberg():
    rep = verify(case("GeneralLCL", H1, "exp_decay", p=2.0, q=2.0,
                      u=Weight.one(), v=Weight.one()))
    assert rep.ratio == pytest.approx(25 / 16, rel=1e-8)
    assert rep.upper_const == pytest.approx(math.exp(0.5), rel=1e-9)
    assert rep.passed is True


def test_general_with_unbounded_functional_gives_no_verdict():
    rep = verify(case("GeneralLCL", R1, "exp_decay", u=Weight.norm_power(1.0), v=Weight.one()))
    assert rep.passed is None and "unbounded" in rep.notes


def test_conjugate_power_exp_ball():
    rep = verify(case("ConjugatePowerLCL", H1, "exp_ball", eps=2.0))
    assert rep.ratio == pytest.approx(0.5, rel=1e-7)
    lo, up = conjugate_power_bracket(1.0, 1.0, 0.0, 2.0)
    assert rep.upper_const == up == pytest.approx(math.exp(-0.5))
    assert rep.lower_const == lo and rep.passed is True


def test_conjugate_power_remark_family():
    # p=q, a=b, ε=1 on R with f_δ, δ=0.1
    rep = verify(case("ConjugatePowerLCL", R1, "sharpness_delta(0,1,1,0.1)"))
    assert rep.ratio <= math.exp(-1) * (1 + rep.err_budget)
    assert rep.passed is True


def test_conjugate_general():
    rep = verify(case("ConjugateGeneralLCL", H1, "gauss", eps=2.0, u=Weight.one(),
                      v=Weight.one()))
    assert rep.passed is True and rep.ratio <= rep.upper_const


def test_unbalanced_power_delegates_to_blowup():
    rep = verify(case("PowerLCL", R1, "exp_decay", p=2.0, q=2.0, a=1.0))
    assert rep.passed is None
    assert rep.functional == pytest.approx(0.5, rel=0.05)
    assert "balance" in rep.notes


# admissibility functionals ----------------------------------------------------

def test_dq_trivial():
    res = compute_DQ(H1, Weight.one(), Weight.one(), 2.0, 2.0, GRID)
    np.testing.assert_allclose(res.values, 1.0, rtol=1e-12)
    assert not res.unbounded


@pytest.mark.parametrize("n", [R1, ANISO, H1], ids=["R", "aniso", "H1"])
@pytest.mark.parametrize("p, q, b, eps", [(1, 1, 0, 1), (2, 2, 1, 2), (1, 2, 1, 0.5),
                                          (2, 4, 1, 2), (1.5, 3, 0.5, 1)])
def test_dq_power_closed_form(n, p, q, b, eps):
    a = q * (b + 1) / p - 1  # balanced
    u = Weight.ball_power((a + 1) / eps - 1)
    v = Weight.ball_power((b + 1) / eps - 1)
    res = compute_DQ(n, u, v, p, q, GRID)
    np.testing.assert_allclose(res.values, math.exp(((b + 1) / eps - 1) / p), rtol=1e-6)
    assert not res.unbounded


def test_dq_unbalanced_is_flagged():
    res = compute_DQ(R1, Weight.ball_power(1.0), Weight.one(), 1.0, 1.0)
    assert res.unbounded and res.trend == "increasing as r->inf"


def test_dq_tilde():
    res = compute_DQ_tilde(R1, Weight.one(), Weight.one(), 1.0, 1.0, 1.0, GRID)
    np.testing.assert_allclose(res.values, math.exp(-2), rtol=1e-9)
    res = compute_DQ_tilde(H1, Weight.ball_power(1.0), Weight.ball_power(1.0), 2.0, 2.0, 2.0,
                           GRID)
    np.testing.assert_allclose(res.values, math.exp(-1), rtol=1e-6)
    # u supported away from the origin: a finite maximum inside the grid
    bump = Weight.radial(lambda r: math.exp(-(math.log(r)) ** 2))
    res = compute_DQ_tilde(R1, bump, Weight.one(), 1.0, 1.0, 1.0)
    assert math.isfinite(res.value) and not res.unbounded
    assert 1e-3 < res.argmax < 1e3


def test_aq_scale_invariant_pair():
    res = compute_AQ(H1, Weight.norm_power(-5.0), Weight.norm_power(3.0), 2.0, 2.0)
    np.testing.assert_allclose(res.values, 2 * math.pi ** 2, rtol=1e-6)
    assert res.value == pytest.approx(2 * math.pi ** 2, rel=1e-6)


def test_aq_divergence_and_zero():
    res = compute_AQ(H1, Weight.norm_power(-5.0), Weight.norm_power(5.0), 2.0, 2.0)
    assert res.unbounded and math.isinf(res.value)
    res = compute_AQ(H1, Weight.radial(lambda r: 0.0), Weight.one(), 2.0, 2.0, GRID)
    assert res.value == 0.0
    with pytest.raises(CaseError):
        compute_AQ(H1, Weight.one(), Weight.one(), 1.0, 2.0)


def test_hardy():
    u, v = Weight.norm_power(-5.0), Weight.norm_power(3.0)
    rep = verify(case("HardyTwoWeight", H1, "exp_decay", p=2.0, q=2.0, u=u, v=v))
    assert rep.ratio == pytest.approx(23.9053690078083, rel=1e-7)
    lo, up = hardy_bracket(2 * math.pi ** 2, 2.0, 2.0)
    assert rep.upper_const == pytest.approx(up, rel=1e-6)
    assert up == pytest.approx(4 * math.pi ** 2, rel=1e-12)
    assert rep.passed is True
    zero = InequalityCase(Theorem.HARDY_TWO_WEIGHT, H1,
                          make_test_function("exp_decay", H1).scaled(1.0), p=2.0, q=2.0,
                          u=u, v=v)
    from lclgroups.operators import TestFunction
    zero = zero.with_f(TestFunction("zero", True, lambda r: -math.inf, support_radius=1.0))
    rep = verify(zero)
    assert rep.passed is True and rep.lhs == rep.rhs == 0.0


# properties ---------------------------------------------------------------------

HOMOGENEITY_CASES = [
    ("Knopp", HALF, "gauss", {}),
    ("Levin1_1D", HALF, "min_one_power(2)", {"a": -0.5}),
    ("EuclideanBall", R2, "exp_decay", {}),
    ("PowerLCL", ANISO, "exp_decay", dict(p=2.0, q=2.0, a=1.0, b=1.0)),
    ("ConjugatePowerLCL", H1, "exp_ball", dict(eps=2.0)),
    ("GeneralLCL", H1, "exp_decay", dict(p=2.0, q=2.0, u=Weight.one(), v=Weight.one())),
    ("HardyTwoWeight", H1, "exp_decay",
     dict(p=2.0, q=2.0, u=Weight.norm_power(-5.0), v=Weight.norm_power(3.0))),
]


@pytest.mark.parametrize("idx", range(len(HOMOGENEITY_CASES)),
                         ids=[c[0] for c in HOMOGENEITY_CASES])
def test_ratio_homogeneity(idx):
    theorem, n, f, kw = HOMOGENEITY_CASES[idx]
    base = case(theorem, n, f, **kw)
    ref = verify(base).ratio
    for c in (1e-3, 1.0, 1e3):
        assert verify(base.with_f(base.f.scaled(c))).ratio == pytest.approx(ref, rel=1e-9)


CATALOG_SUITE = ["exp_decay", "gauss", "exp_ball", "min_one_power(3)", "love_tail",
                 "shifted_norm", "ball_power(-0.5)", "power(-1)", "tilted_exp(0.5)",
                 "indicator_ball_power(0.5,1)"]

BALANCED = [
    ("PowerLCL", R1, dict()),
    ("PowerLCL", ANISO, dict(p=2.0, q=2.0, a=1.0, b=1.0)),
    ("PowerLCL", H1, dict(p=1.0, q=2.0, a=1.0, b=0.0, eps=2.0)),
    ("ConjugatePowerLCL", H1, dict(eps=2.0)),
]


@pytest.mark.parametrize("idx", range(len(BALANCED)), ids=[f"{t}-{i}" for i, (t, _, _) in
                                                            enumerate(BALANCED)])
def test_ratio_below_upper_constant(idx):
    theorem, n, kw = BALANCED[idx]
    checked = 0
    for f in CATALOG_SUITE:
        try:
            rep = verify(case(theorem, n, f, cfg=_fast(), **kw))
        except (VacuousInequality, IntegrationError):
            continue  # a side diverges: the inequality makes no claim
        checked += 1
        assert rep.passed is True, (f, rep)
        assert rep.ratio <= rep.upper_const * (1 + rep.err_budget)
    assert checked >= 3


def _fast():
    from lclgroups.quadrature import QuadratureConfig
    return QuadratureConfig(mc_samples=20_000)
