import math
import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lclgroups.groups import (
    DomainError,
    GroupSpec,
    Law,
    QuasiNorm,
    SphereMeasureError,
    ball_volume,
    compute_sphere_measure,
    dilate,
    log_ball_volume,
    quasi_norm,
)

# B(1/4, 3/2): Lebesgue area of {x1^4 + x2^2 < 1}, evaluated with mpmath
ANISO_AREA = 3.49607673905615974728645278652

NORMS = {
    "R": QuasiNorm.euclidean(1),
    "R2": QuasiNorm.euclidean(2),
    "aniso12": QuasiNorm.anisotropic(1, 2),
    "aniso123": QuasiNorm.anisotropic(1, 2, 3),
    "koranyi": QuasiNorm.koranyi(),
    "euclid_aniso": QuasiNorm(  # unit ball = Euclidean disk, v=(1,2)
        "euclidean", GroupSpec.abelian(1, 2)),
}


def test_group_invariants():
    h = GroupSpec.heisenberg()
    assert h.ambient_dim == 3 and h.homogeneous_dim == 4.0
    assert GroupSpec.abelian(0.5, 1.5, 2).homogeneous_dim == 4.0
    with pytest.raises(DomainError):
        GroupSpec.abelian(1, 0)
    with pytest.raises(DomainError):
        GroupSpec((1.0, 1.0, 1.0), Law.HEISENBERG)


def test_dilate_examples():
    g = GroupSpec.abelian(1, 2)
    np.testing.assert_array_equal(dilate(g, 2.0, [1, 1]), [2, 4])
    np.testing.assert_array_equal(dilate(GroupSpec.heisenberg(), 3.0, [1, 1, 1]), [3, 3, 9])
    x = np.array([0.3, -2.0])
    np.testing.assert_array_equal(dilate(g, 1.0, x), x)
    with pytest.raises(DomainError):
        dilate(g, 0.0, x)
    with pytest.raises(DomainError):
        dilate(g, -1.0, x)


def test_norm_examples():
    k = NORMS["koranyi"]
    assert quasi_norm(k, [0, 0, 1]) == pytest.approx(1.0, rel=1e-15)
    assert quasi_norm(k, [1, 1, 0]) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert NORMS["aniso12"].exponent == 4
    assert quasi_norm(NORMS["aniso12"], [1, 0]) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(DomainError):
        quasi_norm(k, [1.0, 2.0])


def test_norm_zero_iff_origin():
    for n in NORMS.values():
        dim = n.group.ambient_dim
        assert n(np.zeros(dim)) == 0.0
        assert n(np.full(dim, 1e-9)) > 0.0


# keep dilated coordinates out of the subnormal range, where inputs lose digits
finite = st.floats(-50, 50, allow_nan=False).filter(lambda t: t == 0 or abs(t) > 1e-200)


@pytest.mark.parametrize("name", sorted(NORMS))
@given(lam=st.floats(1e-3, 1e3), data=st.data())
def test_norm_homogeneity(name, lam, data):
    n = NORMS[name]
    x = np.array(data.draw(st.lists(finite, min_size=n.group.ambient_dim,
                                    max_size=n.group.ambient_dim)))
    base = n(x)
    tol = 1e-12 if n.closed_form else 1e-10
    assert n(dilate(n.group, lam, x)) == pytest.approx(lam * base, rel=tol, abs=1e-300)


@pytest.mark.parametrize("name", sorted(NORMS))
def test_norm_homogeneity_bulk(name):
    n = NORMS[name]
    rng = np.random.default_rng(7)
    x = rng.normal(size=(10_000, n.group.ambient_dim)) * rng.uniform(0.01, 100, (10_000, 1))
    lam = rng.uniform(1e-2, 1e2, size=10_000)
    scaled = x * lam[:, None] ** np.asarray(n.group.dilation_exponents)
    rel = np.abs(n(scaled) / (lam * n(x)) - 1)
    assert rel.max() < (1e-12 if n.closed_form else 1e-10)


@pytest.mark.parametrize("name", sorted(NORMS))
@given(data=st.data())
def test_norm_symmetry(name, data):
    n = NORMS[name]
    x = np.array(data.draw(st.lists(finite, min_size=n.group.ambient_dim,
                                    max_size=n.group.ambient_dim)))
    assert n(n.group.inverse(x)) == pytest.approx(n(x), rel=1e-14)


@given(st.lists(st.lists(finite, min_size=3, max_size=3), min_size=3, max_size=3))
def test_heisenberg_law(pts):
    g = GroupSpec.heisenberg()
    x, y, z = (np.array(p) for p in pts)
    lhs = g.multiply(g.multiply(x, y), z)
    rhs = g.multiply(x, g.multiply(y, z))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(g.multiply(x, g.inverse(x)), 0.0, atol=1e-12)
    # dilations are automorphisms
    lam = 1.7
    np.testing.assert_allclose(dilate(g, lam, g.multiply(x, y)),
                               g.multiply(dilate(g, lam, x), dilate(g, lam, y)),
                               rtol=1e-12, atol=1e-9)


def test_ball_volume_examples():
    assert ball_volume(NORMS["R2"], 0.0) == 0.0
    assert ball_volume(NORMS["R2"], 1.0) == pytest.approx(math.pi, abs=1e-6)
    assert ball_volume(NORMS["aniso12"], 1.0) == pytest.approx(ANISO_AREA, abs=1e-4)
    assert ball_volume(NORMS["aniso12"], 1.0) == pytest.approx(ANISO_AREA, rel=1e-10)
    assert ball_volume(NORMS["koranyi"], 1.0) == pytest.approx(math.pi ** 2 / 2, rel=1e-10)
    # the Euclidean-homogeneous gauge has the Euclidean disk as unit ball
    assert ball_volume(NORMS["euclid_aniso"], 1.0) == pytest.approx(math.pi, rel=1e-10)
    with pytest.raises(DomainError):
        ball_volume(NORMS["R2"], -1.0)


def test_sphere_measure_examples():
    s, err = compute_sphere_measure(NORMS["R2"])
    assert s == pytest.approx(2 * math.pi, abs=1e-10)
    s, err = compute_sphere_measure(NORMS["aniso12"])
    assert s == pytest.approx(3 * ANISO_AREA, abs=1e-3)
    assert QuasiNorm.half_line().sphere_measure == 1.0
    assert NORMS["R"].sphere_measure == 2.0


def test_sphere_measure_monte_carlo_cross_check():
    k = NORMS["koranyi"]
    s1, e1 = compute_sphere_measure(k, method="mc", seed=1, rel_target=2e-3)
    s2, e2 = compute_sphere_measure(k, method="mc", seed=2, rel_target=2e-3, batch=300_000)
    assert abs(s1 - s2) <= 3 * math.hypot(e1, e2)
    assert abs(s1 - 2 * math.pi ** 2) <= 3 * e1
    a = NORMS["aniso123"]
    s3, e3 = compute_sphere_measure(a, method="mc", seed=3, rel_target=2e-3)
    s4, e4 = compute_sphere_measure(a, method="mc", seed=4, rel_target=2e-3)
    assert abs(s3 - s4) <= 3 * math.hypot(e3, e4)


def test_sphere_measure_budget_error_carries_estimate():
    with pytest.raises(SphereMeasureError) as info:
        compute_sphere_measure(NORMS["koranyi"], budget=10_000, method="mc", rel_target=1e-6,
                               batch=5_000)
    assert info.value.value == pytest.approx(2 * math.pi ** 2, rel=0.1)
    assert info.value.error > 0


@given(lam=st.floats(1e-3, 1e3), r=st.floats(1e-3, 1e3))
def test_volume_scaling(lam, r):
    for n in NORMS.values():
        assert ball_volume(n, lam * r) == pytest.approx(lam ** n.Q * ball_volume(n, r), rel=1e-10)
        assert log_ball_volume(n, r) == pytest.approx(math.log(ball_volume(n, r)), rel=1e-12,
                                                      abs=1e-12)


def test_sphere_measure_compute_once_under_threads():
    n = QuasiNorm.anisotropic(1, 3)
    out = []
    threads = [threading.Thread(target=lambda: out.append(n.sphere_measure)) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(out)) == 1
