import numpy as np
import pytest
from hypothesis import given, strategies as st

from bellman_sharp.bellman import (
    bellman_eval, bellman_p2, bellman_values, burkholder_relation_check,
    characteristic_fan, characteristic_u, evaluate_batch, explicit_value, g_fn,
    implicit_solve,
)
from bellman_sharp.domain import (
    ConvergenceError, DomainError, Params, PointY, Region, RegionError, to_y,
)
from oracle import bellman_ref

PARAMS = [(1.3, 0.0), (1.5, 0.25), (1.8, 0.5), (2.5, 1.0), (3.0, 0.5), (4.0, 2.0), (6.0, 0.0)]


def test_g_fn():
    par = Params(3.0)
    assert g_fn(3, 1, par) == 16.0
    for p in (1.3, 2.5, 6.0):
        q = Params(p)
        assert g_fn(p - 1, 1, q) == pytest.approx(0.0, abs=1e-15)
        assert g_fn(1, 1 / (p - 1), q) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(DomainError):
        g_fn(-2, 1, par)


def test_p2_closed_form():
    assert bellman_p2((0, 0, 1), 0.5) == 1.25
    assert bellman_p2((1, 1, 1), 0.0) == 1.0
    assert bellman_p2((1, 2, 1), 0.5) == 4.25
    assert bellman_eval((1, 2, 4), Params(2.0, 0.3)).value == pytest.approx(7.36, rel=1e-15)
    with pytest.raises(DomainError):
        bellman_p2((2, 0, 1), 0.0)


def test_origin_value():
    assert bellman_eval((0, 0, 1), Params(3.0)).value == 8.0
    v = bellman_eval((0, 0, 0), Params(3.0, 0.5))
    assert v.value == 0.0 and v.region is Region.ORIGIN


def test_explicit_examples():
    par = Params(3.0, 0.5)
    assert explicit_value((1, 0, 1), par).value == pytest.approx(0.125, rel=1e-15)
    assert explicit_value((1, 2, 5), par).value == pytest.approx(43.807997272187643, rel=1e-14)
    assert explicit_value((1, 0, 2), par).value == pytest.approx(8.8865994544375287, rel=1e-14)
    with pytest.raises(RegionError):
        explicit_value((1, 4, 2), par)


def test_implicit_examples():
    par = Params(3.0)
    v = implicit_solve((1, 4, 1), par)
    assert v.b == pytest.approx(4.0, rel=1e-14) and v.value == pytest.approx(64.0, rel=1e-14)
    v = implicit_solve((1, 4, 2), par)
    assert v.b == pytest.approx(4.1981978481845130, rel=1e-12)
    assert v.value == pytest.approx(73.992671041736182, rel=1e-12)
    v = implicit_solve((0, 1, 1), par)
    assert v.b == pytest.approx(2.1038034027355365, rel=1e-12)
    assert v.value == pytest.approx(9.3114102082066096, rel=1e-12)
    v = bellman_eval((1, 1, 2), Params(1.5, 0.5))
    assert v.b == pytest.approx(2.4729719349661035, rel=1e-12)
    assert v.value == pytest.approx(4.1856514327161264, rel=1e-12)
    with pytest.raises(RegionError):
        implicit_solve((1, 0, 2), par)


@pytest.mark.parametrize("x,p,tau,ref", [
    ((0.3, 0.1, 0.5), 1.3, 0.25, 1.5586734786591847),
    ((0.5, 3.1, 2.0), 6.0, 2.0, 49944.758239532999),
    ((1.0, 0.3, 1.7), 1.8, 0.5, 1.5903242892826904),
    ((1.0, 4.0, 2.0), 3.0, 0.5, 76.505770225434233),
])
def test_against_reference(x, p, tau, ref):
    assert bellman_eval(x, Params(p, tau)).value == pytest.approx(ref, rel=1e-12)


def test_reference_oracle_spot():
    # the oracle and the package agree at a point not frozen above
    B, _ = bellman_ref(0.2, 0.9, 0.4, 2.5, 0.7)
    assert bellman_eval((0.2, 0.9, 0.4), Params(2.5, 0.7)).value == pytest.approx(float(B), rel=1e-12)


def test_metadata_consistency():
    par = Params(3.0, 0.5)
    v = bellman_eval((1, 4, 2), par)
    assert v.omega == pytest.approx((v.value / 2) ** (1 / 3), rel=1e-14)
    assert v.beta == pytest.approx(np.sqrt(v.omega ** 2 - 0.25), rel=1e-12)
    assert v.b == pytest.approx(v.beta * 2 ** (1 / 3), rel=1e-12)
    assert v.beta >= par.p - 1
    assert v.residual <= 1e-12 * 100 and v.iterations < 50
    low = Params(1.5, 0.25)
    w = bellman_eval((1, 1, 2), low)
    assert 0 <= w.beta <= 1 / (low.p - 1)


def test_domain_errors():
    with pytest.raises(DomainError):
        bellman_eval((2, 0, 1), Params(3.0))
    with pytest.raises(DomainError):
        bellman_values([0, 2], [0, 0], [1, 1], Params(3.0))


def test_x3_zero_edge():
    v = bellman_eval((0, 2, 0), Params(3.0, 0.5))
    assert v.value == pytest.approx(8.0, rel=1e-15)
    assert np.isnan(v.omega)


@pytest.mark.parametrize("p,tau", PARAMS)
def test_homogeneity_and_symmetry(p, tau):
    par = Params(p, tau)
    rng = np.random.default_rng(3)
    x1 = rng.normal(size=2000)
    x2 = rng.normal(size=2000) * 2
    x3 = np.abs(x1) ** p + rng.exponential(size=2000)
    base = bellman_values(x1, x2, x3, par)
    for r in (1e-3, 1e3):
        scaled = bellman_values(r * x1, r * x2, r ** p * x3, par)
        np.testing.assert_allclose(scaled, r ** p * base, rtol=1e-10)
    for s1, s2 in ((-1, 1), (1, -1), (-1, -1)):
        np.testing.assert_allclose(bellman_values(s1 * x1, s2 * x2, x3, par), base, rtol=1e-14)


@pytest.mark.parametrize("p,tau", PARAMS)
def test_sign_law(p, tau):
    par = Params(p, tau)
    rng = np.random.default_rng(4)
    x1 = rng.normal(size=20000)
    x2 = rng.normal(size=20000) * 2
    x3 = np.abs(x1) ** p + rng.exponential(size=20000)
    B = bellman_values(x1, x2, x3, par)
    lhs = np.sign(B - par.c_sharp * x3)
    rhs = np.sign(np.abs(x2) - par.p_star_minus_1 * np.abs(x1))
    assert np.all(lhs == rhs)


@pytest.mark.parametrize("p,tau", PARAMS)
def test_gluing_c1(p, tau):
    par = Params(p, tau)
    P = par.p_star_minus_1
    x3 = np.array([1.5, 3.0, 20.0])
    lo = bellman_values(1.0, P - 1e-7, x3, par)
    hi = bellman_values(1.0, P + 1e-7, x3, par)
    mid = bellman_values(1.0, P, x3, par)
    np.testing.assert_allclose(mid, par.c_sharp * x3, rtol=1e-12)
    assert np.all(np.abs(hi - lo) <= 1e-5 * mid)
    # one-sided slopes agree
    sl = (mid - lo) / 1e-7
    sr = (hi - mid) / 1e-7
    np.testing.assert_allclose(sl, sr, rtol=1e-4)


@pytest.mark.parametrize("p,tau", PARAMS)
def test_dirichlet_boundary(p, tau):
    par = Params(p, tau)
    x1 = np.linspace(-3, 3, 301)
    x2 = np.linspace(-5, 5, 301)[::-1]
    B = bellman_values(x1, x2, np.abs(x1) ** p, par)
    np.testing.assert_allclose(B, (x2 ** 2 + tau ** 2 * x1 ** 2) ** (p / 2), rtol=1e-10, atol=1e-300)


def test_p_near_two_routes_to_closed_form():
    par = Params(2.0 + 1e-9, 0.5)
    assert bellman_eval((1, 0.5, 2), par).value == pytest.approx(0.25 - 1 + 1.25 * 2, rel=1e-12)


def test_solver_monotone_residuals():
    par = Params(6.0, 2.0)
    rng = np.random.default_rng(0)
    x1 = rng.uniform(0, 1, 5000)
    x2 = x1 * 5 + rng.exponential(size=5000)
    x3 = x1 ** 6 * (1 + rng.exponential(size=5000))
    res = evaluate_batch(x1, x2, x3, par)
    assert np.all(res.iterations <= 60)
    assert np.all(res.residual <= 1e-12)


def test_burkholder_relation():
    par = Params(3.0, 1.0)
    assert burkholder_relation_check((0, 1, 1), Params(3.0, 0.0)) == 0.0
    assert burkholder_relation_check((0, 1, 1), par) <= 1e-9 * 12.64
    assert burkholder_relation_check((1, 4, 2), Params(3.0, 0.5)) <= 1e-9 * 76.5
    # the reference value at tau = 1 matches the relation independently
    assert bellman_eval((0, 1, 1), par).value == pytest.approx(12.639163571156659, rel=1e-12)
    with pytest.raises(RegionError):
        burkholder_relation_check((1, 0, 2), par)


def test_characteristic_examples():
    par = Params(3.0)
    sol = characteristic_u(to_y((1, 4, 2)), par)
    assert sol.M == pytest.approx(73.992671041736182, rel=1e-9)
    u = 0.7
    y1 = 1.0
    y2 = u
    y3 = (y1 - u) ** 3
    sol = characteristic_u(PointY(y1, y2, y3 * (1 + 1e-12)), par)
    assert sol.u == pytest.approx(u, abs=1e-6)
    # at the gluing line the foot sits at (1 - 2/p) y1 and beta = p - 1
    sol = characteristic_u(PointY(1.0, 1.0 / 3.0, 2.0), par)
    assert sol.u == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert sol.beta == pytest.approx(2.0, abs=1e-8)
    with pytest.raises(RegionError):
        characteristic_u(to_y((1, 0, 2)), par)


@pytest.mark.parametrize("p,tau", PARAMS)
def test_characteristic_foot_formula(p, tau):
    par = Params(p, tau)
    rng = np.random.default_rng(9)
    for _ in range(20):
        if par.above_two:
            x1 = rng.uniform(0.1, 1)
            x2 = (p - 1) * x1 + rng.exponential()
        else:
            x1 = rng.uniform(0.5, 1)
            x2 = rng.uniform(0, x1 / (p - 1))
        x3 = x1 ** p * (1 + rng.exponential())
        y = to_y((x1, x2, x3))
        sol = characteristic_u(y, par)
        assert sol.u == pytest.approx((sol.beta - 1) / (sol.beta + 1) * y.y1, rel=1e-9, abs=1e-12)
        assert -y.y1 <= sol.u <= y.y1
        assert sol.M == pytest.approx(bellman_eval((x1, x2, x3), par).value, rel=1e-9)


def test_characteristic_fan_lies_on_solution():
    par = Params(3.0, 0.5)
    rows = np.array(characteristic_fan(par, n_lines=5, n_points=7))
    from bellman_sharp.domain import to_x
    for line, u, y1, y2, y3, M in rows:
        x = to_x(PointY(y1, y2, y3))
        assert bellman_eval(x, par).value == pytest.approx(M, rel=1e-9)


@given(st.floats(0.01, 3), st.floats(0, 5), st.floats(0, 5), st.sampled_from([1.5, 3.0, 6.0]))
def test_value_bounds(x1, dx2, extra, p):
    par = Params(p, 0.5 if p < 2 else 1.0)
    x3 = x1 ** p + extra
    B = bellman_eval((x1, dx2, x3), par).value
    # boundary datum is a lower bound; the sharp constant times x3 bounds B on the small-|x2| side
    assert B >= (dx2 ** 2 + par.tau ** 2 * x1 ** 2) ** (p / 2) * (1 - 1e-12)
