import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neutral_inclusions.matching import (MatchingProblem, closed_form_root_p2, f, f_prime,
                                         signed_power, solve_matching)

from oracles import brentq_root, f_ref, grid_scan_root, random_problems, root_interval


def test_linear_example():
    sol = solve_matching(MatchingProblem(10.0, 1.0, 1.0, 1 / 6, 2.0))
    assert sol.x0 == pytest.approx(3.6, rel=1e-14)
    assert sol.A1 == pytest.approx(0.4, rel=1e-14)
    assert sol.A2 == sol.A1
    assert sol.B2 == pytest.approx(1.8, rel=1e-14)


def test_B2_uses_g_core():
    prob = MatchingProblem(5.0, 1.0, 1.0, 0.2, 3.0)
    a = solve_matching(prob)
    b = solve_matching(prob, g_core=3.0)
    assert b.x0 == a.x0
    assert b.B2 == pytest.approx(3.0 * a.x0 / 2, rel=1e-15)


def test_function_matches_reference(rng):
    for s1, s2, E, K, p in random_problems(rng, 50):
        prob = MatchingProblem(s1, s2, E, K, p)
        x = rng.uniform(-10, 10, 20)
        np.testing.assert_allclose(f(x, prob), f_ref(x, s1, s2, E, K, p), rtol=1e-13, atol=1e-13)


def test_strictly_decreasing(rng):
    for s1, s2, E, K, p in random_problems(rng, 30):
        prob = MatchingProblem(s1, s2, E, K, p)
        x = np.linspace(-3 * prob.x_scale, 3 * prob.x_scale, 20001)
        assert np.all(np.diff(f(x, prob)) < 0)
        xs = x[np.abs(E - K * x) > 1e-6]
        assert all(f_prime(t, prob) < 0 for t in xs[::500])


def test_against_brentq_and_grid(rng):
    for s1, s2, E, K, p in random_problems(rng, 40):
        prob = MatchingProblem(s1, s2, E, K, p)
        x0 = solve_matching(prob).x0
        assert x0 == pytest.approx(brentq_root(s1, s2, E, K, p), rel=1e-12, abs=1e-14)
        assert abs(x0 - grid_scan_root(s1, s2, E, K, p, points=100_001)) <= 1e-10 * prob.x_scale


def test_residual_scaled(rng):
    for s1, s2, E, K, p in random_problems(rng, 300):
        prob = MatchingProblem(s1, s2, E, K, p)
        sol = solve_matching(prob)
        assert sol.residual < 1e-12 * prob.f_scale


def test_extreme_contrast_conditioning():
    # near the kink f' is large, so |f(x0)| is bounded by |f'| ulp(x0), not by f_scale eps
    rng = np.random.default_rng(7)
    for _ in range(200):
        s1, s2 = 10 ** rng.uniform(-4, 4, 2)
        E, K, p = rng.uniform(0.01, 100), rng.uniform(0.001, 0.99), rng.uniform(1.05, 6)
        prob = MatchingProblem(s1, s2, E, K, p)
        sol = solve_matching(prob)
        x = sol.x0
        ulp = math.ulp(x) if x else 5e-324
        fp = max(abs(f_prime(x + s * 4 * ulp, prob)) for s in (-1, 1))
        assert sol.residual <= max(64 * fp * ulp, 4e-16 * prob.f_scale)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.05, 5), st.floats(0.02, 0.65), st.floats(1.2, 4))
def test_odd_symmetry(s1, s2, E, K, p):
    prob = MatchingProblem(s1, s2, E, K, p)
    a = solve_matching(prob)
    b = solve_matching(prob.negated())
    assert b.x0 == -a.x0 and b.A1 == -a.A1


def test_root_inside_a_priori_interval(rng):
    for s1, s2, E, K, p in random_problems(rng, 100):
        x0 = solve_matching(MatchingProblem(s1, s2, E, K, p)).x0
        lo, hi = root_interval(E, K)
        assert lo <= x0 <= hi


def test_p2_closed_form(rng):
    for s1, s2, E, K, _ in random_problems(rng, 100):
        prob = MatchingProblem(s1, s2, E, K, 2.0)
        x0 = solve_matching(prob).x0
        assert x0 == pytest.approx(closed_form_root_p2(prob), rel=1e-12, abs=1e-15)
    with pytest.raises(ValueError):
        closed_form_root_p2(MatchingProblem(1, 1, 1, 0.5, 3.0))


def test_continuity_in_p():
    base = solve_matching(MatchingProblem(4.0, 1.0, 1.3, 0.25, 2.0)).x0
    near = [solve_matching(MatchingProblem(4.0, 1.0, 1.3, 0.25, 2.0 + d)).x0 for d in (1e-3, 1e-5, 1e-7)]
    errs = [abs(v - base) for v in near]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-6


def test_zero_field():
    assert solve_matching(MatchingProblem(2.0, 1.0, 0.0, 0.3, 3.0)).x0 == 0.0
    with pytest.raises(ValueError):
        solve_matching(MatchingProblem(2.0, 1.0, 0.0, 0.3, 1.5))


def test_equal_conductivities_linear():
    # a core that matches the coating needs no correction
    assert solve_matching(MatchingProblem(1.0, 1.0, 2.0, 0.3, 2.0)).x0 == 0.0


def test_weak_core_accepted():
    sol = solve_matching(MatchingProblem(0.5, 1.0, 1.0, 0.3, 2.5))
    assert sol.x0 < 0 and sol.residual < 1e-14


def test_problem_validation():
    for args in [(0, 1, 1, 0.3, 2), (1, 1, 1, 0.0, 2), (1, 1, 1, 1.0, 2), (1, 1, 1, 0.3, 1.0),
                 (1, 1, math.nan, 0.3, 2)]:
        with pytest.raises(ValueError):
            MatchingProblem(*args)


def test_signed_power():
    assert signed_power(-8.0, 1 / 3) == pytest.approx(-2.0)
    assert signed_power(0.0, 0.5) == 0.0


def test_bisection_only_agrees(rng):
    for s1, s2, E, K, p in random_problems(rng, 100):
        prob = MatchingProblem(s1, s2, E, K, p)
        a = solve_matching(prob, polish=False).x0
        b = solve_matching(prob).x0
        assert abs(a - b) <= 2e-14 * prob.x_scale
