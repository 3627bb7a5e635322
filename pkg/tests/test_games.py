"""Unit tests for the 2x2 lane-change game layer."""

import numpy as np
import pytest

from lanetrade import (
    BimatrixGame,
    GameError,
    SpeedScenario,
    build_utility_matrix,
    solve_ntu,
    solve_tu,
    solve_zero_sum_2x2,
    time_difference,
)

KMH = 1.0 / 3.6  # km/h -> m/s


# ---------------------------------------------------------------------------
# independent oracles


def integrate_time_difference(s, step=1e-3):
    """Trajectory-integration oracle for the closed-form time difference.

    Builds both piecewise-linear speed profiles (common start at v2, linear
    ramp to the chosen speed by ta, constant-rate leg to ve, then ve) and
    integrates |v_high - v_low| on a 1 ms grid, divided by ve.  Valid on the
    v1 >= ve >= v2 domain with a1 < 0 < a2, where the high profile dominates
    pointwise.
    """
    tb1 = s.ta + (s.ve - s.v1) / s.a1
    tb2 = s.ta + (s.ve - s.v2) / s.a2
    tb = max(tb1, tb2, s.ta)
    t = np.arange(0.0, tb + step, step)

    def profile(v_new, a, tb_leg):
        v = np.empty_like(t)
        ramp = t <= s.ta
        v[ramp] = s.v2 + (v_new - s.v2) * t[ramp] / s.ta
        leg = ~ramp
        v[leg] = np.clip(v_new + a * (t[leg] - s.ta),
                         min(v_new, s.ve), max(v_new, s.ve))
        v[t >= tb_leg] = s.ve
        return v

    v_high = profile(s.v1, s.a1, tb1)
    v_low = profile(s.v2, s.a2, tb2)
    return np.trapezoid(np.abs(v_high - v_low), t) / s.ve


def grid_maximin(d, step=2e-5):
    """Grid-search maximin oracle for the 2x2 zero-sum value.

    Scans the row-mixing probability p on a uniform grid; the inner minimum
    over the column grid is attained at its endpoints (the payoff is linear
    in q), so only the two pure columns are evaluated.  Grid error is
    bounded by max-slope * step / 2.
    """
    p = np.arange(0.0, 1.0 + step / 2, step)
    against_c1 = p * d[0][0] + (1 - p) * d[1][0]
    against_c2 = p * d[0][1] + (1 - p) * d[1][1]
    return float(np.minimum(against_c1, against_c2).max())


def nash_product_argmax(a12, b21, n=10001):
    """Sample the (a12, 0)-(0, b21) payoff segment and maximize u_a * u_b."""
    t = np.linspace(0.0, 1.0, n)
    ua = t * a12
    ub = (1 - t) * b21
    k = int(np.argmax(ua * ub))
    return ua[k], ub[k]


class FixedCoin:
    def __init__(self, u):
        self.u = u

    def random(self):
        return self.u


# ---------------------------------------------------------------------------
# time difference


def test_time_difference_worked_example():
    s_a = SpeedScenario(v1=55 * KMH, v2=25 * KMH, ve=31 * KMH, ta=3, a1=-4, a2=1)
    s_b = SpeedScenario(v1=52 * KMH, v2=45 * KMH, ve=38 * KMH, ta=3, a1=-3, a2=-1)
    assert time_difference(s_a) == pytest.approx(2.26, abs=0.005)
    assert time_difference(s_b) == pytest.approx(0.34, abs=0.005)


def test_time_difference_degenerate_zero():
    s = SpeedScenario(v1=10, v2=10, ve=10, ta=2, a1=-1, a2=1)
    assert time_difference(s) == 0.0


def test_time_difference_matches_trajectory_integration():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        v2, ve, v1 = np.sort(rng.uniform(0.0, 40.0, 3))
        ve = max(ve, 0.5)
        v1 = max(v1, ve)
        s = SpeedScenario(
            v1=v1, v2=v2, ve=ve, ta=rng.uniform(0.5, 5.0),
            a1=-rng.uniform(0.5, 5.0), a2=rng.uniform(0.5, 5.0),
        )
        assert time_difference(s) == pytest.approx(
            integrate_time_difference(s), abs=1e-3
        )


def test_time_difference_monotone_in_speed_choices():
    rng = np.random.default_rng(7)
    for _ in range(100):
        v2, ve, v1 = np.sort(rng.uniform(0.0, 35.0, 3))
        ve = max(ve, 0.5)
        v1 = max(v1, ve)
        kw = dict(ve=ve, ta=2.0, a1=-2.0, a2=1.5)
        base = time_difference(SpeedScenario(v1=v1, v2=v2, **kw))
        assert time_difference(SpeedScenario(v1=v1 + 1.0, v2=v2, **kw)) >= base
        if v2 >= 1.0:
            assert time_difference(SpeedScenario(v1=v1, v2=v2 - 1.0, **kw)) >= base


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(v1=10, v2=5, ve=0.0, ta=3, a1=-1, a2=1),
        dict(v1=10, v2=5, ve=-2.0, ta=3, a1=-1, a2=1),
        dict(v1=10, v2=5, ve=8, ta=0.0, a1=-1, a2=1),
        dict(v1=10, v2=5, ve=8, ta=3, a1=0.0, a2=1),
        dict(v1=10, v2=5, ve=8, ta=3, a1=-1, a2=0.0),
        dict(v1=5, v2=10, ve=8, ta=3, a1=-1, a2=1),
    ],
)
def test_speed_scenario_rejects_bad_inputs(kwargs):
    with pytest.raises(GameError):
        SpeedScenario(**kwargs)


def test_time_difference_rejects_inconsistent_signs():
    # Both choices above ve, but the low leg coasts down far more gently than
    # the high leg brakes: the "high" choice loses distance. That geometry
    # only arises from sign mistakes, so it is rejected rather than clamped.
    s = SpeedScenario(v1=12.0, v2=12.0, ve=10.0, ta=1.0, a1=-10.0, a2=-0.1)
    with pytest.raises(GameError):
        time_difference(s)


def test_symmetric_rate_wrapper():
    s = SpeedScenario.symmetric(v1=20, v2=10, ve=15, ta=3, a=2.0)
    explicit = SpeedScenario(v1=20, v2=10, ve=15, ta=3, a1=-2.0, a2=2.0)
    assert time_difference(s) == time_difference(explicit)
    with pytest.raises(GameError):
        SpeedScenario.symmetric(v1=20, v2=10, ve=15, ta=3, a=-1.0)


# ---------------------------------------------------------------------------
# utility matrices


def test_build_utility_matrix_worked_example():
    g = build_utility_matrix(10 / 3600, 2.2580645, 25 / 3600, 0.3360136)
    assert g.a12 == pytest.approx(0.0062, abs=1e-4)
    assert g.b21 == pytest.approx(0.0023, abs=1e-4)


def test_build_utility_matrix_structure():
    g = build_utility_matrix(0.01, 2.0, 0.0, 0.0, m=5.0)
    assert g.a12 == pytest.approx(0.02)
    np.testing.assert_array_equal(g.a, [[-5.0, 0.02], [0.0, 0.0]])
    np.testing.assert_array_equal(g.b, [[-5.0, 0.0], [0.0, 0.0]])
    assert g.has_conflict_structure()


def test_build_utility_matrix_zero_time():
    g = build_utility_matrix(0.5, 0.0, 0.9, 0.0)
    assert g.a12 == 0.0 and g.b21 == 0.0


def test_build_utility_matrix_rejects_bad_inputs():
    with pytest.raises(GameError):
        build_utility_matrix(-0.1, 1.0, 0.1, 1.0)
    with pytest.raises(GameError):
        build_utility_matrix(0.1, -1.0, 0.1, 1.0)
    with pytest.raises(GameError):
        build_utility_matrix(1.0, 2.0, 1.0, 1.0, m=2.5)  # m must dominate


# ---------------------------------------------------------------------------
# zero-sum solver


def test_zero_sum_conflict_saddle():
    sol = solve_zero_sum_2x2([[0.0, 0.0062], [-0.0023, 0.0]])
    assert sol.value == 0.0
    assert sol.saddle == (1, 1)
    assert (sol.p, sol.q) == (1.0, 1.0)


def test_zero_sum_constant_game():
    sol = solve_zero_sum_2x2([[2.5, 2.5], [2.5, 2.5]])
    assert sol.value == 2.5
    assert sol.saddle is not None


def test_zero_sum_mixed_example():
    d = [[3.0, 0.0], [1.0, 2.0]]
    sol = solve_zero_sum_2x2(d)
    assert sol.saddle is None
    assert sol.value == pytest.approx(1.5, abs=1e-12)
    assert sol.p == pytest.approx(0.25, abs=1e-12)
    assert sol.value == pytest.approx(grid_maximin(d), abs=1e-3)


def test_zero_sum_matches_grid_oracle():
    rng = np.random.default_rng(99)
    for _ in range(300):
        d = rng.uniform(-10, 10, size=(2, 2))
        sol = solve_zero_sum_2x2(d)
        assert sol.value == pytest.approx(grid_maximin(d), abs=1e-3)
        # the reported strategy must actually guarantee the value
        p = sol.p
        guaranteed = min(
            p * d[0, 0] + (1 - p) * d[1, 0],
            p * d[0, 1] + (1 - p) * d[1, 1],
        )
        assert guaranteed == pytest.approx(sol.value, abs=1e-9)


def test_zero_sum_rejects_bad_tables():
    with pytest.raises(GameError):
        solve_zero_sum_2x2([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    with pytest.raises(GameError):
        solve_zero_sum_2x2([[np.nan, 0.0], [0.0, 0.0]])


# ---------------------------------------------------------------------------
# transferable-utility solver


def test_tu_worked_example_published_entries():
    g = build_utility_matrix(1.0, 0.0062, 1.0, 0.0023)
    out = solve_tu(g)
    assert out.omega_star == pytest.approx(0.0062)
    assert out.action == (1, 2)
    assert out.sigma == pytest.approx(0.0031)
    assert out.payoff_a == pytest.approx(0.0031)
    assert out.payoff_b == pytest.approx(0.0031)
    assert out.theta == 0.0


def test_tu_zero_gain_prefers_status_quo():
    out = solve_tu(build_utility_matrix(0.5, 0.0, 0.5, 0.0))
    assert out.action == (2, 2)
    assert out.sigma == 0.0
    assert out.omega_star == 0.0


def test_tu_lag_vehicle_buys_its_lane():
    out = solve_tu(build_utility_matrix(1.0, 0.01, 1.0, 0.03))
    assert out.omega_star == pytest.approx(0.03)
    assert out.action == (2, 1)
    assert out.sigma == pytest.approx(-0.015)  # B pays A and holds its lane
    assert out.payoff_a == pytest.approx(0.015)
    assert out.payoff_b == pytest.approx(0.015)


def test_tu_structural_properties():
    rng = np.random.default_rng(4321)
    for _ in range(1000):
        g = build_utility_matrix(
            rng.uniform(0, 0.01), rng.uniform(0, 10),
            rng.uniform(0, 0.01), rng.uniform(0, 10),
        )
        out = solve_tu(g)
        assert out.theta == 0.0
        assert out.payoff_a == out.omega_star / 2.0
        assert out.payoff_b == out.omega_star / 2.0
        assert out.action != (1, 1)
        assert out.payoff_a + out.payoff_b == out.omega_star
        assert out.payoff_a >= out.threat[0] and out.payoff_b >= out.threat[1]
        # computing the payment from B's side flips only the sign
        cell = (out.action[0] - 1, out.action[1] - 1)
        assert out.sigma == -(g.b[cell] - (out.omega_star - out.theta) / 2.0)

        lam = rng.uniform(0.1, 10.0)
        scaled = solve_tu(g.scaled(lam))
        assert scaled.action == out.action
        assert scaled.omega_star == pytest.approx(lam * out.omega_star, rel=1e-12)
        assert scaled.sigma == pytest.approx(lam * out.sigma, rel=1e-12, abs=1e-300)
        assert scaled.payoff_a == pytest.approx(lam * out.payoff_a, rel=1e-12, abs=1e-300)


def test_tu_general_matrix_budget_balance():
    rng = np.random.default_rng(11)
    for _ in range(200):
        g = BimatrixGame(a=rng.uniform(-5, 5, (2, 2)), b=rng.uniform(-5, 5, (2, 2)))
        out = solve_tu(g)
        assert out.payoff_a + out.payoff_b == pytest.approx(out.omega_star, abs=1e-12)
        cell = (out.action[0] - 1, out.action[1] - 1)
        assert g.a[cell] + g.b[cell] == pytest.approx(out.omega_star)
        assert out.sigma == pytest.approx(g.a[cell] - out.payoff_a)


# ---------------------------------------------------------------------------
# bargaining solver


def test_ntu_worked_example_published_entries():
    g = build_utility_matrix(1.0, 0.0062, 1.0, 0.0023)
    out = solve_ntu(g, FixedCoin(0.7))
    assert out.n_a == pytest.approx(0.0031)
    assert out.n_b == pytest.approx(0.00115)
    assert out.status_quo == (0.0, 0.0)


def test_ntu_degenerate_status_quo():
    g = build_utility_matrix(0.3, 0.0, 0.3, 0.0)
    out = solve_ntu(g, FixedCoin(0.1))
    assert (out.n_a, out.n_b) == (0.0, 0.0)
    assert out.realized_action == (2, 2)


def test_ntu_coin_selects_action():
    g = build_utility_matrix(1.0, 0.01, 1.0, 0.02)
    assert solve_ntu(g, FixedCoin(0.49)).realized_action == (1, 2)
    assert solve_ntu(g, FixedCoin(0.51)).realized_action == (2, 1)


def test_ntu_matches_nash_product_oracle():
    rng = np.random.default_rng(77)
    for _ in range(100):
        g = build_utility_matrix(
            rng.uniform(0.001, 0.01), rng.uniform(0.1, 2.0),
            rng.uniform(0.001, 0.01), rng.uniform(0.1, 2.0),
        )
        out = solve_ntu(g, FixedCoin(0.2))
        ua, ub = nash_product_argmax(g.a12, g.b21)
        assert out.n_a == pytest.approx(ua, abs=1e-6)
        assert out.n_b == pytest.approx(ub, abs=1e-6)


def test_ntu_rejects_general_matrices():
    g = BimatrixGame(a=[[1.0, 2.0], [3.0, 4.0]], b=[[0.0, 1.0], [2.0, 3.0]])
    with pytest.raises(GameError):
        solve_ntu(g, FixedCoin(0.5))
