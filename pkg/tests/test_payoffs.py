import numpy as np
import pytest

from hierpop.payoffs import (AffinePayoff, CCWMonitor, CustomPayoff, LagPDM, NotPotentialError,
                             ccw_update, congestion_payoff, pdm_step, potential_value, static_eval)


def route_costs(x):
    # Independent statement of the three-route network: links shared by route pairs.
    x1, x2, x3 = x
    return np.array([1 + x1 + x3, 1 + x2 + x3, x1 + x2 + 2 * x3])


def random_symmetric_game(rng, d):
    M = rng.normal(size=(d, d))
    return AffinePayoff(-(M @ M.T) + 0.3 * (M + M.T), rng.normal(size=d))


class TestStatic:
    def test_congestion_values(self):
        F = congestion_payoff()
        np.testing.assert_allclose(static_eval(F, [0, 0, 1]), [-2, -2, -2])
        np.testing.assert_allclose(static_eval(F, np.full(3, 1 / 3)), [-5 / 3, -5 / 3, -4 / 3])

    def test_congestion_equals_negative_route_costs(self):
        F = congestion_payoff()
        for x in np.random.default_rng(0).dirichlet(np.ones(3), size=20):
            np.testing.assert_allclose(F.evaluate(x), -route_costs(x), atol=1e-14)

    def test_zero_matrix_gives_constant(self):
        F = AffinePayoff(np.zeros((3, 3)), [1.0, -2.0, 0.5])
        np.testing.assert_array_equal(F.evaluate([0.2, 0.3, 0.5]), [1.0, -2.0, 0.5])

    def test_potential_values(self):
        F = congestion_payoff()
        assert potential_value(F, [0, 0, 1]) == pytest.approx(-1.0, abs=1e-15)
        assert potential_value(F, np.full(3, 1 / 3)) == pytest.approx(-10 / 9, abs=1e-14)
        assert potential_value(AffinePayoff(np.zeros((3, 3)), np.zeros(3)), [0.1, 0.2, 0.7]) == 0.0

    def test_congestion_matrix_symmetric_negative_semidefinite(self):
        A = congestion_payoff().A
        np.testing.assert_array_equal(A, A.T)
        eig = np.linalg.eigvalsh(A)
        assert eig.max() <= 1e-12
        assert abs(eig).min() <= 1e-12  # third row is the sum of the first two

    def test_asymmetric_has_no_potential(self):
        F = AffinePayoff([[0.0, 1.0], [0.0, 0.0]], [0.0, 0.0])
        assert not F.potential_available
        with pytest.raises(NotPotentialError):
            F.potential([0.5, 0.5])

    def test_custom_payoff(self):
        F = CustomPayoff(lambda x: -x, 3, potential=lambda x: -0.5 * x @ x)
        np.testing.assert_array_equal(F.evaluate([1.0, 2.0, 3.0]), [-1, -2, -3])
        assert F.potential([1.0, 0.0, 0.0]) == -0.5
        with pytest.raises(NotPotentialError):
            CustomPayoff(lambda x: x, 3).potential([1.0, 0, 0])

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            AffinePayoff(np.eye(2), [0.0, 0.0, 0.0])


def central_difference_gradient(f, x, eps=1e-6):
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = eps
        g[k] = (f(x + e) - f(x - e)) / (2 * eps)
    return g


GAMES = [("congestion", congestion_payoff())]
_rng = np.random.default_rng(2024)
GAMES += [(f"symmetric{k}", random_symmetric_game(_rng, int(_rng.integers(2, 6)))) for k in range(10)]


@pytest.mark.parametrize("k", range(len(GAMES)), ids=[g[0] for g in GAMES])
def test_gradient_matches_payoff(k):
    F = GAMES[k][1]
    rng = np.random.default_rng(k)
    for x in rng.dirichlet(np.ones(F.dim), size=100):
        g = central_difference_gradient(F.potential, x)
        p = F.evaluate(x)
        assert np.linalg.norm(g - p) <= 1e-5 * max(np.linalg.norm(p), 1.0)


class TestPDM:
    def test_recovers_static_payoff_from_zero(self):
        F = congestion_payoff()
        x = np.array([0.2, 0.3, 0.5])
        state = LagPDM(1.0, np.zeros(3))
        dt = 1e-3
        worst = 0.0
        for k in range(1, 10_001):
            q, p = pdm_step(state, F, x, dt)
            exact = F.evaluate(x) * (1 - np.exp(-k * dt))
            worst = max(worst, np.abs(p - exact).max())
        assert worst < 5 * dt
        assert np.linalg.norm(p - F.evaluate(x)) < 1e-3

    def test_recovery_after_twenty_time_units(self):
        F = congestion_payoff()
        x = np.array([0.6, 0.1, 0.3])
        state = LagPDM(1.0, np.zeros(3))
        dt = 0.01
        for k in range(1, 4001):
            _, p = pdm_step(state, F, x, dt)
            if k * dt >= 20:
                assert np.linalg.norm(p - F.evaluate(x)) <= 1e-6

    def test_lag_at_equilibrium_is_constant(self):
        F = congestion_payoff()
        x = np.array([0.1, 0.1, 0.8])
        state = LagPDM(2.0, F.evaluate(x))
        for _ in range(100):
            q, _ = pdm_step(state, F, x, 0.05)
        np.testing.assert_allclose(q, F.evaluate(x), atol=1e-15)

    def test_bounded_for_inputs_on_simplex(self):
        F = congestion_payoff()
        rng = np.random.default_rng(5)
        q0 = rng.normal(size=3) * 10
        state = LagPDM(1.5, q0)
        bound_F = max(np.linalg.norm(F.evaluate(v)) for v in np.eye(3))  # ||F|| is convex, max at vertices
        bound = max(np.linalg.norm(q0), bound_F) + 1e-6
        for _ in range(5000):
            q, _ = pdm_step(state, F, rng.dirichlet(np.ones(3)), 0.01)
            assert np.linalg.norm(q) <= bound

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            LagPDM(0.0, np.zeros(3))
        with pytest.raises(ValueError):
            pdm_step(LagPDM(1.0, np.zeros(3)), congestion_payoff(), np.full(3, 1 / 3), 0.0)


class TestCCW:
    def test_starts_at_zero(self):
        assert CCWMonitor().integral == 0.0

    def test_constant_payoff_integral_is_zero(self):
        mon = CCWMonitor()
        rng = np.random.default_rng(0)
        p = np.array([1.0, -2.0, 0.5])
        x_prev = rng.dirichlet(np.ones(3))
        for _ in range(500):
            x = rng.dirichlet(np.ones(3))
            ccw_update(mon, p, p, x_prev, x, 0.01)
            x_prev = x
        assert mon.integral == 0.0 and mon.minimum == 0.0

    def test_linear_ramp(self):
        v = np.array([1.0, -3.0, 2.0])
        x = np.array([0.2, 0.5, 0.3])
        mon = CCWMonitor()
        dt, T = 0.01, 5.0
        steps = int(round(T / dt))
        for k in range(steps):
            mon.update(k * dt * v, (k + 1) * dt * v, x, x, dt)
        assert mon.integral == pytest.approx(T * v @ x, abs=1e-12)
        assert mon.minimum == pytest.approx(min(0.0, T * v @ x), abs=1e-12)
