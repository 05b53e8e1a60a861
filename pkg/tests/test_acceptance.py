"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py`` and read the "acceptance criteria"
section of the terminal summary.
"""
import time

import numpy as np
import pytest

from hierpop.analysis import certify_equilibrium
from hierpop.cli import run_scenario
from hierpop.config import apply_overrides, build_scenario
from hierpop.constraint_sets import BallCap
from hierpop.engine import ScenarioConfig, simulate
from hierpop.hierarchy import Hierarchy, transformation, validate_structure
from hierpop.payoffs import AffinePayoff, LagPDM, congestion_payoff, pdm_step
from hierpop.presets import get_preset, preset_names

from acceptance_log import criterion
from oracles import dykstra_ball_cap, projected_gradient_ball_cap
from test_constraint_sets import ball_suite, polytope_suite

PRESETS = preset_names()
R3 = np.array([0.0, 0.0, 1.0])


def preset_config(name, **overrides):
    return build_scenario(apply_overrides(get_preset(name), **overrides))


def timed(cfg):
    start = time.perf_counter()
    traj = simulate(cfg)
    return traj, time.perf_counter() - start


@pytest.fixture(scope="module")
def standard_runs():
    """Every preset at h = 0.01, T = 50."""
    return {name: timed(preset_config(name, step=0.01, horizon=50.0)) for name in PRESETS}


@pytest.fixture(scope="module")
def own_horizon_runs():
    """Every preset at its own configured horizon."""
    return {name: timed(preset_config(name)) for name in PRESETS}


def test_criterion_01_structure():
    with criterion(1, "W nonnegative with unit column sums; seeded violations rejected") as c:
        worst = 0.0
        for name in PRESETS:
            cfg = preset_config(name)
            h = cfg.hierarchy
            assert validate_structure(h).ok, name
            for W in h.aggregation:
                assert (W >= 0).all(), name
                worst = max(worst, float(np.abs(W.sum(axis=0) - 1).max()))
            for i in range(h.num_layers):
                T = transformation(h, cfg.initial[i], i)
                assert (T >= 0).all()
                worst = max(worst, float(np.abs(T.sum(axis=0) - 1).max()))
        assert worst <= 1e-12
        I3 = np.eye(3)
        good = np.hstack([I3, I3, I3])
        negative = good.copy()
        negative[0, 0], negative[1, 0] = -0.1, 1.1
        short = good.copy()
        short[2, 8] = 0.4
        seeded = [Hierarchy([[3], [3, 3, 3]], [I3, negative]),
                  Hierarchy([[3], [3, 3, 3]], [I3, short]),
                  Hierarchy([[3], [3, 3, 3]], [I3[[2, 1, 0]], good]),
                  Hierarchy([[3], [3, 3]], [I3, good])]
        rejected = sum(not validate_structure(h).ok for h in seeded)
        assert rejected == len(seeded)
        c["detail"] = f"max column-sum error {worst:.1e}; {rejected}/{len(seeded)} seeded violations rejected"


def test_criterion_02_invariance(standard_runs):
    with criterion(2, "all logged group and social states stay in their sets (h=0.01, T=50)") as c:
        worst, slowest = 0.0, 0.0
        for name, (traj, wall) in standard_runs.items():
            cfg = traj.config
            for i, j in cfg.hierarchy.groups():
                cset = cfg.sets[i][j]
                worst = max(worst, max(cset.violation(s) for s in traj.states[i][j]))
            social = max(0.0, -traj.x.min(), float(np.abs(traj.x.sum(axis=1) - 1).max()))
            worst = max(worst, social)
            slowest = max(slowest, wall)
        assert worst <= 1e-8
        assert slowest < 10.0
        c["detail"] = f"max violation {worst:.1e}; slowest run {slowest:.1f}s"


def test_criterion_03_positive_correlation(standard_runs):
    with criterion(3, "min p^T xdot >= -1e-8 in every preset run") as c:
        mins = {name: float(traj.pxdot.min()) for name, (traj, _) in standard_runs.items()}
        assert min(mins.values()) >= -1e-8, mins
        c["detail"] = f"smallest {min(mins.values()):.2e}"


def test_criterion_04_potential_monotone(standard_runs):
    with criterion(4, "potential nondecreasing, per-step drift <= 1e-8") as c:
        drops = {}
        for name, (traj, _) in standard_runs.items():
            if traj.f is not None:
                drops[name] = float(max(0.0, -np.diff(traj.f).min()))
        assert len(drops) == len(PRESETS)
        assert max(drops.values()) <= 1e-8, drops
        c["detail"] = f"largest decrease {max(drops.values()):.1e} over {len(drops)} scenarios"


def test_criterion_05_case_i_and_baseline(own_horizon_runs):
    with criterion(5, "case (i) respects x2 <= 0.15 and reaches R3; direct Smith baseline overshoots") as c:
        traj, _ = own_horizon_runs["nav-case-i"]
        max_x2 = float(traj.x[:, 1].max())
        dist = float(np.linalg.norm(traj.x[-1] - R3))
        assert max_x2 <= 0.15 + 1e-6 and dist <= 1e-2
        base, _ = own_horizon_runs["nav-direct"]
        # Independent Euler-Smith oracle on the unlayered game.
        F = congestion_payoff()
        x = np.array([0.8, 0.1, 0.1])
        peak = x[1]
        for _ in range(len(base) - 1):
            p = F.evaluate(x)
            x = x + 0.01 * np.array([sum(x[j] * max(p[i] - p[j], 0) - x[i] * max(p[j] - p[i], 0)
                                         for j in range(3)) for i in range(3)])
            peak = max(peak, x[1])
        np.testing.assert_allclose(base.x[-1], x, atol=1e-10)
        base_peak = float(base.x[:, 1].max())
        base_dist = float(np.linalg.norm(base.x[-1] - R3))
        assert abs(base_peak - peak) <= 1e-10
        assert base_peak > 0.15 and base_dist <= 1e-2
        c["detail"] = (f"case (i) max x2 {max_x2:.6f}, dist {dist:.1e}; baseline max x2 "
                       f"{base_peak:.4f}, dist {base_dist:.1e} at T={base.t[-1]:.0f}")


def test_criterion_06_case_ii(own_horizon_runs):
    with criterion(6, "case (ii) respects x3 <= 0.9 and reaches (0.05, 0.05, 0.9)") as c:
        F = congestion_payoff()
        n = 1000
        a, b = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = a + b <= n
        X = np.column_stack([a[keep], b[keep], n - a[keep] - b[keep]]) / n
        X = X[X[:, 2] <= 0.9 + 1e-12]
        vals = 0.5 * np.einsum("ki,ij,kj->k", X, F.A, X) + X @ F.b
        grid = X[int(np.argmax(vals))]
        xbar = np.array([0.05, 0.05, 0.9])
        assert np.abs(grid - xbar).max() <= 1e-3
        vertices = np.array([[1, 0, 0], [0, 1, 0], [0.1, 0, 0.9], [0, 0.1, 0.9]], dtype=float)
        assert ((vertices - xbar) @ F.evaluate(xbar)).max() <= 1e-12
        traj, _ = own_horizon_runs["nav-case-ii"]
        max_x3 = float(traj.x[:, 2].max())
        dist = float(np.linalg.norm(traj.x[-1] - xbar))
        assert max_x3 <= 0.9 + 1e-6 and dist <= 1e-2
        c["detail"] = f"max x3 {max_x3:.6f}, final distance {dist:.1e}"


def test_criterion_07_certification(standard_runs, own_horizon_runs):
    with criterion(7, "every detected rest point is certified") as c:
        checked = []
        worst_group, worst_social = 0.0, 0.0
        for runs in (standard_runs, own_horizon_runs):
            for name, (traj, _) in runs.items():
                if not traj.stopped_at_rest:
                    continue
                cfg = traj.config
                cert = certify_equilibrium(cfg.hierarchy, traj.final_states(), cfg.payoff, cfg.sets,
                                           tol=1e-5, social_tol=1e-4, seed=cfg.seed)
                assert cert.certified, (name, cert.as_dict())
                worst_group = max(worst_group, cert.max_group_gap)
                worst_social = max(worst_social, cert.social_gap)
                checked.append(name)
        assert checked
        c["detail"] = (f"{len(checked)} runs stopped at rest ({', '.join(sorted(set(checked)))}); "
                       f"max group gap {worst_group:.1e}, sampled social gap {worst_social:.1e}")


def test_criterion_08_oracles():
    with criterion(8, "polytope and ball-cap oracles agree with independent references") as c:
        suite = polytope_suite()
        assert len(suite) >= 20 and all(len(V) <= 10 for _, V in suite)
        worst_poly = 0.0
        for idx, (P, V) in enumerate(suite):
            rng = np.random.default_rng(1000 + idx)
            for _ in range(5):
                pi = rng.normal(size=P.dim)
                x = P.best_response(pi)
                k = int(np.argmax(V @ pi))
                worst_poly = max(worst_poly, abs(pi @ x - V[k] @ pi))
                if np.ptp(np.sort(V @ pi)[-2:]) > 1e-6:
                    worst_poly = max(worst_poly, float(np.abs(x - V[k]).max()))
        assert worst_poly <= 1e-9
        balls = ball_suite()
        assert len(balls) >= 20
        worst_ball, active = 0.0, 0
        for idx, (center, r) in enumerate(balls):
            B = BallCap(center, r)
            rng = np.random.default_rng(50 + idx)
            pi = rng.normal(size=center.size)
            t = pi - pi.mean()
            active += (center + r * t / np.linalg.norm(t)).min() < 0
            worst_ball = max(worst_ball, float(np.abs(B.best_response(pi) - projected_gradient_ball_cap(pi, center, r)).max()))
            y = np.random.default_rng(idx).normal(size=center.size)
            worst_ball = max(worst_ball, float(np.abs(B.project(y) - dykstra_ball_cap(y, center, r)).max()))
        assert worst_ball <= 1e-6 and active >= 1
        c["detail"] = (f"{len(suite)} polytopes, err {worst_poly:.1e}; {len(balls)} balls "
                       f"({active} with active bounds), err {worst_ball:.1e}")


def test_criterion_09_gradient():
    with criterion(9, "F matches central differences of f (rel. err <= 1e-5)") as c:
        rng = np.random.default_rng(99)
        games = [congestion_payoff()]
        for _ in range(10):
            d = int(rng.integers(2, 6))
            M = rng.normal(size=(d, d))
            games.append(AffinePayoff(-(M @ M.T) + 0.3 * (M + M.T), rng.normal(size=d)))
        worst = 0.0
        eps = 1e-6
        for F in games:
            for x in rng.dirichlet(np.ones(F.dim), size=100):
                g = np.array([(F.potential(x + eps * e) - F.potential(x - eps * e)) / (2 * eps)
                              for e in np.eye(F.dim)])
                p = F.evaluate(x)
                worst = max(worst, np.linalg.norm(g - p) / max(np.linalg.norm(p), 1.0))
        assert worst <= 1e-5
        c["detail"] = f"{len(games)} games x 100 points, max rel. err {worst:.1e}"


def test_criterion_10_pdm_recovery():
    with criterion(10, "lag PDM recovers F(x) within 1e-6 for t >= 20") as c:
        F = congestion_payoff()
        worst = 0.0
        for x in np.random.default_rng(10).dirichlet(np.ones(3), size=5):
            state = LagPDM(1.0, np.zeros(3))
            dt = 0.01
            for k in range(1, 3001):
                _, p = pdm_step(state, F, x, dt)
                if k * dt >= 20 - 1e-12:
                    worst = max(worst, float(np.linalg.norm(p - F.evaluate(x))))
        assert worst <= 1e-6
        c["detail"] = f"max error after t=20: {worst:.1e}"


def test_criterion_11_ccw():
    with criterion(11, "CCW integral bounded below along presets (T=100), zero for constant payoff") as c:
        minima = {}
        for name in PRESETS:
            traj = simulate(preset_config(name, horizon=100.0))
            assert traj.config.static and traj.config.payoff.potential_available
            assert np.isfinite(traj.ccw).all()
            minima[name] = float(traj.ccw_minimum)
        assert min(minima.values()) > -10
        I3 = np.eye(3)
        constant = ScenarioConfig(
            hierarchy=Hierarchy([[3]], [I3]), sets=preset_config("nav-direct").sets,
            dynamics=preset_config("nav-direct").dynamics,
            payoff=AffinePayoff(np.zeros((3, 3)), [0.0, 0.3, 0.1]),
            initial=[[np.array([0.8, 0.1, 0.1])]], horizon=100.0)
        traj = simulate(constant)
        assert np.ptp(traj.x[:, 1]) > 0.1  # the state moves, the payoff does not
        assert np.all(traj.ccw == 0.0)
        c["detail"] = f"lowest running minimum {min(minima.values()):.3f}; constant-payoff run exactly 0"


def test_criterion_12_determinism(tmp_path):
    with criterion(12, "same seed gives byte-identical CSV for every preset") as c:
        for name in PRESETS:
            a = run_scenario(name, out_dir=tmp_path / name / "a", seed=7, no_plot=True)
            b = run_scenario(name, out_dir=tmp_path / name / "b", seed=7, no_plot=True)
            assert a.exit_status == b.exit_status == 0, (name, a.error)
            ca = (tmp_path / name / "a" / "trajectory.csv").read_bytes()
            cb = (tmp_path / name / "b" / "trajectory.csv").read_bytes()
            assert ca == cb, name
        c["detail"] = f"{len(PRESETS)} presets"
