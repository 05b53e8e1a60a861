"""Explicit-Euler integration of the coupled hierarchical system with monitors."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .analysis import AdmissibleSetSpec, estimate_potential_max
from .constraint_sets import ConvexSet, FullSimplex
from .dynamics import EDM, ConstrainedBR
from .hierarchy import (Hierarchy, backprop_payoffs, clean_simplex, layer_masses,
                        validate_structure)
from .payoffs import CCWMonitor, LagPDM, StaticPayoff, pdm_step

log = logging.getLogger(__name__)


class ScenarioError(ValueError):
    pass


class MonitorViolation(RuntimeError):
    def __init__(self, kind, step, time, value, tol):
        super().__init__(f"{kind} monitor violated at step {step} (t={time:.4f}): "
                         f"value {value:.3e}, tolerance {tol:.1e}")
        self.kind = kind
        self.step = step
        self.time = time
        self.value = value


@dataclass
class MonitorToggles:
    positive_correlation: bool = True
    potential: bool = True
    membership: bool = True
    ccw: bool = True


@dataclass
class ScenarioConfig:
    hierarchy: Hierarchy
    sets: list[list[ConvexSet]]
    dynamics: list[list[EDM]]
    payoff: StaticPayoff
    initial: list[list[np.ndarray]]
    step: float = 0.01
    horizon: float = 50.0
    rest_tol: float = 1e-6
    rest_window: int = 10
    pdm_rate: float | None = None
    pdm_q0: np.ndarray | None = None
    monitors: MonitorToggles = field(default_factory=MonitorToggles)
    monitor_tol: float = 1e-8
    warn_only: bool = False
    seed: int = 0
    lyapunov_samples: int = 100_000
    f_star: float | None = None
    name: str = "scenario"

    @property
    def static(self) -> bool:
        return self.pdm_rate is None

    def validate(self):
        h = self.hierarchy
        report = validate_structure(h)
        if not report.ok:
            raise ScenarioError("invalid hierarchy: " + "; ".join(report.violations))
        if not 0 < self.step <= 1:
            raise ScenarioError(f"step must lie in (0, 1], got {self.step}")
        if self.horizon <= 0:
            raise ScenarioError("horizon must be positive")
        if self.payoff.dim != h.num_strategies:
            raise ScenarioError(f"payoff has dimension {self.payoff.dim}, hierarchy has "
                                f"{h.num_strategies} final strategies")
        for name, nested in (("sets", self.sets), ("dynamics", self.dynamics), ("initial", self.initial)):
            if len(nested) != h.num_layers or any(
                    len(nested[i]) != len(h.strategy_counts[i]) for i in range(h.num_layers)):
                raise ScenarioError(f"{name} must give one entry per group")
        for i, j in h.groups():
            where = f"group ({i + 1},{j + 1})"
            d = h.strategy_counts[i][j]
            cset, edm = self.sets[i][j], self.dynamics[i][j]
            if cset.dim != d:
                raise ScenarioError(f"{where}: set dimension {cset.dim}, group has {d} strategies")
            if isinstance(edm, ConstrainedBR):
                if edm.set.dim != d:
                    raise ScenarioError(f"{where}: constrained best response set has wrong dimension")
            elif not isinstance(cset, FullSimplex):
                raise ScenarioError(f"{where}: {edm.name} dynamics only keep the full simplex "
                                    f"invariant; use 'cbr' for {cset!r}")
            s0 = np.asarray(self.initial[i][j], dtype=float)
            if s0.shape != (d,):
                raise ScenarioError(f"{where}: initial state has shape {s0.shape}, expected ({d},)")
            if not cset.contains(s0, 1e-9):
                raise ScenarioError(f"{where}: initial state {s0.tolist()} is outside its set "
                                    f"(violation {cset.violation(s0):.2e})")
        if self.pdm_rate is not None and self.pdm_rate <= 0:
            raise ScenarioError("pdm rate must be positive")


@dataclass
class Trajectory:
    config: ScenarioConfig
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    states: list[list[np.ndarray]]
    pi: list[np.ndarray]
    pxdot: np.ndarray
    ccw: np.ndarray
    membership: np.ndarray
    velocity_norms: np.ndarray
    f: np.ndarray | None
    lyapunov: np.ndarray | None
    f_star: float | None
    stopped_at_rest: bool
    rest_time: float | None
    ccw_minimum: float
    violations: list = field(default_factory=list)

    def __len__(self):
        return self.t.size

    def final_states(self) -> list[list[np.ndarray]]:
        return [[s[-1].copy() for s in layer] for layer in self.states]

    def group_columns(self):
        h = self.config.hierarchy
        return [f"s{i + 1}_{j + 1}_{k + 1}"
                for i, j in h.groups() for k in range(h.strategy_counts[i][j])]


def _monitor(cfg, found, kind, step, time, value, tol):
    exc = MonitorViolation(kind, step, time, value, tol)
    found.append({"kind": kind, "step": step, "t": time, "value": value})
    if cfg.warn_only:
        log.warning("%s", exc)
    else:
        raise exc


def simulate(cfg: ScenarioConfig) -> Trajectory:
    """Integrate the hierarchy until the horizon or until every group rests.

    Each step composes the social state, evaluates (or reads out) payoffs,
    back-propagates them, and moves every group along its dynamics.
    """
    cfg.validate()
    h = cfg.hierarchy
    dt = cfg.step
    n_steps = int(round(cfg.horizon / dt))
    states = [[np.asarray(s, dtype=float).copy() for s in layer] for layer in cfg.initial]
    groups = list(h.groups())
    L = h.num_layers

    potential = cfg.static and cfg.payoff.potential_available
    f_star = cfg.f_star
    if potential and f_star is None and cfg.lyapunov_samples > 0:
        f_star, _ = estimate_potential_max(AdmissibleSetSpec(h, cfg.sets), cfg.payoff,
                                           n_samples=cfg.lyapunov_samples, seed=cfg.seed)

    pdm = None
    if not cfg.static:
        m0 = layer_masses(h, states)[-1]
        x0 = h.aggregation[-1] @ np.concatenate([m0[j] * s for j, s in enumerate(states[-1])])
        q0 = cfg.payoff.evaluate(x0) if cfg.pdm_q0 is None else cfg.pdm_q0
        pdm = LagPDM(cfg.pdm_rate, q0)
    ccw = CCWMonitor()
    tol = cfg.monitor_tol

    rec_t, rec_x, rec_p, rec_pxdot, rec_ccw, rec_mem, rec_vn, rec_f = [], [], [], [], [], [], [], []
    rec_states = [[[] for _ in layer] for layer in h.strategy_counts]
    rec_pi = [[] for _ in range(L)]
    found = []
    rest_count = 0
    stopped_at_rest = False
    rest_time = None
    x_prev = p_prev = f_prev = None

    for k in range(n_steps + 1):
        t = k * dt
        masses = layer_masses(h, states)
        out = np.concatenate([masses[-1][j] * s for j, s in enumerate(states[-1])])
        x = clean_simplex(h.aggregation[-1] @ out)
        p = cfg.payoff.evaluate(x) if pdm is None else pdm.payoff.copy()
        stack = backprop_payoffs(h, states, p)

        vels = []
        pxdot = 0.0
        norms = []
        membership = max(0.0, -float(x.min()), abs(float(x.sum()) - 1.0))
        for i, j in groups:
            s = states[i][j]
            pi = stack.group(i, j)
            v = cfg.dynamics[i][j].velocity(s, pi)
            vels.append(v)
            # layer decomposition of p^T xdot
            pxdot += masses[i][j] * float(pi @ v)
            norms.append(float(np.linalg.norm(v)))
            membership = max(membership, cfg.sets[i][j].violation(s))

        if k > 0:
            ccw.update(p_prev, p, x_prev, x, dt)
        f = cfg.payoff.potential(x) if potential else None

        rec_t.append(t)
        rec_x.append(x)
        rec_p.append(p)
        rec_pxdot.append(pxdot)
        rec_ccw.append(ccw.integral)
        rec_mem.append(membership)
        rec_vn.append(norms)
        rec_f.append(f)
        for i, j in groups:
            rec_states[i][j].append(states[i][j].copy())
        for i in range(L):
            rec_pi[i].append(stack.layers[i].copy())

        if cfg.monitors.positive_correlation and pxdot < -tol:
            _monitor(cfg, found, "positive_correlation", k, t, pxdot, tol)
        if cfg.monitors.potential and potential and f_prev is not None and f - f_prev < -tol:
            _monitor(cfg, found, "potential", k, t, f - f_prev, tol)
        if cfg.monitors.membership and membership > tol:
            _monitor(cfg, found, "membership", k, t, membership, tol)

        rest_count = rest_count + 1 if max(norms) <= cfg.rest_tol else 0
        if rest_count >= cfg.rest_window:
            stopped_at_rest = True
            rest_time = t
            break
        if k == n_steps:
            break

        for (i, j), v in zip(groups, vels):
            s_new = clean_simplex(states[i][j] + dt * v)
            cset = cfg.sets[i][j]
            if cset.violation(s_new) > 1e-12:
                s_new = cset.project(s_new)
            states[i][j] = s_new
        if pdm is not None:
            pdm_step(pdm, cfg.payoff, x, dt)
        x_prev, p_prev, f_prev = x, p, f

    f_arr = np.array(rec_f, dtype=float) if potential else None
    lyap = (f_star - f_arr) if (f_arr is not None and f_star is not None) else None
    return Trajectory(
        config=cfg,
        t=np.array(rec_t),
        x=np.array(rec_x),
        p=np.array(rec_p),
        states=[[np.array(col) for col in layer] for layer in rec_states],
        pi=[np.array(col) for col in rec_pi],
        pxdot=np.array(rec_pxdot),
        ccw=np.array(rec_ccw),
        membership=np.array(rec_mem),
        velocity_norms=np.array(rec_vn),
        f=f_arr,
        lyapunov=lyap,
        f_star=f_star,
        stopped_at_rest=stopped_at_rest,
        rest_time=rest_time,
        ccw_minimum=ccw.minimum,
        violations=found,
    )


@dataclass
class MonitorReport:
    min_pxdot: float
    max_potential_decrease: float | None
    max_membership_violation: float
    ccw_minimum: float
    ccw_final: float
    pxdot_fd_max_error: float
    tol: float
    step: float

    @property
    def checks(self) -> dict[str, bool]:
        out = {
            "positive_correlation": self.min_pxdot >= -self.tol,
            "membership": self.max_membership_violation <= self.tol,
            "pxdot_consistency": self.pxdot_fd_max_error <= 10 * self.step,
            "ccw_finite": bool(np.isfinite(self.ccw_minimum)),
        }
        if self.max_potential_decrease is not None:
            out["potential_monotone"] = self.max_potential_decrease <= self.tol
        return out

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def as_dict(self):
        return {
            "min_pxdot": self.min_pxdot,
            "max_potential_decrease": self.max_potential_decrease,
            "max_membership_violation": self.max_membership_violation,
            "ccw_minimum": self.ccw_minimum,
            "ccw_final": self.ccw_final,
            "pxdot_fd_max_error": self.pxdot_fd_max_error,
            "checks": self.checks,
            "ok": self.ok,
        }


def monitor_report(traj: Trajectory) -> MonitorReport:
    cfg = traj.config
    dt = cfg.step
    if len(traj) > 1:
        fd = np.einsum("kd,kd->k", traj.p[:-1], np.diff(traj.x, axis=0)) / dt
        fd_err = float(np.abs(fd - traj.pxdot[:-1]).max())
    else:
        fd_err = 0.0
    decrease = None
    if traj.f is not None:
        decrease = float(max(0.0, -np.diff(traj.f).min())) if len(traj) > 1 else 0.0
    return MonitorReport(
        min_pxdot=float(traj.pxdot.min()),
        max_potential_decrease=decrease,
        max_membership_violation=float(traj.membership.max()),
        ccw_minimum=float(traj.ccw_minimum),
        ccw_final=float(traj.ccw[-1]),
        pxdot_fd_max_error=fd_err,
        tol=cfg.monitor_tol,
        step=dt,
    )


def csv_header(traj: Trajectory) -> list[str]:
    d = traj.x.shape[1]
    return (["t"] + [f"x{k + 1}" for k in range(d)] + traj.group_columns()
            + [f"p{k + 1}" for k in range(d)] + ["f", "V", "pxdot", "ccw_integral"])


def write_csv(traj: Trajectory, path) -> None:
    h = traj.config.hierarchy
    groups = list(h.groups())

    def fmt(v):
        return repr(float(v))

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_header(traj))
        for k in range(len(traj)):
            row = [fmt(traj.t[k])] + [fmt(v) for v in traj.x[k]]
            for i, j in groups:
                row += [fmt(v) for v in traj.states[i][j][k]]
            row += [fmt(v) for v in traj.p[k]]
            row.append(fmt(traj.f[k]) if traj.f is not None else "")
            row.append(fmt(traj.lyapunov[k]) if traj.lyapunov is not None else "")
            row += [fmt(traj.pxdot[k]), fmt(traj.ccw[k])]
            w.writerow(row)
