"""Equilibrium certificates and exploration of the admissible set.

The admissible set is every social state reachable when each group keeps its
distribution inside its own convex set.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constraint_sets import ConvexSet
from .hierarchy import Hierarchy, backprop_payoffs, layer_masses, social_state
from .payoffs import AffinePayoff, StaticPayoff


@dataclass
class AdmissibleSetSpec:
    hierarchy: Hierarchy
    sets: list[list[ConvexSet]]

    def __post_init__(self):
        h = self.hierarchy
        if len(self.sets) != h.num_layers:
            raise ValueError(f"expected sets for {h.num_layers} layers, got {len(self.sets)}")
        for i, j in h.groups():
            if self.sets[i][j].dim != h.strategy_counts[i][j]:
                raise ValueError(f"set of group ({i + 1},{j + 1}) has dimension "
                                 f"{self.sets[i][j].dim}, group has {h.strategy_counts[i][j]} strategies")


def compose_batch(h: Hierarchy, batch_states) -> tuple[np.ndarray, list[np.ndarray]]:
    """Vectorized social state for many state profiles at once.

    ``batch_states[i][j]`` has shape ``(n, d^{i,j})``. Returns ``x`` with shape
    ``(n, d)`` and the per-layer masses.
    """
    n = batch_states[0][0].shape[0]
    mass = np.ones((n, 1))
    masses = [mass]
    for i in range(h.num_layers):
        out = np.concatenate([mass[:, [j]] * s for j, s in enumerate(batch_states[i])], axis=1)
        mass = out @ h.aggregation[i].T
        masses.append(mass)
    return mass, masses[:-1]


def sample_group_states(spec: AdmissibleSetSpec, n: int, rng) -> list[list[np.ndarray]]:
    return [[cset.sample(n, rng) for cset in layer] for layer in spec.sets]


def admissible_sample(spec: AdmissibleSetSpec, n: int, seed=0) -> np.ndarray:
    """``n`` social states drawn from the admissible set, one per row."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    x, _ = compose_batch(spec.hierarchy, sample_group_states(spec, n, rng))
    return x


def admissible_best_response(spec: AdmissibleSetSpec, p):
    """Exact maximizer of ``p^T x`` over the admissible set.

    Works bottom-up: every group picks its own best response to the values of
    the subtrees it feeds, which is optimal because the aggregation matrices are
    nonnegative. Returns ``(x, value, states)``.
    """
    h = spec.hierarchy
    p = np.asarray(p, dtype=float)
    states = [[None] * len(layer) for layer in h.strategy_counts]
    values = p
    for i in range(h.num_layers - 1, -1, -1):
        pi = h.aggregation[i].T @ values
        layer_values = []
        for j, cset in enumerate(spec.sets[i]):
            block = pi[h.block(i, j)]
            s = cset.best_response(block)
            states[i][j] = s
            layer_values.append(float(s @ block))
        values = np.array(layer_values)
    x = social_state(h, states)
    return x, float(values[0]), states


@dataclass
class NECertificate:
    x: np.ndarray
    group_gaps: list[list[float]]
    social_gap: float
    exact_social_gap: float
    feasible: bool
    tol: float
    social_tol: float

    @property
    def max_group_gap(self) -> float:
        return max(g for layer in self.group_gaps for g in layer)

    @property
    def certified(self) -> bool:
        return self.feasible and self.max_group_gap <= self.tol and self.social_gap <= self.social_tol

    def as_dict(self):
        return {
            "x": self.x.tolist(),
            "group_gaps": self.group_gaps,
            "max_group_gap": self.max_group_gap,
            "social_gap_sampled": self.social_gap,
            "social_gap_exact": self.exact_social_gap,
            "feasible": self.feasible,
            "tol": self.tol,
            "social_tol": self.social_tol,
            "certified": self.certified,
        }


def certify_equilibrium(h: Hierarchy, states, payoff: StaticPayoff, sets, tol=1e-6,
                        social_tol=None, n_samples=10_000, seed=0, feas_tol=1e-8) -> NECertificate:
    """Check that the social state of ``states`` is a Nash equilibrium within K.

    Per-group gaps ``max_{s in K^{i,j}} pi^T s - pi^T s_bar`` are exact; the
    social gap ``max (x - x_bar)^T F(x_bar)`` is estimated over admissible
    samples and also computed exactly by backward induction.
    """
    social_tol = tol if social_tol is None else social_tol
    spec = AdmissibleSetSpec(h, sets)
    x_bar = social_state(h, states)
    p_bar = payoff.evaluate(x_bar)
    stack = backprop_payoffs(h, states, p_bar)
    gaps = []
    feasible = True
    for i, layer in enumerate(sets):
        row = []
        for j, cset in enumerate(layer):
            pi = stack.group(i, j)
            s = np.asarray(states[i][j], dtype=float)
            feasible &= cset.contains(s, feas_tol)
            row.append(float(pi @ cset.best_response(pi) - pi @ s))
        gaps.append(row)
    samples = admissible_sample(spec, n_samples, seed=seed)
    social_gap = float(((samples - x_bar) @ p_bar).max())
    _, best, _ = admissible_best_response(spec, p_bar)
    exact = best - float(p_bar @ x_bar)
    return NECertificate(x_bar, gaps, social_gap, exact, bool(feasible), tol, social_tol)


@dataclass
class ProbeReport:
    n_pairs: int
    failures: list = field(default_factory=list)
    max_reconstruction_error: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures


def convexity_probe(spec: AdmissibleSetSpec, n_pairs=1000, seed=0, tol=1e-9) -> ProbeReport:
    """Test that mixtures of admissible states are admissible.

    For a mixture ``a x1 + (1 - a) x2`` each group takes the mass-weighted
    average of its two states,
    ``(a m1 s1 + (1 - a) m2 s2) / (a m1 + (1 - a) m2)``, which reproduces the
    mixture exactly; the probe then checks every averaged state is still in its
    group's set.
    """
    h = spec.hierarchy
    rng = np.random.default_rng(seed)
    a_states = sample_group_states(spec, n_pairs, rng)
    b_states = sample_group_states(spec, n_pairs, rng)
    alphas = rng.random(n_pairs)
    report = ProbeReport(n_pairs)
    for k in range(n_pairs):
        sa = [[s[k] for s in layer] for layer in a_states]
        sb = [[s[k] for s in layer] for layer in b_states]
        al = alphas[k]
        target = al * social_state(h, sa) + (1 - al) * social_state(h, sb)
        ma, mb = layer_masses(h, sa), layer_masses(h, sb)
        mixed = []
        bad = None
        for i, layer in enumerate(spec.sets):
            row = []
            for j, cset in enumerate(layer):
                wa, wb = al * ma[i][j], (1 - al) * mb[i][j]
                if wa + wb <= 0.0:
                    s = sa[i][j]
                else:
                    s = (wa * sa[i][j] + wb * sb[i][j]) / (wa + wb)
                if bad is None and not cset.contains(s, tol):
                    bad = (i, j, cset.violation(s))
                row.append(s)
            mixed.append(row)
        err = float(np.abs(social_state(h, mixed) - target).max())
        report.max_reconstruction_error = max(report.max_reconstruction_error, err)
        if bad is not None:
            report.failures.append({"pair": k, "group": (bad[0] + 1, bad[1] + 1), "violation": bad[2]})
        elif err > 1e-9:
            report.failures.append({"pair": k, "reconstruction_error": err})
    return report


def _line_search(fun, tol=1e-15):
    # fun is quadratic along the segment for affine payoffs: fit through 0, 1/2, 1.
    f0, fh, f1 = fun(0.0), fun(0.5), fun(1.0)
    a = 2.0 * (f1 - 2.0 * fh + f0)
    b = f1 - f0 - a
    candidates = [1.0]
    if a < 0:
        candidates.append(min(1.0, max(0.0, -b / (2.0 * a))))
    best = max(candidates, key=fun)
    return (best, fun(best)) if fun(best) > f0 + tol else (0.0, f0)


def estimate_potential_max(spec: AdmissibleSetSpec, payoff: StaticPayoff, n_samples=100_000,
                           seed=0, refine_rounds=200):
    """Best potential over random admissible states, refined by block Frank-Wolfe.

    The gradient of the potential with respect to group (i, j)'s state is
    ``m^i_j pi^{i,j}``, so each block step moves the group toward its best
    response with an exact line search.
    """
    h = spec.hierarchy
    rng = np.random.default_rng(seed)
    batch = sample_group_states(spec, n_samples, rng)
    xs, _ = compose_batch(h, batch)
    if isinstance(payoff, AffinePayoff):
        fvals = 0.5 * np.einsum("ni,ij,nj->n", xs, payoff.A, xs) + xs @ payoff.b
    else:
        fvals = np.array([payoff.potential(x) for x in xs])
    k = int(np.argmax(fvals))
    states = [[s[k].copy() for s in layer] for layer in batch]
    best = payoff.potential(social_state(h, states))

    def value_with(i, j, s_new):
        trial = [list(layer) for layer in states]
        trial[i][j] = s_new
        return payoff.potential(social_state(h, trial))

    for _ in range(refine_rounds):
        start = best
        for i, j in h.groups():
            cset = spec.sets[i][j]
            x = social_state(h, states)
            stack = backprop_payoffs(h, states, payoff.evaluate(x))
            pi = stack.group(i, j)
            s = states[i][j]
            # Frank-Wolfe toward the best response, then a projected-gradient
            # step, which keeps making progress when the optimum sits on a face.
            for target in (cset.best_response(pi), cset.project(s + pi)):
                if pi @ (target - s) <= 1e-15:
                    continue
                g, val = _line_search(lambda g: value_with(i, j, s + g * (target - s)))
                if g > 0:
                    s = s + g * (target - s)
                    states[i][j] = s
                    best = val
                    pi = backprop_payoffs(h, states, payoff.evaluate(social_state(h, states))).group(i, j)
        if best - start <= 1e-15:
            break
    return best, states
