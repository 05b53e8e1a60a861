"""Layered decision structure: composition of group states and payoff back-propagation.

Layers and groups are indexed from 0 internally. ``states[i][j]`` is the
distribution of group ``j`` in layer ``i`` over its own strategies.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CLAMP_TOL = 1e-12
RENORM_TOL = 1e-9


def clean_simplex(v: np.ndarray) -> np.ndarray:
    """Clamp roundoff negatives to zero and renormalize tiny sum drift."""
    v = np.array(v, dtype=float)
    v[(v < 0.0) & (v >= -CLAMP_TOL)] = 0.0
    total = v.sum()
    if total != 1.0 and abs(total - 1.0) < RENORM_TOL:
        v /= total
    return v


@dataclass(frozen=True)
class Hierarchy:
    """Static wiring of the game.

    ``strategy_counts[i][j]`` is the number of strategies of group (i, j) and
    ``aggregation[i]`` routes the ``o^i`` outputs of layer ``i`` to the groups of
    layer ``i + 1`` (or to the final strategies for the last layer).
    """

    strategy_counts: tuple[tuple[int, ...], ...]
    aggregation: tuple[np.ndarray, ...]
    _offsets: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __init__(self, strategy_counts, aggregation):
        counts = tuple(tuple(int(c) for c in layer) for layer in strategy_counts)
        mats = tuple(np.atleast_2d(np.asarray(w, dtype=float)) for w in aggregation)
        object.__setattr__(self, "strategy_counts", counts)
        object.__setattr__(self, "aggregation", mats)
        offsets = tuple(tuple(int(o) for o in np.concatenate([[0], np.cumsum(layer)[:-1]]))
                        for layer in counts)
        object.__setattr__(self, "_offsets", offsets)

    @property
    def num_layers(self) -> int:
        return len(self.strategy_counts)

    @property
    def groups_per_layer(self) -> list[int]:
        return [len(layer) for layer in self.strategy_counts]

    @property
    def num_strategies(self) -> int:
        """Number of final strategies ``d``."""
        return self.aggregation[-1].shape[0]

    def outputs(self, i: int) -> int:
        return sum(self.strategy_counts[i])

    def block(self, i: int, j: int) -> slice:
        """Slice of group (i, j) inside the stacked layer-``i`` vectors."""
        start = self._offsets[i][j]
        return slice(start, start + self.strategy_counts[i][j])

    def groups(self):
        for i, layer in enumerate(self.strategy_counts):
            for j in range(len(layer)):
                yield i, j

    def __eq__(self, other):
        if not isinstance(other, Hierarchy):
            return NotImplemented
        return (self.strategy_counts == other.strategy_counts
                and len(self.aggregation) == len(other.aggregation)
                and all(np.array_equal(a, b) for a, b in zip(self.aggregation, other.aggregation)))

    __hash__ = None


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_structure(h: Hierarchy, tol: float = 1e-12) -> ValidationReport:
    """Check nonnegativity, unit column sums and the shape chain of every W."""
    violations = []
    L = h.num_layers
    if L == 0:
        return ValidationReport(["hierarchy has no layers"])
    if len(h.strategy_counts[0]) != 1:
        violations.append(f"layer 1 must have exactly one group, found {len(h.strategy_counts[0])}")
    for i, layer in enumerate(h.strategy_counts):
        if not layer:
            violations.append(f"layer {i + 1} has no groups")
        for j, c in enumerate(layer):
            if c < 1:
                violations.append(f"group ({i + 1},{j + 1}) has {c} strategies")
    if len(h.aggregation) != L:
        violations.append(f"expected {L} aggregation matrices, found {len(h.aggregation)}")
        return ValidationReport(violations)

    for i, W in enumerate(h.aggregation):
        name = f"W{i + 1}"
        o = h.outputs(i)
        if W.ndim != 2:
            violations.append(f"{name} is not a matrix")
            continue
        if W.shape[1] != o:
            violations.append(f"{name} has {W.shape[1]} columns, layer {i + 1} has {o} outputs")
        if i + 1 < L and W.shape[0] != len(h.strategy_counts[i + 1]):
            violations.append(f"{name} has {W.shape[0]} rows, layer {i + 2} has "
                              f"{len(h.strategy_counts[i + 1])} groups")
        for r, c in zip(*np.nonzero(W < 0)):
            violations.append(f"{name}: negative entry at ({r + 1},{c + 1})")
        sums = W.sum(axis=0)
        for c in np.nonzero(np.abs(sums - 1.0) > tol)[0]:
            violations.append(f"{name}: column {c + 1} sums to {sums[c]!r}")

    W1 = h.aggregation[0]
    if W1.ndim == 2 and (W1.shape[0] != W1.shape[1] or not np.array_equal(W1, np.eye(W1.shape[0]))):
        violations.append("W1 is not the identity")
    return ValidationReport(violations)


def _check_states(h: Hierarchy, states) -> list[list[np.ndarray]]:
    if len(states) != h.num_layers:
        raise ValueError(f"expected states for {h.num_layers} layers, got {len(states)}")
    out = []
    for i, layer in enumerate(states):
        if len(layer) != len(h.strategy_counts[i]):
            raise ValueError(f"layer {i + 1}: expected {len(h.strategy_counts[i])} group states, "
                             f"got {len(layer)}")
        row = []
        for j, s in enumerate(layer):
            s = np.asarray(s, dtype=float)
            if s.shape != (h.strategy_counts[i][j],):
                raise ValueError(f"group ({i + 1},{j + 1}): state has shape {s.shape}, "
                                 f"expected ({h.strategy_counts[i][j]},)")
            row.append(s)
        out.append(row)
    return out


def transformation(h: Hierarchy, layer_states, i: int) -> np.ndarray:
    """Block-diagonal matrix T^i of shape (o^i, n^i)."""
    T = np.zeros((h.outputs(i), len(h.strategy_counts[i])))
    for j, s in enumerate(layer_states):
        T[h.block(i, j), j] = s
    return T


def _apply_layer(h, layer_states, i, mass):
    # Equivalent to T^i @ mass without building the block matrix.
    return np.concatenate([mass[j] * s for j, s in enumerate(layer_states)])


def layer_masses(h: Hierarchy, states) -> list[np.ndarray]:
    """Population mass entering each layer, ``m^1 = (1)`` and so on down."""
    states = _check_states(h, states)
    masses = [np.ones(1)]
    for i in range(h.num_layers - 1):
        out = h.aggregation[i] @ _apply_layer(h, states[i], i, masses[-1])
        masses.append(clean_simplex(out))
    return masses


def social_state(h: Hierarchy, states) -> np.ndarray:
    """Distribution of the whole population over the final strategies."""
    states = _check_states(h, states)
    m = layer_masses(h, states)[-1]
    L = h.num_layers - 1
    return clean_simplex(h.aggregation[L] @ _apply_layer(h, states[L], L, m))


@dataclass
class PayoffStack:
    """Per-layer stacked payoffs and the final-strategy payoff ``p``."""

    hierarchy: Hierarchy
    layers: list[np.ndarray]
    p: np.ndarray

    def group(self, i: int, j: int) -> np.ndarray:
        return self.layers[i][self.hierarchy.block(i, j)]


def backprop_payoffs(h: Hierarchy, states, p) -> PayoffStack:
    """Send the final payoff back through the layers.

    Each group sees, for each of its strategies, the average payoff of the
    subtree that strategy feeds.
    """
    states = _check_states(h, states)
    p = np.asarray(p, dtype=float)
    if p.shape != (h.num_strategies,):
        raise ValueError(f"payoff has shape {p.shape}, expected ({h.num_strategies},)")
    L = h.num_layers
    layers = [None] * L
    layers[L - 1] = h.aggregation[L - 1].T @ p
    for i in range(L - 2, -1, -1):
        nxt = layers[i + 1]
        # (T^{i+1})^T pi^{i+1}: one average payoff per group of layer i+1
        group_values = np.array([s @ nxt[h.block(i + 1, j)] for j, s in enumerate(states[i + 1])])
        layers[i] = h.aggregation[i].T @ group_values
    return PayoffStack(h, layers, p)
