"""Built-in scenario documents."""
from __future__ import annotations

import copy

I3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
CONGESTION = {"type": "congestion"}

# Investors split capital between two managers; manager 1 trades all three
# targets, manager 2 only the first two.
INVESTOR_HIERARCHY = {
    "strategy_counts": [[2], [3, 2]],
    "aggregation": [
        [[1.0, 0.0], [0.0, 1.0]],
        [[1.0, 0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0, 0.0]],
    ],
}
INVESTOR_PAYOFF = {
    "type": "affine",
    "A": [[-2.0, 0.0, 0.0], [0.0, -2.0, 0.0], [0.0, 0.0, -2.0]],
    "b": [1.2, 0.4, 0.8],
}

# Three navigation channels dispatching travelers over three routes.
NAV_HIERARCHY = {
    "strategy_counts": [[3], [3, 3, 3]],
    "aggregation": [I3, [row + row + row for row in I3]],
}
ROUTE2_CAP = {"type": "polytope", "G": [[0.0, 1.0, 0.0]], "h": [0.15]}
ROUTE3_CAP = {"type": "polytope", "G": [[0.0, 0.0, 1.0]], "h": [0.9]}


def _nav(name, cap, reference):
    return {
        "name": name,
        "hierarchy": copy.deepcopy(NAV_HIERARCHY),
        "sets": [[{"type": "simplex"}], [copy.deepcopy(cap) for _ in range(3)]],
        "dynamics": [["br"], ["cbr", "cbr", "cbr"]],
        "payoff": dict(CONGESTION),
        "initial": [["uniform"], ["uniform", "uniform", "uniform"]],
        "engine": {"step": 0.01, "horizon": 50.0, "seed": 0},
        "outputs": {"target": copy.deepcopy(cap), "reference": reference},
    }


PRESETS = {
    "investors": {
        "name": "investors",
        "hierarchy": INVESTOR_HIERARCHY,
        "sets": [[{"type": "simplex"}], [{"type": "simplex"}, {"type": "simplex"}]],
        "dynamics": [["bnn"], ["smith", "smith"]],
        "payoff": INVESTOR_PAYOFF,
        "initial": [["uniform"], ["uniform", "uniform"]],
        "engine": {"step": 0.01, "horizon": 50.0, "seed": 0},
        "outputs": {},
    },
    "example1": {
        "name": "example1",
        "hierarchy": INVESTOR_HIERARCHY,
        "sets": [[{"type": "simplex"}],
                 [{"type": "ball", "center": [0.2, 0.2, 0.6], "radius": 0.1},
                  {"type": "polytope", "G": [[-1.0, 0.0], [0.0, -1.0]], "h": [-1 / 3, -1 / 3]}]],
        "dynamics": [["smith"], ["cbr", "cbr"]],
        "payoff": INVESTOR_PAYOFF,
        "initial": [["uniform"], ["center", "uniform"]],
        "engine": {"step": 0.01, "horizon": 50.0, "seed": 0},
        "outputs": {},
    },
    "nav-case-i": _nav("nav-case-i", ROUTE2_CAP, [0.0, 0.0, 1.0]),
    "nav-case-ii": _nav("nav-case-ii", ROUTE3_CAP, [0.05, 0.05, 0.9]),
    "nav-direct": {
        "name": "nav-direct",
        "hierarchy": {"strategy_counts": [[3]], "aggregation": [I3]},
        "sets": [[{"type": "simplex"}]],
        "dynamics": [["smith"]],
        "payoff": dict(CONGESTION),
        "initial": [[[0.8, 0.1, 0.1]]],
        # Smith approaches the vertex only like 1/t, so the baseline needs a longer run.
        "engine": {"step": 0.01, "horizon": 300.0, "seed": 0},
        "outputs": {"target": copy.deepcopy(ROUTE2_CAP), "reference": [0.0, 0.0, 1.0]},
    },
}


def preset_names():
    return list(PRESETS)


def get_preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
