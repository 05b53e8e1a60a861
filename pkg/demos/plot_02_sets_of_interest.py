"""
Strategy distributions of interest
==================================

A manager that stays near a reference allocation (a ball around it) and one
that keeps at least a third in each of two targets (a polytope). We probe the
oracles each set offers and check that the reachable social states form a
convex set.
"""

import numpy as np

from hierpop import AdmissibleSetSpec, BallCap, FullSimplex, PolytopeInSimplex, convexity_probe
from hierpop.config import build_scenario
from hierpop.presets import get_preset

ball = BallCap([0.2, 0.2, 0.6], 0.1)
floor = PolytopeInSimplex([[-1.0, 0.0], [0.0, -1.0]], [-1 / 3, -1 / 3])

print("center inside ball:", ball.contains([0.2, 0.2, 0.6]))
print("(0.9, 0.1) meets floor:", floor.contains([0.9, 0.1]))
print("ball projection of e1:", ball.project([1.0, 0.0, 0.0]))
print("ball best response to (0,0,1):", ball.best_response([0.0, 0.0, 1.0]))
print("floor best response to (5,0):", floor.best_response([5.0, 0.0]))

# %%
# When the tangent-plane optimum would leave the simplex, the best response
# slides along the sphere with one coordinate pinned at zero.
edge = BallCap([0.05, 0.3, 0.65], 0.1)
print("pinned best response:", edge.best_response([-1.0, 0.2, 0.8]))

# %%
# Mixing two reachable social states is again reachable: each group averages
# its two states weighted by the mass it received.
cfg = build_scenario(get_preset("example1"))
spec = AdmissibleSetSpec(cfg.hierarchy, cfg.sets)
report = convexity_probe(spec, n_pairs=500, seed=1)
print("convexity probe failures:", len(report.failures))
print("full simplex sanity:", convexity_probe(
    AdmissibleSetSpec(cfg.hierarchy, [[FullSimplex(2)], [FullSimplex(3), FullSimplex(2)]]), 200).ok)
