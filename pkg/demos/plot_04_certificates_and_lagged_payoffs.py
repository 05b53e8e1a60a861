"""
Equilibrium certificates and lagged payoffs
===========================================

A rest point of constrained best responses is a Nash equilibrium within the
admissible set. We certify candidates directly, then replace the static
payoff by a first-order lag and watch the input-output integral.
"""

import numpy as np

from hierpop import FullSimplex, Hierarchy, PolytopeInSimplex, certify_equilibrium, congestion_payoff
from hierpop.dynamics import BestResponse, ConstrainedBR
from hierpop.engine import ScenarioConfig, simulate

I3 = np.eye(3)
nav = Hierarchy([[3], [3, 3, 3]], [I3, np.hstack([I3, I3, I3])])
F = congestion_payoff()

cap3 = PolytopeInSimplex([[0.0, 0.0, 1.0]], [0.9])
xbar = np.array([0.05, 0.05, 0.9])
cert = certify_equilibrium(nav, [[np.full(3, 1 / 3)], [xbar] * 3], F, [[FullSimplex(3)], [cap3] * 3])
print("case (ii) candidate certified:", cert.certified, " max group gap:", cert.max_group_gap)

flat = Hierarchy([[3]], [I3])
uniform = np.full(3, 1 / 3)
cert = certify_equilibrium(flat, [[uniform]], F, [[FullSimplex(3)]])
print("uniform split certified:", cert.certified, " gain from deviating:", round(cert.exact_social_gap, 6))

# %%
# Payoffs that react with a lag: q' = (F(x) - q). The running integral of
# p'(t).x(t) is logged; a bounded-below integral is the dissipativity check.
cap2 = PolytopeInSimplex([[0.0, 1.0, 0.0]], [0.15])
cfg = ScenarioConfig(
    hierarchy=nav, sets=[[FullSimplex(3)], [cap2] * 3],
    dynamics=[[BestResponse()], [ConstrainedBR(cap2)] * 3], payoff=F,
    initial=[[uniform], [cap2.project(uniform)] * 3],
    horizon=40.0, pdm_rate=1.0, pdm_q0=np.zeros(3))
traj = simulate(cfg)
print("final x:", np.round(traj.x[-1], 4))
print("payoff lag at the end:", np.linalg.norm(traj.p[-1] - F.evaluate(traj.x[-1])))
print("CCW integral: final %.4f, minimum %.4f" % (traj.ccw[-1], traj.ccw_minimum))
