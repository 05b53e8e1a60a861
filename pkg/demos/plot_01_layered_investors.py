"""
Layered decisions: investors and fund managers
==============================================

Two investor options feed two managers; manager 1 trades all three targets,
manager 2 only the first two. We compose the social state, send a payoff back
up the layers and check that the total payoff is the same from both ends.
"""

import numpy as np

from hierpop import Hierarchy, backprop_payoffs, layer_masses, social_state, validate_structure

W2 = np.array([[1, 0, 0, 1, 0],
               [0, 1, 0, 0, 1],
               [0, 0, 1, 0, 0]], dtype=float)
toy = Hierarchy([[2], [3, 2]], [np.eye(2), W2])
print("structure ok:", validate_structure(toy).ok)

# Half the capital to each manager.
states = [[np.array([0.5, 0.5])],
          [np.array([0.2, 0.2, 0.6]), np.array([0.5, 0.5])]]
x = social_state(toy, states)
print("layer masses:", [m.tolist() for m in layer_masses(toy, states)])
print("social state:", x)           # (0.35, 0.35, 0.30)

# %%
# Payoffs flow the other way. Each group sees, per strategy, the average
# payoff of whatever that strategy feeds.
p = np.array([1.0, 2.0, 3.0])
stack = backprop_payoffs(toy, states, p)
for i, j in toy.groups():
    print(f"group ({i + 1},{j + 1}) payoffs:", stack.group(i, j))

print("p.x            =", p @ x)
print("root pi.s      =", stack.group(0, 0) @ states[0][0])
