"""Hierarchical population games: layered decision groups, constrained learning
dynamics and equilibrium certificates."""
from .analysis import (AdmissibleSetSpec, admissible_best_response, admissible_sample,
                       certify_equilibrium, convexity_probe)
from .constraint_sets import BallCap, FullSimplex, PolytopeInSimplex
from .dynamics import BNN, BestResponse, ConstrainedBR, Smith
from .engine import ScenarioConfig, monitor_report, simulate
from .hierarchy import Hierarchy, backprop_payoffs, layer_masses, social_state, validate_structure
from .payoffs import AffinePayoff, CCWMonitor, CustomPayoff, LagPDM, congestion_payoff

__version__ = "0.1.0"
