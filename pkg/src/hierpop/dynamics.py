"""Per-group evolutionary dynamics and their stationarity diagnostics."""
from __future__ import annotations

import numpy as np

from .constraint_sets import ConvexSet, FullSimplex


class EDM:
    name = "edm"
    set: ConvexSet | None = None

    def velocity(self, s, pi) -> np.ndarray:
        raise NotImplementedError

    def compatible_with(self, cset: ConvexSet) -> bool:
        return isinstance(cset, FullSimplex)

    def __repr__(self):
        return f"{type(self).__name__}()"


class Smith(EDM):
    name = "smith"

    def velocity(self, s, pi):
        s = np.asarray(s, dtype=float)
        pi = np.asarray(pi, dtype=float)
        # gain[k, j] = [pi_k - pi_j]_+ : switching rate from j to k
        gain = np.maximum(pi[:, None] - pi[None, :], 0.0)
        return gain @ s - s * gain.sum(axis=0)


class BNN(EDM):
    name = "bnn"

    def velocity(self, s, pi):
        s = np.asarray(s, dtype=float)
        pi = np.asarray(pi, dtype=float)
        excess = np.maximum(pi - s @ pi, 0.0)
        return excess - s * excess.sum()


class BestResponse(EDM):
    name = "br"

    def velocity(self, s, pi):
        s = np.asarray(s, dtype=float)
        return FullSimplex(s.size).best_response(pi, current=s) - s


class ConstrainedBR(EDM):
    name = "cbr"

    def __init__(self, cset: ConvexSet):
        self.set = cset

    def velocity(self, s, pi):
        s = np.asarray(s, dtype=float)
        return self.set.best_response(pi, current=s) - s

    def compatible_with(self, cset):
        return cset is self.set or cset.dim == self.set.dim

    def __repr__(self):
        return f"ConstrainedBR({self.set!r})"


EDM_NAMES = ("smith", "bnn", "br", "cbr")


def make_edm(name: str, cset: ConvexSet) -> EDM:
    if name == "smith":
        return Smith()
    if name == "bnn":
        return BNN()
    if name == "br":
        return BestResponse()
    if name == "cbr":
        return ConstrainedBR(cset)
    raise ValueError(f"unknown dynamics {name!r}; choose from {', '.join(EDM_NAMES)}")


def velocity(spec: EDM, s, pi) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if s.shape != pi.shape:
        raise ValueError(f"state shape {s.shape} does not match payoff shape {pi.shape}")
    return spec.velocity(s, pi)


def is_rest(spec: EDM, s, pi, tol=1e-6) -> bool:
    return float(np.linalg.norm(velocity(spec, s, pi))) <= tol


def positive_correlation_check(spec: EDM, s, pi, zero_tol=1e-12):
    """Return ``(pi^T V, violated)``; a moving state must gain payoff."""
    v = velocity(spec, s, pi)
    product = float(np.asarray(pi, dtype=float) @ v)
    moving = float(np.linalg.norm(v)) > zero_tol
    return product, bool(moving and product <= 0.0)
