"""Static payoff functions and a first-order-lag payoff dynamics model."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class NotPotentialError(ValueError):
    pass


class StaticPayoff:
    dim: int

    def evaluate(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def potential_available(self) -> bool:
        return False

    def potential(self, x) -> float:
        raise NotPotentialError(f"{type(self).__name__} has no potential")


class AffinePayoff(StaticPayoff):
    """``F(x) = A x + b``; symmetric ``A`` gives ``f(x) = x^T A x / 2 + b^T x``."""

    def __init__(self, A, b):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.asarray(b, dtype=float).ravel()
        self.dim = self.b.size
        if self.A.shape != (self.dim, self.dim):
            raise ValueError(f"A has shape {self.A.shape}, expected ({self.dim}, {self.dim})")

    @property
    def potential_available(self):
        return bool(np.array_equal(self.A, self.A.T))

    def evaluate(self, x):
        return self.A @ np.asarray(x, dtype=float) + self.b

    def potential(self, x):
        if not self.potential_available:
            raise NotPotentialError("A is not symmetric, so F is not a gradient")
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.A @ x + self.b @ x)

    def to_config(self):
        return {"type": "affine", "A": self.A.tolist(), "b": self.b.tolist()}


class CustomPayoff(StaticPayoff):
    """Payoff from a callable, optionally with a known potential."""

    def __init__(self, func: Callable, dim: int, potential: Callable | None = None):
        self.func = func
        self.dim = int(dim)
        self._potential = potential

    @property
    def potential_available(self):
        return self._potential is not None

    def evaluate(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def potential(self, x):
        if self._potential is None:
            raise NotPotentialError("no potential supplied")
        return float(self._potential(np.asarray(x, dtype=float)))


def congestion_payoff() -> AffinePayoff:
    """Negative travel times on three routes sharing links.

    Route costs are ``1 + x1 + x3``, ``1 + x2 + x3`` and ``x1 + x2 + 2 x3``.
    """
    A = -np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 2.0]])
    b = -np.array([1.0, 1.0, 0.0])
    return AffinePayoff(A, b)


def static_eval(payoff: StaticPayoff, x) -> np.ndarray:
    return payoff.evaluate(x)


def potential_value(payoff: StaticPayoff, x) -> float:
    return payoff.potential(x)


@dataclass
class LagPDM:
    """``q' = rate (F(x) - q)``, ``p = q``."""

    rate: float
    q: np.ndarray

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        self.q = np.asarray(self.q, dtype=float).copy()

    @property
    def payoff(self) -> np.ndarray:
        return self.q


def pdm_step(state: LagPDM, payoff: StaticPayoff, x, dt):
    """Advance the lag by one Euler step; returns ``(q, p)``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    state.q = state.q + dt * state.rate * (payoff.evaluate(x) - state.q)
    return state.q, state.q.copy()


@dataclass
class CCWMonitor:
    """Trapezoidal running value of the integral of p'(t)^T x(t)."""

    integral: float = 0.0
    minimum: float = 0.0

    def update(self, p_prev, p_curr, x_prev, x_curr, dt):
        if dt <= 0:
            raise ValueError("dt must be positive")
        dp = (np.asarray(p_curr, dtype=float) - np.asarray(p_prev, dtype=float)) / dt
        xm = 0.5 * (np.asarray(x_prev, dtype=float) + np.asarray(x_curr, dtype=float))
        self.integral += float(dp @ xm) * dt
        self.minimum = min(self.minimum, self.integral)
        return self


def ccw_update(mon: CCWMonitor, p_prev, p_curr, x_prev, x_curr, dt) -> CCWMonitor:
    return mon.update(p_prev, p_curr, x_prev, x_curr, dt)
