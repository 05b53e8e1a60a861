"""Convex subsets of the simplex used as strategy distributions of interest.

Three shapes are supported: the full simplex, a polytope cut out of the
simplex by ``G x <= h``, and a Euclidean ball around a point of the simplex.
Each offers ``contains``, ``project`` (Euclidean) and ``best_response``
(maximize a linear payoff over the set).
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from . import lp

TIE_TOL = 1e-9


class InfeasibleSetError(ValueError):
    pass


def project_simplex(y) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sorted threshold)."""
    y = np.asarray(y, dtype=float)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, y.size + 1)
    hits = np.nonzero(u - css / ks > 0)[0]
    # For huge inputs cancellation can hide the first index; it always qualifies.
    rho = hits[-1] if hits.size else 0
    return np.maximum(y - css[rho] / (rho + 1), 0.0)


def dykstra(y, projections, tol=1e-10, max_sweeps=10_000) -> np.ndarray:
    """Dykstra's alternating projections onto the intersection of convex sets.

    Stops once a full sweep moves neither the iterate nor any correction term
    by more than ``tol``.
    """
    x = np.asarray(y, dtype=float).copy()
    incs = [np.zeros_like(x) for _ in projections]
    for _ in range(max_sweeps):
        change = 0.0
        for k, proj in enumerate(projections):
            z = proj(x + incs[k])
            new_inc = x + incs[k] - z
            change = max(change, np.abs(z - x).max(), np.abs(new_inc - incs[k]).max())
            incs[k] = new_inc
            x = z
        if change < tol:
            break
    return x


def _halfspace_projector(g, h):
    gg = g @ g

    def proj(x):
        r = g @ x - h
        return x if r <= 0 else x - (r / gg) * g
    return proj


def _simplex_violation(x):
    return max(0.0, -float(x.min()), abs(float(x.sum()) - 1.0))


def _simplex_vertex_br(pi, current=None):
    k = int(np.argmax(pi))
    if current is not None and pi @ current >= pi[k] - TIE_TOL:
        return np.array(current, dtype=float)
    out = np.zeros(pi.size)
    out[k] = 1.0
    return out


class ConvexSet:
    dim: int

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"vector has shape {x.shape}, set lives in dimension {self.dim}")
        return x

    def violation(self, x) -> float:
        """Largest constraint residual of ``x`` (0 for members)."""
        raise NotImplementedError

    def contains(self, x, tol=1e-9) -> bool:
        return self.violation(x) <= tol

    def project(self, y) -> np.ndarray:
        raise NotImplementedError

    def best_response(self, pi, current=None) -> np.ndarray:
        raise NotImplementedError

    def sample(self, n, rng) -> np.ndarray:
        """``n`` random members as rows; used to explore admissible sets."""
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


class FullSimplex(ConvexSet):
    def __init__(self, dim):
        self.dim = int(dim)

    def violation(self, x):
        return _simplex_violation(self._check(x))

    def project(self, y):
        y = self._check(y)
        if self.violation(y) <= 1e-12:
            return y.copy()
        return project_simplex(y)

    def best_response(self, pi, current=None):
        return _simplex_vertex_br(self._check(pi), current)

    def sample(self, n, rng):
        return rng.dirichlet(np.ones(self.dim), size=n)

    def to_config(self):
        return {"type": "simplex", "dim": self.dim}

    def __repr__(self):
        return f"FullSimplex({self.dim})"


class PolytopeInSimplex(ConvexSet):
    """``{x in simplex : G x <= h}``; nonemptiness is checked on construction."""

    def __init__(self, G, h):
        self.G = np.atleast_2d(np.asarray(G, dtype=float))
        self.h = np.asarray(h, dtype=float).ravel()
        self.dim = self.G.shape[1]
        if self.G.shape[0] != self.h.size:
            raise ValueError(f"G has {self.G.shape[0]} rows but h has {self.h.size} entries")
        try:
            lp.maximize(np.zeros(self.dim), self.G, self.h, np.ones((1, self.dim)), [1.0])
        except lp.LPError as exc:
            raise InfeasibleSetError(f"polytope has no point in the simplex: {exc}") from exc

    def violation(self, x):
        x = self._check(x)
        worst = _simplex_violation(x)
        if self.h.size:
            worst = max(worst, float((self.G @ x - self.h).max()))
        return worst

    def project(self, y):
        y = self._check(y)
        if self.violation(y) <= 1e-12:
            return y.copy()
        projections = [project_simplex] + [_halfspace_projector(g, c) for g, c in zip(self.G, self.h)]
        return self._polish(y, dykstra(y, projections))

    def _polish(self, y, x, active_tol=1e-8):
        """Re-solve the projection exactly on the face Dykstra converged to.

        Dykstra stops within its tolerance, which can leave a point a hair
        outside a halfspace; projecting onto the identified active face removes
        that residue. The Dykstra point is kept if the face guess is off.
        """
        rows = [np.ones(self.dim)]
        rhs = [1.0]
        for g, c in zip(self.G, self.h):
            if g @ x - c > -active_tol:
                rows.append(g)
                rhs.append(c)
        zero = np.nonzero(x < active_tol)[0]
        for k in zero:
            rows.append(np.eye(self.dim)[k])
            rhs.append(0.0)
        E = np.array(rows)
        # z = y - E^T lam with E z = rhs
        lam = np.linalg.lstsq(E @ E.T, E @ y - np.array(rhs), rcond=None)[0]
        z = y - E.T @ lam
        z[zero] = 0.0
        if self.violation(z) <= 1e-13 and np.linalg.norm(z - x) <= 1e-6:
            return z
        return x

    def best_response(self, pi, current=None):
        pi = self._check(pi)
        res = lp.maximize(pi, self.G, self.h, np.ones((1, self.dim)), [1.0])
        if current is not None and pi @ current >= res.value - TIE_TOL:
            return np.array(current, dtype=float)
        x = np.maximum(res.x, 0.0)
        return x / x.sum()

    def sample(self, n, rng, max_rounds=50):
        out = []
        need = n
        for _ in range(max_rounds):
            cand = rng.dirichlet(np.ones(self.dim), size=max(4 * need, 64))
            ok = cand[np.all(cand @ self.G.T <= self.h + 1e-12, axis=1)] if self.h.size else cand
            out.append(ok[:need])
            need -= len(out[-1])
            if need == 0:
                break
        if need:
            # Thin sets: fall back to projecting random simplex points.
            cand = rng.dirichlet(np.ones(self.dim), size=need)
            out.append(np.array([self.project(c) for c in cand]))
        return np.concatenate(out)[:n]

    def to_config(self):
        return {"type": "polytope", "G": self.G.tolist(), "h": self.h.tolist()}

    def __repr__(self):
        return f"PolytopeInSimplex(G={self.G.tolist()}, h={self.h.tolist()})"


class BallCap(ConvexSet):
    """``{x in simplex : ||x - center||_2 <= radius}`` with ``center`` in the simplex."""

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.dim = self.center.size
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if _simplex_violation(self.center) > 1e-9:
            raise InfeasibleSetError("ball center must lie in the simplex")

    def violation(self, x):
        x = self._check(x)
        return max(_simplex_violation(x), float(np.linalg.norm(x - self.center)) - self.radius)

    def _project_disk(self, y):
        # Ball intersected with the hyperplane 1^T x = 1; exact because the center is on it.
        z = y - (y.sum() - 1.0) / self.dim
        r = z - self.center
        nr = np.linalg.norm(r)
        return z if nr <= self.radius else self.center + (self.radius / nr) * r

    def _along_sphere(self, point_at, tol=1e-14):
        """Solve ||point_at(mu) - c|| = radius for mu > 0 (distance decreases in mu)."""
        def gap(log_mu):
            return np.linalg.norm(point_at(np.exp(log_mu)) - self.center) - self.radius
        lo, hi = -40.0, 40.0
        for _ in range(5):
            if gap(hi) <= 0:
                break
            hi += 20.0
        for _ in range(5):
            if gap(lo) >= 0:
                break
            lo -= 20.0
        if gap(lo) < 0 or gap(hi) > 0:
            raise RuntimeError("could not bracket the sphere crossing")
        return point_at(np.exp(brentq(gap, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)))

    def project(self, y):
        y = self._check(y)
        if self.violation(y) <= 1e-12:
            return y.copy()
        p = project_simplex(y)
        if np.linalg.norm(p - self.center) <= self.radius:
            return p
        q = self._project_disk(y)
        if q.min() >= 0:
            return q
        # KKT: x = P_simplex((y + mu c) / (1 + mu)) with the ball constraint active.
        return self._along_sphere(lambda mu: project_simplex((y + mu * self.center) / (1.0 + mu)))

    def best_response(self, pi, current=None):
        pi = self._check(pi)
        t = pi - pi.mean()
        nt = np.linalg.norm(t)
        if nt <= 1e-15 * max(1.0, np.abs(pi).max()):
            x = self.center.copy()
        else:
            x = self.center + (self.radius / nt) * t
            if x.min() < 0:
                x = self._best_response_active(pi)
        if current is not None and pi @ current >= pi @ x - TIE_TOL:
            return np.array(current, dtype=float)
        return x

    def _best_response_active(self, pi):
        # Some nonnegativity bound is active. If the ball is slack the answer is
        # the closest point to c on the argmax face; otherwise
        # x(mu) = P_simplex(c + pi / (2 mu)) with the sphere constraint tight.
        face = pi >= pi.max() - 1e-12
        on_face = np.zeros(self.dim)
        on_face[face] = project_simplex(self.center[face])
        if np.linalg.norm(on_face - self.center) <= self.radius:
            return on_face
        return self._along_sphere(lambda mu: project_simplex(self.center + pi / (2.0 * mu)))

    def sample(self, n, rng, max_rounds=50):
        out = []
        need = n
        k = self.dim - 1
        for _ in range(max_rounds):
            m = max(4 * need, 64)
            g = rng.standard_normal((m, self.dim))
            g -= g.mean(axis=1, keepdims=True)
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            radii = self.radius * rng.random(m) ** (1.0 / max(k, 1))
            cand = self.center + radii[:, None] * g
            ok = cand[cand.min(axis=1) >= 0]
            out.append(ok[:need])
            need -= len(out[-1])
            if need == 0:
                break
        if need:
            cand = self.center + self.radius * rng.standard_normal((need, self.dim))
            out.append(np.array([self.project(c) for c in cand]))
        return np.concatenate(out)[:n]

    def to_config(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}

    def __repr__(self):
        return f"BallCap(center={self.center.tolist()}, radius={self.radius})"


def contains(cset: ConvexSet, x, tol=1e-9) -> bool:
    return cset.contains(x, tol)


def project(cset: ConvexSet, y) -> np.ndarray:
    return cset.project(y)


def best_response(cset: ConvexSet, pi, current=None) -> np.ndarray:
    return cset.best_response(pi, current)


def is_full_simplex(cset) -> bool:
    return isinstance(cset, FullSimplex)


def from_config(cfg: dict, dim: int | None = None) -> ConvexSet:
    kind = cfg.get("type")
    if kind == "simplex":
        d = cfg.get("dim", dim)
        if d is None:
            raise ValueError("simplex set needs 'dim'")
        return FullSimplex(d)
    if kind == "polytope":
        return PolytopeInSimplex(cfg["G"], cfg["h"])
    if kind == "ball":
        return BallCap(cfg["center"], cfg["radius"])
    raise ValueError(f"unknown set type {kind!r}")
