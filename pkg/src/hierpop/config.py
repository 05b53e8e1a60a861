"""Scenario documents: a JSON tree with hierarchy/sets/dynamics/payoff/engine/outputs."""
from __future__ import annotations

import copy
import json
from pathlib import Path

import numpy as np

from . import constraint_sets as cs
from .dynamics import make_edm
from .engine import MonitorToggles, ScenarioConfig
from .hierarchy import Hierarchy
from .payoffs import AffinePayoff, congestion_payoff

SECTIONS = ("name", "hierarchy", "sets", "dynamics", "payoff", "initial", "engine", "outputs")
ENGINE_KEYS = {"step", "horizon", "rest_tol", "rest_window", "monitor_tol", "warn_only", "seed",
               "lyapunov_samples", "f_star", "monitors", "certify_tol", "certify_social_tol"}


class ConfigError(ValueError):
    def __init__(self, field, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field}: {message}")
        self.field = field
        self.line = line


def read_document(path) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top level must be an object")
    return doc


def _vector(value, field):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(field, f"expected a numeric vector ({exc})") from exc
    if arr.ndim != 1:
        raise ConfigError(field, "expected a flat list of numbers")
    return arr


def _matrix(value, field):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(field, f"expected a row-major nested list ({exc})") from exc
    if arr.ndim != 2:
        raise ConfigError(field, "expected a row-major nested list of rows")
    return arr


def _nested(doc, key, counts, default):
    value = doc.get(key)
    if value is None:
        return [[default(i, j) for j in range(len(layer))] for i, layer in enumerate(counts)]
    if not isinstance(value, list) or len(value) != len(counts):
        raise ConfigError(key, f"expected one list per layer ({len(counts)} layers)")
    for i, layer in enumerate(value):
        if not isinstance(layer, list) or len(layer) != len(counts[i]):
            raise ConfigError(f"{key}[{i}]", f"expected {len(counts[i])} entries, one per group")
    return value


def build_set(cfg, dim, field) -> cs.ConvexSet:
    if isinstance(cfg, str):
        cfg = {"type": cfg}
    if not isinstance(cfg, dict):
        raise ConfigError(field, "expected a set description object")
    kind = cfg.get("type")
    try:
        if kind == "simplex":
            return cs.FullSimplex(cfg.get("dim", dim))
        if kind == "polytope":
            return cs.PolytopeInSimplex(_matrix(cfg.get("G"), f"{field}.G"), _vector(cfg.get("h"), f"{field}.h"))
        if kind == "ball":
            return cs.BallCap(_vector(cfg.get("center"), f"{field}.center"), float(cfg.get("radius")))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(field, str(exc)) from exc
    raise ConfigError(f"{field}.type", f"unknown set type {kind!r}")


def build_payoff(cfg, field="payoff"):
    if not isinstance(cfg, dict):
        raise ConfigError(field, "expected a payoff object")
    kind = cfg.get("type")
    if kind == "congestion":
        return congestion_payoff()
    if kind == "affine":
        A = _matrix(cfg.get("A"), f"{field}.A")
        b = _vector(cfg.get("b"), f"{field}.b")
        try:
            return AffinePayoff(A, b)
        except ValueError as exc:
            raise ConfigError(field, str(exc)) from exc
    raise ConfigError(f"{field}.type", f"unknown payoff type {kind!r}")


def build_scenario(doc: dict) -> ScenarioConfig:
    """Turn a scenario document into a validated-ready ``ScenarioConfig``."""
    unknown = set(doc) - set(SECTIONS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    hd = doc.get("hierarchy")
    if not isinstance(hd, dict):
        raise ConfigError("hierarchy", "missing or not an object")
    counts = hd.get("strategy_counts")
    if not isinstance(counts, list) or not all(isinstance(layer, list) for layer in counts):
        raise ConfigError("hierarchy.strategy_counts", "expected a list of per-layer lists")
    agg = hd.get("aggregation")
    if not isinstance(agg, list) or len(agg) != len(counts):
        raise ConfigError("hierarchy.aggregation", f"expected {len(counts)} matrices")
    hierarchy = Hierarchy(counts, [_matrix(w, f"hierarchy.aggregation[{i}]") for i, w in enumerate(agg)])

    set_docs = _nested(doc, "sets", counts, lambda i, j: {"type": "simplex"})
    sets = [[build_set(set_docs[i][j], counts[i][j], f"sets[{i}][{j}]") for j in range(len(layer))]
            for i, layer in enumerate(counts)]
    dyn_docs = _nested(doc, "dynamics", counts, lambda i, j: None)
    dynamics = []
    for i, layer in enumerate(counts):
        row = []
        for j in range(len(layer)):
            name = dyn_docs[i][j]
            if name is None:
                name = "smith" if isinstance(sets[i][j], cs.FullSimplex) else "cbr"
            try:
                row.append(make_edm(name, sets[i][j]))
            except ValueError as exc:
                raise ConfigError(f"dynamics[{i}][{j}]", str(exc)) from exc
        dynamics.append(row)

    pd = doc.get("payoff")
    payoff = build_payoff(pd)
    pdm = pd.get("pdm")

    init_docs = _nested(doc, "initial", counts, lambda i, j: "uniform")
    initial = []
    for i, layer in enumerate(counts):
        row = []
        for j in range(len(layer)):
            value = init_docs[i][j]
            field = f"initial[{i}][{j}]"
            if value == "uniform":
                row.append(sets[i][j].project(np.full(counts[i][j], 1.0 / counts[i][j])))
            elif value == "center" and isinstance(sets[i][j], cs.BallCap):
                row.append(sets[i][j].center.copy())
            else:
                row.append(_vector(value, field))
        initial.append(row)

    ed = doc.get("engine") or {}
    if not isinstance(ed, dict):
        raise ConfigError("engine", "expected an object")
    bad = set(ed) - ENGINE_KEYS
    if bad:
        raise ConfigError(f"engine.{sorted(bad)[0]}", "unknown key")
    monitors = MonitorToggles(**(ed.get("monitors") or {}))
    kwargs = {k: ed[k] for k in ("step", "horizon", "rest_tol", "rest_window", "monitor_tol",
                                 "warn_only", "seed", "lyapunov_samples", "f_star") if k in ed}
    if pdm is not None:
        kwargs["pdm_rate"] = float(pdm.get("rate", 1.0))
        if pdm.get("q0") is not None:
            kwargs["pdm_q0"] = _vector(pdm["q0"], "payoff.pdm.q0")
    return ScenarioConfig(hierarchy=hierarchy, sets=sets, dynamics=dynamics, payoff=payoff,
                          initial=initial, monitors=monitors, name=doc.get("name", "scenario"),
                          **kwargs)


def apply_overrides(doc: dict, seed=None, horizon=None, step=None, warn_only=None, edm=None,
                    init=None) -> dict:
    """Return a copy of ``doc`` with command-line overrides folded in."""
    doc = copy.deepcopy(doc)
    engine = doc.setdefault("engine", {})
    if seed is not None:
        engine["seed"] = int(seed)
    if horizon is not None:
        engine["horizon"] = float(horizon)
    if step is not None:
        engine["step"] = float(step)
    if warn_only:
        engine["warn_only"] = True
    counts = doc["hierarchy"]["strategy_counts"]
    if edm is not None:
        # Non-simplex groups keep their constrained dynamics unless cbr is requested.
        sets = doc.get("sets")
        dyn = doc.get("dynamics") or [[None] * len(layer) for layer in counts]
        doc["dynamics"] = [[edm if edm == "cbr" or sets is None or _is_simplex_doc(sets[i][j]) else dyn[i][j]
                            for j in range(len(layer))] for i, layer in enumerate(counts)]
    if init is not None:
        inits = doc.get("initial") or [["uniform"] * len(layer) for layer in counts]
        inits[0][0] = list(init)
        doc["initial"] = inits
    return doc


def _is_simplex_doc(set_doc):
    kind = set_doc if isinstance(set_doc, str) else set_doc.get("type")
    return kind == "simplex"


def dump_document(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
