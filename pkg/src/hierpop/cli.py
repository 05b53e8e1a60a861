"""Command-line entry point: ``hierpop run <preset|config.json> [flags]``.

Exit codes: 0 ok, 1 monitor failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .analysis import certify_equilibrium
from .config import (ConfigError, apply_overrides, build_scenario, build_set, dump_document,
                     read_document)
from .dynamics import EDM_NAMES
from .engine import MonitorViolation, ScenarioError, monitor_report, simulate, write_csv
from .plotting import emit_plot
from .presets import PRESETS, get_preset

EXIT_OK, EXIT_MONITOR, EXIT_USAGE = 0, 1, 2


@dataclass
class RunManifest:
    scenario: str
    seed: int
    output_dir: str
    files: list[str] = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    exit_status: int = EXIT_OK
    error: str | None = None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def load_document(name_or_path) -> dict:
    if name_or_path in PRESETS:
        return get_preset(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigError("<scenario>", f"{name_or_path!r} is neither a preset "
                          f"({', '.join(PRESETS)}) nor a config file")
    return read_document(path)


def summarize(traj, doc, cert, report) -> dict:
    cfg = traj.config
    h = cfg.hierarchy
    outputs = doc.get("outputs") or {}
    root = traj.states[0][0]
    duality = np.abs(np.einsum("kd,kd->k", traj.p, traj.x)
                     - np.einsum("kd,kd->k", traj.pi[0], root)).max()
    summary = {
        "scenario": cfg.name,
        "steps": len(traj),
        "step": cfg.step,
        "horizon": cfg.horizon,
        "final_t": float(traj.t[-1]),
        "stopped_at_rest": traj.stopped_at_rest,
        "rest_time": traj.rest_time,
        "final_x": traj.x[-1],
        "max_x": traj.x.max(axis=0),
        "min_x": traj.x.min(axis=0),
        "final_states": traj.final_states(),
        "f_star": traj.f_star,
        "final_potential": None if traj.f is None else float(traj.f[-1]),
        "duality_max_error": float(duality),
        "monitors": report.as_dict(),
        "certificate": cert.as_dict(),
        "violations": traj.violations,
        "groups": [f"{i + 1},{j + 1}" for i, j in h.groups()],
    }
    if outputs.get("target") is not None:
        target = build_set(outputs["target"], h.num_strategies, "outputs.target")
        summary["target_max_violation"] = float(max(target.violation(x) for x in traj.x))
    if outputs.get("reference") is not None:
        ref = np.asarray(outputs["reference"], dtype=float)
        summary["reference"] = ref
        summary["final_distance_to_reference"] = float(np.linalg.norm(traj.x[-1] - ref))
    return _jsonable(summary)


def run_scenario(name_or_config, out_dir="runs", seed=None, horizon=None, step=None,
                 warn_only=False, no_plot=False, edm=None, init=None) -> RunManifest:
    """Simulate, certify and monitor one scenario, writing its artifacts to ``out_dir``."""
    out = Path(out_dir)
    manifest = RunManifest(str(name_or_config), seed if seed is not None else 0, str(out))
    try:
        doc = load_document(name_or_config) if isinstance(name_or_config, str) else name_or_config
        doc = apply_overrides(doc, seed=seed, horizon=horizon, step=step, warn_only=warn_only,
                              edm=edm, init=init)
        cfg = build_scenario(doc)
        cfg.validate()
    except (ConfigError, ScenarioError, KeyError, ValueError, TypeError) as exc:
        manifest.error = str(exc)
        manifest.exit_status = EXIT_USAGE
        return manifest
    manifest.scenario = cfg.name
    manifest.seed = cfg.seed
    out.mkdir(parents=True, exist_ok=True)

    def write(name, text):
        (out / name).write_text(text)
        manifest.files.append(name)

    write("config.json", dump_document(doc))
    try:
        traj = simulate(cfg)
    except MonitorViolation as exc:
        manifest.error = str(exc)
        manifest.verdicts = {exc.kind: False}
        manifest.exit_status = EXIT_MONITOR
        write("manifest.json", json.dumps(_jsonable(asdict(manifest)), indent=2) + "\n")
        return manifest

    report = monitor_report(traj)
    ed = doc.get("engine") or {}
    cert = certify_equilibrium(cfg.hierarchy, traj.final_states(), cfg.payoff, cfg.sets,
                               tol=ed.get("certify_tol", 10 * cfg.rest_tol),
                               social_tol=ed.get("certify_social_tol", 1e-4), seed=cfg.seed)
    verdicts = {k: bool(v) for k, v in report.checks.items()}
    if traj.stopped_at_rest:
        verdicts["rest_point_certified"] = cert.certified
    manifest.verdicts = verdicts

    write_csv(traj, out / "trajectory.csv")
    manifest.files.append("trajectory.csv")
    write("summary.json", json.dumps(summarize(traj, doc, cert, report), indent=2) + "\n")
    if not no_plot and traj.x.shape[1] == 3:
        target_doc = (doc.get("outputs") or {}).get("target")
        target = build_set(target_doc, 3, "outputs.target") if target_doc is not None else None
        emit_plot(traj, out / "trajectory.svg", target=target)
        manifest.files.append("trajectory.svg")
    if not all(verdicts.values()) and not cfg.warn_only:
        manifest.exit_status = EXIT_MONITOR
    manifest.files.append("manifest.json")
    (out / "manifest.json").write_text(json.dumps(_jsonable(asdict(manifest)), indent=2) + "\n")
    return manifest


def _run_job(kwargs):
    return run_scenario(**kwargs)


def _parse_init(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="hierpop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run presets or config files")
    run.add_argument("scenarios", nargs="+", metavar="preset|path")
    run.add_argument("--out", default="runs", help="output directory")
    run.add_argument("--seed", type=int)
    run.add_argument("--horizon", type=float)
    run.add_argument("--step", type=float)
    run.add_argument("--warn-only", action="store_true", help="report monitor violations without failing")
    run.add_argument("--no-plot", action="store_true")
    run.add_argument("--edm", choices=EDM_NAMES, help="override the dynamics of simplex groups")
    run.add_argument("--init", type=_parse_init, help="initial state of the top-layer group")
    run.add_argument("--jobs", type=int, default=1)

    show = sub.add_parser("config", help="print a preset as an editable config document")
    show.add_argument("preset", choices=list(PRESETS))
    sub.add_parser("presets", help="list presets")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    if args.command == "presets":
        print("\n".join(PRESETS))
        return EXIT_OK
    if args.command == "config":
        sys.stdout.write(dump_document(get_preset(args.preset)))
        return EXIT_OK

    many = len(args.scenarios) > 1
    jobs = []
    for name in args.scenarios:
        out = Path(args.out) / Path(name).stem if many else Path(args.out)
        jobs.append(dict(name_or_config=name, out_dir=str(out), seed=args.seed, horizon=args.horizon,
                         step=args.step, warn_only=args.warn_only, no_plot=args.no_plot,
                         edm=args.edm, init=args.init))
    if args.jobs > 1 and many:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            manifests = list(pool.map(_run_job, jobs))
    else:
        manifests = [_run_job(j) for j in jobs]

    status = EXIT_OK
    for m in manifests:
        if m.error:
            print(f"{m.scenario}: error: {m.error}", file=sys.stderr)
        checks = ", ".join(f"{k}={'pass' if v else 'FAIL'}" for k, v in m.verdicts.items())
        print(f"{m.scenario}: exit {m.exit_status} -> {m.output_dir} [{checks}]")
        status = max(status, m.exit_status)
    return status


if __name__ == "__main__":
    sys.exit(main())
