"""Command-line entry point: ``sympat {check,design,simulate,verify,sweep} SCENARIO``.

Exit codes: 0 success (for ``verify``: pattern achieved), 1 configuration or
validation error (including a failed symmetry check without ``--force``),
2 simulated but the pattern was not achieved.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .protocol import Partition, apply_D, build_D, synthesize_protocol
from .scenario import Scenario, ScenarioError, parse_scenario, shipped_path, shipped_scenarios
from .sim import SimulationError, simulate_auxiliary, simulate_pattern
from .symmetry import identity
from .verify import (HypothesisError, audit_hypotheses, design_pipeline, pattern_report,
                     within_group_error)

EXIT_OK, EXIT_CONFIG, EXIT_NOT_ACHIEVED = 0, 1, 2


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(arg: str) -> Scenario:
    path = Path(arg)
    if not path.exists() and not arg.endswith("/") and (arg in shipped_scenarios() or f"{arg}.json" in shipped_scenarios()):
        path = shipped_path(arg)
    return parse_scenario(path)


def _with_overrides(sc: Scenario, args) -> Scenario:
    verify = sc.verify
    if getattr(args, "tol", None) is not None:
        verify = replace(verify, pattern_tol=args.tol)
    if getattr(args, "window", None) is not None:
        verify = replace(verify, window_fraction=args.window)
    return replace(sc, verify=verify)


def _verify_from_scenario(sc: Scenario, force: bool):
    groups = [[i + 1 for i in g] for g in sc.partition.groups()]
    return design_pipeline(sc.dynamics, None, list(sc.partition.group_symmetries), groups, sc.topology,
                           sc.config, sc.verify.pattern_tol, sc.verify.window_fraction, force=force,
                           digest=sc.digest)


def cmd_check(args) -> int:
    sc = _with_overrides(_load(args.scenario), args)
    result = audit_hypotheses(sc)
    print(f"scenario {sc.name or args.scenario} (digest {sc.digest[:12]})")
    print(result.text())
    if args.json:
        write_atomic(args.json, json.dumps({"scenario_digest": sc.digest, "audit": result.to_dict()}, indent=2))
    return EXIT_OK if result.overall else EXIT_NOT_ACHIEVED


def cmd_design(args) -> int:
    sc = _with_overrides(_load(args.scenario), args)
    protocol = synthesize_protocol(sc.partition, sc.topology)
    result = audit_hypotheses(sc)
    doc = {"scenario": sc.name, "scenario_digest": sc.digest, **protocol.to_json(),
           "groups": [{"nodes": nodes, "symmetry": g.matrix.tolist(), "label": g.label}
                      for nodes, g in zip(sc.group_labels, sc.partition.group_symmetries)],
           "audit": result.to_dict()}
    write_atomic(args.out, json.dumps(doc, indent=2) + "\n")
    print(result.text())
    print(f"protocol for {len(protocol.transforms)} directed edges written to {args.out}")
    return EXIT_OK if result.overall else EXIT_NOT_ACHIEVED


def cmd_simulate(args) -> int:
    sc = _load(args.scenario)
    if args.aux:
        x0 = sc.config.initial_state(sc.topology.node_count, sc.dynamics.state_dim)
        if args.transformed:
            x0 = apply_D(build_D(sc.partition), x0)
        traj = simulate_auxiliary(sc.dynamics, sc.topology, sc.config, x0=x0, digest=sc.digest)
    else:
        protocol = synthesize_protocol(sc.partition, sc.topology)
        traj = simulate_pattern(sc.dynamics, sc.topology, protocol, sc.config, digest=sc.digest)
    write_atomic(args.out, traj.csv_text())
    if args.json:
        write_atomic(args.json, traj.json_text())
    print(f"{len(traj.times)} samples written to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = _with_overrides(_load(args.scenario), args)
    try:
        result = _verify_from_scenario(sc, args.force)
    except HypothesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("rerun with --force to simulate anyway", file=sys.stderr)
        return EXIT_CONFIG
    print(f"scenario {sc.name or args.scenario} (digest {sc.digest[:12]})")
    print(result.audit.text())
    print(result.report.text())
    if args.json:
        write_atomic(args.json, json.dumps({"scenario_digest": sc.digest, "audit": result.audit.to_dict(),
                                            "pattern": result.report.to_dict()}, indent=2) + "\n")
    return EXIT_OK if result.report.achieved else EXIT_NOT_ACHIEVED


def sweep_point(sc: Scenario, k: float) -> dict:
    cfg = replace(sc.config, k=float(k))
    protocol = synthesize_protocol(sc.partition, sc.topology)
    row = {"k": float(k)}
    try:
        traj = simulate_pattern(sc.dynamics, sc.topology, protocol, cfg)
        rep = pattern_report(traj, sc.partition, sc.verify.pattern_tol, sc.verify.window_fraction)
        aux = simulate_auxiliary(sc.dynamics, sc.topology, cfg)
        everyone = Partition(tuple(0 for _ in range(sc.topology.node_count)), (identity(sc.dynamics.state_dim),))
        row.update(within_group_error=rep.within_group_error, cross_group_error=rep.cross_group_error,
                   auxiliary_sync_error=within_group_error(aux, everyone, sc.verify.window_fraction),
                   achieved=int(rep.achieved), status="ok")
    except SimulationError as exc:
        row.update(within_group_error=float("nan"), cross_group_error=float("nan"),
                   auxiliary_sync_error=float("nan"), achieved=0, status=f"diverged: {exc}")
    return row


def sweep_threads() -> int:
    raw = os.environ.get("SYMPAT_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def cmd_sweep(args) -> int:
    sc = _with_overrides(_load(args.scenario), args)
    if args.param != "k":
        raise ScenarioError(f"only the coupling gain k can be swept, got {args.param!r}")
    if args.steps < 1:
        raise ScenarioError("--steps must be at least 1")
    ks = np.linspace(args.start, args.stop, args.steps)
    if np.any(ks < 0):
        raise ScenarioError("swept k values must be non-negative")
    threads = min(sweep_threads(), len(ks))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(sweep_point, [sc] * len(ks), ks))
    else:
        rows = [sweep_point(sc, k) for k in ks]
    buf = io.StringIO()
    fields = ["k", "within_group_error", "cross_group_error", "auxiliary_sync_error", "achieved", "status"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: (f"{v:.17g}" if isinstance(v, float) else v) for key, v in row.items()})
    write_atomic(args.out, buf.getvalue())
    threshold = next((r["k"] for r in rows if r["achieved"]), None)
    if threshold is None:
        print(f"pattern not achieved for any of {len(ks)} k values")
    else:
        print(f"smallest swept k achieving the pattern: {threshold:g}")
    print(f"{len(rows)} sweep points written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sympat", description="Symmetry-induced synchronization patterns in networks")
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario_arg(p):
        p.add_argument("scenario", help="scenario JSON file, or the name of a shipped scenario")
        p.add_argument("--tol", type=float, help="pattern tolerance override")
        p.add_argument("--window", type=float, help="trailing window fraction override")

    p = sub.add_parser("check", help="audit the hypotheses (symmetry, protocol, auxiliary sync)")
    scenario_arg(p)
    p.add_argument("--json", help="also write the audit as JSON")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("design", help="synthesise the coupling protocol and audit it")
    scenario_arg(p)
    p.add_argument("--out", required=True, help="protocol JSON output path")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="export a trajectory as CSV")
    p.add_argument("scenario")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--json", help="also write the trajectory as JSON with the scenario digest")
    p.add_argument("--aux", action="store_true", help="simulate the plain diffusive (auxiliary) network")
    p.add_argument("--transformed", action="store_true",
                   help="with --aux, start from the transformed initial state D x0")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the full design pipeline and report the pattern")
    scenario_arg(p)
    p.add_argument("--force", action="store_true", help="simulate even if the symmetry check fails")
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="pattern errors over a range of coupling gains")
    scenario_arg(p)
    p.add_argument("--param", default="k")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, SimulationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
