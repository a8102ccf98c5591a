"""Command line entry point: ``vortexprop simulate|verify|diagnose``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import VortexPropError


def _overrides(args) -> dict:
    raw = {}
    if args.config:
        from .runner import load_config_file
        raw = load_config_file(args.config)
    if getattr(args, "scenario", None):
        raw["scenario"] = args.scenario
    if getattr(args, "oam", None) is not None:
        raw.setdefault("beam", {})["oam"] = args.oam
    if getattr(args, "method", None):
        raw["method"] = args.method
    if getattr(args, "frames", None) is not None:
        raw.setdefault("time", {})["frames"] = args.frames
    if getattr(args, "grid", None):
        raw["grid"] = args.grid
    return raw


def cmd_simulate(args) -> int:
    from .runner import build_config, run_simulate
    cfg = build_config(_overrides(args))
    out = run_simulate(cfg, args.out)
    print(f"wrote {len(cfg.time.frame_times())} frames of {cfg.scenario_id} to {out}")
    report = out / "report.json"
    if report.exists():
        data = json.loads(report.read_text())
        pr = data.get("precession", {})
        if pr.get("status") == "ok":
            print(f"g_L = {pr['g_L']:.6f}")
    return 0


def cmd_verify(args) -> int:
    from .verify import SUITES, run_verify
    params = None
    if args.config:
        params = build_config_params(args.config)
    suites = args.suite or list(SUITES)
    report = run_verify(suites, beta_z_convention=args.beta_z, params=params)
    for c in report["checks"]:
        word = {"pass": "PASS", "fail": "FAIL", "skip": "SKIP"}[c["status"]]
        extra = c["detail"].get("reason") or c["detail"].get("error") or ""
        value = "" if c["value"] is None else f" value={c['value']:.4g} limit={c['limit']:.4g}"
        print(f"{word} {c['suite']}/{c['name']}{value} {extra}".rstrip())
    if args.out:
        from .io import write_json
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        write_json(args.out, report)
    return 0 if report["passed"] else 1


def build_config_params(path):
    """Physical parameters from a config file (the beam part is ignored)."""
    from .runner import DEFAULT_CONFIG, load_config_file
    from .params import PhysicalParams
    raw = load_config_file(path)
    p = {**DEFAULT_CONFIG["params"], **raw.get("params", {})}
    return PhysicalParams(mass=float(p["mass"]), charge=float(p["charge"]), hbar=float(p["hbar"]),
                          field=float(p["field"]))


def cmd_diagnose(args) -> int:
    from .runner import run_diagnose
    run_dir = args.run_dir or args.out
    if run_dir is None:
        raise VortexPropError("give a run directory")
    report = run_diagnose(run_dir)
    pr = report.get("precession", {})
    if pr.get("status") == "ok":
        print(f"g_L = {pr['g_L']:.6f}")
    print(f"windings: {report['winding']['values']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vortexprop",
                                description="Electron vortex packets in a uniform magnetic field.")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="propagate a packet and write frames, slices and heatmaps")
    sim.add_argument("--config", help="JSON or YAML scenario file")
    sim.add_argument("--method", choices=["analytic", "quadrature", "splitstep"])
    sim.add_argument("--frames", type=int)
    sim.add_argument("--grid", help="points per frame window, NXxNYxNZ")
    sim.add_argument("--scenario", choices=["perp", "parallel"])
    sim.add_argument("--oam", type=int, choices=[0, 1])
    sim.add_argument("--out", required=True, help="run directory")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run the self-check suites")
    ver.add_argument("--suite", action="append", choices=["kernel", "closedform", "oracle", "diagnostics"])
    ver.add_argument("--config", help="scenario file whose physical parameters are used")
    ver.add_argument("--beta-z", choices=["inverse", "literal"], default="inverse",
                     help="axial coefficient convention (literal is a deliberate mutation)")
    ver.add_argument("--out", help="write the JSON report here")
    ver.set_defaults(func=cmd_verify)

    dia = sub.add_parser("diagnose", help="recompute series, report and figures for a run")
    dia.add_argument("run_dir", nargs="?")
    dia.add_argument("--out", help="run directory (alternative to the positional argument)")
    dia.set_defaults(func=cmd_diagnose)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VortexPropError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
