"""Command-line surface.

Subcommands: verify, sweep-kmax, sweep-radius, mc-check, plot.  Exit codes:
0 = verified safe / sweep complete / check passed, 1 = not verified (a sound
"unknown or unsafe"), 2 = usage or I/O error.  Outputs are written
atomically; diagnostics go to stderr only, controlled by CARV_LOG.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .baselines import PartitionGrid, run_hybrid, run_partition, run_symbolic
from .engine import VerificationResult, carv
from .harness import SweepRecord, mc_check, sweep_kmax, sweep_radius
from .model_io import SchemaError, constraints_to_json, load_scenario
from .plotting import render_sweep_png, render_svg, render_tube_png
from .scenario import Scenario

log = logging.getLogger("carv.cli")

MC_TOLERANCE = 1e-9


def _configure_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("CARV_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(stream=sys.stderr, level=level, format="%(name)s: %(message)s")


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _scenario_json(scenario: Scenario, path) -> dict:
    data = {
        "path": str(path),
        "sha256": _sha256(path),
        "dynamics": {"kind": scenario.dyn.kind, "dt": scenario.dyn.dt},
        "x0": {
            "lower": scenario.x0.lower.tolist(),
            "upper": scenario.x0.upper.tolist(),
        },
        "constraints": constraints_to_json(scenario.constraints),
        "t_f": scenario.t_f,
        "k_max": scenario.k_max,
    }
    if scenario.dyn.kind == "unicycle":
        data["dynamics"]["v"] = scenario.dyn.v
    return data


def run_output_json(
    scenario: Scenario, scenario_path, result: VerificationResult
) -> dict:
    return {
        "tool": {"name": "carv", "version": __version__},
        "method": result.method,
        "scenario": _scenario_json(scenario, scenario_path),
        "result": {
            "safe": result.safe,
            "timed_out": result.timed_out,
            "failure_time": result.failure_time,
            "rsoas": [
                {
                    "t": r.t,
                    "kind": r.kind,
                    "anchor_t": r.anchor_t,
                    "lower": r.box.lower.tolist(),
                    "upper": r.box.upper.tolist(),
                }
                for r in result.rsoas
            ],
            "stats": {
                "concrete_calls": result.stats.concrete_calls,
                "symbolic_calls": {
                    str(k): v for k, v in sorted(result.stats.symbolic_calls.items())
                },
                "total_seconds": result.stats.total_seconds,
            },
        },
    }


def _atomic_write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_csv(path, records: list[SweepRecord]) -> None:
    rows = [["parameter", "method", "verified", "seconds", "concrete_calls", "symbolic_calls"]]
    for r in records:
        rows.append(
            [r.parameter, r.method, r.verified, f"{r.seconds:.6f}", r.concrete_calls, r.symbolic_calls]
        )
    out = []
    for row in rows:
        out.append(",".join(str(v) for v in row))
    _atomic_write_text(path, "\n".join(out) + "\n")


def _parse_grid(text: str) -> PartitionGrid:
    try:
        return PartitionGrid(tuple(int(v) for v in text.split(",")))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from exc


def _parse_k_values(text: str) -> list[int]:
    """Either '6..24' (inclusive range) or a comma list '6,8,10'."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad k-values {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty k-values")
    return values


def _parse_deltas(text: str) -> list[float]:
    """Either 'start:stop:step' (inclusive) or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            values = []
            k = 0
            while True:
                v = start + k * step
                if v > stop + 1e-12:
                    break
                values.append(round(v, 12))
                k += 1
            return values
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad deltas {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carv",
        description="Safety verification for neural feedback loops",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="verify one scenario with one method")
    p.add_argument("--scenario", required=True)
    p.add_argument("--method", required=True, choices=["carv", "part", "symb", "hybr"])
    p.add_argument("--k-max", type=int, default=None, help="override scenario k_max")
    p.add_argument("--grid", type=_parse_grid, default=None, help="e.g. 6,6,18")
    p.add_argument("--budget-secs", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--fig", default=None, help="optional PNG of the reach tube")

    p = sub.add_parser("sweep-kmax", help="sweep the maximum symbolic horizon")
    p.add_argument("--scenario", required=True)
    p.add_argument("--methods", required=True, help="comma list from carv,hybr")
    p.add_argument("--k-values", required=True, type=_parse_k_values)
    p.add_argument("--out", required=True, help="CSV path; a PNG is written alongside")

    p = sub.add_parser("sweep-radius", help="sweep the obstacle radius inflation")
    p.add_argument("--scenario", required=True)
    p.add_argument("--methods", required=True, help="comma list from carv,part,symb,hybr")
    p.add_argument("--deltas", required=True, type=_parse_deltas)
    p.add_argument("--grid", type=_parse_grid, default=None)
    p.add_argument("--budget-secs", type=float, default=None)
    p.add_argument("--out", required=True, help="CSV path; a PNG is written alongside")

    p = sub.add_parser("mc-check", help="Monte Carlo falsification of a result")
    p.add_argument("--scenario", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("plot", help="render a result file to SVG")
    p.add_argument("--result", required=True)
    p.add_argument("--proj", required=True, help="two state indices, e.g. 0,1")
    p.add_argument("--out", required=True)
    p.add_argument("--png", default=None, help="optional matplotlib PNG")
    return parser


def _result_from_json(data: dict) -> VerificationResult:
    """Rebuild enough of a VerificationResult from a run-output file for
    re-checking (boxes, verdict, times)."""
    from .engine import BoundStats
    from .numerics import Box
    from .reach import Rsoa

    res = data["result"]
    rsoas = [
        Rsoa(Box(r["lower"], r["upper"]), r["t"], r["kind"], r["anchor_t"])
        for r in res["rsoas"]
    ]
    return VerificationResult(
        safe=res["safe"],
        rsoas=rsoas,
        stats=BoundStats(),
        method=data["method"],
        failure_time=res["failure_time"],
        timed_out=res["timed_out"],
    )


def _cmd_verify(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.k_max is not None:
        scenario = scenario.with_k_max(args.k_max)
    if args.method == "carv":
        result = carv(scenario)
    elif args.method == "hybr":
        result = run_hybrid(scenario)
    elif args.method == "symb":
        result = run_symbolic(scenario, budget_secs=args.budget_secs)
    else:
        grid = args.grid
        if grid is None:
            raise SchemaError("method 'part' requires --grid")
        if len(grid.counts) != scenario.dyn.state_dim:
            raise SchemaError("--grid dimension does not match the state dimension")
        result = run_partition(scenario, grid)
    output = run_output_json(scenario, args.scenario, result)
    _atomic_write_text(args.out, json.dumps(output, indent=2) + "\n")
    if args.fig:
        render_tube_png(output, (0, 1), args.fig)
    print(f"{result.method}: safe={result.safe} -> {args.out}")
    return 0 if result.safe else 1


def _cmd_sweep_kmax(args) -> int:
    scenario = load_scenario(args.scenario)
    methods = args.methods.split(",")
    records = sweep_kmax(scenario, methods, args.k_values)
    _write_csv(args.out, records)
    render_sweep_png(records, "k_max", Path(args.out).with_suffix(".png"))
    print(f"wrote {len(records)} records -> {args.out}")
    return 0


def _cmd_sweep_radius(args) -> int:
    scenario = load_scenario(args.scenario)
    methods = args.methods.split(",")
    records = sweep_radius(
        scenario,
        methods,
        args.deltas,
        grid=args.grid,
        budget_secs=args.budget_secs,
    )
    _write_csv(args.out, records)
    render_sweep_png(records, "delta_r", Path(args.out).with_suffix(".png"))
    print(f"wrote {len(records)} records -> {args.out}")
    return 0


def _cmd_mc_check(args) -> int:
    scenario = load_scenario(args.scenario)
    with open(args.result) as fh:
        data = json.load(fh)
    result = _result_from_json(data)
    n = args.n if args.n is not None else scenario.mc_n
    seed = args.seed if args.seed is not None else scenario.mc_seed
    report = mc_check(scenario, result, n, seed)
    consistent = not (report.constraint_hits and result.safe)
    print(
        f"mc-check: samples={n} worst_slack={report.worst:.3e} "
        f"constraint_hits={len(report.constraint_hits)} "
        f"verdict_consistent={consistent}"
    )
    return 0 if report.passes(MC_TOLERANCE) and consistent else 1


def _cmd_plot(args) -> int:
    with open(args.result) as fh:
        data = json.load(fh)
    i, j = (int(v) for v in args.proj.split(","))
    render_svg(data, (i, j), args.out)
    if args.png:
        render_tube_png(data, (i, j), args.png)
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code) if exc.code else 0
    commands = {
        "verify": _cmd_verify,
        "sweep-kmax": _cmd_sweep_kmax,
        "sweep-radius": _cmd_sweep_radius,
        "mc-check": _cmd_mc_check,
        "plot": _cmd_plot,
    }
    try:
        return commands[args.command](args)
    except (FileNotFoundError, SchemaError, ValueError, KeyError, OSError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
