"""Command-line front end: ``lefschetz-lab {list-scenarios, run, heat-diagnostics}``.

Exit status: 0 when every verdict passes, 1 on a verification failure,
2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from importlib import resources
from typing import List, Optional, Sequence

from . import __version__
from .config import ConfigError, load_config
from .harness import (BUILTIN_SCENARIOS, IdentityReport, ScenarioError, get_scenario, parse_routes, run_suite,
                      summary_rows)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text: str) -> List[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lefschetz-lab",
                                description="Verify Lefschetz fixed point identities on manifolds with boundary.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list-scenarios", help="list the built-in scenarios")

    r = sub.add_parser("run", help="verify scenarios and write reports")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", action="append", metavar="NAME",
                     help="built-in scenario (repeatable; 'all' for every one)")
    src.add_argument("--config", metavar="FILE", help="suite configuration file")
    r.add_argument("--routes", help="comma list from simplicial, analytic, heat")
    r.add_argument("--report", metavar="PATH.json", help="JSON report path")
    r.add_argument("--csv", metavar="PATH.csv", help="CSV summary path")
    r.add_argument("--tolerance", type=float, help="tolerance for non-exact comparisons")
    r.add_argument("--t-grid", type=_floats, help="decreasing t values for the heat route")
    r.add_argument("--cutoff", type=float, help="boundary eigenvalue cutoff for the heat route")
    r.add_argument("--seed-grid", type=int, help="grid resolution of the fixed point search")
    r.add_argument("--jobs", type=int, help="parallel scenarios (default $LEFSCHETZ_LAB_JOBS or 1)")

    h = sub.add_parser("heat-diagnostics", help="per-t boundary integral table (CSV)")
    h.add_argument("--model", default="disk")
    h.add_argument("--c", type=float, default=0.5)
    h.add_argument("--B", default="refl")
    h.add_argument("--bc", default="PminusL0")
    h.add_argument("--q", type=int, default=0)
    h.add_argument("--t-grid", type=_floats, default=[0.2, 0.1, 0.05, 0.025])
    h.add_argument("--collar", type=float)
    h.add_argument("--scale", type=float, default=100.0)
    h.add_argument("--cutoff", type=float)
    h.add_argument("--parametrix", action="store_true",
                   help="instead sweep the interval parametrix error over --t-grid")
    h.add_argument("--csv", metavar="PATH.csv", help="output path (default standard output)")
    return p


def cmd_list_scenarios(out=None) -> int:
    out = out or sys.stdout
    for s in BUILTIN_SCENARIOS.values():
        out.write(f"{s.title:42s} model={s.model} B={s.B} collar={s.collar} scale={s.scale:g}\n")
    return EXIT_OK


def _jobs(flag: Optional[int], cfg_jobs: Optional[int]) -> int:
    if flag is not None:
        jobs = flag
    elif cfg_jobs is not None:
        jobs = cfg_jobs
    else:
        env = os.environ.get("LEFSCHETZ_LAB_JOBS")
        try:
            jobs = int(env) if env else 1
        except ValueError:
            raise UsageError(f"LEFSCHETZ_LAB_JOBS must be an integer, got {env!r}") from None
    if jobs < 1:
        raise UsageError("--jobs must be at least 1")
    return jobs


def report_document(reports: Sequence[IdentityReport]) -> dict:
    return {"tool": "lefschetz-lab", "version": __version__,
            "verdict": "pass" if all(r.passed for r in reports) else "FAIL",
            "scenarios": [r.as_dict() for r in reports]}


def load_schema() -> dict:
    return json.loads(resources.files("lefschetz_lab").joinpath("report.schema.json").read_text())


def validate_report(doc: dict) -> None:
    import jsonschema
    jsonschema.validate(doc, load_schema())


def write_csv(rows: Sequence[dict], fh) -> None:
    cols = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)


def cmd_run(args) -> int:
    cfg_jobs = None
    report_path, csv_path = args.report, args.csv
    if args.config:
        cfg = load_config(args.config, validate=False)
        scenarios = cfg.scenarios
        report_path = report_path or cfg.report
        csv_path = csv_path or cfg.csv
        cfg_jobs = cfg.jobs
    else:
        names = args.scenario
        if "all" in names:
            scenarios = list(BUILTIN_SCENARIOS.values())
        else:
            scenarios = [get_scenario(n) for n in names]
    overrides = {}
    if args.routes:
        overrides["routes"] = parse_routes(args.routes)
    if args.tolerance is not None:
        if args.tolerance < 0:
            raise UsageError("--tolerance must be non-negative")
        overrides.update(tolerance=args.tolerance, analytic_tolerance=args.tolerance,
                         heat_tolerance=args.tolerance)
    if args.t_grid:
        overrides["t_grid"] = tuple(args.t_grid)
    if args.cutoff is not None:
        overrides["cutoff"] = args.cutoff
    if args.seed_grid is not None:
        overrides["seed_grid"] = args.seed_grid
    scenarios = [replace(s, **overrides) for s in scenarios]
    jobs = _jobs(args.jobs, cfg_jobs)
    for s in scenarios:  # fail fast before any work
        s.validate()
    reports = run_suite(scenarios, jobs)
    doc = report_document(reports)
    validate_report(doc)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    if csv_path:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            write_csv(summary_rows(reports), fh)
    for rep in reports:
        n_pass = sum(i.passed for i in rep.identities)
        status = "pass" if rep.passed else "FAIL"
        print(f"{status:4s}  {rep.scenario.title}  ({n_pass}/{len(rep.identities)} identities)")
        for i in rep.identities:
            if not i.passed:
                print(f"      FAIL {i.name}: lhs={float(i.lhs):.12g} rhs={float(i.rhs):.12g}", file=sys.stderr)
        for e in rep.errors:
            print(f"      error: {e}", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_heat_diagnostics(args) -> int:
    from . import heat
    from .catalog import build_model
    from .selfmap import make_condition_a_map

    if args.bc not in heat.BCS:
        raise UsageError(f"invalid --bc {args.bc!r}; choose from {', '.join(heat.BCS)}")
    ts = list(args.t_grid)
    if any(t <= 0 for t in ts):
        raise UsageError("t values must be positive")
    rows = []
    if args.parametrix:
        if any(t > 1 for t in ts):
            raise UsageError("parametrix t values must lie in (0, 1]")
        for t in ts:
            rows.append({"t": t, "bc": args.bc, "q": args.q,
                         "error": heat.parametrix_error(args.bc, t, q=args.q)})
    else:
        try:
            model = build_model(args.model, collar_width=args.collar, scale=args.scale)
            f = make_condition_a_map(model, args.c, args.B)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        factors = {v: heat.gaussian_factor(args.c, v) for v in heat.VARIANTS}
        ctx = heat.BoundaryContext(f, min(ts), args.cutoff)
        for t in ts:
            r = heat.boundary_trace_integral(f, args.bc, args.q, t, ctx, check=False)
            rows.append({"t": t, "q": args.q, "bc": args.bc, "route_i": r.route_i, "route_ii": r.route_ii,
                         "difference": r.difference, **factors})
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    else:
        buf = io.StringIO()
        write_csv(rows, buf)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        if args.command == "list-scenarios":
            return cmd_list_scenarios()
        if args.command == "run":
            return cmd_run(args)
        return cmd_heat_diagnostics(args)
    except (ConfigError, ScenarioError, UsageError) as exc:
        print(f"lefschetz-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
