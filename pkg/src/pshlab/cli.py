"""Command-line scenario runner.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import sys
from pathlib import Path

from pshlab.duality import ConeError
from pshlab.envelope import EnvelopeError, sh_envelope
from pshlab.geodesic import BarrierError
from pshlab.grid import GridError, build_grid, make_field
from pshlab.scenarios import SCENARIOS, RunContext, ScenarioError, ScenarioResult, run_scenario
from pshlab.simplex import SimplexError

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("pshlab")


def read_config(path: str | Path) -> tuple[str | None, dict[str, str], dict[str, str]]:
    """Parse an INI file into ``(scenario name, params, run options)``.

    Sections: ``[scenario]`` with ``name`` and optional ``seed``, ``jobs``,
    ``tol_scale``; ``[params]`` with scenario parameter overrides.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ScenarioError(f"cannot read config {path}: {exc}") from exc
    unknown = set(cp.sections()) - {"scenario", "params"}
    if unknown:
        raise ScenarioError(f"unknown config sections: {', '.join(sorted(unknown))}")
    head = dict(cp["scenario"]) if cp.has_section("scenario") else {}
    name = head.pop("name", None)
    extra = set(head) - {"seed", "jobs", "tol_scale"}
    if extra:
        raise ScenarioError(f"unknown [scenario] keys: {', '.join(sorted(extra))}")
    params = dict(cp["params"]) if cp.has_section("params") else {}
    return name, params, head


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    keys = list(rows[0])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow([repr(float(r[k])) if isinstance(r[k], float) else r[k] for k in keys])
    return buf.getvalue()


def write_reports(res: ScenarioResult, out_dir: Path, seed: int) -> Path:
    d = out_dir / res.name
    d.mkdir(parents=True, exist_ok=True)
    rep = res.report()
    rep["seed"] = seed
    rep["files"] = sorted([f"{k}.csv" for k in res.tables] + [f"field_{k}.csv" for k in res.fields])
    (d / "report.json").write_text(json.dumps(rep, sort_keys=True, indent=2) + "\n")
    for name, rows in res.tables.items():
        (d / f"{name}.csv").write_text(_csv_text(rows))
    for name, f in res.fields.items():
        (d / f"field_{name}.csv").write_text(f.to_csv())
    return d


def _cmd_list(args) -> int:
    for name, sc in SCENARIOS.items():
        print(f"{name:<16} {sc.description}")
    return EXIT_OK


def _cmd_run(args) -> int:
    params: dict[str, str] = {}
    opts: dict[str, str] = {}
    name = args.scenario
    if args.config:
        cfg_name, params, opts = read_config(args.config)
        if name and cfg_name and name != cfg_name:
            raise ScenarioError(f"config names scenario {cfg_name!r} but {name!r} was requested")
        name = name or cfg_name
    if not name:
        raise ScenarioError("no scenario given (positional name or [scenario] name in the config)")
    for kv in args.param or []:
        if "=" not in kv:
            raise ScenarioError(f"--param expects key=value, got {kv!r}")
        k, v = kv.split("=", 1)
        params[k.strip()] = v.strip()
    try:
        seed = args.seed if args.seed is not None else int(opts.get("seed", 0))
        jobs = args.jobs if args.jobs is not None else int(opts.get("jobs", 1))
        scale = args.tol_scale if args.tol_scale is not None else float(opts.get("tol_scale", 1.0))
    except ValueError as exc:
        raise ScenarioError(f"bad run option: {exc}") from exc
    ctx = RunContext(jobs=jobs, seed=seed, tol_scale=scale)
    res = run_scenario(name, params, ctx)
    out = write_reports(res, Path(args.out_dir), seed)
    for c in res.checks:
        print(c.line())
    print(f"{'PASSED' if res.passed else 'FAILED'} {name} -> {out}")
    if not res.passed:
        for c in res.checks:
            if not c.passed:
                print(f"failing check {c.name}: value {c.value!r} vs bound {c.bound!r}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _cmd_dump(args) -> int:
    g = build_grid(args.domain, args.n)
    f = make_field(g, args.generator)
    if args.envelope:
        rep = sh_envelope(f)
        if not rep.converged:
            raise EnvelopeError("envelope did not converge", rep)
        f = rep.envelope
    text = f.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pshlab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write reports")
    run.add_argument("scenario", nargs="?")
    run.add_argument("--config")
    run.add_argument("--out-dir", default="reports")
    run.add_argument("--jobs", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--tol-scale", type=float)
    run.add_argument("--param", action="append", metavar="KEY=VALUE", help="override a scenario parameter")
    run.set_defaults(func=_cmd_run)

    ls = sub.add_parser("list-scenarios", help="print the built-in scenarios")
    ls.set_defaults(func=_cmd_list)

    dump = sub.add_parser("dump-field", help="write a generated field (or its envelope) as CSV")
    dump.add_argument("generator")
    dump.add_argument("--domain", default="disk(1)")
    dump.add_argument("--n", type=int, default=51)
    dump.add_argument("--envelope", action="store_true")
    dump.add_argument("--out")
    dump.set_defaults(func=_cmd_dump)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, GridError, BarrierError, ConeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EnvelopeError, SimplexError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
