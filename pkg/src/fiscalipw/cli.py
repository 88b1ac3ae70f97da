"""Command-line driver.

    fiscalipw estimate [--config PATH] [--data PATH] [--format text|csv|json] ...
    fiscalipw simulate [--config PATH] [--seed INT] ...
    fiscalipw inspect-data [--data PATH]

Exit status is 0 on success, 1 for user or data errors (one line on stderr:
``CODE: message``) and 2 for internal errors. Output files are written to a
temporary file and renamed, so a failed run leaves nothing behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from .baseline import fit_baseline
from .config import ENV_CONFIG, RunConfig
from .data import assemble_panel, load_csv
from .effects import estimate_all, render_table
from .errors import ConfigError, FiscalIPWError
from .mc import run_experiment
from .propensity import check_no_empty_cell, fit_gps
from .treatment import classify

_VARIANT_FLAGS = {"wls-a2": ("WLS_A2",), "ols-a2": ("OLS_A2",), "wls-a1": ("WLS_A1",),
                  "all": ("WLS_A2", "OLS_A2", "WLS_A1")}
_PARAM_FLAGS = {"ref": "reference_coded", "cell": "cell_means"}
_BASELINE_FLAGS = {"full": "full_sample", "expanding": "expanding"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"INI config file (default: ${ENV_CONFIG})")
    common.add_argument("--data", help="quarterly CSV (default: bundled fixture)")
    common.add_argument("--format", choices=("text", "csv", "json"))
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--variant", choices=tuple(_VARIANT_FLAGS))
    common.add_argument("--param", choices=tuple(_PARAM_FLAGS))
    common.add_argument("--e-min", type=float, dest="e_min")
    common.add_argument("--baseline", choices=tuple(_BASELINE_FLAGS))
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="fiscalipw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("estimate", parents=[common], help="estimate the treatment-effect table")
    sim = sub.add_parser("simulate", parents=[common], help="run the Monte Carlo experiment")
    sim.add_argument("--replications", "-R", type=int, dest="replications")
    sim.add_argument("--theta", type=float)
    sim.add_argument("--jobs", type=int, dest="n_jobs")
    sub.add_parser("inspect-data", parents=[common], help="validate a data file and summarise it")
    return parser


def load_config(args) -> RunConfig:
    path = args.config or os.environ.get(ENV_CONFIG)
    cfg = RunConfig.from_file(path) if path else RunConfig()
    overrides = {}
    if args.data:
        overrides["data_path"] = args.data
    if args.format:
        overrides["format"] = args.format
    if args.out:
        overrides["out"] = args.out
    if args.variant:
        overrides["variants"] = _VARIANT_FLAGS[args.variant]
    if args.param:
        overrides["parameterization"] = _PARAM_FLAGS[args.param]
    if args.e_min is not None:
        overrides["e_min"] = args.e_min
    if args.baseline:
        overrides["baseline"] = _BASELINE_FLAGS[args.baseline]
    if args.seed is not None:
        overrides["seed"] = args.seed
    for name, field in (("replications", "mc_R"), ("theta", "mc_theta"), ("n_jobs", "n_jobs")):
        if getattr(args, name, None) is not None:
            overrides[field] = getattr(args, name)
    return replace(cfg, **overrides).validate()


def write_output(text: str, out: str) -> None:
    if not out:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_estimate(cfg: RunConfig) -> int:
    table = load_csv(cfg.resolved_data_path(), cfg.date_col, cfg.required_columns())
    panel = assemble_panel(table, cfg.panel_config())
    assignment = classify(panel.g)
    baseline = fit_baseline(panel, cfg.baseline)
    prop = fit_gps(panel.x, assignment, cfg.e_min)
    results = estimate_all(panel, baseline, prop, cfg.variants, cfg.parameterization, cfg.robust)
    print(check_no_empty_cell(prop).to_text(), file=sys.stderr)
    write_output(render_table(results, cfg.format), cfg.out)
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    report = run_experiment(cfg.dgp_spec(), cfg.mc_R, n_jobs=cfg.n_jobs)
    text = {"text": report.to_text, "csv": report.to_csv, "json": report.to_json}[cfg.format]()
    write_output(text, cfg.out)
    return 0


def cmd_inspect(cfg: RunConfig) -> int:
    table = load_csv(cfg.resolved_data_path(), cfg.date_col, cfg.required_columns())
    summary = table.summary()
    if cfg.format == "json":
        text = json.dumps(summary, indent=2) + "\n"
    else:
        lines = [f"rows: {summary['rows']}  ({summary['first']} .. {summary['last']})",
                 "no gaps, all values finite"]
        for name in table.names:
            s = summary[name]
            lines.append(f"  {name:<12} min {s['min']:>12.4f}  max {s['max']:>12.4f}  mean {s['mean']:>12.4f}")
        text = "\n".join(lines) + "\n"
    write_output(text, cfg.out)
    return 0


COMMANDS = {"estimate": cmd_estimate, "simulate": cmd_simulate, "inspect-data": cmd_inspect}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except FiscalIPWError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"{ConfigError.code}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - exercised only on bugs
        print(f"E_INTERNAL: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
