"""
Command-line front end.

    platecharge simulate  [--config FILE] [--experiment transect|factorial] [--platform robot|handheld|both] [--seed N]
    platecharge fit       RECORDS.csv [--config FILE]
    platecharge compare   ROBOT.csv HANDHELD.csv [--config FILE]
    platecharge summarize RECORDS.csv [--by position|condition]
    platecharge oracle    --check eq1-limits|quadrature|fit-closed-form|all

Exit codes: 0 success, 1 usage or configuration error, 2 data error, 3 oracle failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .inference import ComparisonReport, FitResult, PositionMismatchError, compare_platforms, fit_sigma, summarize
from .lsq import ConvergenceError, DegenerateDesignError
from .oracles import SUITES
from .survey import (
    RecordFormatError,
    atomic_write_text,
    handheld_reference,
    read_records_csv,
    records_to_csv,
    run_factorial,
    run_transect,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ORACLE = 0, 1, 2, 3
SEED_ENV = "PLATECHARGE_SEED"
PC = 1e-12


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    seed = cfg.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            seed = int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    if seed < 0:
        raise UsageError(f"seed must be >= 0, got {seed}")
    out = Path(args.out) if getattr(args, "out", None) else cfg.output_dir
    return replace(cfg, seed=seed, output_dir=out)


def _output_dir(cfg: RunConfig) -> Path:
    try:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {cfg.output_dir}: {exc.strerror}") from None
    if not os.access(cfg.output_dir, os.W_OK):
        raise UsageError(f"output directory {cfg.output_dir} is not writable")
    return cfg.output_dir


def _write(path: Path, text: str) -> None:
    try:
        atomic_write_text(path, text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _read(path: str):
    try:
        records = read_records_csv(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    except RecordFormatError as exc:
        raise DataError(f"{path}: {exc}") from None
    if not records:
        raise DataError(f"{path}: no records")
    return records


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# --------------------------------------------------------------------------
# report shapes
# --------------------------------------------------------------------------

def _summary_rows(summaries):
    return [
        {
            "position": s.position_label,
            "r_m": s.r,
            "n": s.n,
            "mean_V": s.mean,
            "std_dev_V": s.std_dev,
            "se_V": s.se,
            "fractional_se": s.fractional_se,
            "median_V": s.median,
            "band_low_V": s.band[0],
            "band_high_V": s.band[1],
        }
        for s in summaries
    ]


def _summary_csv(summaries) -> str:
    rows = _summary_rows(summaries)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def _fit_block(fit: FitResult) -> dict:
    block = {
        "sigma_pC_m2": fit.sigma_hat / PC,
        "sigma_se_pC_m2": fit.sigma_se / PC,
        "chi2": fit.chi2,
        "dof": fit.dof,
        "reduced_chi2": fit.reduced_chi2,
        "residuals_V": list(fit.residuals),
    }
    if fit.r0_hat is not None:
        block["r0_m"] = fit.r0_hat
        block["r0_se_m"] = fit.r0_se
    return block


def _comparison_block(report: ComparisonReport) -> dict:
    return {
        "variability_ratio": report.variability_ratio,
        "robot_fse_range": list(report.robot_fse_range),
        "handheld_fse_range": list(report.handheld_fse_range),
        "sigma_consistent": report.sigma_consistent,
        "robot_fit": _fit_block(report.robot_fit),
        "handheld_fit": _fit_block(report.handheld_fit),
        "robot_positions": _summary_rows(report.robot),
        "handheld_positions": _summary_rows(report.handheld),
    }


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = _config(args)
    platforms = ["robot", "handheld"] if args.platform == "both" else [args.platform]
    plan = cfg.transect if args.experiment == "transect" else cfg.factorial
    outputs = {}
    for name in platforms:
        if name == "handheld":
            records = handheld_reference(plan, cfg.handheld, cfg.sensor, cfg.world, cfg.seed)
        elif args.experiment == "transect":
            records = run_transect(plan, cfg.robot, cfg.sensor, cfg.world, cfg.seed)
        else:
            records = run_factorial(plan, cfg.robot, cfg.sensor, cfg.world, cfg.seed, cfg.mount_table)
        outputs[f"records_{args.experiment}_{name}.csv"] = records_to_csv(records)
    out = _output_dir(cfg)
    for filename, text in outputs.items():
        _write(out / filename, text)
        print(out / filename)
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _config(args)
    records = _read(args.records)
    kinds = {rec.platform for rec in records}
    if len(kinds) != 1:
        raise DataError(f"{args.records}: records mix platforms {sorted(k.value for k in kinds)}")
    summaries = summarize(records)
    try:
        fit = fit_sigma(summaries, cfg.z, cfg.side_a, fit_offset=cfg.fit_offset)
    except (DegenerateDesignError, ConvergenceError) as exc:
        raise DataError(f"{args.records}: {exc}") from None
    report = {"platform": kinds.pop().value, "n_records": len(records), **_fit_block(fit),
              "positions": _summary_rows(summaries)}
    text = _dumps(report)
    out = _output_dir(cfg)
    stem = Path(args.records).stem
    _write(out / f"fit_{stem}.json", text)
    _write(out / f"summary_{stem}.csv", _summary_csv(summaries))
    sys.stdout.write(text)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    robot, handheld = _read(args.robot), _read(args.handheld)
    try:
        report = compare_platforms(robot, handheld, cfg.z, cfg.side_a)
    except (PositionMismatchError, DegenerateDesignError, ConvergenceError) as exc:
        raise DataError(str(exc)) from None
    text = _dumps(_comparison_block(report))
    _write(_output_dir(cfg) / "comparison.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_summarize(args) -> int:
    cfg = _config(args)
    records = _read(args.records)
    text = _summary_csv(summarize(records, args.by))
    _write(_output_dir(cfg) / f"summary_{Path(args.records).stem}_{args.by}.csv", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    names = list(SUITES) if "all" in args.check else args.check
    ok = True
    for name in names:
        print(f"[{name}]")
        for check in SUITES[name]():
            print(f"  {check.line()}")
            ok &= check.passed
    print("all checks passed" if ok else "ORACLE FAILURE")
    return EXIT_OK if ok else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="platecharge", description="Charged-plate field mill survey simulator and estimator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("-c", "--config", help="YAML run configuration (default: packaged defaults)")
        p.add_argument("-o", "--out", help="output directory (overrides output_dir in the config)")

    p = sub.add_parser("simulate", help="run a measurement campaign and write record CSVs")
    common(p)
    p.add_argument("--experiment", choices=["transect", "factorial"], default="transect")
    p.add_argument("--platform", choices=["robot", "handheld", "both"], default="both")
    p.add_argument("--seed", type=int, help=f"overrides the config seed and ${SEED_ENV}")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit surface charge density to a transect record CSV")
    common(p)
    p.add_argument("records")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="compare robot and handheld transects")
    common(p)
    p.add_argument("robot")
    p.add_argument("handheld")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("summarize", help="per-position or per-condition summary CSV")
    common(p)
    p.add_argument("records")
    p.add_argument("--by", choices=["position", "condition"], default="position")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("oracle", help="run model self-checks")
    p.add_argument("--check", action="append", required=True, choices=[*SUITES, "all"])
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
