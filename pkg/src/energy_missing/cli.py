"""Command-line interface: ``energy-missing {test,simulate,calibrate,report}``.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .data import read_csv
from .exceptions import (
    CalibrationError,
    EnergyMissingError,
    OracleError,
    ReplicateError,
)
from .estimator import EnergyTwoSampleTest
from .missingness import calibrate_logistic_intercept, logistic_probabilities, standard_normal_reference
from .resampling import default_jobs

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

REPORT_KEYS = {"procedure", "statistic", "p_value", "reject", "alpha", "critical_value", "B"}


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="energy-missing",
        description="Energy two-sample tests for incomplete data.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    t = sub.add_parser("test", help="test two CSV samples for equal distributions")
    t.add_argument("--x", required=True, help="CSV file of the first sample (NA or empty = missing)")
    t.add_argument("--y", required=True, help="CSV file of the second sample")
    t.add_argument("--stat", choices=["cc", "weighted", "impute"], default="weighted",
                   help="complete-case, weighted-distance, or imputed statistic (default weighted)")
    t.add_argument("--imputer", choices=["mean", "median", "knn"], default="mean",
                   help="imputation method for --stat impute (default mean)")
    t.add_argument("--k", type=int, default=6, help="neighbours for the knn imputer (default 6)")
    t.add_argument("--bootstrap", choices=["split", "pooled"], default="split",
                   help="resampling for cc/weighted: keep complete-case counts or pool (default split)")
    t.add_argument("--B", type=int, default=1000, help="bootstrap replicates (default 1000)")
    t.add_argument("--alpha", type=float, default=0.05, help="level (default 0.05)")
    t.add_argument("--seed", type=int, default=None, help="random seed")
    t.add_argument("--out", choices=["text", "json"], default="text", help="output format")

    s = sub.add_parser("simulate", help="run a scenario file and write power tables")
    s.add_argument("--config", required=True,
                   help="scenario JSON file, or the name of a shipped config")
    s.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default $ENERGY_TEST_THREADS or 1)")
    s.add_argument("--out-dir", default=".", help="directory for tables and manifest")
    s.add_argument("--quiet", action="store_true", help="no per-cell progress on stderr")

    c = sub.add_parser("calibrate", help="find the logistic intercept for a missingness rate")
    c.add_argument("--rate", type=float, required=True, help="target missingness rate in (0, 1)")
    c.add_argument("--slopes", type=_float_list, required=True, help="comma-separated slopes")
    c.add_argument("--controls", type=_int_list, default=None,
                   help="comma-separated 0-based control column per slope; repeats allowed "
                        "(default: one independent column per slope)")
    c.add_argument("--mc", type=int, default=200_000, help="standard normal reference draws")
    c.add_argument("--tol", type=float, default=1e-4, help="bisection tolerance")
    c.add_argument("--seed", type=int, default=None, help="random seed")
    c.add_argument("--out", choices=["text", "json"], default="text", help="output format")

    r = sub.add_parser("report", help="validate and summarise a JSON report of the test command")
    r.add_argument("file", help="JSON file written by 'test --out json' ('-' for stdin)")
    return parser


def _print_test(report, out):
    if out == "json":
        print(json.dumps(report, indent=2))
        return
    st = report["statistic"]
    print(f"procedure:      {report['procedure']}")
    print(f"statistic:      {st['raw']:.6g} (scaled {st['scaled']:.6g})")
    print(f"sizes:          n={st['n']}, m={st['m']}"
          + (f", complete {st['n_hat']}/{st['m_hat']}" if st["n_hat"] is not None else ""))
    print(f"p-value:        {report['p_value']:.4g}  (B={report['B']})")
    print(f"critical value: {report['critical_value']:.6g} at alpha={report['alpha']}")
    print(f"decision:       {'reject' if report['reject'] else 'do not reject'} equal distributions")


def cmd_test(args):
    x = read_csv(args.x)
    y = read_csv(args.y)
    est = EnergyTwoSampleTest(statistic=args.stat, bootstrap=args.bootstrap, imputer=args.imputer,
                              n_neighbors=args.k, n_bootstrap=args.B, alpha=args.alpha,
                              random_state=args.seed)
    est.fit(x, y)
    _print_test(est.report(), args.out)
    return EXIT_OK


def _config_path(value):
    from .simharness import shipped_config

    path = Path(value)
    return path if path.exists() else shipped_config(value)


def cmd_simulate(args):
    from .simharness import emit_table, load_scenario, manifest, run_scenario, write_manifest

    spec = load_scenario(_config_path(args.config))
    jobs = default_jobs() if args.jobs is None else args.jobs
    if jobs < 1:
        raise argparse.ArgumentTypeError("--jobs must be at least 1")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def progress(cell):
        if not args.quiet:
            status = cell.status if cell.ok else f"FAILED ({cell.error})"
            print(f"[{cell.index + 1}/{len(spec.pairs)}] {cell.x} vs {cell.y}: "
                  f"{status} in {cell.runtime:.1f}s", file=sys.stderr)

    table = run_scenario(spec, jobs=jobs, progress=progress)
    md = out_dir / f"{spec.name}.md"
    csv = out_dir / f"{spec.name}.csv"
    md.write_text(emit_table(table, "markdown"))
    csv.write_text(emit_table(table, "csv"))
    man = out_dir / f"{spec.name}.manifest.json"
    write_manifest(man, manifest(spec, table, outputs=[md.name, csv.name]))
    print(f"wrote {md}, {csv}, {man}")
    if table.failed:
        print(f"{len(table.failed)} cell(s) failed; see {man}", file=sys.stderr)
    return EXIT_OK


def cmd_calibrate(args):
    controls = args.controls if args.controls is not None else list(range(len(args.slopes)))
    if len(controls) != len(args.slopes):
        raise argparse.ArgumentTypeError("--controls needs one column per slope")
    if any(c < 0 for c in controls):
        raise argparse.ArgumentTypeError("--controls must be non-negative")
    intercept = calibrate_logistic_intercept(args.rate, args.slopes, mc_size=args.mc,
                                             tol=args.tol, rng=args.seed, controls=controls)
    # achieved rate on fresh reference draws
    rng = np.random.default_rng(None if args.seed is None else args.seed + 1)
    ref = standard_normal_reference(controls)(rng, args.mc)
    achieved = float(logistic_probabilities(ref, intercept, args.slopes).mean())
    if args.out == "json":
        print(json.dumps({"intercept": intercept, "achieved_rate": achieved,
                          "target_rate": args.rate, "slopes": args.slopes,
                          "controls": controls}, indent=2))
    else:
        print(f"intercept:     {intercept:.6f}")
        print(f"achieved rate: {achieved:.4f} (target {args.rate})")
    return EXIT_OK


def validate_report(report):
    if not isinstance(report, dict):
        raise ValueError("report must be a JSON object")
    missing = REPORT_KEYS - set(report)
    if missing:
        raise ValueError(f"report lacks key(s) {sorted(missing)}")
    if not 0 <= report["p_value"] <= 1:
        raise ValueError("p_value outside [0, 1]")
    for key in ("raw", "scaled", "n", "m"):
        if key not in report["statistic"]:
            raise ValueError(f"statistic lacks key {key!r}")
    return report


def cmd_report(args):
    text = sys.stdin.read() if args.file == "-" else Path(args.file).read_text()
    try:
        report = validate_report(json.loads(text))
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        print(f"error: invalid report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _print_test(report, "text")
    return EXIT_OK


COMMANDS = {"test": cmd_test, "simulate": cmd_simulate, "calibrate": cmd_calibrate,
            "report": cmd_report}


LIST_FLAGS = ("--slopes", "--controls")


def _attach_list_values(argv):
    # "--slopes -1.9,-1.5" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in LIST_FLAGS:
            val = next(it, None)
            out.append(tok if val is None else f"{tok}={val}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_list_values(argv))
    try:
        return COMMANDS[args.command](args)
    except (CalibrationError, OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ReplicateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (EnergyMissingError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
