"""Command line entry point (``spatconf`` / ``python -m spatconf``)."""

import argparse
import json
import logging
import os
import sys

from .harness import (
    ConfigError,
    ReplicationFailure,
    SUMMARY_COLUMNS,
    _csv_text,
    diagnostic_summary,
    emit_report,
    load_config,
    read_rows,
    run_diagnostics,
    run_experiment,
    summarize_rows,
)

EXIT_OK, EXIT_CONFIG, EXIT_FAILURES = 0, 2, 3

logger = logging.getLogger("spatconf")


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from exc
    if not vals or min(vals) < 2:
        raise argparse.ArgumentTypeError("sizes must be integers >= 2")
    return vals


def _formats(text):
    vals = [v.strip() for v in text.split(",") if v.strip()]
    bad = set(vals) - {"csv", "json", "svg"}
    if bad:
        raise argparse.ArgumentTypeError(f"unknown formats {sorted(bad)}")
    return vals


def build_parser():
    p = argparse.ArgumentParser(prog="spatconf", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a Monte Carlo experiment from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--formats", type=_formats, default=["csv", "json", "svg"])

    e = sub.add_parser("eigen-bias", help="exact vs predicted GLS bias on the Hermite eigenfunction scenario")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--threads", type=int, default=1)

    d = sub.add_parser("diagnose", help="replicated cross-term / quadratic-form statistics")
    d.add_argument("--lemma", choices=("cross", "quadform"), required=True)
    d.add_argument("--n-sweep", type=_int_list, default=[250, 500, 1000, 2000])
    d.add_argument("--reps", type=int, default=200)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", required=True)
    d.add_argument("--threads", type=int, default=1)

    r = sub.add_parser("report", help="re-aggregate a results directory")
    r.add_argument("--in", dest="indir", required=True)
    r.add_argument("--summary", action="store_true", help="rewrite summary.csv from reps.csv and print it")
    return p


def _run(cfg, out, threads, formats):
    try:
        report = run_experiment(cfg, threads=threads)
    except ReplicationFailure as exc:
        emit_report(exc.report, out, formats)
        logger.error("%s", exc)
        return EXIT_FAILURES
    emit_report(report, out, formats)
    for s in report.summary:
        logger.info("%-14s mean_bias=%+.4f sd=%.4f coverage=%.3f", s["estimator"], s["mean_bias"], s["sd_bias"], s["coverage"])
    if report.errors:
        logger.warning("%d estimator fits failed; see errors.csv", len(report.errors))
    return EXIT_OK


def _report(indir, summary):
    paths = []
    for root, _, files in os.walk(indir):
        if "reps.csv" in files:
            paths.append(root)
    if not paths:
        if os.path.exists(os.path.join(indir, "diagnostics.csv")):
            import csv

            with open(os.path.join(indir, "diagnostics.csv"), encoding="utf-8") as fh:
                rows = [{"rep": int(r["rep"]), "n": int(r["n"]), "statistic": r["statistic"], "value": float(r["value"])}
                        for r in csv.DictReader(fh)]
            text = _csv_text(["n", "statistic", "mean", "sd", "min", "mc_se", "reps"], diagnostic_summary(rows))
            sys.stdout.write(text)
            return EXIT_OK
        raise ConfigError(f"no reps.csv or diagnostics.csv under {indir}")
    for root in sorted(paths):
        rows = read_rows(os.path.join(root, "reps.csv"))
        text = _csv_text(SUMMARY_COLUMNS, summarize_rows(rows))
        if summary:
            with open(os.path.join(root, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        if len(paths) > 1:
            sys.stdout.write(f"# {os.path.relpath(root, indir)}\n")
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            return _run(load_config(args.config), args.out, args.threads, args.formats)
        if args.command == "eigen-bias":
            cfg = load_config(args.config)
            if cfg.scenario != "eigen":
                raise ConfigError("eigen-bias needs scenario 'eigen'")
            return _run(cfg, args.out, args.threads, ["csv", "json", "svg"])
        if args.command == "diagnose":
            report = run_diagnostics(args.lemma, args.n_sweep, args.reps, args.seed, args.threads)
            emit_report(report, args.out, ["csv", "json"])
            sys.stdout.write(_csv_text(["n", "statistic", "mean", "sd", "min", "mc_se", "reps"],
                                       diagnostic_summary(report.diagnostics)))
            return EXIT_OK
        return _report(args.indir, args.summary)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
