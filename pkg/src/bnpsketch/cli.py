"""Command-line surface: sketch, estimate, simulate, fit, merge, experiment.

Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 numerical-domain
error.  All configuration is explicit (flags or config file); no environment
variables are consulted.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import dp, oracle, pyp
from .experiment import ExperimentConfig, run_experiment, write_csv
from .genmodel import PriorParams, sample_pyp_sequence, sample_zipf_sequence
from .numkit import DomainError
from .report import EstimateReport
from .sketch import (
    HashSpec,
    Sketch,
    SketchFormatError,
    sketch_load,
    sketch_merge,
    sketch_save,
)
from .tokenizers import load_dictionary, make_tokenizer

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="bnpsketch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sketch", help="hash a token stream into a sketch file")
    p.add_argument("--input", default="-", help="input path, or - for stdin")
    p.add_argument("--width", type=int, required=True, help="number of buckets J")
    p.add_argument("--seed", type=int, default=0, help="seed for the hash draw")
    p.add_argument(
        "--tokenizer",
        default="lines",
        help="lines | words | kmer:K | ngram:N",
    )
    p.add_argument("--dictionary", default=None, help="optional word list filter")
    p.add_argument("--output", required=True, help="sketch file to write")

    p = sub.add_parser("estimate", help="estimate coverage masses from a sketch")
    p.add_argument("--sketch", required=True)
    p.add_argument("--prior", choices=["dp", "pyp"], required=True)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--fit", choices=["none", "eb-mle", "eb-wasserstein"], default="none")
    p.add_argument("--method", choices=["exact", "mc", "asymptotic"], default="exact")
    p.add_argument("--r-max", type=int, default=None)
    p.add_argument("--mc-samples", type=int, default=100_000)
    p.add_argument("--debias", choices=["none", "tin"], default="tin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta-bounds", type=float, nargs=2, default=list(dp.DEFAULT_THETA_BOUNDS))
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", default="-")

    p = sub.add_parser("simulate", help="draw synthetic data: tokens, sketch, truth")
    p.add_argument("--model", choices=["dp", "pyp", "zipf"], required=True)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--exponent", type=float, default=None)
    p.add_argument("--vocab", type=int, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--emit",
        default="tokens,sketch,truth",
        help="comma list from {tokens, sketch, truth}",
    )
    p.add_argument("--output", required=True, help="output path prefix")

    p = sub.add_parser("fit", help="fit prior parameters from a sketch")
    p.add_argument("--sketch", required=True)
    p.add_argument("--fit", choices=["eb-mle", "eb-wasserstein"], default="eb-mle")
    p.add_argument("--theta-bounds", type=float, nargs=2, default=list(dp.DEFAULT_THETA_BOUNDS))
    p.add_argument("--num-reps", type=int, default=5)
    p.add_argument("--n-sim", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--surface-out", default=None, help="CSV path for the distance surface")

    p = sub.add_parser("merge", help="merge sketches built with one hash spec")
    p.add_argument("inputs", nargs="+", help="sketch files")
    p.add_argument("--output", required=True)

    p = sub.add_parser("experiment", help="run a simulation grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default=None, help="CSV path (overrides config.output)")

    return parser


def _open_out(path):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _cmd_sketch(args) -> int:
    dictionary = load_dictionary(args.dictionary) if args.dictionary else None
    try:
        tokenizer = make_tokenizer(args.tokenizer, dictionary)
    except ValueError as exc:
        raise UsageError(str(exc))
    spec = HashSpec.random(args.width, args.seed)
    sk = Sketch(spec)
    if args.input == "-":
        stream = sys.stdin.buffer
        sk.insert_tokens(tokenizer(stream))
    else:
        with open(args.input, "rb") as stream:
            sk.insert_tokens(tokenizer(stream))
    sketch_save(sk, args.output)
    print(f"sketched n={sk.n} tokens into {args.output} (J={spec.width})", file=sys.stderr)
    return EXIT_OK


def _report_to_csv(report: EstimateReport, fh) -> None:
    rs = sorted(report.coverage)
    header = ["n", "width", "alpha", "theta", "provenance", "boundary_hit", "method", "distinct"]
    header += [f"p_{r}" for r in rs]
    header += [f"m_{r}" for r in sorted(report.freq_counts)]
    if report.mc_stderr is not None:
        header += [f"se_{r}" for r in sorted(report.mc_stderr)]
    row = [
        report.n,
        report.width,
        report.prior.alpha,
        report.prior.theta,
        report.prior.provenance,
        report.prior.boundary_hit,
        report.method,
        report.distinct if report.distinct is not None else "",
    ]
    row += [report.coverage[r] for r in rs]
    row += [report.freq_counts[r] for r in sorted(report.freq_counts)]
    if report.mc_stderr is not None:
        row += [report.mc_stderr[r] for r in sorted(report.mc_stderr)]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    writer.writerow(row)


def _cmd_estimate(args) -> int:
    sk = sketch_load(args.sketch)
    if args.prior == "dp":
        if args.method != "exact":
            raise UsageError("--method mc/asymptotic applies to the pyp prior only")
        if args.alpha not in (None, 0.0):
            raise UsageError("--alpha is a pyp-prior flag; the dp prior fixes alpha = 0")
        if args.fit == "eb-wasserstein":
            raise UsageError("eb-wasserstein fits the pyp prior; use eb-mle for dp")
        if args.fit == "none" and args.theta is None:
            raise UsageError("--prior dp --fit none requires --theta")
        report = dp.dp_report(
            sk,
            theta=args.theta,
            fit=args.fit,
            r_max=args.r_max,
            theta_bounds=tuple(args.theta_bounds),
        )
    else:
        if args.fit == "eb-mle":
            raise UsageError("eb-mle fits the dp prior; use eb-wasserstein for pyp")
        params = None
        if args.fit == "none":
            if args.theta is None or args.alpha is None:
                raise UsageError("--prior pyp --fit none requires --alpha and --theta")
            params = PriorParams(alpha=args.alpha, theta=args.theta)
            if args.method == "asymptotic" and not params.alpha > 0:
                raise UsageError("--method asymptotic requires alpha > 0")
        report = pyp.pyp_report(
            sk,
            params=params,
            fit=args.fit,
            method=args.method,
            r_max=args.r_max,
            mc_samples=args.mc_samples,
            debias=args.debias,
            seed=args.seed,
        )
    fh, close = _open_out(args.output)
    try:
        if args.format == "json":
            fh.write(report.to_json(indent=2, sort_keys=True))
            fh.write("\n")
        else:
            _report_to_csv(report, fh)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _cmd_simulate(args) -> int:
    emit = {part.strip() for part in args.emit.split(",") if part.strip()}
    unknown = emit - {"tokens", "sketch", "truth"}
    if unknown:
        raise UsageError(f"unknown emit targets: {sorted(unknown)}")
    if not emit:
        raise UsageError("--emit must name at least one of tokens, sketch, truth")
    ss = np.random.SeedSequence(args.seed)
    s_data, s_hash = ss.spawn(2)
    if args.model in ("dp", "pyp"):
        if args.theta is None:
            raise UsageError(f"--model {args.model} requires --theta")
        alpha = 0.0 if args.model == "dp" else args.alpha
        params = PriorParams(alpha=alpha, theta=args.theta)
        sample = sample_pyp_sequence(params, args.n, s_data)
        meta = {"model": args.model, "alpha": alpha, "theta": args.theta}
    else:
        if args.exponent is None or args.vocab is None:
            raise UsageError("--model zipf requires --exponent and --vocab")
        sample = sample_zipf_sequence(args.exponent, args.vocab, args.n, s_data)
        meta = {"model": "zipf", "exponent": args.exponent, "vocab": args.vocab}

    if "tokens" in emit:
        with open(args.output + ".tokens", "w", encoding="utf-8") as fh:
            for s in sample.symbols:
                fh.write(f"{int(s)}\n")
    if "sketch" in emit:
        spec = HashSpec.random(args.width, s_hash)
        sk = Sketch(spec)
        sk.insert_ids(sample.symbols)
        sketch_save(sk, args.output + ".sketch")
    if "truth" in emit:
        stats = oracle.partition_stats(sample)
        r_top = int(stats.m.nonzero()[0].max()) if stats.k else 0
        cov = oracle.true_coverage_profile(sample, r_top)
        truth = {
            "model": meta,
            "n": args.n,
            "seed": args.seed,
            "coverage": {str(r): float(cov[r]) for r in range(r_top + 1)},
            "distinct": stats.k,
            "freq_counts": {
                str(r): int(stats.m[r]) for r in range(1, r_top + 1) if stats.m[r]
            },
        }
        with open(args.output + ".truth.json", "w", encoding="utf-8") as fh:
            json.dump(truth, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def _cmd_fit(args) -> int:
    sk = sketch_load(args.sketch)
    if args.fit == "eb-mle":
        theta, boundary = dp.dp_fit_theta(sk, bounds=tuple(args.theta_bounds))
        print(json.dumps({"fit": "eb-mle", "theta": theta, "boundary_hit": boundary}))
        return EXIT_OK
    result = pyp.wasserstein_fit(sk, num_reps=args.num_reps, n_sim=args.n_sim, seed=args.seed)
    print(
        json.dumps(
            {
                "fit": "eb-wasserstein",
                "alpha": result.prior.alpha,
                "theta": result.prior.theta,
                "n_sim": result.n_sim,
                "num_reps": result.num_reps,
            }
        )
    )
    fh, close = _open_out(args.surface_out) if args.surface_out else (sys.stdout, False)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["alpha", "theta", "distance"])
        for a, t, d in result.surface_rows():
            writer.writerow([repr(a), repr(t), repr(d)])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _cmd_merge(args) -> int:
    sketches = [sketch_load(path) for path in args.inputs]
    merged = sketches[0]
    for other in sketches[1:]:
        merged = sketch_merge(merged, other)
    sketch_save(merged, args.output)
    print(f"merged {len(sketches)} sketches, n={merged.n}", file=sys.stderr)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    try:
        cfg = ExperimentConfig.from_json_file(args.config)
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: bad experiment config: {exc}", file=sys.stderr)
        return EXIT_DATA
    out = args.output or cfg.output
    rows = run_experiment(cfg)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_csv(cfg, rows, fh)
        print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)
    else:
        write_csv(cfg, rows, sys.stdout)
    return EXIT_OK


_COMMANDS = {
    "sketch": _cmd_sketch,
    "estimate": _cmd_estimate,
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "merge": _cmd_merge,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SketchFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # DomainError and its subclasses land here together with other
        # numerical range violations
        kind = "numerical-domain error" if isinstance(exc, DomainError) else "error"
        print(f"{kind}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if isinstance(exc, DomainError) else EXIT_DATA
    except SystemExit:
        raise


if __name__ == "__main__":
    sys.exit(main())
