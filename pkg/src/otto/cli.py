"""Command line: ``otto sweep``, ``otto reversal`` and ``otto verify``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import ConfigError, load_config, run_reversal, run_sweep
from .verify import DEFAULT_SEEDS, FAULTS, run_verify

EXIT_OK, EXIT_VERIFY, EXIT_IO, EXIT_CONFIG = 0, 1, 2, 3


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _add_experiment(sub, name: str, help_: str) -> None:
    p = sub.add_parser(name, help=help_)
    p.add_argument("--config", type=Path, help="JSON config; every field optional")
    p.add_argument("--seed", type=_u64, required=True, help="master seed (u64)")
    p.add_argument("--out", type=Path, help="CSV output; summary goes next to it")
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int, help="process pool size (default 1)")
    p.add_argument("--jitter-halfwidth", type=float)
    p.add_argument("--jitter-cold", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otto", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_experiment(sub, "sweep", "efficiency against interaction strength theta")
    _add_experiment(sub, "reversal", "efficiency distribution with optimal couplings")
    v = sub.add_parser("verify", help="run the identity checks")
    v.add_argument("--json", type=Path, help="write the JSON report here")
    v.add_argument("--seed", type=_u64, action="append", help="repeatable; default 0")
    v.add_argument("--instances", type=int, default=200)
    v.add_argument("--inject-fault", choices=FAULTS)
    return parser


def _experiment(args) -> int:
    try:
        config = load_config(args.config, master_seed=args.seed, trials=args.trials,
                             workers=args.workers, jitter_halfwidth=args.jitter_halfwidth,
                             jitter_cold=args.jitter_cold,
                             output_path=str(args.out) if args.out else None)
    except ConfigError as exc:
        print(f"otto: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if config.output_path is None:
        print("otto: no output path (use --out or output_path)", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(config.output_path)
    if not out.parent.is_dir():
        print(f"otto: cannot write {out}: directory does not exist", file=sys.stderr)
        return EXIT_IO
    runner = run_sweep if args.command == "sweep" else run_reversal
    try:
        result = runner(config)
    except ConfigError as exc:
        print(f"otto: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        csv_path, summary_path = result.write(out)
    except OSError as exc:
        print(f"otto: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    s = result.summary
    if args.command == "sweep":
        last = s["per_theta"][-1]
        print(f"{s['n_points']} points; mean eta at theta={last['theta']}: {last['mean']}")
    else:
        print(f"{s['n_valid']}/{s['n_trials']} valid; fraction reversed: {s['fraction_reversed']}")
    print(f"wrote {csv_path} and {summary_path}")
    return EXIT_OK


def _verify(args) -> int:
    report = run_verify(seeds=args.seed or DEFAULT_SEEDS, instances=args.instances,
                        inject_fault=args.inject_fault)
    for c in report.checks:
        status = "ok  " if c.passed else "FAIL"
        print(f"{status} {c.name:<28} seed={c.seed} n={c.instances} "
              f"max_err={c.max_error:.2e} tol={c.tolerance:.0e}")
    if args.json:
        try:
            args.json.write_text(report.to_json() + "\n")
        except OSError as exc:
            print(f"otto: cannot write report: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK if report.passed else EXIT_VERIFY


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _verify(args)
    return _experiment(args)


if __name__ == "__main__":
    sys.exit(main())
