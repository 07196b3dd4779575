"""Command line: ``sfcmr solve|bench|analyze``.

Exit codes: 0 solved (or analysis done), 1 unsolved, 2 error.
Defaults can be overridden with ``SFCMR_SEED``, ``SFCMR_TIME_LIMIT``,
``SFCMR_ROUNDS`` and ``SFCMR_WORKERS``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import DEFAULT_TIME_LIMIT, BenchConfig, env_default, run_single, run_suite
from .chaos import DegenerateSeriesError, InsufficientDataError, lyapunov, zero_one_test
from .hcp_io import ParseError, format_solution, read_trace

EXIT_SOLVED, EXIT_UNSOLVED, EXIT_ERROR = 0, 1, 2


def _seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from None


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=_seeds, default=None,
                   help="seed or comma-separated seeds tried in order (default 0)")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per instance")
    p.add_argument("--rounds", type=int, default=None, help="controller rounds (default |V|)")
    target = p.add_mutually_exclusive_group()
    target.add_argument("--hcp", dest="hcp", action="store_true", default=True,
                        help="look for a cycle first, then accept a path (default)")
    target.add_argument("--hp", dest="hcp", action="store_false", help="look for a path only")
    p.add_argument("--trace", action="store_true", help="write the similarity trace")
    p.add_argument("--chaos", action="store_true", help="run the chaos diagnostics on the trace")
    p.add_argument("--out", type=Path, default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfcmr", description="Hamiltonian path/cycle heuristic solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance file")
    p.add_argument("instance", type=Path)
    _add_solver_flags(p)

    p = sub.add_parser("bench", help="solve every instance in a directory and write report.csv")
    p.add_argument("directory", type=Path)
    _add_solver_flags(p)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("analyze", help="chaos diagnostics of a trace CSV")
    p.add_argument("trace", type=Path)
    p.add_argument("--emb-dim", type=int, default=3)
    p.add_argument("--lag", type=int, default=None)
    p.add_argument("--n-c", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _bench_config(args) -> BenchConfig:
    seeds = args.seed if args.seed is not None else [env_default("SEED", 0, int)]
    time_limit = args.time_limit or env_default("TIME_LIMIT", DEFAULT_TIME_LIMIT, float)
    rounds = args.rounds or env_default("ROUNDS", None, int)
    workers = getattr(args, "workers", None) or env_default("WORKERS", 1, int)
    return BenchConfig(
        time_limit=time_limit,
        seeds=seeds,
        workers=workers,
        out_dir=args.out,
        chaos=args.chaos,
        save_trace=args.trace,
        hcp=args.hcp,
        max_rounds=rounds,
    )


def _cmd_solve(args) -> int:
    config = _bench_config(args)
    row, report = run_single(args.instance, config)
    if report is None:
        print(f"error: cannot read {args.instance}", file=sys.stderr)
        return EXIT_ERROR
    if report.solved:
        print(f"{report.outcome} {format_solution(report.sequence).strip()}")
    else:
        reason = "time limit" if report.timed_out else "stop condition"
        print(f"none ({reason}; longest path {report.longest}/{report.n})")
    print(f"rounds={report.rounds} R_vH={report.r_vh} R_eps={report.r_err} "
          f"time={report.time_mapping + report.time_reconstruct:.3f}s", file=sys.stderr)
    if report.chaos is not None:
        print(f"lyapunov={report.chaos.lyapunov} zero_one={report.chaos.k01} "
              f"status={report.chaos.status}", file=sys.stderr)
    return EXIT_SOLVED if report.solved else EXIT_UNSOLVED


def _cmd_bench(args) -> int:
    config = _bench_config(args)
    report_path = (args.out or Path(".")) / "report.csv"
    rows, summary = run_suite(args.directory, config, report_path)
    print(summary)
    if any(r["outcome"] == "error" for r in rows):
        return EXIT_ERROR
    return EXIT_SOLVED if all(r["outcome"] != "none" for r in rows) else EXIT_UNSOLVED


def _cmd_analyze(args) -> int:
    series = read_trace(args.trace)
    out = {"datapoints": len(series)}
    try:
        out["lyapunov"] = lyapunov(series, emb_dim=args.emb_dim, lag=args.lag)
        out["zero_one"] = zero_one_test(series, n_c=args.n_c, seed=args.seed)
    except (InsufficientDataError, DegenerateSeriesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(json.dumps(out))
    return EXIT_SOLVED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"solve": _cmd_solve, "bench": _cmd_bench, "analyze": _cmd_analyze}
    try:
        return handlers[args.command](args)
    except (ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
