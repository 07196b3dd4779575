"""Benchmark harness: solve instance files, verify, and write report rows."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .hcp_io import (
    Kind,
    ParseError,
    SolutionRecord,
    log_exponent,
    read_instance,
    verify_sequence,
    write_report,
    write_solution,
    write_trace,
)
from .rpolicy import PolicyConfig, RunReport, solve

log = logging.getLogger(__name__)

INSTANCE_SUFFIXES = (".hcp", ".tsp", ".txt")

# a scaled-down stand-in for an overnight limit
DEFAULT_TIME_LIMIT = 600.0


@dataclass
class BenchConfig:
    time_limit: float = DEFAULT_TIME_LIMIT
    seeds: list[int] = field(default_factory=lambda: [0])
    workers: int = 1
    out_dir: Path | None = None
    chaos: bool = False
    # tracing is cheap (edge deltas) and feeds the mu_x column
    trace: bool = True
    save_trace: bool = False
    hcp: bool = True
    max_rounds: int | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.time_limit is None or self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.out_dir is not None:
            self.out_dir = Path(self.out_dir)

    def policy(self, seed: int, time_limit: float) -> PolicyConfig:
        return PolicyConfig(
            seed=seed,
            hcp=self.hcp,
            time_limit=time_limit,
            max_rounds=self.max_rounds,
            chaos=self.chaos,
            trace=self.trace or self.chaos,
        )


def compute_exponents(row: dict) -> dict:
    """Log-scaled counter columns: ``c`` such that ``counter == V ** c``.

    ``log_M_V``/``log_R_V`` use the articulation-point counters and
    ``log_V_M_eps``/``log_V_R_eps`` the error counters.  Zero or missing
    counters give empty cells.
    """
    n = int(row["V"])
    return {
        "log_M_V": log_exponent(row.get("M_vH"), n),
        "log_R_V": log_exponent(row.get("R_vH"), n),
        "log_V_M_eps": log_exponent(row.get("M_eps"), n),
        "log_V_R_eps": log_exponent(row.get("R_eps"), n),
    }


def mu_x(series) -> float | None:
    """Mean percent similarity between the trace states and the solution."""
    if series is None or len(series) == 0:
        return None
    return 100.0 * (1.0 - sum(series) / len(series))


def report_row(report: RunReport, solution_file: str | None = None) -> dict:
    row = {
        "instance": report.instance,
        "V": report.n,
        "E": report.m,
        "M_vH": report.m_vh,
        "R_vH": report.r_vh,
        "mu_x": mu_x(report.series),
        "M_eps": report.m_err,
        "R_eps": report.r_err,
        "outcome": report.outcome,
        "rounds": report.rounds,
        "seed": report.seed,
        "time_mapping": report.time_mapping,
        "time_reconstruct": report.time_reconstruct,
        "solution_file": solution_file,
    }
    if report.chaos is not None:
        row["lyapunov"] = report.chaos.lyapunov
        row["zero_one"] = report.chaos.k01
        row["chaos_status"] = report.chaos.status
    row.update(compute_exponents(row))
    return row


def _error_row(path: Path, outcome: str) -> dict:
    return {"instance": path.stem, "V": "", "E": "", "outcome": outcome}


def run_single(path, config: BenchConfig) -> tuple[dict, RunReport | None]:
    """Solve one instance file over the configured seeds.

    Seeds are tried in order and share the time limit; the first verified
    solution wins.  Parse failures give an ``error`` row instead of raising.
    """
    path = Path(path)
    try:
        graph = read_instance(path)
    except (ParseError, OSError) as exc:
        log.error("%s: %s", path, exc)
        return _error_row(path, "error"), None
    budget = config.time_limit / len(config.seeds)
    report = None
    for seed in config.seeds:
        report = solve(graph, config.policy(seed, budget))
        if report.solved:
            break
    solution_file = None
    if report.solved:
        # the solver verifies too; this check is the harness's own
        if not verify_sequence(graph, report.sequence, Kind(report.outcome)):
            raise AssertionError(f"{path}: solver returned an invalid {report.outcome}")
        if config.out_dir is not None:
            config.out_dir.mkdir(parents=True, exist_ok=True)
            target = config.out_dir / f"{graph.name}.sol"
            write_solution(
                target,
                SolutionRecord(Kind(report.outcome), report.sequence, graph.name, report.seed,
                               report.time_mapping + report.time_reconstruct),
            )
            solution_file = target.name
    if config.save_trace and config.out_dir is not None and report.series:
        config.out_dir.mkdir(parents=True, exist_ok=True)
        write_trace(config.out_dir / f"{graph.name}.trace.csv", report.series)
    return report_row(report, solution_file), report


def _run_row(args):
    path, config = args
    try:
        return run_single(path, config)[0]
    except Exception:  # one broken instance must not end the suite
        log.exception("%s: unexpected failure", path)
        return _error_row(Path(path), "error")


def list_instances(directory) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise NotADirectoryError(f"{directory} is not a directory")
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in INSTANCE_SUFFIXES)


def run_suite(directory, config: BenchConfig, report_path=None) -> tuple[list[dict], str]:
    """Solve every instance file in ``directory``; returns rows and a summary line."""
    paths = list_instances(directory)
    jobs = [(p, config) for p in paths]
    if config.workers > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=min(config.workers, len(paths))) as pool:
            rows = list(pool.map(_run_row, jobs))
    else:
        rows = [_run_row(job) for job in jobs]
    if report_path is None and config.out_dir is not None:
        report_path = config.out_dir / "report.csv"
    if report_path is not None:
        Path(report_path).parent.mkdir(parents=True, exist_ok=True)
        write_report(report_path, rows)
    solved = sum(row["outcome"] in (Kind.HC.value, Kind.HP.value) for row in rows)
    summary = f"solved {solved}/{len(rows)}"
    return rows, summary


def env_default(name: str, default, cast=str):
    """Read ``SFCMR_<NAME>`` from the environment, falling back to ``default``."""
    raw = os.environ.get(f"SFCMR_{name}")
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError as exc:
        raise ValueError(f"bad value for SFCMR_{name}: {raw!r}") from exc


__all__ = [
    "BenchConfig",
    "compute_exponents",
    "list_instances",
    "mu_x",
    "report_row",
    "run_single",
    "run_suite",
]
