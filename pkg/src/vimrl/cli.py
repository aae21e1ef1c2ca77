"""Command-line entry point: ``vimrl solve | score | report | ops``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness import (
    HarnessError,
    NoValidTasks,
    RunManifest,
    emit_reports,
    emit_submission,
    load_tasks,
    score_submission,
    solve_and_score,
)
from .ops import default_registry, manifest
from .synth.search import SearchConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_TASKS = 3

_SELECTION = {"unique": "unique_outputs", "smallest": "smallest_top3"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vimrl", description="Program synthesis solver for ARC-format grid tasks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-task progress")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="search programs for every task in a directory")
    solve.add_argument("--tasks", required=True, type=Path, help="directory of task JSON files")
    solve.add_argument("--out", required=True, type=Path, help="output directory")
    solve.add_argument("--timeout-secs", type=float, default=700.0, help="per-task search budget")
    solve.add_argument("--global-timeout", type=float, default=None, help="cap for the whole run")
    solve.add_argument("--max-candidates", type=int, default=200)
    solve.add_argument("--alpha", type=float, default=0.0, help="minimum training score to keep a candidate")
    solve.add_argument("--max-depth", type=int, default=4)
    solve.add_argument("--ref-gap", type=int, default=2)
    solve.add_argument("--max-nodes", type=int, default=None, help="stop each search after this many nodes")
    solve.add_argument("--strategy", choices=("bfs", "dfs", "stochastic"), default="bfs")
    solve.add_argument("--selection", choices=tuple(_SELECTION), default="unique")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--workers", type=int, default=1)

    score = sub.add_parser("score", help="score a submission file against tasks with known outputs")
    score.add_argument("--submission", required=True, type=Path)
    score.add_argument("--tasks", required=True, type=Path)

    report = sub.add_parser("report", help="regenerate reports from a run manifest")
    report.add_argument("--manifest", required=True, type=Path)
    report.add_argument("--out", type=Path, default=None, help="defaults to the manifest's directory")

    sub.add_parser("ops", help="print the operation registry")
    return parser


def _config(args) -> SearchConfig:
    if args.workers < 1:
        raise ValueError("--workers must be at least 1")
    if args.timeout_secs <= 0:
        raise ValueError("--timeout-secs must be positive")
    return SearchConfig(
        strategy=args.strategy,
        max_depth=args.max_depth,
        ref_gap=args.ref_gap,
        max_candidates=args.max_candidates,
        timeout_seconds=args.timeout_secs,
        alpha=args.alpha,
        selection=_SELECTION[args.selection],
        seed=args.seed,
        max_nodes=args.max_nodes,
    )


def _solve(args) -> int:
    try:
        config = _config(args)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    tasks, skipped = load_tasks(args.tasks)
    run, report = solve_and_score(
        tasks, default_registry(), config, workers=args.workers, global_timeout=args.global_timeout, skipped=skipped
    )
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "manifest.json").write_text(run.to_json())
    emit_submission(run, args.out / "submission.json")
    emit_reports(run, args.out)
    print(f"solved {report.tasks_solved} of {report.tasks_attempted} scored tasks; results in {args.out}")
    return EXIT_OK


def _score(args) -> int:
    try:
        data = json.loads(args.submission.read_text())
    except (OSError, ValueError) as exc:
        print(f"cannot read submission: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    tasks, _ = load_tasks(args.tasks)
    sys.stdout.write(score_submission(data, tasks).summary())
    return EXIT_OK


def _report(args) -> int:
    try:
        run = RunManifest.from_json(args.manifest.read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    paths = emit_reports(run, args.out or args.manifest.parent)
    for p in paths.values():
        print(p)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "solve":
            return _solve(args)
        if args.command == "score":
            return _score(args)
        if args.command == "report":
            return _report(args)
        sys.stdout.write(manifest(default_registry()))
        return EXIT_OK
    except NoValidTasks as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_TASKS
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
