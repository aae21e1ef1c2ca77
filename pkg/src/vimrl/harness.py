"""Batch solving of ARC task directories: manifests, scoring, reports and submissions."""

from __future__ import annotations

import json
import logging
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .arcio import load_task, parse_grid
from .grid import MAX_SIDE, Grid, GridError, Task
from .lang import parse
from .ops.registry import Registry
from .synth.search import Candidate, SearchConfig, run_search, select_final

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 3


class HarnessError(Exception):
    pass


class NoValidTasks(HarnessError):
    pass


@dataclass
class SkipRecord:
    path: str
    reason: str


@dataclass
class TaskOutcome:
    task_id: str
    outcome: str  # solved | unsolved | timeout | unscored
    programs: list[str]
    predictions: list[list[list[list[int]]]]  # per test input, per attempt
    seconds: float
    stats: dict
    input_shapes: list[tuple[int, int]]
    matches: list[int | None] = field(default_factory=list)


@dataclass
class RunManifest:
    config: dict
    tasks: list[TaskOutcome]
    skipped: list[SkipRecord] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        tasks = [TaskOutcome(**{**t, "input_shapes": [tuple(s) for s in t["input_shapes"]]}) for t in data["tasks"]]
        return cls(data["config"], tasks, [SkipRecord(**s) for s in data.get("skipped", [])])


@dataclass
class ScoreReport:
    tasks_attempted: int
    tasks_solved: int
    detail: dict[str, list[int | None]]

    def summary(self) -> str:
        acc = self.tasks_solved / self.tasks_attempted if self.tasks_attempted else 0.0
        lines = ["tasks_attempted\ttasks_solved\taccuracy", f"{self.tasks_attempted}\t{self.tasks_solved}\t{acc:.4f}"]
        lines.append("task_id\tsolved\tmatching_attempt_per_test")
        for tid, hits in sorted(self.detail.items()):
            solved = all(h is not None for h in hits)
            marks = ",".join("-" if h is None else str(h + 1) for h in hits)
            lines.append(f"{tid}\t{int(solved)}\t{marks}")
        return "\n".join(lines) + "\n"


# loading ------------------------------------------------------------------------------


def load_tasks(path: str | Path) -> tuple[list[Task], list[SkipRecord]]:
    """Load every ``*.json`` task in ``path``; invalid files are skipped and reported."""
    path = Path(path)
    if not path.is_dir():
        raise HarnessError(f"not a readable directory: {path}")
    tasks, skipped = [], []
    for f in sorted(path.glob("*.json")):
        try:
            tasks.append(load_task(f))
        except (GridError, ValueError, OSError) as exc:
            log.warning("skipping %s: %s", f, exc)
            skipped.append(SkipRecord(str(f), str(exc)))
    if not tasks:
        raise NoValidTasks(f"no valid task files in {path}")
    tasks.sort(key=lambda t: t.task_id)
    return tasks, skipped


# scoring ------------------------------------------------------------------------------


def matching_attempts(attempts: Sequence[Sequence[Grid]], expected: Sequence[Grid]) -> list[int | None]:
    """Index of the first attempt equal to the expected grid, per test input."""
    hits = []
    for tries, want in zip(attempts, expected):
        hits.append(next((k for k, g in enumerate(tries[:MAX_ATTEMPTS]) if g == want), None))
    return hits


def task_solved(attempts: Sequence[Sequence[Grid]], expected: Sequence[Grid]) -> bool:
    """All-or-nothing: every test input needs an exactly matching attempt among the first three."""
    if len(attempts) != len(expected):
        return False
    return all(h is not None for h in matching_attempts(attempts, expected))


def predictions_for(task: Task, chosen: Sequence[Candidate]) -> list[list[Grid]]:
    """Up to three attempts per test input; the test input itself stands in for missing ones."""
    out = []
    for k, g in enumerate(task.test_inputs):
        tries = []
        for c in chosen[:MAX_ATTEMPTS]:
            pred = c.test_outputs[k] if k < len(c.test_outputs) else None
            tries.append(pred if pred is not None else g)
        if not tries:
            tries.append(g)
        out.append(tries)
    return out


def _solve_one(task: Task, registry: Registry, config: SearchConfig) -> TaskOutcome:
    started = time.monotonic()
    candidates, stats = run_search(task, registry, config)
    chosen = select_final(candidates, config)
    preds = predictions_for(task, chosen)
    if task.test_outputs is None:
        outcome, hits = "unscored", []
    else:
        hits = matching_attempts(preds, task.test_outputs)
        if all(h is not None for h in hits):
            outcome = "solved"
        else:
            outcome = "timeout" if stats.timed_out and not candidates else "unsolved"
    return TaskOutcome(
        task.task_id,
        outcome,
        [c.text for c in chosen],
        [[g.to_lists() for g in tries] for tries in preds],
        round(time.monotonic() - started, 3),
        stats.as_dict(),
        [g.shape for g in task.test_inputs],
        hits,
    )


def _timeout_outcome(task: Task) -> TaskOutcome:
    preds = [[g.to_lists()] for g in task.test_inputs]
    return TaskOutcome(task.task_id, "timeout", [], preds, 0.0, {}, [g.shape for g in task.test_inputs], [])


_worker_registry: Registry | None = None


def _init_worker() -> None:
    global _worker_registry
    from .ops import default_registry

    _worker_registry = default_registry()


def _solve_in_worker(args) -> TaskOutcome:
    task, config = args
    return _solve_one(task, _worker_registry, config)


def config_snapshot(config: SearchConfig) -> dict:
    snap = {k: v for k, v in asdict(config).items() if k not in ("markov", "limits")}
    snap["limits"] = asdict(config.limits)
    return snap


def solve_and_score(
    tasks: Sequence[Task],
    registry: Registry,
    config: SearchConfig = SearchConfig(),
    workers: int = 1,
    global_timeout: float | None = None,
    skipped: Sequence[SkipRecord] = (),
) -> tuple[RunManifest, ScoreReport]:
    """Search, select and score every task. Results keep the input task order.

    With ``workers > 1`` tasks are solved in worker processes that build the
    default registry themselves.
    """
    started = time.monotonic()
    outcomes: list[TaskOutcome] = []

    def expired() -> bool:
        return global_timeout is not None and time.monotonic() - started > global_timeout

    if workers <= 1:
        for task in tasks:
            outcomes.append(_timeout_outcome(task) if expired() else _solve_one(task, registry, config))
            log.info("%s: %s", task.task_id, outcomes[-1].outcome)
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as pool:
            futures = [pool.submit(_solve_in_worker, (t, config)) for t in tasks]
            for task, fut in zip(tasks, futures):
                if expired():
                    fut.cancel()
                if fut.cancelled():
                    outcomes.append(_timeout_outcome(task))
                else:
                    outcomes.append(fut.result())
    manifest = RunManifest(config_snapshot(config), outcomes, list(skipped))
    return manifest, score_manifest(manifest)


def score_manifest(manifest: RunManifest) -> ScoreReport:
    scored = [t for t in manifest.tasks if t.outcome != "unscored"]
    return ScoreReport(
        len(scored),
        sum(t.outcome == "solved" for t in scored),
        {t.task_id: list(t.matches) for t in scored},
    )


# reports ------------------------------------------------------------------------------


def operation_frequencies(manifest: RunManifest) -> Counter:
    """Operation counts over the programs that produced a correct attempt."""
    counts: Counter = Counter()
    for t in manifest.tasks:
        if t.outcome != "solved":
            continue
        used = {h for h in t.matches if h is not None}
        for k in sorted(used):
            if k < len(t.programs):
                counts.update(ins.call.op for ins in parse(t.programs[k]).instructions)
    return counts


def size_histogram(manifest: RunManifest) -> dict[str, Counter]:
    """Counts of test-input heights and widths over solved tasks."""
    hist = {"height": Counter(), "width": Counter()}
    for t in manifest.tasks:
        if t.outcome != "solved":
            continue
        for h, w in t.input_shapes:
            hist["height"][h] += 1
            hist["width"][w] += 1
    return hist


def emit_reports(manifest: RunManifest, out_dir: str | Path) -> dict[str, Path]:
    """Write the operation-frequency table, grid-size histogram and score summary."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        freq = operation_frequencies(manifest)
        rows = ["operation\tcount"] + [f"{op}\t{n}" for op, n in sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))]
        paths = {"op_frequency": out / "op_frequency.tsv", "grid_sizes": out / "grid_sizes.tsv", "score": out / "score.tsv"}
        paths["op_frequency"].write_text("\n".join(rows) + "\n")
        hist = size_histogram(manifest)
        lines = ["dimension\tsize\tcount"]
        for dim in ("height", "width"):
            lines += [f"{dim}\t{s}\t{hist[dim][s]}" for s in range(1, MAX_SIDE + 1)]
        paths["grid_sizes"].write_text("\n".join(lines) + "\n")
        paths["score"].write_text(score_manifest(manifest).summary())
    except OSError as exc:
        raise HarnessError(f"cannot write reports to {out}: {exc}") from exc
    return paths


def submission_dict(manifest: RunManifest) -> dict:
    sub = {}
    for t in sorted(manifest.tasks, key=lambda t: t.task_id):
        sub[t.task_id] = [
            {f"attempt_{k + 1}": grid for k, grid in enumerate(tries[:MAX_ATTEMPTS])} for tries in t.predictions
        ]
    return sub


def emit_submission(manifest: RunManifest, path: str | Path) -> Path:
    """Write predictions in the challenge layout: task id -> per test input -> attempts."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(submission_dict(manifest)))
    except OSError as exc:
        raise HarnessError(f"cannot write submission {path}: {exc}") from exc
    return path


def read_submission(data: dict) -> dict[str, list[list[Grid]]]:
    out = {}
    for tid, items in data.items():
        out[tid] = [
            [parse_grid(item[k]) for k in sorted(item, key=lambda s: int(s.rsplit("_", 1)[1]))] for item in items
        ]
    return out


def score_submission(submission: dict, tasks: Sequence[Task]) -> ScoreReport:
    """Score a submission (as loaded JSON) against tasks that carry test outputs."""
    preds = read_submission(submission)
    detail = {}
    solved = 0
    scored = [t for t in tasks if t.test_outputs is not None]
    for t in scored:
        attempts = preds.get(t.task_id, [[] for _ in t.test_inputs])
        hits = matching_attempts(attempts, t.test_outputs)
        if len(attempts) < len(t.test_inputs):
            hits += [None] * (len(t.test_inputs) - len(attempts))
        detail[t.task_id] = hits
        solved += all(h is not None for h in hits)
    return ScoreReport(len(scored), solved, detail)
