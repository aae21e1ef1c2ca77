"""Reading and writing tasks in the public ARC JSON layout."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .grid import Grid, GridError, Task


def parse_grid(data: Any) -> Grid:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise GridError("grid must be a non-empty list of rows")
    for row in data:
        for v in row:
            if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v <= 9:
                raise GridError(f"cell value out of range: {v!r}")
    return Grid(tuple(tuple(r) for r in data))


def task_from_json(data: dict, task_id: str = "") -> Task:
    try:
        train = tuple((parse_grid(p["input"]), parse_grid(p["output"])) for p in data["train"])
        tests = data["test"]
        test_inputs = tuple(parse_grid(p["input"]) for p in tests)
    except (KeyError, TypeError) as exc:
        raise GridError(f"malformed task structure: {exc}") from exc
    outputs = None
    if tests and all("output" in p for p in tests):
        outputs = tuple(parse_grid(p["output"]) for p in tests)
    return Task(train, test_inputs, outputs, task_id)


def task_to_json(task: Task) -> dict:
    test = []
    for k, g in enumerate(task.test_inputs):
        item: dict[str, Any] = {"input": g.to_lists()}
        if task.test_outputs is not None:
            item["output"] = task.test_outputs[k].to_lists()
        test.append(item)
    return {
        "train": [{"input": i.to_lists(), "output": o.to_lists()} for i, o in task.train],
        "test": test,
    }


def load_task(path: str | Path) -> Task:
    path = Path(path)
    with path.open() as fh:
        data = json.load(fh)
    return task_from_json(data, path.stem)


def save_task(task: Task, path: str | Path) -> None:
    Path(path).write_text(json.dumps(task_to_json(task)))
