"""Hand-written programs for public ARC training tasks.

Each ``.vimrl`` file holds one program and starts with a ``# task: <id>``
comment naming the task it solves.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..lang import Program, parse


@dataclass(frozen=True)
class CorpusEntry:
    task_id: str
    program: Program
    source: str


def read_entry(text: str, fallback_id: str = "") -> CorpusEntry:
    task_id = fallback_id
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("# task:"):
            task_id = line.split(":", 1)[1].strip()
            break
    return CorpusEntry(task_id, parse(text), text)


def load_corpus(directory: str | Path | None = None) -> list[CorpusEntry]:
    if directory is None:
        files = [f for f in resources.files(__name__).iterdir() if f.name.endswith(".vimrl")]
    else:
        files = list(Path(directory).glob("*.vimrl"))
    files.sort(key=lambda f: f.name)
    return [read_entry(f.read_text(), f.name.rsplit(".", 1)[0]) for f in files]


@lru_cache(maxsize=4)
def default_markov_model(registry):
    from ..synth.markov import train_markov

    return train_markov([e.program for e in load_corpus()], registry)
