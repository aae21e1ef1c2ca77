"""Bigram Markov model over operation names, trained on solved programs."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..lang import Call, Instruction, Program, flatten, type_check
from ..ops.registry import Registry
from .successors import binding_options, fresh_name

START = "<START>"


@dataclass(frozen=True)
class MarkovModel:
    """``probs[prev][next]`` is P(next op | previous op); ``prev`` may be START."""

    vocabulary: tuple[str, ...]
    probs: Mapping[str, Mapping[str, float]]
    registry_version: str = ""

    def distribution(self, prev: str) -> Mapping[str, float]:
        dist = self.probs.get(prev)
        if dist is None:
            return {op: 1 / len(self.vocabulary) for op in self.vocabulary}
        return dist

    def draw(self, prev: str, rng: random.Random) -> str:
        dist = self.distribution(prev)
        ops = list(dist)
        return rng.choices(ops, weights=[dist[o] for o in ops])[0]

    def to_text(self) -> str:
        lines = [f"# registry {self.registry_version}", "prev_op next_op probability"]
        for prev, dist in self.probs.items():
            for nxt, p in dist.items():
                lines.append(f"{prev} {nxt} {p!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MarkovModel":
        version = ""
        probs: dict[str, dict[str, float]] = {}
        vocab: dict[str, None] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("# registry"):
                version = line.split(maxsplit=2)[2] if len(line.split()) > 2 else ""
                continue
            if line.startswith("#") or line == "prev_op next_op probability":
                continue
            prev, nxt, p = line.split()
            probs.setdefault(prev, {})[nxt] = float(p)
            vocab[nxt] = None
        return cls(tuple(vocab), probs, version)


def _op_sequence(p: Program) -> list[str]:
    return [ins.call.op for ins in flatten(p).instructions]


def train_markov(corpus: Sequence[Program], vocabulary: Iterable[str] | Registry, registry_version: str = "") -> MarkovModel:
    """Count START->first and op->next bigrams, add-one smoothed over ``vocabulary``."""
    if not corpus:
        raise ValueError("cannot train a Markov model on an empty corpus")
    if isinstance(vocabulary, Registry):
        registry_version = registry_version or vocabulary.version
        vocabulary = vocabulary.names()
    vocab = tuple(vocabulary)
    counts: dict[str, Counter] = {}
    for p in corpus:
        prev = START
        for op in _op_sequence(p):
            if op not in vocab:
                raise ValueError(f"corpus operation {op!r} missing from the vocabulary")
            counts.setdefault(prev, Counter())[op] += 1
            prev = op
    probs = {}
    n = len(vocab)
    for prev in (START, *vocab):
        c = counts.get(prev, Counter())
        total = sum(c.values()) + n
        probs[prev] = {op: (c[op] + 1) / total for op in vocab}
    return MarkovModel(vocab, probs, registry_version)


def sample_successor(
    p: Program,
    model: MarkovModel,
    registry: Registry,
    rng: random.Random,
    number_pool: Sequence[int] = tuple(range(-3, 11)),
    color_pool: Sequence[int] = tuple(range(10)),
    max_retries: int = 10,
) -> Program:
    """Append one instruction whose operation is drawn from the model.

    The argument binding is uniform over type-valid choices (each parameter is
    drawn independently from its options). When the drawn operation has no
    valid binding the draw is repeated; after ``max_retries`` failures the
    operation is chosen uniformly among those that can be bound.
    """
    env = type_check(p, registry).final_env
    flat = flatten(p)
    prev = flat.instructions[-1].call.op if flat.instructions else START
    target = fresh_name(flat)

    def bind(op: str) -> Instruction | None:
        entry = registry.get(op)
        if entry is None:
            return None
        options = binding_options(entry.signature, env, number_pool, color_pool)
        if any(not opts for opts in options):
            return None
        args = tuple(rng.choice(opts) for opts in options)
        return Instruction(target, Call(op, args))

    for _ in range(max_retries):
        ins = bind(model.draw(prev, rng))
        if ins is not None:
            return flat.append(ins)
    valid = [
        e.name
        for e in registry
        if all(binding_options(e.signature, env, number_pool, color_pool))
    ]
    if not valid:
        raise ValueError("no operation can be bound in the current environment")
    ins = bind(rng.choice(valid))
    return flat.append(ins)

