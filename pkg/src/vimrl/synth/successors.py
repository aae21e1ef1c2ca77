"""Successor generation and pruning rules for program search."""

from __future__ import annotations

import itertools
from typing import Iterator, Mapping, Sequence

from ..grid import Task
from ..lang import (
    BACKGROUND_WRITERS,
    INITIAL_TYPES,
    Argument,
    Call,
    Instruction,
    Num,
    Program,
    Ref,
    OperationSignature,
    canonical_text,
)
from ..ops.registry import Registry

DEFAULT_NUMBERS = tuple(range(-3, 11))


def number_pool(task: Task | None = None) -> tuple[int, ...]:
    """Integers -3..10 plus every grid dimension in the task."""
    pool = set(DEFAULT_NUMBERS)
    if task is not None:
        for g in _grids(task):
            pool.update(g.shape)
    return tuple(sorted(pool))


def color_pool(task: Task | None = None) -> tuple[int, ...]:
    """Colors that occur anywhere in the task's visible grids (all ten without a task)."""
    if task is None:
        return tuple(range(10))
    cols = set()
    for g in _grids(task):
        cols |= g.colors()
    return tuple(sorted(cols))


def _grids(task: Task):
    for i, o in task.train:
        yield i
        yield o
    yield from task.test_inputs


def fresh_name(p: Program) -> str:
    return f"v{len(p.instructions) + 1}"


def binding_options(
    sig: OperationSignature,
    env: Mapping[str, str],
    numbers: Sequence[int] = DEFAULT_NUMBERS,
    colors: Sequence[int] = tuple(range(10)),
) -> list[list[Argument]]:
    """Per-parameter argument choices: typed variables, plus literals for numbers and colors."""
    out = []
    for want in sig.param_types:
        opts: list[Argument] = [Ref(name) for name, t in env.items() if t == want]
        if want == "number":
            opts.extend(Num(n) for n in numbers)
        elif want == "color":
            opts.extend(Num(c) for c in colors)
        out.append(opts)
    return out


def iter_successors(
    p: Program,
    registry: Registry,
    env_types: Mapping[str, str] | None = None,
    max_depth: int | None = None,
    numbers: Sequence[int] = DEFAULT_NUMBERS,
    colors: Sequence[int] = tuple(range(10)),
) -> Iterator[Program]:
    if max_depth is not None and len(p) >= max_depth:
        return
    env = dict(INITIAL_TYPES) if env_types is None else env_types
    target = fresh_name(p)
    for entry in registry:
        options = binding_options(entry.signature, env, numbers, colors)
        for args in itertools.product(*options):
            yield p.append(Instruction(target, Call(entry.name, args)))


def generate_successors(
    p: Program,
    registry: Registry,
    env_types: Mapping[str, str] | None = None,
    max_depth: int | None = None,
    numbers: Sequence[int] = DEFAULT_NUMBERS,
    colors: Sequence[int] = tuple(range(10)),
) -> list[Program]:
    """Every one-instruction extension of ``p`` assigning a fresh variable."""
    return list(iter_successors(p, registry, env_types, max_depth, numbers, colors))


def violates_repeated_input(p: Program) -> bool:
    return any("input" in ins.refs() for ins in p.instructions[1:])


def violates_reference_gap(p: Program, gap: int) -> bool:
    """Some variable went unreferenced for ``gap`` instructions after its definition.

    Variables defined within the last ``gap`` instructions are exempt since
    later extensions may still use them. Background setters are exempt: their
    effect is the implicit background change.
    """
    ins = p.instructions
    n = len(ins)
    for i, d in enumerate(ins):
        if d.target is None or d.call.op in BACKGROUND_WRITERS:
            continue
        if n - 1 - i < gap:
            continue
        window = ins[i + 1 : i + 1 + gap]
        if not any(d.target in w.refs() for w in window):
            return True
    return False


def prune(
    p: Program,
    config,
    seen_canonical: set[str] | None = None,
) -> tuple[bool, str | None]:
    """Decide whether to keep ``p``. Returns ``(keep, reason)``.

    Rules, in order: depth limit, repeated use of ``input``, reference gap,
    and duplicate canonical form. A kept program's canonical text is added to
    ``seen_canonical``.
    """
    if len(p) > config.max_depth:
        return False, "depth"
    if config.prune_repeated_input and violates_repeated_input(p):
        return False, "repeated_input"
    if config.prune_reference_gap and violates_reference_gap(p, config.ref_gap):
        return False, "reference_gap"
    if config.prune_equivalence and seen_canonical is not None:
        key = canonical_text(p)
        if key in seen_canonical:
            return False, "equivalent"
        seen_canonical.add(key)
    return True, None
