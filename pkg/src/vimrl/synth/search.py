"""Generate-execute-test program search and final candidate selection."""

from __future__ import annotations

import random
import time
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from ..grid import Grid, Task
from ..interpreter import Budget, ExecutionError, Interpreter, Limits, initial_env
from ..lang import (
    INITIAL_TYPES,
    Call,
    Instruction,
    Program,
    Ref,
    canonicalize,
    flatten,
    normalize_names,
    print_program,
    program_size,
)
from ..ops.registry import Registry
from .markov import MarkovModel, sample_successor
from .successors import color_pool, iter_successors, number_pool, prune

STRATEGIES = ("bfs", "dfs", "stochastic")
SELECTIONS = ("smallest_top3", "unique_outputs")


@dataclass(frozen=True)
class SearchConfig:
    strategy: str = "bfs"
    max_depth: int = 4
    ref_gap: int = 2
    max_candidates: int = 200
    timeout_seconds: float = 700.0
    alpha: float = 0.0
    selection: str = "unique_outputs"
    prune_repeated_input: bool = True
    prune_reference_gap: bool = True
    prune_equivalence: bool = True
    seed: int = 0
    max_nodes: int | None = None
    limits: Limits = Limits()
    markov: MarkovModel | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}")
        if self.max_depth < 1 or self.ref_gap < 1 or self.max_candidates < 1:
            raise ValueError("max_depth, ref_gap and max_candidates must be at least 1")
        if not 0 <= self.alpha < 1:
            raise ValueError("alpha must lie in [0, 1)")

    def without_pruning(self) -> "SearchConfig":
        return replace(self, prune_repeated_input=False, prune_reference_gap=False, prune_equivalence=False)


@dataclass(frozen=True)
class Candidate:
    program: Program
    score: float
    size: int
    test_outputs: tuple[Grid | None, ...]

    @property
    def text(self) -> str:
        return print_program(self.program)


@dataclass
class SearchStats:
    nodes_generated: int = 0
    pruned: Counter = field(default_factory=Counter)
    programs_executed: int = 0
    candidates_found: int = 0
    elapsed_seconds: float = 0.0
    timed_out: bool = False
    first_perfect_seconds: float | None = None

    def as_dict(self) -> dict:
        return {
            "nodes_generated": self.nodes_generated,
            "nodes_pruned_by_rule": dict(sorted(self.pruned.items())),
            "programs_executed": self.programs_executed,
            "candidates_found": self.candidates_found,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
            "timed_out": self.timed_out,
            "first_perfect_seconds": None if self.first_perfect_seconds is None else round(self.first_perfect_seconds, 3),
        }


def as_result_program(p: Program) -> Program:
    """Rename the last assignment to ``output`` and put the program in canonical form."""
    flat = flatten(p)
    if not flat.instructions:
        return flat
    last = flat.instructions[-1]
    if last.target is not None and last.target != "output":
        old = last.target
        ins = list(flat.instructions)
        ins[-1] = Instruction("output", last.call)
        flat = Program(tuple(ins))
        if any(old in i.refs() for i in flat.instructions):
            flat = Program(tuple(_rename(i, old, "output") for i in flat.instructions))
    return normalize_names(canonicalize(flat))


def _rename(ins: Instruction, old: str, new: str) -> Instruction:
    def sub(a):
        if isinstance(a, Ref) and a.name == old:
            return Ref(new)
        if isinstance(a, Call):
            return Call(a.op, tuple(sub(x) for x in a.args))
        return a

    return Instruction(new if ins.target == old else ins.target, Call(ins.call.op, tuple(sub(a) for a in ins.call.args)))


def evaluate_program(
    p: Program,
    task: Task,
    registry: Registry,
    config: SearchConfig = SearchConfig(),
    interpreter: Interpreter | None = None,
) -> Candidate | None:
    """Score ``p`` on the training pairs; return a Candidate when the score beats alpha.

    Failing executions count as unsolved pairs.
    """
    interp = interpreter or Interpreter(task, registry, config.limits)
    prog = as_result_program(p)
    solved = 0
    for i, o in task.train:
        try:
            v, _ = interp.execute(prog, i)
        except ExecutionError:
            continue
        if v.tag == "image" and v.payload == o:
            solved += 1
    score = solved / len(task.train)
    if not score > config.alpha:
        return None
    outs = []
    for g in task.test_inputs:
        try:
            v, _ = interp.execute(prog, g)
            outs.append(v.payload if v.tag == "image" else None)
        except ExecutionError:
            outs.append(None)
    return Candidate(prog, score, program_size(prog), tuple(outs))


# search ------------------------------------------------------------------------------


@dataclass
class _Node:
    program: Program
    types: dict[str, str]
    envs: list[dict | None]


class _Search:
    def __init__(self, task: Task, registry: Registry, config: SearchConfig):
        self.task = task
        self.registry = registry
        self.config = config
        self.interp = Interpreter(task, registry, config.limits)
        self.slots = [i for i, _ in task.train] + list(task.test_inputs)
        self.targets = [o for _, o in task.train]
        self.n_train = len(task.train)
        self.numbers = number_pool(task)
        self.colors = color_pool(task)
        self.seen: set[str] = set()
        self.stats = SearchStats()
        self.candidates: list[Candidate] = []
        self.started = time.monotonic()

    def out_of_budget(self) -> bool:
        if len(self.candidates) >= self.config.max_candidates:
            return True
        if self.config.max_nodes is not None and self.stats.nodes_generated >= self.config.max_nodes:
            return True
        if time.monotonic() - self.started > self.config.timeout_seconds:
            self.stats.timed_out = True
            return True
        return False

    def root(self) -> _Node:
        return _Node(Program(), dict(INITIAL_TYPES), [initial_env(g) for g in self.slots])

    def extend(self, node: _Node, child: Program) -> _Node:
        """Execute the new last instruction of ``child`` on every slot."""
        pc = len(child) - 1
        ins = child.instructions[pc]
        sig = self.registry[ins.call.op].signature
        types = dict(node.types)
        types[ins.target] = sig.return_type
        envs: list[dict | None] = []
        budget = Budget(self.config.limits)
        self.stats.programs_executed += 1
        for env in node.envs:
            if env is None:
                envs.append(None)
                continue
            env = dict(env)
            try:
                self.interp.apply_instruction(child, pc, env, budget)
                envs.append(env)
            except ExecutionError:
                envs.append(None)
        return _Node(child, types, envs)

    def score(self, node: _Node) -> None:
        target = node.program.instructions[-1].target
        solved = 0
        for k in range(self.n_train):
            env = node.envs[k]
            if env is None:
                continue
            v = env.get(target)
            if v is not None and v.tag == "image" and v.payload == self.targets[k]:
                solved += 1
        score = solved / self.n_train
        if not score > self.config.alpha:
            return
        outs = []
        for env in node.envs[self.n_train :]:
            v = None if env is None else env.get(target)
            outs.append(v.payload if v is not None and v.tag == "image" else None)
        prog = as_result_program(node.program)
        self.candidates.append(Candidate(prog, score, program_size(prog), tuple(outs)))
        self.stats.candidates_found += 1
        if score == 1.0 and self.stats.first_perfect_seconds is None:
            self.stats.first_perfect_seconds = time.monotonic() - self.started

    def alive(self, node: _Node) -> bool:
        return any(env is not None for env in node.envs[: self.n_train])

    def children(self, node: _Node):
        for child in iter_successors(
            node.program, self.registry, node.types, self.config.max_depth, self.numbers, self.colors
        ):
            if self.out_of_budget():
                return
            self.stats.nodes_generated += 1
            keep, reason = prune(child, self.config, self.seen)
            if not keep:
                self.stats.pruned[reason] += 1
                continue
            new = self.extend(node, child)
            self.score(new)
            yield new

    def run_tree(self) -> None:
        cfg = self.config
        if cfg.strategy == "bfs":
            frontier = deque([self.root()])
            while frontier and not self.out_of_budget():
                node = frontier.popleft()
                for child in self.children(node):
                    if len(child.program) < cfg.max_depth and self.alive(child):
                        frontier.append(child)
        else:
            stack = [self.children(self.root())]
            while stack and not self.out_of_budget():
                child = next(stack[-1], None)
                if child is None:
                    stack.pop()
                    continue
                if len(child.program) < cfg.max_depth and self.alive(child):
                    stack.append(self.children(child))

    def run_stochastic(self) -> None:
        from ..corpus import default_markov_model

        cfg = self.config
        model = cfg.markov or default_markov_model(self.registry)
        rng = random.Random(cfg.seed)
        while not self.out_of_budget():
            node = self.root()
            for _ in range(cfg.max_depth):
                if self.out_of_budget():
                    break
                child = sample_successor(node.program, model, self.registry, rng, self.numbers, self.colors)
                self.stats.nodes_generated += 1
                keep, reason = prune(child, cfg, self.seen)
                if not keep and reason != "equivalent":
                    self.stats.pruned[reason] += 1
                    break
                fresh = keep
                if not keep:
                    self.stats.pruned[reason] += 1
                node = self.extend(node, child)
                if fresh:
                    self.score(node)
                if not self.alive(node):
                    break


def run_search(task: Task, registry: Registry, config: SearchConfig = SearchConfig()) -> tuple[list[Candidate], SearchStats]:
    """Search programs for ``task`` until enough candidates are found or the budget runs out."""
    s = _Search(task, registry, config)
    if config.strategy == "stochastic":
        s.run_stochastic()
    else:
        s.run_tree()
    s.stats.elapsed_seconds = time.monotonic() - s.started
    return s.candidates, s.stats


def _rank_key(c: Candidate):
    return (-c.score, c.size, c.text)


def select_final(candidates: Sequence[Candidate], config: SearchConfig | str = SearchConfig()) -> list[Candidate]:
    """Pick up to three candidates.

    ``smallest_top3`` sorts by score (descending) then size. ``unique_outputs``
    groups candidates by their test outputs, keeps the best of each group and
    ranks the representatives by score. Canonical program text breaks ties.
    """
    mode = config if isinstance(config, str) else config.selection
    if mode == "smallest_top3":
        return sorted(candidates, key=_rank_key)[:3]
    if mode != "unique_outputs":
        raise ValueError(f"unknown selection mode {mode!r}")
    groups: dict[tuple, Candidate] = {}
    for c in candidates:
        best = groups.get(c.test_outputs)
        if best is None or _rank_key(c) < _rank_key(best):
            groups[c.test_outputs] = c
    return sorted(groups.values(), key=_rank_key)[:3]


def candidate_outputs(candidates: Iterable[Candidate]) -> set[tuple]:
    return {c.test_outputs for c in candidates}
