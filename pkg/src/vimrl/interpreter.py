"""Execution of VIMRL programs against an ARC task.

A program runs with two predefined variables, ``input`` (the grid) and
``background`` (color 0). Before a high-level operation runs, the instructions
that feed its argument are replayed on every training input and output grid,
producing a modified task from which the operation induces its rule.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from .grid import Grid, GridError, ModifiedTask, Task, Value
from .lang import (
    BACKGROUND_WRITERS,
    Instruction,
    Num,
    Program,
    canonicalize,
    flatten,
    print_program,
)
from .ops.registry import HighLevelContext, InductionFailure, OperationError, Registry

DEFAULT_BACKGROUND = 0


@dataclass(frozen=True)
class Limits:
    max_steps: int = 10_000
    max_seconds: float = 2.0


class ExecutionError(Exception):
    """An instruction failed. ``soft`` marks induction failures of high-level operations."""

    def __init__(self, message: str, pc: int | None = None, soft: bool = False, trace: "ExecutionTrace | None" = None):
        super().__init__(message if pc is None else f"pc {pc}: {message}")
        self.pc = pc
        self.soft = soft
        self.trace = trace


class RuntimeTypeError(ExecutionError):
    """An argument's value tag does not match the operation signature."""


class BudgetExceeded(ExecutionError):
    pass


class ReplayError(ExecutionError):
    """A replayed prefix failed on one side of a training pair."""

    def __init__(self, message: str, pair: int, side: str):
        super().__init__(f"replay failed on train pair {pair} ({side}): {message}", soft=True)
        self.pair = pair
        self.side = side


@dataclass
class Budget:
    limits: Limits
    steps: int = 0
    started: float = field(default_factory=time.monotonic)

    def tick(self, pc: int | None = None) -> None:
        self.steps += 1
        if self.steps > self.limits.max_steps:
            raise BudgetExceeded(f"step limit {self.limits.max_steps} exceeded", pc)
        if time.monotonic() - self.started > self.limits.max_seconds:
            raise BudgetExceeded(f"time limit {self.limits.max_seconds}s exceeded", pc)


@dataclass
class ExecState:
    env: dict[str, Value]
    pc: int = 0

    @property
    def background(self) -> int:
        return int(self.env["background"].payload)


@dataclass(frozen=True)
class TraceStep:
    pc: int
    instruction: str
    variable: str | None
    value: Value
    rule: object = None  # induced rule, for high-level operations

    def line(self) -> str:
        return f"{self.pc} | {self.instruction} | {self.variable or '_'}={self.value.summary()}"


@dataclass(frozen=True)
class ExecutionTrace:
    steps: tuple[TraceStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def export(self) -> str:
        return "\n".join(s.line() for s in self.steps)

    def value_of(self, name: str) -> Value | None:
        hit = None
        for s in self.steps:
            if s.variable == name:
                hit = s.value
        return hit


def initial_env(grid: Grid) -> dict[str, Value]:
    return {"input": Value("image", grid), "background": Value("color", DEFAULT_BACKGROUND)}


def result_value(program: Program, env: dict[str, Value], last: Value | None) -> Value | None:
    """``output`` if the program assigns it, otherwise the last instruction's value."""
    if any(i.target == "output" for i in program.instructions):
        return env.get("output")
    return last


def dependency_slice(prefix: tuple[Instruction, ...], var: str) -> tuple[Instruction, ...]:
    """Instructions of ``prefix`` that the final value of ``var`` depends on.

    Every instruction implicitly reads ``background``, so background
    assignments feeding the slice are kept.
    """
    needed = {var}
    keep = []
    for ins in reversed(prefix):
        writes = set()
        if ins.target is not None:
            writes.add(ins.target)
        if ins.call.op in BACKGROUND_WRITERS:
            writes.add("background")
        if writes & needed:
            keep.append(ins)
            needed -= writes
            needed.update(ins.refs())
            needed.add("background")
    return tuple(reversed(keep))


class Interpreter:
    """Runs programs for one task. Replays and induced rules are memoized.

    The caches are per instance and guarded by a lock, so one interpreter can
    serve several threads working on the same task.
    """

    def __init__(self, task: Task, registry: Registry, limits: Limits = Limits()):
        self.task = task
        self.registry = registry
        self.limits = limits
        self._replays: dict[tuple[str, str], ModifiedTask] = {}
        self._rules: dict[tuple, object] = {}
        self._lock = threading.Lock()

    # public API -----------------------------------------------------------------

    def execute(self, program: Program, grid: Grid, require_image: bool = False) -> tuple[Value, ExecutionTrace]:
        flat = flatten(program)
        budget = Budget(self.limits)
        state = ExecState(initial_env(grid))
        steps: list[TraceStep] = []
        last = None
        for pc, ins in enumerate(flat.instructions):
            state.pc = pc
            try:
                last = self.apply_instruction(flat, pc, state.env, budget)
            except ExecutionError as exc:
                exc.trace = ExecutionTrace(tuple(steps))
                raise
            steps.append(TraceStep(pc, str(ins), ins.target, last, self._step_rule(flat, pc, state.env, budget)))
        state.pc = len(flat)
        trace = ExecutionTrace(tuple(steps))
        result = result_value(flat, state.env, last)
        if result is None:
            raise ExecutionError("program produced no result", trace=trace)
        if require_image and result.tag != "image":
            raise ExecutionError(f"result is {result.tag}, expected image", trace=trace)
        return result, trace

    def run_values(self, instructions: tuple[Instruction, ...], grid: Grid, budget: Budget) -> dict[str, Value]:
        """Execute flat instructions from a fresh state and return the final environment."""
        env = initial_env(grid)
        prog = Program(instructions)
        for pc in range(len(instructions)):
            self.apply_instruction(prog, pc, env, budget)
        return env

    def apply_instruction(self, program: Program, pc: int, env: dict[str, Value], budget: Budget | None = None) -> Value:
        """Execute instruction ``pc`` of a flat program, updating ``env`` in place."""
        if budget is None:
            budget = Budget(self.limits)
        ins = program.instructions[pc]
        entry = self.registry.get(ins.call.op)
        if entry is None:
            raise ExecutionError(f"unknown operation {ins.call.op!r}", pc)
        sig = entry.signature
        if len(ins.call.args) != len(sig.param_types):
            raise ExecutionError(f"{sig.name} expects {len(sig.param_types)} arguments", pc)
        args = []
        for a, want in zip(ins.call.args, sig.param_types):
            if isinstance(a, Num):
                if want == "color":
                    if not 0 <= a.value <= 9:
                        raise RuntimeTypeError(f"literal {a.value} is not a color", pc)
                    args.append(Value("color", a.value))
                elif want == "number":
                    args.append(Value("number", a.value))
                else:
                    raise RuntimeTypeError(f"literal {a.value} passed where {want} expected", pc)
            else:
                v = env.get(a.name)
                if v is None:
                    raise ExecutionError(f"undefined variable {a.name!r}", pc)
                if v.tag != want:
                    raise RuntimeTypeError(f"{sig.name} expected {want}, got {v.tag} in {a.name!r}", pc)
                args.append(v)
        budget.tick(pc)
        bg = int(env["background"].payload)
        try:
            if entry.level == "high":
                var = ins.call.args[0].name
                rule = self._rule(entry, program.instructions[:pc], var, bg, budget)
                out = Value(sig.return_type, entry.apply(rule, args[0].payload, bg))
            else:
                out = Value(sig.return_type, entry.function(*(x.payload for x in args), bg=bg))
        except InductionFailure as exc:
            raise ExecutionError(f"{sig.name}: {exc}", pc, soft=True) from exc
        except ReplayError as exc:
            raise ExecutionError(f"{sig.name}: {exc}", pc, soft=True) from exc
        except (OperationError, GridError) as exc:
            raise ExecutionError(f"{sig.name}: {exc}", pc) from exc
        if ins.target is not None:
            env[ins.target] = out
        if sig.writes_background:
            env["background"] = Value("color", int(out.payload))
        return out

    def modified_task(self, prefix: tuple[Instruction, ...] | Program, var: str, budget: Budget | None = None) -> ModifiedTask:
        """Replay ``prefix`` on every train grid (and test input) and keep ``var``.

        Only the instructions ``var`` depends on are replayed; the values match
        a full replay whenever that succeeds.
        """
        if isinstance(prefix, Program):
            prefix = flatten(prefix).instructions
        slice_ = dependency_slice(tuple(prefix), var)
        key = (print_program(canonicalize(Program(slice_))), var)
        with self._lock:
            hit = self._replays.get(key)
        if hit is not None:
            return hit
        if budget is None:
            budget = Budget(self.limits)

        def value(grid: Grid, pair: int, side: str) -> Value:
            try:
                env = self.run_values(slice_, grid, budget)
            except BudgetExceeded:
                raise
            except ExecutionError as exc:
                raise ReplayError(str(exc), pair, side) from exc
            v = env.get(var)
            if v is None:
                raise ReplayError(f"variable {var!r} undefined after replay", pair, side)
            return v

        train = tuple((value(i, k, "input"), value(o, k, "output")) for k, (i, o) in enumerate(self.task.train))
        tests = []
        for k, g in enumerate(self.task.test_inputs):
            try:
                tests.append(value(g, k, "test"))
            except ReplayError:
                tests.append(None)
        try:
            mt = ModifiedTask(train, tuple(t for t in tests if t is not None))
        except GridError as exc:
            raise ReplayError(str(exc), 0, "tags") from exc
        with self._lock:
            self._replays[key] = mt
        return mt

    def _step_rule(self, flat: Program, pc: int, env: dict[str, Value], budget: Budget):
        ins = flat.instructions[pc]
        entry = self.registry[ins.call.op]
        if entry.level != "high":
            return None
        bg = int(env["background"].payload)
        return self._rule(entry, flat.instructions[:pc], ins.call.args[0].name, bg, budget)

    def _rule(self, entry, prefix, var: str, bg: int, budget: Budget):
        slice_ = dependency_slice(tuple(prefix), var)
        key = (entry.name, print_program(canonicalize(Program(slice_))), var, bg)
        with self._lock:
            if key in self._rules:
                rule = self._rules[key]
                if isinstance(rule, InductionFailure):
                    raise rule
                return rule
        mt = self.modified_task(slice_, var, budget)
        try:
            rule = entry.induce(mt, bg)
        except InductionFailure as exc:
            with self._lock:
                self._rules[key] = exc
            raise
        with self._lock:
            self._rules[key] = rule
        return rule


def execute(
    program: Program,
    task: Task,
    test_input: Grid,
    registry: Registry | None = None,
    limits: Limits = Limits(),
    require_image: bool = False,
) -> tuple[Value, ExecutionTrace]:
    """Run ``program`` on ``test_input`` with ``task``'s training pairs available."""
    if registry is None:
        from .ops import default_registry

        registry = default_registry()
    return Interpreter(task, registry, limits).execute(program, test_input, require_image)


def build_modified_task(prefix: Program, task: Task, replacement_var: str, registry: Registry | None = None) -> ModifiedTask:
    if registry is None:
        from .ops import default_registry

        registry = default_registry()
    return Interpreter(task, registry).modified_task(prefix, replacement_var)


def dispatch_high_level(op_name: str, ctx: HighLevelContext, registry: Registry | None = None, bg: int = 0) -> Value:
    """Induce ``op_name``'s rule from ``ctx.modified_task`` and apply it to the explicit argument."""
    if registry is None:
        from .ops import default_registry

        registry = default_registry()
    entry = registry[op_name]
    if entry.level != "high":
        raise ValueError(f"{op_name} is not a high-level operation")
    want = entry.signature.param_types[0]
    if ctx.explicit_arg.tag != want:
        raise ExecutionError(f"{op_name} expects {want}, got {ctx.explicit_arg.tag}", soft=True)
    rule = entry.induce(ctx.modified_task, bg)
    return Value(entry.signature.return_type, entry.apply(rule, ctx.explicit_arg.payload, bg))


@dataclass
class ReplayCheck:
    ok: bool
    diagnostics: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def replay_equivalence_check(p: Program, task: Task, registry: Registry | None = None) -> ReplayCheck:
    """Differential check: direct prefix execution vs. the modified-task replay.

    For every instruction and every variable it reads, the value obtained by
    running the prefix directly on each training grid must equal the value
    recorded in the modified task.
    """
    if registry is None:
        from .ops import default_registry

        registry = default_registry()
    flat = flatten(p)
    interp = Interpreter(task, registry)
    diags: list[str] = []
    for k, ins in enumerate(flat.instructions):
        prefix = flat.instructions[:k]
        for var in dict.fromkeys(ins.refs()):
            direct = []
            try:
                for i, o in task.train:
                    budget = Budget(interp.limits)
                    direct.append(
                        (
                            interp.run_values(prefix, i, budget).get(var),
                            interp.run_values(prefix, o, budget).get(var),
                        )
                    )
            except ExecutionError as exc:
                diags.append(f"prefix before instruction {k} failed: {exc}")
                return ReplayCheck(False, diags)
            try:
                mt = Interpreter(task, registry).modified_task(prefix, var)
            except ExecutionError as exc:
                diags.append(f"modified task for {var!r} at instruction {k} failed: {exc}")
                return ReplayCheck(False, diags)
            if tuple(direct) != mt.train:
                diags.append(f"replayed values of {var!r} differ at instruction {k}")
    return ReplayCheck(not diags, diags)
