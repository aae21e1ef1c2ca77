"""VIMRL abstract syntax, parser, printer, type checker and canonicalizer.

Grammar (one instruction per line)::

    instruction := assignment | operation
    assignment  := identifier '=' operation
    operation   := identifier '(' argument (',' argument)* ')'
    argument    := identifier | number | operation
    number      := '-'? [0-9]+
    identifier  := [a-zA-Z][a-zA-Z0-9_]*

Underscores are accepted inside identifiers because operation names such as
``find_enclosed_patches`` use them. Lines starting with ``#`` are comments
(an extension to the grammar).
"""

from __future__ import annotations

import hashlib
import heapq
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

PREDEFINED = ("input", "background")
INITIAL_TYPES = {"input": "image", "background": "color"}
BACKGROUND_WRITERS = frozenset({"set_background"})
TEMP_PREFIX = "tmp"

IDENT_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")


class VimrlError(Exception):
    pass


class VimrlSyntaxError(VimrlError):
    def __init__(self, message: str, line: int, column: int, production: str):
        super().__init__(f"line {line}, column {column}: {message} (in <{production}>)")
        self.line = line
        self.column = column
        self.production = production


class VimrlTypeError(VimrlError):
    def __init__(self, index: int, kind: str, message: str):
        super().__init__(f"instruction {index}: {message}")
        self.index = index
        self.kind = kind


# AST ----------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Ref:
    name: str
    kind = "identifier_ref"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Num:
    value: int
    kind = "number_literal"

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Call:
    op: str
    args: tuple["Argument", ...]
    kind = "nested_operation"

    def __str__(self) -> str:
        return f"{self.op}({', '.join(str(a) for a in self.args)})"


Argument = Union[Ref, Num, Call]


@dataclass(frozen=True, slots=True)
class Instruction:
    target: str | None
    call: Call

    def __str__(self) -> str:
        if self.target is None:
            return str(self.call)
        return f"{self.target} = {self.call}"

    def refs(self) -> list[str]:
        """Names read by this instruction, in argument order (nested calls included)."""
        out: list[str] = []

        def walk(call: Call) -> None:
            for a in call.args:
                if isinstance(a, Ref):
                    out.append(a.name)
                elif isinstance(a, Call):
                    walk(a)

        walk(self.call)
        return out

    def is_flat(self) -> bool:
        return not any(isinstance(a, Call) for a in self.call.args)


@dataclass(frozen=True, slots=True)
class Program:
    instructions: tuple[Instruction, ...] = ()

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def __str__(self) -> str:
        return print_program(self)

    def append(self, ins: Instruction) -> "Program":
        return Program(self.instructions + (ins,))

    def defined(self) -> list[str]:
        seen: list[str] = []
        for ins in self.instructions:
            if ins.target is not None and ins.target not in seen:
                seen.append(ins.target)
        return seen


@dataclass(frozen=True, slots=True)
class OperationSignature:
    name: str
    param_types: tuple[str, ...]
    return_type: str
    level: str = "low"
    writes_background: bool = False

    def __post_init__(self) -> None:
        if not IDENT_RE.match(self.name):
            raise ValueError(f"bad operation name {self.name!r}")
        if self.level not in ("low", "high"):
            raise ValueError(f"level must be low or high, got {self.level!r}")
        if self.level == "high" and len(self.param_types) != 1:
            raise ValueError(f"high-level operation {self.name} must take exactly one argument")
        if not self.param_types:
            raise ValueError(f"operation {self.name} needs at least one parameter")


# Parser -------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>-?[0-9]+)|(?P<ident>[a-zA-Z][a-zA-Z0-9_]*)|(?P<sym>[=(),]))")


class _LineParser:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.lineno = lineno
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        n = len(text)
        while pos < n:
            if text[pos:].strip() == "":
                break
            m = _TOKEN_RE.match(text, pos)
            if not m:
                col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
                raise VimrlSyntaxError(f"unexpected character {text[col - 1]!r}", lineno, col, "instruction")
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start + 1))
            pos = m.end()
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def column(self) -> int:
        tok = self.peek()
        return tok[2] if tok else len(self.text.rstrip()) + 1

    def expect(self, value: str, production: str) -> None:
        tok = self.peek()
        if tok is None or tok[1] != value:
            found = "end of line" if tok is None else repr(tok[1])
            raise VimrlSyntaxError(f"expected {value!r}, found {found}", self.lineno, self.column(), production)
        self.i += 1

    def instruction(self) -> Instruction:
        tok = self.peek()
        if tok is None or tok[0] != "ident":
            raise VimrlSyntaxError("expected identifier", self.lineno, self.column(), "instruction")
        nxt = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
        target = None
        if nxt is not None and nxt[1] == "=":
            target = tok[1]
            self.i += 2
        call = self.operation("assignment" if target else "instruction")
        if self.peek() is not None:
            raise VimrlSyntaxError(f"unexpected {self.peek()[1]!r} after instruction", self.lineno, self.column(), "instruction")
        return Instruction(target, call)

    def operation(self, production: str = "operation") -> Call:
        tok = self.peek()
        if tok is None or tok[0] != "ident":
            raise VimrlSyntaxError("expected operation name", self.lineno, self.column(), production)
        self.i += 1
        self.expect("(", "operation")
        args = [self.argument()]
        while self.peek() is not None and self.peek()[1] == ",":
            self.i += 1
            args.append(self.argument())
        self.expect(")", "operation")
        return Call(tok[1], tuple(args))

    def argument(self) -> Argument:
        tok = self.peek()
        if tok is None:
            raise VimrlSyntaxError("expected argument", self.lineno, self.column(), "argument")
        kind, text, _ = tok
        if kind == "num":
            self.i += 1
            return Num(int(text))
        if kind == "ident":
            nxt = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
            if nxt is not None and nxt[1] == "(":
                return self.operation()
            self.i += 1
            return Ref(text)
        raise VimrlSyntaxError(f"unexpected {text!r}", self.lineno, self.column(), "argument")


def parse(source: str) -> Program:
    """Parse VIMRL source text into a :class:`Program`."""
    out = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        out.append(_LineParser(line, lineno).instruction())
    return Program(tuple(out))


def print_program(p: Program) -> str:
    return "\n".join(str(ins) for ins in p.instructions)


def program_size(p: Program) -> int:
    """Number of instructions once nested calls are flattened."""
    return len(flatten(p))


# Desugaring -----------------------------------------------------------------


def flatten(p: Program) -> Program:
    """Hoist nested calls into fresh ``tmpN`` assignments."""
    if all(ins.is_flat() for ins in p.instructions):
        return p
    return _flatten_with_origin(p)[0]


def _flatten_with_origin(p: Program) -> tuple[Program, list[int]]:
    used = {ins.target for ins in p.instructions if ins.target} | {
        name for ins in p.instructions for name in ins.refs()
    }
    counter = 0

    def fresh() -> str:
        nonlocal counter
        while True:
            counter += 1
            name = f"{TEMP_PREFIX}{counter}"
            if name not in used:
                used.add(name)
                return name

    out: list[Instruction] = []
    origin: list[int] = []

    def hoist(call: Call, idx: int) -> Call:
        args = []
        for a in call.args:
            if isinstance(a, Call):
                inner = hoist(a, idx)
                name = fresh()
                out.append(Instruction(name, inner))
                origin.append(idx)
                args.append(Ref(name))
            else:
                args.append(a)
        return Call(call.op, tuple(args))

    for idx, ins in enumerate(p.instructions):
        call = hoist(ins.call, idx)
        out.append(Instruction(ins.target, call))
        origin.append(idx)
    return Program(tuple(out)), origin


# Type checking --------------------------------------------------------------


@dataclass(frozen=True)
class TypeReport:
    envs: tuple[Mapping[str, str], ...]
    discarded: tuple[int, ...]
    program: Program

    @property
    def final_env(self) -> Mapping[str, str]:
        return self.envs[-1] if self.envs else INITIAL_TYPES

    def result_type(self) -> str | None:
        env = self.final_env
        if "output" in env and any(i.target == "output" for i in self.program):
            return env["output"]
        if not self.program.instructions:
            return None
        return self._types[-1]

    _types: tuple[str, ...] = ()


def literal_fits(value: int, param_type: str) -> bool:
    if param_type == "number":
        return True
    if param_type == "color":
        return 0 <= value <= 9
    return False


def _signatures(registry) -> Mapping[str, OperationSignature]:
    return getattr(registry, "signatures", registry)


def type_check(p: Program, registry, initial_env: Mapping[str, str] | None = None) -> TypeReport:
    """Infer variable types after every instruction of the flattened program.

    Number literals also fit color parameters when they lie in 0..9. Errors
    carry the index of the offending source instruction.
    """
    sigs = _signatures(registry)
    flat, origin = _flatten_with_origin(p)
    env = dict(INITIAL_TYPES if initial_env is None else initial_env)
    envs = []
    types = []
    discarded = []
    for k, ins in enumerate(flat.instructions):
        idx = origin[k]
        sig = sigs.get(ins.call.op)
        if sig is None:
            raise VimrlTypeError(idx, "unknown_operation", f"unknown operation {ins.call.op!r}")
        if len(ins.call.args) != len(sig.param_types):
            raise VimrlTypeError(
                idx, "arity", f"{sig.name} takes {len(sig.param_types)} arguments, got {len(ins.call.args)}"
            )
        for pos, (arg, want) in enumerate(zip(ins.call.args, sig.param_types)):
            if isinstance(arg, Num):
                if not literal_fits(arg.value, want):
                    raise VimrlTypeError(
                        idx, "type_mismatch", f"argument {pos} of {sig.name}: expected {want}, got number {arg.value}"
                    )
            else:
                have = env.get(arg.name)
                if have is None:
                    raise VimrlTypeError(idx, "undefined_variable", f"undefined variable {arg.name!r}")
                if have != want:
                    raise VimrlTypeError(
                        idx, "type_mismatch", f"argument {pos} of {sig.name}: expected {want}, got {have}"
                    )
        if ins.target is None:
            discarded.append(k)
        else:
            prior = env.get(ins.target)
            if prior is not None and prior != sig.return_type:
                raise VimrlTypeError(
                    idx, "type_mismatch", f"{ins.target!r} is {prior}, cannot assign {sig.return_type}"
                )
            env[ins.target] = sig.return_type
        types.append(sig.return_type)
        envs.append(dict(env))
    return TypeReport(tuple(envs), tuple(discarded), flat, tuple(types))


def check_well_formed(p: Program) -> None:
    """Every referenced name must be predefined or assigned earlier."""
    defined = set(PREDEFINED)
    for idx, ins in enumerate(p.instructions):
        for name in ins.refs():
            if name not in defined:
                raise VimrlTypeError(idx, "undefined_variable", f"undefined variable {name!r}")
        if ins.target is not None:
            defined.add(ins.target)


# Canonicalization -------------------------------------------------------------


def _reads_writes(ins: Instruction) -> tuple[set[str], set[str]]:
    reads = set(ins.refs())
    reads.add("background")
    writes = set()
    if ins.target is not None:
        writes.add(ins.target)
    if ins.call.op in BACKGROUND_WRITERS:
        writes.add("background")
    return reads, writes


def dependency_graph(p: Program) -> list[set[int]]:
    """Predecessor sets: ``preds[j]`` holds instructions that must precede ``j``.

    Edges cover read-after-write, write-after-read and write-after-write on
    named variables. Every instruction implicitly reads ``background``. When no
    instruction assigns ``output`` the last instruction carries the program's
    result and stays last.
    """
    ins = p.instructions
    rw = [_reads_writes(i) for i in ins]
    preds: list[set[int]] = [set() for _ in ins]
    for j in range(len(ins)):
        rj, wj = rw[j]
        for i in range(j):
            ri, wi = rw[i]
            if wi & rj or ri & wj or wi & wj:
                preds[j].add(i)
    if ins and not any(i.target == "output" for i in ins):
        last = len(ins) - 1
        preds[last].update(range(last))
    return preds


def _digest(text: str) -> str:
    return hashlib.blake2b(text.encode(), digest_size=8).hexdigest()


def _structure_keys(p: Program) -> list[str]:
    """Name-independent digest of each instruction's role in the program.

    The digest covers the computation an instruction performs (its operation,
    literals and the digests of the values it reads) and how its result is
    used later (which argument positions of which consumers read it). Two
    instructions share a digest only when swapping them cannot change the
    renamed program text.
    """
    ins = p.instructions
    up: list[str] = []
    reaching: dict[str, int] = {}
    consumers: list[list[tuple[int, int]]] = [[] for _ in ins]
    for k, i in enumerate(ins):
        parts = [i.call.op]
        for pos, a in enumerate(i.call.args):
            if isinstance(a, Num):
                parts.append(f"#{a.value}")
            elif a.name in reaching:
                j = reaching[a.name]
                parts.append(up[j])
                consumers[j].append((k, pos))
            else:
                parts.append(f"${a.name}")
        if i.target == "output":
            parts.append("->output")
        up.append(_digest("|".join(parts)))
        if i.target is not None:
            reaching[i.target] = k
    down = [""] * len(ins)
    for j in range(len(ins) - 1, -1, -1):
        uses = sorted(f"{pos}:{down[k]}" for k, pos in consumers[j])
        down[j] = _digest(up[j] + "<" + ",".join(uses))
    return down


def canonicalize(p: Program) -> Program:
    """Reorder independent instructions into one deterministic order.

    Kahn's algorithm over :func:`dependency_graph`. Among ready instructions,
    the one depending on the most recently emitted instruction goes first (so
    values are consumed soon after they are made); remaining ties break on a
    name-independent structural digest, then on the instruction text. The key
    does not depend on the input order, so every valid reordering of a program
    maps to the same result.
    """
    p = flatten(p)
    n = len(p.instructions)
    if n <= 1:
        return p
    preds = dependency_graph(p)
    succs: list[list[int]] = [[] for _ in range(n)]
    for j, ps in enumerate(preds):
        for i in ps:
            succs[i].append(j)
    keys = _structure_keys(p)
    texts = [str(i) for i in p.instructions]
    remaining = [len(ps) for ps in preds]
    position: dict[int, int] = {}
    heap: list[tuple[int, str, str, int]] = []

    def push(j: int) -> None:
        latest = max((position[i] for i in preds[j]), default=-1)
        heapq.heappush(heap, (-latest, keys[j], texts[j], j))

    for j in range(n):
        if remaining[j] == 0:
            push(j)
    order = []
    while heap:
        *_, j = heapq.heappop(heap)
        position[j] = len(order)
        order.append(j)
        for k in succs[j]:
            remaining[k] -= 1
            if remaining[k] == 0:
                push(k)
    if len(order) != n:
        raise VimrlError("cyclic instruction dependencies")
    return Program(tuple(p.instructions[j] for j in order))


def normalize_names(p: Program, keep: Iterable[str] = ("output",)) -> Program:
    """Rename assigned variables to ``v1, v2, ...`` in order of first definition."""
    keep = set(keep) | set(PREDEFINED)
    mapping: dict[str, str] = {}
    for ins in p.instructions:
        t = ins.target
        if t is not None and t not in keep and t not in mapping:
            mapping[t] = f"v{len(mapping) + 1}"

    def sub(a: Argument) -> Argument:
        if isinstance(a, Ref):
            return Ref(mapping.get(a.name, a.name))
        if isinstance(a, Call):
            return Call(a.op, tuple(sub(x) for x in a.args))
        return a

    return Program(
        tuple(
            Instruction(mapping.get(i.target, i.target) if i.target else None, Call(i.call.op, tuple(sub(a) for a in i.call.args)))
            for i in p.instructions
        )
    )


def canonical_text(p: Program) -> str:
    """Text of the renamed canonical form; equal for reordered or renamed variants."""
    return print_program(normalize_names(canonicalize(p)))
