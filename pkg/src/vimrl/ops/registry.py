"""Operation entries, the registry, and map-lifting of image operations onto lists."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator

from ..grid import Grid, GridError, ModifiedTask, SpriteObject, Value
from ..lang import OperationSignature

LIFT_SUFFIX = "_objects"
PRIORS = {"O": "objectness", "G": "goal-directedness", "N": "numbers and counting", "T": "geometry and topology"}


class OperationError(Exception):
    """An operation could not produce a value for its arguments."""


class InductionFailure(OperationError):
    """A high-level operation found no rule consistent with the training pairs."""


class RegistryError(Exception):
    pass


@dataclass(frozen=True)
class HighLevelContext:
    modified_task: ModifiedTask
    explicit_arg: Value


@dataclass(frozen=True, eq=False)
class OperationEntry:
    """A registered operation.

    Low-level entries use ``function(*payloads, bg=...)``. High-level entries
    split the work into ``induce(modified_task, bg) -> rule`` and
    ``apply(rule, payload, bg) -> payload`` so a rule induced once can be
    applied to many grids.
    """

    signature: OperationSignature
    function: Callable[..., Any] | None = None
    induce: Callable[[ModifiedTask, int], Any] | None = None
    apply: Callable[[Any, Any, int], Any] | None = None
    provenance: str = "core_extension"
    priors: str = ""
    base: "OperationEntry | None" = field(default=None, repr=False)

    @property
    def name(self) -> str:
        return self.signature.name

    @property
    def level(self) -> str:
        return self.signature.level

    def __call__(self, args: list[Value] | tuple[Value, ...], ctx: HighLevelContext | None = None, bg: int = 0) -> Value:
        """Run the operation on explicit arguments; high-level calls need ``ctx``."""
        payloads = [a.payload for a in args]
        try:
            if self.level == "high":
                if ctx is None:
                    raise OperationError(f"{self.name} is high-level and needs a task context")
                rule = self.induce(ctx.modified_task, bg)
                out = self.apply(rule, payloads[0], bg)
            else:
                out = self.function(*payloads, bg=bg)
        except GridError as exc:
            raise OperationError(f"{self.name}: {exc}") from exc
        return Value(self.signature.return_type, out)


class Registry:
    def __init__(self) -> None:
        self._entries: dict[str, OperationEntry] = {}
        self.frozen = False

    def add(self, entry: OperationEntry) -> OperationEntry:
        if self.frozen:
            raise RegistryError("registry is frozen")
        if entry.name in self._entries:
            raise RegistryError(f"duplicate operation name {entry.name!r}")
        self._entries[entry.name] = entry
        return entry

    def freeze(self) -> "Registry":
        self.frozen = True
        return self

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __getitem__(self, name: str) -> OperationEntry:
        return self._entries[name]

    def get(self, name: str) -> OperationEntry | None:
        return self._entries.get(name)

    def __iter__(self) -> Iterator[OperationEntry]:
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def names(self) -> list[str]:
        return list(self._entries)

    @property
    def signatures(self) -> dict[str, OperationSignature]:
        return {n: e.signature for n, e in self._entries.items()}

    def subset(self, names) -> "Registry":
        """A frozen registry holding only ``names`` (order kept)."""
        reg = Registry()
        for n in names:
            reg.add(self._entries[n])
        return reg.freeze()

    @property
    def version(self) -> str:
        text = "\n".join(manifest_rows(self)[1:]) if len(self) else ""
        return hashlib.sha1(text.encode()).hexdigest()[:12]


def manifest_rows(reg: Registry) -> list[str]:
    rows = ["name\tlevel\tparams\treturns\tpriors\tprovenance"]
    for e in reg:
        s = e.signature
        rows.append(f"{s.name}\t{s.level}\t{','.join(s.param_types)}\t{s.return_type}\t{e.priors}\t{e.provenance}")
    return rows


def manifest(reg: Registry) -> str:
    """Tab-separated table of every registered operation."""
    return "\n".join(manifest_rows(reg)) + "\n"


# Lifting -----------------------------------------------------------------------


def _is_image_to_image(sig: OperationSignature) -> bool:
    return sig.param_types == ("image",) and sig.return_type == "image"


def align_objects(inputs: tuple[SpriteObject, ...], outputs: tuple[SpriteObject, ...]) -> list[tuple[SpriteObject, SpriteObject]]:
    """Pair each input object with an output object: same origin first, then same shape."""
    if len(inputs) != len(outputs):
        raise InductionFailure(f"object counts differ ({len(inputs)} vs {len(outputs)})")
    free = list(outputs)
    pairs = []
    pending = []
    for o in inputs:
        hit = next((x for x in free if x.origin == o.origin), None)
        if hit is None:
            pending.append(o)
            continue
        free.remove(hit)
        pairs.append((o, hit))
    for o in pending:
        hit = next((x for x in free if x.mask() == o.mask()), None)
        if hit is None:
            raise InductionFailure("cannot align objects by origin or shape")
        free.remove(hit)
        pairs.append((o, hit))
    return pairs


def _element_task(task: ModifiedTask) -> ModifiedTask:
    if task.input_tag != "list" or task.output_tag != "list":
        raise InductionFailure("lifted operation needs list-valued training pairs")
    pairs = []
    for i, o in task.train:
        for a, b in align_objects(i.payload, o.payload):
            pairs.append((Value("image", a.pixels), Value("image", b.pixels)))
    if not pairs:
        raise InductionFailure("no aligned objects to learn from")
    return ModifiedTask(tuple(pairs))


def _restamp(o: SpriteObject, pixels: Grid) -> SpriteObject:
    return SpriteObject(pixels, o.row, o.col)


def lift_to_list(base: OperationEntry, name: str | None = None, provenance: str = "lifted") -> OperationEntry:
    """Derive a list -> list entry applying ``base`` to each object's pixels.

    Origins are kept. A lifted high-level operation learns one rule from the
    aligned objects of the list-valued training pairs and applies it to every
    element.
    """
    if not _is_image_to_image(base.signature):
        raise RegistryError(f"{base.name} is not an image -> image operation")
    sig = OperationSignature(name or base.name + LIFT_SUFFIX, ("list",), "list", base.level)
    if base.level == "low":
        fn = base.function

        def lifted(objs, bg=0):
            return tuple(_restamp(o, fn(o.pixels, bg=bg)) for o in objs)

        return OperationEntry(sig, function=lifted, provenance=provenance, priors=base.priors, base=base)

    induce_base, apply_base = base.induce, base.apply

    def induce(task: ModifiedTask, bg: int):
        return induce_base(_element_task(task), bg)

    def apply(rule, objs, bg):
        return tuple(_restamp(o, apply_base(rule, o.pixels, bg)) for o in objs)

    return OperationEntry(sig, induce=induce, apply=apply, provenance=provenance, priors=base.priors, base=base)


def add_lifted_twins(reg: Registry) -> list[OperationEntry]:
    """Register an ``_objects`` twin for every low-level image -> image entry."""
    added = []
    for e in list(reg):
        if e.level == "low" and e.provenance != "lifted" and _is_image_to_image(e.signature):
            added.append(reg.add(lift_to_list(e)))
    return added
