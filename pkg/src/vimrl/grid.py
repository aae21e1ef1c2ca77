"""Grids, sprite objects, typed values and ARC tasks.

Everything here is immutable. Grids are stored as tuples of row tuples so they
hash cheaply and compare with ``==``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Literal, Sequence

MAX_SIDE = 30
TRANSPARENT = -1

Rows = tuple[tuple[int, ...], ...]
Connectivity = Literal["four", "eight"]

_FOUR = ((-1, 0), (1, 0), (0, -1), (0, 1))
_EIGHT = _FOUR + ((-1, -1), (-1, 1), (1, -1), (1, 1))


class GridError(ValueError):
    """Raised when grid, object or task data violate their invariants."""


class Color(int):
    """An ARC color, an integer in [0, 9]."""

    def __new__(cls, value: int) -> "Color":
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= 9:
            raise GridError(f"color out of range: {value!r}")
        return super().__new__(cls, value)


@dataclass(frozen=True, slots=True)
class Grid:
    rows: Rows

    def __post_init__(self) -> None:
        rows = self.rows
        if not isinstance(rows, tuple) or not all(isinstance(r, tuple) for r in rows):
            object.__setattr__(self, "rows", tuple(tuple(r) for r in rows))
            rows = self.rows
        _check_dims(rows)
        for row in rows:
            for v in row:
                if isinstance(v, bool) or not isinstance(v, int) or not (0 <= v <= 9 or v == TRANSPARENT):
                    raise GridError(f"cell value out of range: {v!r}")

    @classmethod
    def trusted(cls, rows: Rows) -> "Grid":
        """Build from rows whose cells are already known to be valid.

        Dimensions are still checked; operations such as tiling can overflow.
        """
        _check_dims(rows)
        g = object.__new__(cls)
        object.__setattr__(g, "rows", rows)
        return g

    @classmethod
    def filled(cls, height: int, width: int, value: int) -> "Grid":
        return cls.trusted(tuple((value,) * width for _ in range(height)))

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    @property
    def cells(self) -> tuple[int, ...]:
        return tuple(v for row in self.rows for v in row)

    def __getitem__(self, rc: tuple[int, int]) -> int:
        r, c = rc
        return self.rows[r][c]

    def to_lists(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def colors(self) -> set[int]:
        return {v for row in self.rows for v in row if v != TRANSPARENT}

    def __repr__(self) -> str:
        return f"Grid({self.to_lists()})"


def _check_dims(rows: Rows) -> None:
    h = len(rows)
    if not 1 <= h <= MAX_SIDE:
        raise GridError(f"grid height {h} outside 1..{MAX_SIDE}")
    w = len(rows[0])
    if not 1 <= w <= MAX_SIDE:
        raise GridError(f"grid width {w} outside 1..{MAX_SIDE}")
    for row in rows:
        if len(row) != w:
            raise GridError("ragged grid rows")


def grid(rows: Iterable[Iterable[int]]) -> Grid:
    """Convenience constructor from nested lists."""
    return Grid(tuple(tuple(r) for r in rows))


@dataclass(frozen=True, slots=True)
class SpriteObject:
    """An image fragment placed at ``(row, col)`` inside a parent grid."""

    pixels: Grid
    row: int = 0
    col: int = 0

    def __post_init__(self) -> None:
        if self.row < 0 or self.col < 0:
            raise GridError(f"object origin must be non-negative, got ({self.row}, {self.col})")

    @property
    def origin(self) -> tuple[int, int]:
        return self.row, self.col

    def cells(self) -> Iterator[tuple[int, int, int]]:
        """Yield ``(row, col, color)`` for every opaque pixel in parent coordinates."""
        for r, line in enumerate(self.pixels.rows):
            for c, v in enumerate(line):
                if v != TRANSPARENT:
                    yield self.row + r, self.col + c, v

    @property
    def size(self) -> int:
        return sum(1 for line in self.pixels.rows for v in line if v != TRANSPARENT)

    def mask(self) -> tuple[tuple[bool, ...], ...]:
        return tuple(tuple(v != TRANSPARENT for v in line) for line in self.pixels.rows)

    def colors(self) -> set[int]:
        return self.pixels.colors()


TAGS = ("image", "object", "color", "number", "list")
Tag = Literal["image", "object", "color", "number", "list"]


@dataclass(frozen=True, slots=True)
class Value:
    """A tagged VIMRL value. The payload kind always matches the tag."""

    tag: Tag
    payload: object

    def __post_init__(self) -> None:
        tag, p = self.tag, self.payload
        if tag == "image":
            ok = isinstance(p, Grid)
        elif tag == "object":
            ok = isinstance(p, SpriteObject)
        elif tag == "color":
            ok = isinstance(p, int) and not isinstance(p, bool) and 0 <= p <= 9
        elif tag == "number":
            ok = isinstance(p, int) and not isinstance(p, bool)
        elif tag == "list":
            ok = isinstance(p, tuple) and all(isinstance(o, SpriteObject) for o in p)
        else:
            raise GridError(f"unknown value tag {tag!r}")
        if not ok:
            raise GridError(f"payload {type(p).__name__} does not match tag {tag!r}")

    @classmethod
    def image(cls, g: Grid) -> "Value":
        return cls("image", g)

    @classmethod
    def color(cls, c: int) -> "Value":
        return cls("color", Color(c))

    @classmethod
    def number(cls, n: int) -> "Value":
        return cls("number", n)

    @classmethod
    def objects(cls, objs: Iterable[SpriteObject]) -> "Value":
        return cls("list", tuple(objs))

    @classmethod
    def object(cls, o: SpriteObject) -> "Value":
        return cls("object", o)

    def summary(self) -> str:
        """Short description used in execution traces."""
        if self.tag == "image":
            h, w = self.payload.shape
            return f"image {h}×{w}"
        if self.tag == "object":
            h, w = self.payload.pixels.shape
            return f"object {h}×{w}@{self.payload.row},{self.payload.col}"
        if self.tag == "list":
            return f"list[{len(self.payload)}]"
        return f"{self.tag} {int(self.payload)}"


Pair = tuple[Grid, Grid]


@dataclass(frozen=True)
class Task:
    train: tuple[Pair, ...]
    test_inputs: tuple[Grid, ...]
    test_outputs: tuple[Grid, ...] | None = None
    task_id: str = ""

    def __post_init__(self) -> None:
        if not self.train:
            raise GridError("task needs at least one training pair")
        if not self.test_inputs:
            raise GridError("task needs at least one test input")
        if self.test_outputs is not None and len(self.test_outputs) != len(self.test_inputs):
            raise GridError("test_outputs length differs from test_inputs")

    def all_grids(self) -> Iterator[Grid]:
        for i, o in self.train:
            yield i
            yield o
        yield from self.test_inputs
        if self.test_outputs:
            yield from self.test_outputs


@dataclass(frozen=True)
class ModifiedTask:
    """A task whose grids were replaced by values of a replayed program prefix."""

    train: tuple[tuple[Value, Value], ...]
    test_inputs: tuple[Value, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.train:
            in_tags = {i.tag for i, _ in self.train}
            out_tags = {o.tag for _, o in self.train}
            if len(in_tags) > 1 or len(out_tags) > 1:
                raise GridError(f"mixed value tags in modified task: {sorted(in_tags | out_tags)}")

    @property
    def input_tag(self) -> str | None:
        return self.train[0][0].tag if self.train else None

    @property
    def output_tag(self) -> str | None:
        return self.train[0][1].tag if self.train else None


def grid_equal(a: Grid, b: Grid) -> bool:
    """Exact equality: same dimensions and every cell equal."""
    return a.rows == b.rows


def neighbours(connectivity: Connectivity) -> tuple[tuple[int, int], ...]:
    if connectivity == "four":
        return _FOUR
    if connectivity == "eight":
        return _EIGHT
    raise ValueError(f"unknown connectivity {connectivity!r}")


def components(
    g: Grid,
    include: set[tuple[int, int]] | None = None,
    connectivity: Connectivity = "four",
    same_color: bool = False,
    background: int = 0,
) -> list[list[tuple[int, int]]]:
    """Connected components of non-background cells (or of ``include`` cells).

    With ``same_color`` only equal-colored neighbours join a component.
    Components come back ordered by their first cell in row-major order.
    """
    rows = g.rows
    h, w = g.shape
    steps = neighbours(connectivity)
    seen = [[False] * w for _ in range(h)]
    out = []
    for r in range(h):
        for c in range(w):
            if seen[r][c]:
                continue
            if include is not None:
                if (r, c) not in include:
                    continue
            elif rows[r][c] == background or rows[r][c] == TRANSPARENT:
                continue
            seen[r][c] = True
            color = rows[r][c]
            comp = [(r, c)]
            queue = deque(comp)
            while queue:
                y, x = queue.popleft()
                for dy, dx in steps:
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and not seen[ny][nx]:
                        v = rows[ny][nx]
                        if include is not None:
                            if (ny, nx) not in include:
                                continue
                        elif v == background or v == TRANSPARENT:
                            continue
                        if same_color and v != color:
                            continue
                        seen[ny][nx] = True
                        comp.append((ny, nx))
                        queue.append((ny, nx))
            out.append(comp)
    return out


def sprite_from_cells(g: Grid, cells: Sequence[tuple[int, int]]) -> SpriteObject:
    """Crop ``cells`` of ``g`` to their bounding box, other cells transparent."""
    r0 = min(r for r, _ in cells)
    r1 = max(r for r, _ in cells)
    c0 = min(c for _, c in cells)
    c1 = max(c for _, c in cells)
    buf = [[TRANSPARENT] * (c1 - c0 + 1) for _ in range(r1 - r0 + 1)]
    rows = g.rows
    for r, c in cells:
        buf[r - r0][c - c0] = rows[r][c]
    return SpriteObject(Grid.trusted(tuple(tuple(line) for line in buf)), r0, c0)


def extract_objects(g: Grid, background: int = 0, connectivity: Connectivity = "four") -> list[SpriteObject]:
    """Maximal connected groups of non-background cells, as cropped sprites.

    Cells of different colors join the same object when adjacent. Objects are
    ordered by origin ``(row, col)``.
    """
    objs = [sprite_from_cells(g, comp) for comp in components(g, connectivity=connectivity, background=background)]
    objs.sort(key=lambda o: (o.row, o.col))
    return objs


def paste_object(g: Grid, o: SpriteObject) -> Grid:
    """Copy of ``g`` with the opaque pixels of ``o`` written at its origin."""
    h, w = g.shape
    oh, ow = o.pixels.shape
    if o.row + oh > h or o.col + ow > w:
        raise GridError(
            f"object {oh}×{ow} at ({o.row}, {o.col}) does not fit in grid {h}×{w}"
        )
    buf = [list(r) for r in g.rows]
    for r, line in enumerate(o.pixels.rows):
        target = buf[o.row + r]
        for c, v in enumerate(line):
            if v != TRANSPARENT:
                target[o.col + c] = v
    return Grid.trusted(tuple(tuple(r) for r in buf))
