"""Low-level operations: pure functions of their explicit arguments.

Every function takes payloads (grids, sprites, ints, tuples of sprites) plus
the current background color as ``bg`` and returns a payload.
"""

from __future__ import annotations

from collections import Counter, deque

from ..grid import (
    MAX_SIDE,
    TRANSPARENT,
    Grid,
    SpriteObject,
    components,
    extract_objects,
    paste_object,
    sprite_from_cells,
)
from .registry import OperationError


def _g(rows) -> Grid:
    return Grid.trusted(tuple(tuple(r) for r in rows))


def identity(g: Grid, bg: int = 0) -> Grid:
    return g


def trim(g: Grid, bg: int = 0) -> Grid:
    """Drop border rows and columns that hold only background."""
    rows = g.rows
    empty = (bg, TRANSPARENT)
    live_r = [r for r, line in enumerate(rows) if any(v not in empty for v in line)]
    if not live_r:
        return Grid.filled(1, 1, bg)
    live_c = [c for c in range(g.width) if any(line[c] not in empty for line in rows)]
    r0, r1, c0, c1 = live_r[0], live_r[-1], live_c[0], live_c[-1]
    return Grid.trusted(tuple(line[c0 : c1 + 1] for line in rows[r0 : r1 + 1]))


def rotate90(g: Grid, bg: int = 0) -> Grid:
    """Quarter turn clockwise."""
    return _g(zip(*g.rows[::-1]))


def rotate180(g: Grid, bg: int = 0) -> Grid:
    return Grid.trusted(tuple(line[::-1] for line in g.rows[::-1]))


def rotate270(g: Grid, bg: int = 0) -> Grid:
    """Quarter turn counter-clockwise."""
    return _g(list(zip(*g.rows))[::-1])


def flip_h(g: Grid, bg: int = 0) -> Grid:
    """Mirror left to right."""
    return Grid.trusted(tuple(line[::-1] for line in g.rows))


def flip_v(g: Grid, bg: int = 0) -> Grid:
    """Mirror top to bottom."""
    return Grid.trusted(g.rows[::-1])


def transpose(g: Grid, bg: int = 0) -> Grid:
    return _g(zip(*g.rows))


def scale_up(g: Grid, n: int, bg: int = 0) -> Grid:
    if n < 1:
        raise OperationError(f"scale factor must be positive, got {n}")
    if g.height * n > MAX_SIDE or g.width * n > MAX_SIDE:
        raise OperationError(f"scaling {g.shape} by {n} exceeds {MAX_SIDE} cells per side")
    return _g(tuple(v for v in line for _ in range(n)) for line in g.rows for _ in range(n))


def tile(g: Grid, nx: int, ny: int, bg: int = 0) -> Grid:
    if nx < 1 or ny < 1:
        raise OperationError(f"tile counts must be positive, got ({nx}, {ny})")
    if g.height * ny > MAX_SIDE or g.width * nx > MAX_SIDE:
        raise OperationError(f"tiling {g.shape} by ({nx}, {ny}) exceeds {MAX_SIDE} cells per side")
    return Grid.trusted(tuple(line * nx for line in g.rows) * ny)


def replace_color(g: Grid, old: int, new: int, bg: int = 0) -> Grid:
    if old == new:
        return g
    return Grid.trusted(tuple(tuple(new if v == old else v for v in line) for line in g.rows))


def overlay(base: Grid, top: Grid, bg: int = 0) -> Grid:
    """Non-background cells of ``top`` written over ``base``."""
    if base.shape != top.shape:
        raise OperationError(f"overlay needs equal shapes, got {base.shape} and {top.shape}")
    return Grid.trusted(
        tuple(
            tuple(b if t == bg or t == TRANSPARENT else t for b, t in zip(lb, lt))
            for lb, lt in zip(base.rows, top.rows)
        )
    )


def _outside(g: Grid, bg: int) -> list[list[bool]]:
    """Background cells reachable from the border through four-connected background."""
    h, w = g.shape
    rows = g.rows
    seen = [[False] * w for _ in range(h)]
    queue = deque()
    for r in range(h):
        for c in (0, w - 1):
            if rows[r][c] == bg and not seen[r][c]:
                seen[r][c] = True
                queue.append((r, c))
    for c in range(w):
        for r in (0, h - 1):
            if rows[r][c] == bg and not seen[r][c]:
                seen[r][c] = True
                queue.append((r, c))
    while queue:
        r, c = queue.popleft()
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            y, x = r + dr, c + dc
            if 0 <= y < h and 0 <= x < w and not seen[y][x] and rows[y][x] == bg:
                seen[y][x] = True
                queue.append((y, x))
    return seen


def _holes(g: Grid, bg: int) -> set[tuple[int, int]]:
    outside = _outside(g, bg)
    rows = g.rows
    return {
        (r, c)
        for r, line in enumerate(rows)
        for c, v in enumerate(line)
        if v == bg and not outside[r][c]
    }


def find_enclosed_patches(g: Grid, bg: int = 0) -> tuple[SpriteObject, ...]:
    """Patches sealed off from the grid border.

    Two kinds of patch are reported, ordered by origin:

    * background regions that four-connected background flooding from the
      border cannot reach;
    * single-color regions that avoid the border and whose every
      four-neighbour has one common non-background color (a filled hole).
    """
    h, w = g.shape
    rows = g.rows
    found = [sprite_from_cells(g, comp) for comp in components(g, include=_holes(g, bg))]
    for comp in components(g, background=bg, same_color=True):
        if any(r in (0, h - 1) or c in (0, w - 1) for r, c in comp):
            continue
        cells = set(comp)
        border = set()
        for r, c in comp:
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                y, x = r + dr, c + dc
                if (y, x) not in cells:
                    border.add(rows[y][x])
        if len(border) == 1 and bg not in border:
            found.append(sprite_from_cells(g, comp))
    found.sort(key=lambda o: (o.row, o.col))
    return tuple(found)


def fill_holes(g: Grid, color: int, bg: int = 0) -> Grid:
    """Paint background regions unreachable from the border with ``color``."""
    holes = _holes(g, bg)
    if not holes:
        return g
    return Grid.trusted(
        tuple(
            tuple(color if (r, c) in holes else v for c, v in enumerate(line))
            for r, line in enumerate(g.rows)
        )
    )


def draw(g: Grid, objs: tuple[SpriteObject, ...], bg: int = 0) -> Grid:
    """Paste each object in order; later objects overdraw earlier ones."""
    for o in objs:
        g = paste_object(g, o)
    return g


def objects(g: Grid, bg: int = 0) -> tuple[SpriteObject, ...]:
    return tuple(extract_objects(g, bg, "four"))


def crop_to_objects(objs: tuple[SpriteObject, ...], bg: int = 0) -> Grid:
    """Render the objects on a background canvas cut to their joint bounding box."""
    if not objs:
        raise OperationError("crop_to_objects needs at least one object")
    r0 = min(o.row for o in objs)
    c0 = min(o.col for o in objs)
    r1 = max(o.row + o.pixels.height for o in objs)
    c1 = max(o.col + o.pixels.width for o in objs)
    canvas = Grid.filled(r1 - r0, c1 - c0, bg)
    for o in objs:
        canvas = paste_object(canvas, SpriteObject(o.pixels, o.row - r0, o.col - c0))
    return canvas


def crop_object(o: SpriteObject, bg: int = 0) -> Grid:
    """The object's pixels as an image, transparent cells shown as background."""
    return Grid.trusted(tuple(tuple(bg if v == TRANSPARENT else v for v in line) for line in o.pixels.rows))


def largest_object(objs: tuple[SpriteObject, ...], bg: int = 0) -> SpriteObject:
    if not objs:
        raise OperationError("no objects")
    return max(objs, key=lambda o: o.size)


def smallest_object(objs: tuple[SpriteObject, ...], bg: int = 0) -> SpriteObject:
    if not objs:
        raise OperationError("no objects")
    return min(objs, key=lambda o: o.size)


def count_objects(objs: tuple[SpriteObject, ...], bg: int = 0) -> int:
    return len(objs)


def sort_objects_by_size(objs: tuple[SpriteObject, ...], bg: int = 0) -> tuple[SpriteObject, ...]:
    return tuple(sorted(objs, key=lambda o: o.size))


def filter_objects_by_color(objs: tuple[SpriteObject, ...], color: int, bg: int = 0) -> tuple[SpriteObject, ...]:
    """Objects having at least one pixel of ``color``."""
    return tuple(o for o in objs if color in o.colors())


def move_object(o: SpriteObject, dx: int, dy: int, bg: int = 0) -> SpriteObject:
    row, col = o.row + dy, o.col + dx
    if row < 0 or col < 0:
        raise OperationError(f"object moved off the grid to ({row}, {col})")
    return SpriteObject(o.pixels, row, col)


def _color_counts(g: Grid, bg: int) -> Counter:
    counts = Counter(v for line in g.rows for v in line if v != bg and v != TRANSPARENT)
    if not counts:
        raise OperationError("no non-background colors")
    return counts


def most_common_color(g: Grid, bg: int = 0) -> int:
    """Most frequent non-background color; ties go to the lower color."""
    counts = _color_counts(g, bg)
    return min(counts, key=lambda c: (-counts[c], c))


def least_common_color(g: Grid, bg: int = 0) -> int:
    counts = _color_counts(g, bg)
    return min(counts, key=lambda c: (counts[c], c))


def set_background(color: int, bg: int = 0) -> int:
    """Returns ``color``; the interpreter also rebinds ``background`` to it."""
    return color
