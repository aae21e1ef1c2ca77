"""High-level operations.

Each operation comes as an ``induce`` / ``apply`` pair. ``induce`` studies the
(possibly modified) training pairs and returns a rule, raising
:class:`InductionFailure` when no rule fits every pair; ``apply`` runs the rule
on the explicit argument.
"""

from __future__ import annotations

from typing import Callable

from ..grid import TRANSPARENT, Grid, ModifiedTask, SpriteObject, extract_objects, paste_object
from . import low
from .registry import InductionFailure, OperationError


def _image_pairs(task: ModifiedTask) -> list[tuple[Grid, Grid]]:
    if task.input_tag != "image" or task.output_tag != "image":
        raise InductionFailure(f"expected image pairs, got {task.input_tag} -> {task.output_tag}")
    return [(i.payload, o.payload) for i, o in task.train]


def _reproduces(pairs, fn) -> bool:
    for i, o in pairs:
        try:
            if fn(i) != o:
                return False
        except OperationError:
            return False
    return True


# recolor -------------------------------------------------------------------------


def induce_recolor(task: ModifiedTask, bg: int = 0) -> tuple[tuple[int, int], ...]:
    """One color -> color mapping consistent with every pair, cell by cell."""
    mapping: dict[int, int] = {}
    for i, o in _image_pairs(task):
        if i.shape != o.shape:
            raise InductionFailure("recolor needs equal input and output shapes")
        for li, lo in zip(i.rows, o.rows):
            for a, b in zip(li, lo):
                if a == TRANSPARENT or b == TRANSPARENT:
                    if a != b:
                        raise InductionFailure("transparency differs between aligned pixels")
                    continue
                prior = mapping.setdefault(a, b)
                if prior != b:
                    raise InductionFailure(f"color {a} maps to both {prior} and {b}")
    return tuple(sorted(mapping.items()))


def apply_recolor(rule, g: Grid, bg: int = 0) -> Grid:
    table = dict(rule)
    return Grid.trusted(tuple(tuple(table.get(v, v) for v in line) for line in g.rows))


# attract -----------------------------------------------------------------------------


def _span(o: SpriteObject) -> tuple[int, int, int, int]:
    return o.row, o.row + o.pixels.height - 1, o.col, o.col + o.pixels.width - 1


def _gap(a: SpriteObject, b: SpriteObject) -> int:
    ar0, ar1, ac0, ac1 = _span(a)
    br0, br1, bc0, bc1 = _span(b)
    dr = max(br0 - ar1, ar0 - br1, 0)
    dc = max(bc0 - ac1, ac0 - bc1, 0)
    return dr + dc


def _pick_attractor(objs: list[SpriteObject], selector: tuple) -> SpriteObject:
    if selector[0] == "color":
        pool = [o for o in objs if selector[1] in o.colors()]
    else:
        pool = list(objs)
    if not pool:
        raise OperationError("no attractor candidate")
    return max(pool, key=lambda o: o.size)


def simulate_attraction(g: Grid, selector: tuple, bg: int = 0) -> Grid:
    """Slide every non-attractor object straight toward the attractor until it collides.

    Movers go nearest first, so later movers pile up against earlier ones. An
    object sharing neither rows nor columns with the attractor stays put.
    """
    objs = extract_objects(g, bg)
    if len(objs) < 2:
        raise OperationError("attraction needs at least two objects")
    attractor = _pick_attractor(objs, selector)
    movers = sorted((o for o in objs if o is not attractor), key=lambda o: (_gap(o, attractor), o.row, o.col))
    h, w = g.shape
    placed = {id(o): o for o in objs}
    occupied = {}
    for o in objs:
        for r, c, _ in o.cells():
            occupied[(r, c)] = id(o)
    ar0, ar1, ac0, ac1 = _span(attractor)
    for m in movers:
        r0, r1, c0, c1 = _span(m)
        if c0 <= ac1 and ac0 <= c1:
            step = (1, 0) if r1 < ar0 else (-1, 0) if r0 > ar1 else None
        elif r0 <= ar1 and ar0 <= r1:
            step = (0, 1) if c1 < ac0 else (0, -1) if c0 > ac1 else None
        else:
            step = None
        if step is None:
            continue
        cells = [(r, c) for r, c, _ in m.cells()]
        for cell in cells:
            del occupied[cell]
        dy = dx = 0
        while True:
            ny, nx = dy + step[0], dx + step[1]
            blocked = False
            for r, c in cells:
                y, x = r + ny, c + nx
                if not (0 <= y < h and 0 <= x < w) or (y, x) in occupied:
                    blocked = True
                    break
            if blocked:
                break
            dy, dx = ny, nx
        for r, c in cells:
            occupied[(r + dy, c + dx)] = id(m)
        placed[id(m)] = SpriteObject(m.pixels, m.row + dy, m.col + dx)
    canvas = Grid.filled(h, w, bg)
    for o in placed.values():
        canvas = paste_object(canvas, o)
    return canvas


def induce_attract(task: ModifiedTask, bg: int = 0) -> tuple:
    """Find which object attracts the others.

    In each pair the attractor is the largest object that did not move. The
    rule is either "the object of color c" (when the attractors share a
    color) or "the largest object"; it must reproduce every pair by simulation.
    """
    pairs = _image_pairs(task)
    shared_colors = None
    moved_any = False
    for i, o in pairs:
        if i.shape != o.shape:
            raise InductionFailure("attract needs equal input and output shapes")
        objs = extract_objects(i, bg)
        if len(objs) < 2:
            raise InductionFailure("need an attractor and at least one mover")
        fixed = [ob for ob in objs if all(o[r, c] == v for r, c, v in ob.cells())]
        if not fixed:
            raise InductionFailure("no object kept its position")
        if len(fixed) < len(objs):
            moved_any = True
        attractor = max(fixed, key=lambda ob: ob.size)
        colors = attractor.colors()
        shared_colors = colors if shared_colors is None else shared_colors & colors
    if not moved_any:
        raise InductionFailure("nothing moved in any training pair")
    selectors = [("color", c) for c in sorted(shared_colors or ())] + [("largest",)]
    for sel in selectors:
        if _reproduces(pairs, lambda g: simulate_attraction(g, sel, bg)):
            return sel
    raise InductionFailure("no attractor choice reproduces the training outputs")


def apply_attract(rule, g: Grid, bg: int = 0) -> Grid:
    return simulate_attraction(g, rule, bg)


# grow --------------------------------------------------------------------------------


def _scale_xy(g: Grid, fy: int, fx: int) -> Grid:
    return Grid.trusted(tuple(tuple(v for v in line for _ in range(fx)) for line in g.rows for _ in range(fy)))


_GROW_MODES: dict[str, Callable[[Grid, int, int], Grid]] = {
    "scale": _scale_xy,
    "tile": lambda g, fy, fx: low.tile(g, fx, fy),
}


def induce_grow(task: ModifiedTask, bg: int = 0) -> tuple[str, int, int]:
    """Outputs are the inputs enlarged by a constant integer factor, by scaling or tiling."""
    pairs = _image_pairs(task)
    factors = set()
    for i, o in pairs:
        (ih, iw), (oh, ow) = i.shape, o.shape
        if oh % ih or ow % iw:
            raise InductionFailure("output size is not a multiple of the input size")
        factors.add((oh // ih, ow // iw))
    if len(factors) != 1:
        raise InductionFailure("growth factor differs between pairs")
    fy, fx = factors.pop()
    if (fy, fx) == (1, 1):
        raise InductionFailure("outputs are not larger than inputs")
    for mode, fn in _GROW_MODES.items():
        if _reproduces(pairs, lambda g: fn(g, fy, fx)):
            return mode, fy, fx
    raise InductionFailure("neither scaling nor tiling reproduces the outputs")


def apply_grow(rule, g: Grid, bg: int = 0) -> Grid:
    mode, fy, fx = rule
    return _GROW_MODES[mode](g, fy, fx)


# complete_symmetry -------------------------------------------------------------------

_SYMMETRIES: dict[str, Callable[[int, int, int, int], tuple[int, int]]] = {
    "flip_h": lambda r, c, h, w: (r, w - 1 - c),
    "flip_v": lambda r, c, h, w: (h - 1 - r, c),
    "rotate180": lambda r, c, h, w: (h - 1 - r, w - 1 - c),
    "transpose": lambda r, c, h, w: (c, r),
    "anti_transpose": lambda r, c, h, w: (w - 1 - c, h - 1 - r),
    "rotate90": lambda r, c, h, w: (c, w - 1 - r),
}
_SQUARE_ONLY = {"transpose", "anti_transpose", "rotate90"}


def _symmetric(g: Grid, name: str) -> bool:
    h, w = g.shape
    if name in _SQUARE_ONLY and h != w:
        return False
    f = _SYMMETRIES[name]
    rows = g.rows
    return all(rows[r][c] == rows[f(r, c, h, w)[0]][f(r, c, h, w)[1]] for r in range(h) for c in range(w))


def restore_symmetry(g: Grid, noise: int, names: tuple[str, ...]) -> Grid:
    h, w = g.shape
    buf = [list(line) for line in g.rows]
    maps = [_SYMMETRIES[n] for n in names if not (n in _SQUARE_ONLY and h != w)]
    changed = True
    while changed:
        changed = False
        for r in range(h):
            for c in range(w):
                if buf[r][c] != noise:
                    continue
                for f in maps:
                    y, x = f(r, c, h, w)
                    if buf[y][x] != noise:
                        buf[r][c] = buf[y][x]
                        changed = True
                        break
    return Grid.trusted(tuple(tuple(line) for line in buf))


def induce_complete_symmetry(task: ModifiedTask, bg: int = 0) -> tuple[int, tuple[str, ...]]:
    """Learn the masking color and the symmetries every output obeys."""
    pairs = _image_pairs(task)
    noise = set()
    for i, o in pairs:
        if i.shape != o.shape:
            raise InductionFailure("complete_symmetry needs equal shapes")
        noise |= {a for li, lo in zip(i.rows, o.rows) for a, b in zip(li, lo) if a != b}
    if len(noise) != 1:
        raise InductionFailure("changed cells do not share a single masking color")
    m = noise.pop()
    names = tuple(n for n in _SYMMETRIES if all(_symmetric(o, n) for _, o in pairs))
    if not names:
        raise InductionFailure("outputs share no symmetry")
    if not _reproduces(pairs, lambda g: restore_symmetry(g, m, names)):
        raise InductionFailure("symmetry completion does not reproduce the outputs")
    return m, names


def apply_complete_symmetry(rule, g: Grid, bg: int = 0) -> Grid:
    m, names = rule
    return restore_symmetry(g, m, names)


# select_pattern ----------------------------------------------------------------------


def _unique_by(objs, key):
    keys = [key(o) for o in objs]
    hits = [o for o, k in zip(objs, keys) if keys.count(k) == 1]
    if len(hits) != 1:
        raise OperationError("no unique object")
    return hits[0]


def _colorset(o: SpriteObject):
    return frozenset(o.colors())


_SELECTORS: dict[str, Callable[[list[SpriteObject]], SpriteObject]] = {
    "largest": lambda objs: max(objs, key=lambda o: o.size),
    "smallest": lambda objs: min(objs, key=lambda o: o.size),
    "unique_colors": lambda objs: _unique_by(objs, _colorset),
    "unique_shape": lambda objs: _unique_by(objs, lambda o: o.mask()),
    "most_colors": lambda objs: max(objs, key=lambda o: len(o.colors())),
    "topmost": lambda objs: min(objs, key=lambda o: (o.row, o.col)),
    "bottommost": lambda objs: max(objs, key=lambda o: (o.row + o.pixels.height, -o.col)),
    "leftmost": lambda objs: min(objs, key=lambda o: (o.col, o.row)),
    "rightmost": lambda objs: max(objs, key=lambda o: (o.col + o.pixels.width, -o.row)),
}


def _select(g: Grid, how: tuple[str, str], bg: int) -> Grid:
    name, conn = how
    objs = extract_objects(g, bg, conn)
    if not objs:
        raise OperationError("no objects to select from")
    return low.crop_object(_SELECTORS[name](objs), bg)


def induce_select_pattern(task: ModifiedTask, bg: int = 0) -> tuple[str, str]:
    """Each output is one object cut out of its input; learn which one."""
    pairs = _image_pairs(task)
    for conn in ("four", "eight"):
        for name in _SELECTORS:
            if _reproduces(pairs, lambda g: _select(g, (name, conn), bg)):
                return name, conn
    raise InductionFailure("no selection criterion picks the output object")


def apply_select_pattern(rule, g: Grid, bg: int = 0) -> Grid:
    return _select(g, rule, bg)


# project_to_output_size --------------------------------------------------------------

_ANCHORS = ("top_left", "top_right", "bottom_left", "bottom_right", "center")


def _fit(g: Grid, oh: int, ow: int, anchor: str, bg: int) -> Grid:
    """Crop or pad ``g`` to ``oh``×``ow`` keeping the given anchor fixed."""
    h, w = g.shape
    canvas = [[bg] * ow for _ in range(oh)]
    if anchor == "center":
        dy, dx = (oh - h) // 2, (ow - w) // 2
    else:
        dy = 0 if anchor.startswith("top") else oh - h
        dx = 0 if anchor.endswith("left") else ow - w
    for r in range(h):
        y = r + dy
        if 0 <= y < oh:
            line = g.rows[r]
            for c in range(w):
                x = c + dx
                if 0 <= x < ow:
                    canvas[y][x] = line[c]
    return Grid.trusted(tuple(tuple(line) for line in canvas))


def _target_size(rule_size, g: Grid) -> tuple[int, int]:
    kind, a, b = rule_size
    if kind == "fixed":
        return a, b
    h, w = g.shape
    if h % a or w % b:
        raise OperationError("input size not divisible by the learned ratio")
    return h // a, w // b


def induce_project_to_output_size(task: ModifiedTask, bg: int = 0):
    """Learn the output size (constant, or a divisor of the input size) and the anchor."""
    pairs = _image_pairs(task)
    sizes = []
    outs = {o.shape for _, o in pairs}
    if len(outs) == 1:
        sizes.append(("fixed", *outs.pop()))
    ratios = set()
    for i, o in pairs:
        (ih, iw), (oh, ow) = i.shape, o.shape
        ratios.add((ih // oh, iw // ow) if ih % oh == 0 and iw % ow == 0 else None)
    if len(ratios) == 1 and None not in ratios:
        a, b = ratios.pop()
        if (a, b) != (1, 1):
            sizes.append(("ratio", a, b))
    for size in sizes:
        for anchor in _ANCHORS:
            fn = lambda g: _fit(g, *_target_size(size, g), anchor, bg)
            if _reproduces(pairs, fn):
                return size, anchor
    raise InductionFailure("no size rule and anchor reproduce the outputs")


def apply_project_to_output_size(rule, g: Grid, bg: int = 0) -> Grid:
    size, anchor = rule
    return _fit(g, *_target_size(size, g), anchor, bg)
