import pytest
from hypothesis import given, settings, strategies as st

from taskgen import attraction_pair, boxes_pair, eight_patch_task
from vimrl.grid import TRANSPARENT, Grid, ModifiedTask, SpriteObject, Value, extract_objects, grid
from vimrl.interpreter import build_modified_task
from vimrl.lang import parse
from vimrl.ops import (
    InductionFailure,
    OperationEntry,
    Registry,
    RegistryError,
    default_registry,
    lift_to_list,
    manifest,
    register_core_catalog,
)
from vimrl.ops import high, low

REG = default_registry()


@st.composite
def grids(draw, max_side=7, colors=st.integers(0, 9)):
    h = draw(st.integers(1, max_side))
    w = draw(st.integers(1, max_side))
    return Grid([[draw(colors) for _ in range(w)] for _ in range(h)])


def image_task(*pairs):
    return ModifiedTask(tuple((Value.image(i), Value.image(o)) for i, o in pairs))


# low-level ------------------------------------------------------------------------


def test_trim_examples():
    assert low.trim(grid([[0, 0, 0], [0, 5, 0], [0, 0, 0]])) == grid([[5]])
    assert low.trim(grid([[5]])) == grid([[5]])
    assert low.trim(grid([[0, 0], [0, 0]])) == grid([[0]])
    assert low.trim(grid([[3, 3], [3, 1]]), bg=3) == grid([[1]])


@given(grids(colors=st.integers(0, 2)))
def test_trim_matches_bounding_box_oracle(g):
    cells = [(r, c) for r in range(g.height) for c in range(g.width) if g[r, c] != 0]
    if not cells:
        assert low.trim(g) == grid([[0]])
        return
    r0, r1 = min(r for r, _ in cells), max(r for r, _ in cells)
    c0, c1 = min(c for _, c in cells), max(c for _, c in cells)
    assert low.trim(g) == Grid([row[c0 : c1 + 1] for row in g.rows[r0 : r1 + 1]])


def test_geometry():
    g = grid([[1, 2, 3], [4, 5, 6]])
    assert low.rotate90(g) == grid([[4, 1], [5, 2], [6, 3]])
    assert low.rotate180(g) == grid([[6, 5, 4], [3, 2, 1]])
    assert low.rotate270(g) == grid([[3, 6], [2, 5], [1, 4]])
    assert low.flip_h(g) == grid([[3, 2, 1], [6, 5, 4]])
    assert low.flip_v(g) == grid([[4, 5, 6], [1, 2, 3]])
    assert low.transpose(g) == grid([[1, 4], [2, 5], [3, 6]])


@given(grids())
def test_rotation_group_laws(g):
    assert low.rotate90(low.rotate90(g)) == low.rotate180(g)
    assert low.rotate90(low.rotate270(g)) == g
    assert low.flip_h(low.flip_h(g)) == g
    assert low.rotate180(g) == low.flip_h(low.flip_v(g))


def test_scale_and_tile():
    g = grid([[1, 2]])
    assert low.scale_up(g, 2) == grid([[1, 1, 2, 2], [1, 1, 2, 2]])
    assert low.tile(g, 2, 1) == grid([[1, 2, 1, 2]])
    assert low.tile(g, 1, 2) == grid([[1, 2], [1, 2]])
    from vimrl.ops import OperationError

    for bad in (lambda: low.scale_up(g, 0), lambda: low.scale_up(g, 16), lambda: low.tile(g, 16, 1)):
        with pytest.raises(OperationError):
            bad()


def test_replace_and_overlay():
    assert low.replace_color(grid([[1, 2, 1]]), 1, 7) == grid([[7, 2, 7]])
    assert low.overlay(grid([[1, 1]]), grid([[0, 3]])) == grid([[1, 3]])


def test_find_enclosed_patches_examples():
    (p,) = low.find_enclosed_patches(grid([[3, 3, 3], [3, 0, 3], [3, 3, 3]]))
    assert (p.row, p.col, p.pixels) == (1, 1, grid([[0]]))
    assert low.find_enclosed_patches(grid([[0, 3], [3, 0]])) == ()
    task = eight_patch_task()
    assert len(low.find_enclosed_patches(task.train[0][0])) == 8


def _reachable_background(g: Grid) -> set:
    """Independent border flood fill over 4-connected background cells."""
    h, w = g.shape
    todo = [(r, c) for r in range(h) for c in range(w) if (r in (0, h - 1) or c in (0, w - 1)) and g[r, c] == 0]
    seen = set(todo)
    while todo:
        r, c = todo.pop()
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            q = (r + dr, c + dc)
            if 0 <= q[0] < h and 0 <= q[1] < w and q not in seen and g[q] == 0:
                seen.add(q)
                todo.append(q)
    return seen


@settings(max_examples=150)
@given(grids(max_side=8, colors=st.sampled_from([0, 0, 3])))
def test_enclosed_background_cells_match_flood_oracle(g):
    found = set()
    for o in low.find_enclosed_patches(g):
        if o.colors() == {0}:
            found |= {(r, c) for r, c, _ in o.cells()}
    enclosed = {(r, c) for r in range(g.height) for c in range(g.width) if g[r, c] == 0} - _reachable_background(g)
    assert found == enclosed


@given(grids(colors=st.sampled_from([0, 0, 2, 5])))
def test_draw_found_patches_is_identity(g):
    assert low.draw(g, low.find_enclosed_patches(g)) == g


def test_draw_empty_and_overdraw():
    g = grid([[0, 0, 0]])
    assert low.draw(g, ()) == g
    a = SpriteObject(grid([[1, 1]]), 0, 0)
    b = SpriteObject(grid([[2]]), 0, 1)
    assert low.draw(g, (a, b)) == grid([[1, 2, 0]])


def test_fill_holes():
    g = grid([[3, 3, 3], [3, 0, 3], [3, 3, 3]])
    assert low.fill_holes(g, 4) == grid([[3, 3, 3], [3, 4, 3], [3, 3, 3]])


def test_object_helpers():
    g = grid([[1, 0, 2, 2], [0, 0, 2, 0], [5, 0, 0, 0]])
    objs = low.objects(g)
    assert low.count_objects(objs) == 3
    assert low.largest_object(objs).colors() == {2}
    assert low.smallest_object(objs).origin == (0, 0)
    assert [o.size for o in low.sort_objects_by_size(objs)] == [1, 1, 3]
    assert [o.origin for o in low.filter_objects_by_color(objs, 5)] == [(2, 0)]
    assert low.crop_to_objects(low.filter_objects_by_color(objs, 2)) == grid([[2, 2], [2, 0]])
    assert low.move_object(objs[0], 2, 1).origin == (1, 2)
    assert low.crop_object(objs[1]) == grid([[2, 2], [2, 0]])


def test_color_counts_ignore_background():
    g = grid([[0, 0, 0, 1], [2, 2, 0, 0]])
    assert low.most_common_color(g) == 2
    assert low.least_common_color(g) == 1


def test_set_background_changes_later_ops():
    task = eight_patch_task()
    prog = parse("b = set_background(3)\noutput = trim(input)")
    from vimrl.interpreter import execute

    g = grid([[3, 3], [3, 7]])
    out, _ = execute(prog, task, g)
    assert out.payload == grid([[7]])


# high-level -----------------------------------------------------------------------


def test_attract_slides_mover_to_contact():
    m, a = 2, 8
    pairs = [attraction_pair(3, 7, 6, 1, 0), attraction_pair(4, 7, 6, 0, 2, size=2)]
    rule = high.induce_attract(image_task(*pairs))
    out = high.apply_attract(rule, grid([[m, 0, 0, 0, 0, 0, a]]))
    assert out == grid([[0, 0, 0, 0, 0, m, a]])


def test_attract_needs_two_objects():
    g = grid([[0, 2, 0]])
    with pytest.raises(InductionFailure):
        high.induce_attract(image_task((g, g)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 3), st.integers(1, 2))
def test_attract_preserves_object_shapes(gap, row, size):
    wall = size + gap
    i, o = attraction_pair(5, wall + 2, wall, min(row, 5 - size), 0, size=size)
    rule = high.induce_attract(image_task((i, o)))
    out = high.apply_attract(rule, i)

    def shapes(g):
        return sorted((c, ob.pixels.rows) for c in g.colors() - {0} for ob in extract_objects(_only(g, c)))

    assert out == o
    assert shapes(out) == shapes(i)


def _only(g: Grid, color: int) -> Grid:
    return Grid([[v if v == color else 0 for v in row] for row in g.rows])


def test_recolor_examples():
    swap = image_task((grid([[1, 2, 0]]), grid([[2, 1, 0]])))
    assert high.apply_recolor(high.induce_recolor(swap), grid([[1, 2], [0, 1]])) == grid([[2, 1], [0, 2]])
    same = image_task((grid([[1, 2]]), grid([[1, 2]])))
    g = grid([[2, 1]])
    assert high.apply_recolor(high.induce_recolor(same), g) == g
    with pytest.raises(InductionFailure):
        high.induce_recolor(image_task((grid([[1]]), grid([[2]])), (grid([[1]]), grid([[3]]))))
    with pytest.raises(InductionFailure):
        high.induce_recolor(image_task((grid([[1]]), grid([[1, 1]]))))


def _list_task(pairs):
    return ModifiedTask(tuple((Value.objects(a), Value.objects(b)) for a, b in pairs))


def test_recolor_objects():
    entry = REG["recolor_objects"]
    p = lambda c, r, k: SpriteObject(grid([[c, c]]), r, k)
    task = _list_task([((p(3, 0, 0),), (p(6, 0, 0),)), ((p(3, 1, 1), p(5, 2, 0)), (p(6, 1, 1), p(5, 2, 0)))])
    rule = entry.induce(task, 0)
    out = entry.apply(rule, (p(3, 4, 4), p(5, 0, 0)), 0)
    assert [o.colors() for o in out] == [{6}, {5}]
    assert [o.origin for o in out] == [(4, 4), (0, 0)]
    assert entry.apply(rule, (), 0) == ()


def test_recolor_objects_is_the_lift_of_recolor_on_walkthrough():
    task = eight_patch_task()
    mt = build_modified_task(parse("e = find_enclosed_patches(input)"), task, "e", REG)
    lifted = lift_to_list(REG["recolor"], name="again")
    named = REG["recolor_objects"]
    arg = mt.test_inputs[0].payload
    assert named.apply(named.induce(mt, 0), arg, 0) == lifted.apply(lifted.induce(mt, 0), arg, 0)


def test_lift_trim_elementwise():
    lifted = REG["trim_objects"]
    a = SpriteObject(grid([[0, 0, 0], [0, 5, 0], [0, 0, 0]]), 1, 1)
    b = SpriteObject(grid([[7]]), 0, 0)
    out = lifted.function((a, b))
    assert [o.pixels for o in out] == [low.trim(a.pixels), b.pixels]
    assert [o.origin for o in out] == [a.origin, b.origin]
    assert lifted.function(()) == ()


@given(grids(max_side=5))
def test_lifting_coherence_on_singletons(g):
    o = SpriteObject(g, 0, 0)
    for e in REG:
        if e.provenance == "lifted" and e.base is not None and e.level == "low":
            try:
                expect = e.base.function(g)
            except Exception:
                continue
            (got,) = e.function((o,))
            assert got.pixels == expect


def test_complete_symmetry():
    full = grid([[1, 2, 2, 1], [3, 4, 4, 3]])
    holed = grid([[1, 9, 2, 1], [3, 4, 9, 3]])
    other_full = grid([[5, 6, 6, 5], [7, 7, 7, 7]])
    other_holed = grid([[9, 6, 6, 5], [7, 7, 7, 9]])
    rule = high.induce_complete_symmetry(image_task((holed, full), (other_holed, other_full)))
    assert high.apply_complete_symmetry(rule, grid([[9, 8, 8, 2]])) == grid([[2, 8, 8, 2]])


def test_select_pattern_largest():
    a = grid([[1, 0, 0], [0, 0, 2], [0, 0, 2]])
    b = grid([[3, 3, 3], [0, 0, 0], [4, 0, 0]])
    rule = high.induce_select_pattern(image_task((a, grid([[2], [2]])), (b, grid([[3, 3, 3]]))))
    assert high.apply_select_pattern(rule, grid([[5, 5], [0, 0], [0, 6]])) == grid([[5, 5]])


def test_grow_and_project():
    g1, g2 = grid([[1, 2]]), grid([[3], [4]])
    rule = high.induce_grow(image_task((g1, low.scale_up(g1, 2)), (g2, low.scale_up(g2, 2))))
    assert high.apply_grow(rule, grid([[5]])) == grid([[5, 5], [5, 5]])
    big1, big2 = grid([[1, 2, 3], [4, 5, 6], [7, 8, 9]]), grid([[9, 9, 9], [8, 8, 8], [7, 7, 7]])
    rule = high.induce_project_to_output_size(image_task((big1, grid([[1, 2], [4, 5]])), (big2, grid([[9, 9], [8, 8]]))))
    assert high.apply_project_to_output_size(rule, grid([[5, 6, 7], [1, 1, 1], [0, 0, 0]])) == grid([[5, 6], [1, 1]])


def test_high_level_ops_are_pure():
    task = image_task((grid([[1, 2, 0]]), grid([[2, 1, 0]])))
    g = grid([[1, 2]])
    assert high.apply_recolor(high.induce_recolor(task), g) == high.apply_recolor(high.induce_recolor(task), g)


# registry -------------------------------------------------------------------------


def test_catalog_contents():
    names = set(REG.names())
    assert {"attract", "recolor", "recolor_objects", "find_enclosed_patches", "draw", "trim"} <= names
    core = {
        "identity", "rotate90", "rotate180", "rotate270", "flip_h", "flip_v", "scale_up", "crop_to_objects",
        "largest_object", "smallest_object", "count_objects", "most_common_color", "least_common_color",
        "replace_color", "fill_holes", "tile", "overlay", "set_background", "move_object",
        "filter_objects_by_color", "sort_objects_by_size", "complete_symmetry", "select_pattern", "grow",
        "project_to_output_size",
    }
    assert core <= names
    for e in REG:
        if e.level == "high":
            assert len(e.signature.param_types) == 1


def test_lifted_twin_count():
    bases = [e for e in REG if e.level == "low" and e.provenance != "lifted" and e.signature.param_types == ("image",) and e.signature.return_type == "image"]
    lifted = [e for e in REG if e.provenance == "lifted"]
    assert {e.name for e in lifted} == {b.name + "_objects" for b in bases}
    non_lifted = [e for e in REG if e.provenance != "lifted"]
    assert len(REG) == len(non_lifted) + len(bases)


def test_registry_is_frozen_and_rejects_duplicates():
    with pytest.raises(RegistryError):
        REG.add(REG["trim"])
    reg = Registry()
    reg.add(OperationEntry(REG["trim"].signature, function=low.trim))
    with pytest.raises(RegistryError):
        reg.add(OperationEntry(REG["trim"].signature, function=low.trim))
    with pytest.raises(RegistryError):
        register_core_catalog(reg)


def test_manifest_table():
    rows = manifest(REG).splitlines()
    assert rows[0].split("\t") == ["name", "level", "params", "returns", "priors", "provenance"]
    assert len(rows) == len(REG) + 1
    assert "attract\thigh\timage\timage\tOG\tpaper_named" in rows


def test_lifting_rejects_non_image_ops():
    with pytest.raises(RegistryError):
        lift_to_list(REG["count_objects"])


def test_transparent_pixels_survive_lift():
    o = SpriteObject(Grid([[TRANSPARENT, 1], [1, 1]]), 0, 0)
    (out,) = REG["flip_h_objects"].function((o,))
    assert out.pixels == Grid([[1, TRANSPARENT], [1, 1]])


def test_boxes_fixture_is_consistent():
    i, o = boxes_pair(6, 6, [(0, 0, 4, 4)])
    assert low.fill_holes(i, 4) == o
