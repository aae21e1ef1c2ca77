"""The built-in operation catalog."""

from __future__ import annotations

from functools import lru_cache

from ..lang import OperationSignature
from . import high, low
from .registry import OperationEntry, Registry, add_lifted_twins, lift_to_list

# name, params, returns, priors, provenance
_LOW = [
    ("trim", ("image",), "image", "T", "paper_named"),
    ("find_enclosed_patches", ("image",), "list", "OT", "paper_named"),
    ("draw", ("image", "list"), "image", "O", "paper_named"),
    ("identity", ("image",), "image", "", "core_extension"),
    ("rotate90", ("image",), "image", "T", "core_extension"),
    ("rotate180", ("image",), "image", "T", "core_extension"),
    ("rotate270", ("image",), "image", "T", "core_extension"),
    ("flip_h", ("image",), "image", "T", "core_extension"),
    ("flip_v", ("image",), "image", "T", "core_extension"),
    ("transpose", ("image",), "image", "T", "core_extension"),
    ("scale_up", ("image", "number"), "image", "TN", "core_extension"),
    ("tile", ("image", "number", "number"), "image", "TN", "core_extension"),
    ("objects", ("image",), "list", "O", "core_extension"),
    ("crop_to_objects", ("list",), "image", "O", "core_extension"),
    ("crop_object", ("object",), "image", "O", "core_extension"),
    ("largest_object", ("list",), "object", "ON", "core_extension"),
    ("smallest_object", ("list",), "object", "ON", "core_extension"),
    ("count_objects", ("list",), "number", "N", "core_extension"),
    ("sort_objects_by_size", ("list",), "list", "ON", "core_extension"),
    ("filter_objects_by_color", ("list", "color"), "list", "O", "core_extension"),
    ("move_object", ("object", "number", "number"), "object", "OG", "core_extension"),
    ("most_common_color", ("image",), "color", "N", "core_extension"),
    ("least_common_color", ("image",), "color", "N", "core_extension"),
    ("replace_color", ("image", "color", "color"), "image", "O", "core_extension"),
    ("fill_holes", ("image", "color"), "image", "T", "core_extension"),
    ("overlay", ("image", "image"), "image", "O", "core_extension"),
    ("set_background", ("color",), "color", "O", "core_extension"),
]

_HIGH = [
    ("attract", "OG", "paper_named", high.induce_attract, high.apply_attract),
    ("recolor", "O", "paper_named", high.induce_recolor, high.apply_recolor),
    ("complete_symmetry", "T", "core_extension", high.induce_complete_symmetry, high.apply_complete_symmetry),
    ("select_pattern", "ON", "core_extension", high.induce_select_pattern, high.apply_select_pattern),
    ("grow", "TN", "core_extension", high.induce_grow, high.apply_grow),
    (
        "project_to_output_size",
        "TG",
        "core_extension",
        high.induce_project_to_output_size,
        high.apply_project_to_output_size,
    ),
]


def register_core_catalog(registry: Registry | None = None) -> Registry:
    """Install the built-in operations plus lifted ``_objects`` twins, then freeze."""
    reg = Registry() if registry is None else registry
    for name, params, ret, priors, prov in _LOW:
        sig = OperationSignature(name, params, ret, "low", writes_background=(name == "set_background"))
        reg.add(OperationEntry(sig, function=getattr(low, name), provenance=prov, priors=priors))
    for name, priors, prov, induce, apply in _HIGH:
        sig = OperationSignature(name, ("image",), "image", "high")
        reg.add(OperationEntry(sig, induce=induce, apply=apply, provenance=prov, priors=priors))
    reg.add(lift_to_list(reg["recolor"], name="recolor_objects", provenance="paper_named"))
    add_lifted_twins(reg)
    return reg.freeze()


@lru_cache(maxsize=1)
def default_registry() -> Registry:
    return register_core_catalog()
