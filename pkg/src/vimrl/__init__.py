"""VIMRL: an imperative language of grid-imagery operations and a program synthesizer for ARC tasks."""

from .grid import Color, Grid, ModifiedTask, SpriteObject, Task, Value, extract_objects, grid, grid_equal, paste_object
from .interpreter import Interpreter, Limits, build_modified_task, execute
from .lang import Program, canonicalize, parse, print_program, program_size, type_check
from .ops import default_registry, register_core_catalog

__version__ = "0.1.0"

__all__ = [
    "Color",
    "Grid",
    "Interpreter",
    "Limits",
    "ModifiedTask",
    "Program",
    "SpriteObject",
    "Task",
    "Value",
    "build_modified_task",
    "canonicalize",
    "default_registry",
    "execute",
    "extract_objects",
    "grid",
    "grid_equal",
    "parse",
    "paste_object",
    "print_program",
    "program_size",
    "register_core_catalog",
    "type_check",
]
