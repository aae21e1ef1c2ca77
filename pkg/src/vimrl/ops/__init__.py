from .catalog import default_registry, register_core_catalog
from .registry import (
    HighLevelContext,
    InductionFailure,
    OperationEntry,
    OperationError,
    Registry,
    RegistryError,
    add_lifted_twins,
    align_objects,
    lift_to_list,
    manifest,
)

__all__ = [
    "HighLevelContext",
    "InductionFailure",
    "OperationEntry",
    "OperationError",
    "Registry",
    "RegistryError",
    "add_lifted_twins",
    "align_objects",
    "default_registry",
    "lift_to_list",
    "manifest",
    "register_core_catalog",
]
