"""widthlab: a desk-scale lab for word widths, twisted commutators and
equation solving in finite groups."""

__version__ = "0.1.0"

from .errors import CapacityError, InputError, InvariantFailure, LabError
from .perm import Permutation, parse_cycles, format_cycles
from .groups import (
    ElementSet,
    ElementTable,
    Group,
    bracket,
    bracket_omega,
    coset_action,
    enumerate_group,
    maximal_subgroups,
    mu,
    normal_subgroups,
    subgroup,
)
from .catalog import CATALOG, catalog_groups, parse_group

__all__ = [
    "CATALOG",
    "CapacityError",
    "ElementSet",
    "ElementTable",
    "Group",
    "InputError",
    "InvariantFailure",
    "LabError",
    "Permutation",
    "bracket",
    "bracket_omega",
    "catalog_groups",
    "coset_action",
    "enumerate_group",
    "format_cycles",
    "maximal_subgroups",
    "mu",
    "normal_subgroups",
    "parse_cycles",
    "parse_group",
    "subgroup",
]
