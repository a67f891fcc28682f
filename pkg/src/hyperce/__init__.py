"""Finite hypergroups from conditional expectations on finite groups."""

from .catalog import get_group
from .expectation import (
    ConditionalExpectation,
    apply_expectation,
    build_automorphism_orbit,
    build_conjugation,
    build_double_coset,
    build_identity,
    verify_expectation_axioms,
    verify_hypergroup_conditions,
)
from .groups import GroupTable, validate_group
from .hypergroup import HypergroupTable, construct_hypergroup, haar_solve, verify_djs, verify_dual_axioms

__all__ = [
    "ConditionalExpectation",
    "GroupTable",
    "HypergroupTable",
    "apply_expectation",
    "build_automorphism_orbit",
    "build_conjugation",
    "build_double_coset",
    "build_identity",
    "construct_hypergroup",
    "get_group",
    "haar_solve",
    "validate_group",
    "verify_djs",
    "verify_dual_axioms",
    "verify_expectation_axioms",
    "verify_hypergroup_conditions",
]
