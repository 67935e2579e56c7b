"""The six three-dimensional symmetry reductions and the explicit example."""
from .closed_forms import ClosedForm, discriminant_closed_form, example_dpr
from .example import (ExampleField, Landmarks, TypeInterval, TypeRanges, example_field,
                      example_landmarks, type_ranges)
from .keyfunc import KeyFunctionField, base_point, key_function, local_key_function
from .params import (CASE_TAGS, AlgebraCase, CaseDocument, ModelParams, normalize_tag,
                     parse_case_document, structure_constants, validate)
from .reductions import abel_rhs, profile_system, second_order_rhs
from .relations import coordinate_relation
from .residuals import master_residual, reduced_hh_residual
from .seeds import find_seed, seed_to_state
from .solutions import ReducedSolution, solve_abel, solve_autonomous, solve_profile, solve_q_of_g

__all__ = [
    "CASE_TAGS", "AlgebraCase", "CaseDocument", "ClosedForm", "ExampleField", "KeyFunctionField",
    "Landmarks", "ModelParams", "ReducedSolution", "TypeInterval", "TypeRanges", "abel_rhs",
    "base_point", "coordinate_relation", "discriminant_closed_form", "example_dpr", "example_field",
    "example_landmarks", "find_seed", "key_function", "local_key_function", "master_residual",
    "normalize_tag", "parse_case_document", "profile_system", "reduced_hh_residual",
    "second_order_rhs", "seed_to_state", "solve_abel", "solve_autonomous", "solve_profile",
    "solve_q_of_g", "structure_constants", "type_ranges", "validate",
]
