"""Constraint expression language: parser, bounds helpers, evaluator."""

from .ast import BoundsBox, ConstraintFn, InfeasibleBoundsError, LangError, print_expr
from .evaluator import EvalError, UnboundObjectError, eval_constraint
from .helpers import (
    HELPER_ALIASES,
    HELPER_IMPLS,
    HELPER_SIGNATURES,
    default_bounds,
    sample_pose_uniform,
)
from .parser import (
    LexError,
    ParseError,
    TypeError_,
    UnknownHelperError,
    check_types,
    parse_constraint,
    parse_constraint_block,
)

__all__ = [
    "BoundsBox", "ConstraintFn", "InfeasibleBoundsError", "LangError",
    "print_expr", "EvalError", "UnboundObjectError", "eval_constraint",
    "HELPER_ALIASES", "HELPER_IMPLS", "HELPER_SIGNATURES", "default_bounds",
    "sample_pose_uniform", "LexError", "ParseError", "TypeError_",
    "UnknownHelperError", "check_types", "parse_constraint",
    "parse_constraint_block",
]
