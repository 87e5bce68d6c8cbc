"""QML: a strict linear functional quantum language, compiled to circuits."""

from .compiler import compile_entry, compile_program, compile_term
from .parser import parse_program, parse_state_literal, parse_term, parse_type
from .typecheck import check_program, infer_term

__all__ = [
    "check_program",
    "compile_entry",
    "compile_program",
    "compile_term",
    "infer_term",
    "parse_program",
    "parse_state_literal",
    "parse_term",
    "parse_type",
]
__version__ = "0.1.0"
