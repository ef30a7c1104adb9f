"""Tokenizer and structural pre-assessment for Isar theory text."""

from .lexer import (
    DEFAULT_COMMAND_KEYWORDS,
    DEFAULT_INNER_KEYWORDS,
    Token,
    TokenClass,
    tokenize,
)
from .structure import (
    StructureCode,
    StructureDiagnostic,
    check_structure,
    fold_regions,
    theory_header_name,
)

__all__ = [
    "DEFAULT_COMMAND_KEYWORDS",
    "DEFAULT_INNER_KEYWORDS",
    "Token",
    "TokenClass",
    "tokenize",
    "StructureCode",
    "StructureDiagnostic",
    "check_structure",
    "fold_regions",
    "theory_header_name",
]
