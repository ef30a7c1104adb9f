"""Deterministic stand-in prover speaking the same wire protocol."""

from .directives import MockDirective, evaluate_theory, total_delay
from .server import MockProverServer, serve_stdio

__all__ = [
    "MockDirective",
    "evaluate_theory",
    "total_delay",
    "MockProverServer",
    "serve_stdio",
]
