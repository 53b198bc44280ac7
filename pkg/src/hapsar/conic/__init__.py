"""Conic program representation and solver backends."""

from .program import Affine, ConvexProgram, ProgramError, Row, SolveResult, StandardForm, Variable, dot
from .backends import available_backends, get_backend, register_backend

__all__ = ["Affine", "ConvexProgram", "ProgramError", "Row", "SolveResult", "StandardForm",
           "Variable", "dot", "available_backends", "get_backend", "register_backend"]
