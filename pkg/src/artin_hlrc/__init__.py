"""Hierarchical locally recoverable codes on Artin-Schreier surfaces."""

from .code import (
    CodeSpec,
    Construction,
    EvaluationCode,
    build_code,
    encode,
    family_spec,
    hierarchy_params,
    verify_family,
)
from .field import FieldCtx, make_field
from .geometry import Family, enumerate_surface, make_surface, verify_family_counts
from .recovery import Level, ReceivedWord, repair, repair_all

__version__ = "0.1.0"

__all__ = [
    "CodeSpec", "Construction", "EvaluationCode", "Family", "FieldCtx", "Level",
    "ReceivedWord", "build_code", "encode", "enumerate_surface", "family_spec",
    "hierarchy_params", "make_field", "make_surface", "repair", "repair_all",
    "verify_family", "verify_family_counts",
]
