"""Optimal-order WENO reconstructions near critical points of any order.

Exact coefficient tables, field-generic reconstruction kernels (binary64,
double-double, rationals, mpmath), single-point order studies and a
finite-difference conservation-law solver.
"""

from __future__ import annotations

from oweno.core import (
    ReconstructionResult,
    StencilValues,
    Variant,
    WeightParams,
    default_params,
    reconstruct,
)
from oweno.fields import DD, DOUBLE_DOUBLE, F64, RATIONAL, Field, get_field, mp_field
from oweno.tables import DataMode, SchemeTables, UnsupportedOrder, build_tables

__all__ = [
    "DD",
    "DOUBLE_DOUBLE",
    "F64",
    "RATIONAL",
    "DataMode",
    "Field",
    "ReconstructionResult",
    "SchemeTables",
    "StencilValues",
    "UnsupportedOrder",
    "Variant",
    "WeightParams",
    "build_tables",
    "default_params",
    "get_field",
    "mp_field",
    "reconstruct",
]
