"""WENO reconstruction kernels: smoothness indicators, weights, reconstruction.

All kernels take ``values`` of shape ``(2r-1, ...)``: the leading axis runs
over the stencil ``f_{-r+1}, ..., f_{r-1}`` and any trailing axes are batch
dimensions (interfaces, components). Arrays are ``float64`` for the binary64
field and object arrays otherwise; the arithmetic is the same code either way.

Every linear functional that annihilates constants (indicators, ``d1``, the
``d2`` parabola coefficients, and the substencil corrections to ``f_0``) is
evaluated on first differences of the data, so constant data gives exactly
zero indicators in any field.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, TextIO

import numpy as np

from oweno.fields import F64, Field
from oweno.tables import DataMode, SchemeTables, build_tables

Array = Any


class DimensionMismatch(ValueError):
    pass


class Variant(enum.Enum):
    JS = "js"
    Z = "z"
    YC = "yc"
    OWENO = "oweno"

    @classmethod
    def parse(cls, value: str | Variant) -> Variant:
        if isinstance(value, Variant):
            return value
        key = value.lower().replace("-", "").replace("_", "")
        aliases = {"js": cls.JS, "jsweno": cls.JS, "z": cls.Z, "wenoz": cls.Z,
                   "yc": cls.YC, "ycweno": cls.YC, "oweno": cls.OWENO}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown WENO variant: {value!r}") from None


JS_EPS = 1.0e-12
DEFAULT_EPS = 1.0e-100


@dataclass(frozen=True)
class WeightParams:
    variant: Variant
    s1: int = 2
    s2: Fraction = Fraction(1)
    eps: Any = DEFAULT_EPS
    #: allow odd ``s1`` for OWENO by taking ``|d2|`` explicitly
    abs_mode: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "s2", Fraction(self.s2))

    def validate(self, r: int) -> WeightParams:
        if not isinstance(self.s1, int) or self.s1 < 1:
            raise ValueError(f"s1 must be a positive integer, got {self.s1!r}")
        if self.s2 <= 0:
            raise ValueError(f"s2 must be positive, got {self.s2}")
        if 2 * self.s1 * self.s2 < r:
            raise ValueError(f"2*s1*s2 = {2 * self.s1 * self.s2} < r = {r}")
        if self.variant is Variant.OWENO and self.s1 % 2 and not self.abs_mode:
            raise ValueError("OWENO with odd s1 requires abs_mode")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps!r}")
        return self


def default_s1(r: int) -> int:
    return 2 * (-(-r // 4))


def default_params(variant: Variant | str, r: int, eps: Any = None) -> WeightParams:
    variant = Variant.parse(variant)
    if eps is None:
        eps = JS_EPS if variant is Variant.JS else DEFAULT_EPS
    return WeightParams(variant, s1=default_s1(r), s2=Fraction(1), eps=eps).validate(r)


@dataclass(frozen=True)
class StencilValues:
    values: Array
    r: int
    mode: DataMode

    def __post_init__(self) -> None:
        if np.shape(self.values)[0] != 2 * self.r - 1:
            raise DimensionMismatch(f"expected {2 * self.r - 1} values, got {np.shape(self.values)[0]}")


@dataclass(frozen=True)
class ReconstructionResult:
    value: Array
    weights: Array
    indicators: Array
    d1: Array
    d2: Array
    d: Array
    sub_values: Array


# {{{ field-converted tables


@dataclass(frozen=True)
class KernelTables:
    r: int
    ideal: Array
    corrections: Array
    si_weights: Array
    si_rows: Array
    d1: Array
    d2: Array


@lru_cache(maxsize=64)
def kernel_tables(tables: SchemeTables, field: Field = F64, detector: DataMode | None = None) -> KernelTables:
    """Field-converted coefficients.

    ``detector`` selects the data mode of the ``d2`` parabola. Conservative
    finite-difference schemes feed point samples of the flux to cell-average
    tables; the parabola must then be taken in point mode so that it sees
    the critical points of the flux itself.
    """
    squares = tables.si_squares()
    d2_tables = tables
    if detector is not None and detector is not tables.mode:
        d2_tables = build_tables(tables.r, detector)
    return KernelTables(
        r=tables.r,
        ideal=field.array(tables.ideal_weights),
        corrections=field.array(tables.sub_corrections()),
        si_weights=field.array([w for w, _ in squares]),
        si_rows=field.array([rows for _, rows in squares]),
        d1=field.array(tables.d1_differences()),
        d2=field.array(d2_tables.d2_differences()),
    )


def _lincomb(coeffs: Array, values: Array) -> Array:
    return np.tensordot(coeffs, values, axes=1)


def _unpack(tables: SchemeTables, s: Array | StencilValues) -> Array:
    if isinstance(s, StencilValues):
        if s.r != tables.r or s.mode is not tables.mode:
            raise DimensionMismatch("stencil does not match the tables' order or data mode")
        s = s.values
    if np.shape(s)[0] != tables.width:
        raise DimensionMismatch(f"expected {tables.width} values, got {np.shape(s)[0]}")
    return s


def _differences(values: Array) -> Array:
    return values[1:] - values[:-1]


# }}}


# {{{ indicators


def smoothness_indicators(tables: SchemeTables, s: Array | StencilValues, field: Field = F64) -> Array:
    values = _unpack(tables, s)
    return _indicators(kernel_tables(tables, field), _differences(values), field)


def _indicators(kt: KernelTables, diffs: Array, field: Field) -> Array:
    r = kt.r
    out = []
    for i in range(r):
        lin = _lincomb(kt.si_rows[i], diffs[i:i + r - 1])
        out.append(_lincomb(kt.si_weights[i], lin * lin))
    indicators = np.stack(out)
    # the sum of squares cannot go negative; kept for foreign tables
    return np.where(indicators < 0, field.zero(), indicators)


def d1_indicator(tables: SchemeTables, s: Array | StencilValues, field: Field = F64) -> Array:
    values = _unpack(tables, s)
    delta = _lincomb(kernel_tables(tables, field).d1, _differences(values))
    return delta * delta


def d2_coefficients(tables: SchemeTables, s: Array | StencilValues, field: Field = F64) -> Array:
    """``(A, B, C)`` of the parabola ``P^{(2r-4)}(w) = A w**2 + B w + C``."""
    values = _unpack(tables, s)
    return _lincomb(kernel_tables(tables, field).d2, _differences(values))


def d2_indicator(tables: SchemeTables, s: Array | StencilValues, field: Field = F64) -> Array:
    a, b, c = d2_coefficients(tables, s, field)
    return b * b - 4 * a * c


def combined_d(d1: Array, d2: Array, params: WeightParams, field: Field = F64) -> Array:
    s1 = params.s1
    eps = field(params.eps)
    t1 = d1 ** s1
    # even s1 makes |d2| redundant; odd s1 is only reachable with abs_mode
    t2 = d2 ** s1 if s1 % 2 == 0 else abs(d2) ** s1
    return t1 * t2 / (t1 + t2 + eps)


def weight_driver(d1: Array, d2: Array, params: WeightParams, field: Field = F64) -> Array | None:
    """The ``d`` entering the weights: ``d1**s1`` for YC, ``D_r`` for OWENO."""
    if params.variant is Variant.OWENO:
        return combined_d(d1, d2, params, field)
    if params.variant is Variant.YC:
        return d1 ** params.s1
    return None


# }}}


# {{{ weights


def _power(x: Array, p: Fraction) -> Array:
    if p == 1:
        return x
    if p.denominator == 1:
        return x ** p.numerator
    return x ** float(p)


def weights(
    tables: SchemeTables,
    indicators: Array,
    d: Array | None,
    params: WeightParams,
    field: Field = F64,
) -> Array:
    kt = kernel_tables(tables, field)
    return _weights(kt, indicators, d, params, field)


def _weights(kt: KernelTables, indicators: Array, d: Array | None, params: WeightParams, field: Field) -> Array:
    eps = field(params.eps)
    one = field(1)
    c = kt.ideal.reshape((-1,) + (1,) * (indicators.ndim - 1))
    variant = params.variant

    if variant is Variant.JS:
        denom = indicators + eps
        alpha = c / (denom * denom)
    elif variant is Variant.Z:
        tau = abs(indicators[0] - indicators[-1])
        alpha = c * (one + (tau / (indicators + eps)) ** params.s1)
    else:
        if d is None:
            raise ValueError(f"{variant.name} weights need the indicator d")
        ratio = d / (indicators ** params.s1 + eps)
        alpha = c * _power(one + ratio, params.s2)

    return alpha / alpha.sum(axis=0)


# }}}


def reconstruct(
    tables: SchemeTables,
    s: Array | StencilValues,
    params: WeightParams,
    field: Field = F64,
    detector: DataMode | None = None,
) -> ReconstructionResult:
    """WENO reconstruction of the value at ``x_{1/2}`` from a ``2r-1`` window."""
    values = _unpack(tables, s)
    kt = kernel_tables(tables, field, detector)
    r = kt.r
    diffs = _differences(values)

    indicators = _indicators(kt, diffs, field)
    delta = _lincomb(kt.d1, diffs)
    d1 = delta * delta
    a, b, cc = _lincomb(kt.d2, diffs)
    d2 = b * b - 4 * a * cc
    d = weight_driver(d1, d2, params, field)

    w = _weights(kt, indicators, d, params, field)

    centre = values[r - 1]
    corrections = np.stack([_lincomb(kt.corrections[i], diffs[i:i + r - 1]) for i in range(r)])
    # combining corrections keeps constant data exact even when sum(w) != 1 by an ulp
    value = centre + (w * corrections).sum(axis=0)

    return ReconstructionResult(
        value=value,
        weights=w,
        indicators=indicators,
        d1=d1,
        d2=d2,
        d=d if d is not None else np.zeros_like(d1),
        sub_values=centre + corrections,
    )


def reconstruct_value(tables: SchemeTables, values: Array, params: WeightParams, field: Field = F64) -> Array:
    """Hot-path variant of :func:`reconstruct` returning only ``q(x_{1/2})``."""
    return reconstruct(tables, values, params, field).value


# {{{ diagnostics


class DiagnosticWriter:
    """Append ``(I_i, d1, d2, D, omega_i)`` records to a CSV stream."""

    def __init__(self, stream: TextIO, r: int) -> None:
        self.writer = csv.writer(stream, lineterminator="\n")
        self.writer.writerow(
            [f"I{i}" for i in range(r)] + ["d1", "d2", "D"] + [f"w{i}" for i in range(r)]
        )

    def write(self, result: ReconstructionResult) -> None:
        ind = np.asarray(result.indicators, dtype=object).reshape(result.indicators.shape[0], -1)
        w = np.asarray(result.weights, dtype=object).reshape(result.weights.shape[0], -1)
        d1 = np.asarray(result.d1, dtype=object).reshape(-1)
        d2 = np.asarray(result.d2, dtype=object).reshape(-1)
        d = np.asarray(result.d, dtype=object).reshape(-1)
        for k in range(d1.size):
            row = list(ind[:, k]) + [d1[k], d2[k], d[k]] + list(w[:, k])
            self.writer.writerow([f"{float(v):.17e}" for v in row])


# }}}
