"""Single-point reconstruction accuracy studies over dyadic refinements.

Data are generated in ``mpmath`` at 60 digits and rounded into the working
field, so the reconstruction error is the only error measured.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Sequence

import mpmath
import numpy as np

from oweno.core import ReconstructionResult, Variant, WeightParams, default_params, reconstruct
from oweno.fields import DOUBLE_DOUBLE, Field
from oweno.tables import DataMode, build_tables

DATA_DPS = 60

#: receives every intermediate reconstruction result, e.g. for tracing
Observer = Callable[[ReconstructionResult], None]


class PrecisionInsufficient(ValueError):
    def __init__(self, message: str, max_levels: int) -> None:
        super().__init__(message)
        self.max_levels = max_levels


class DegenerateData(ValueError):
    pass


# {{{ test functions


@dataclass(frozen=True)
class TestFunction:
    """A function with an exact pointwise and cell-average evaluator."""

    __test__ = False  # not a pytest class

    name: str
    pointwise: Callable[[Any], Any]
    antiderivative: Callable[[Any], Any] | None = None
    #: order of the critical point at 0, or ``None`` for a jump at 0
    critical_order: int | None = None

    def cell_average(self, a: Any, b: Any) -> Any:
        with mpmath.workdps(DATA_DPS):
            a, b = mpmath.mpf(a), mpmath.mpf(b)
            if self.antiderivative is not None:
                return (self.antiderivative(b) - self.antiderivative(a)) / (b - a)
            return mpmath.quad(self.pointwise, [a, b]) / (b - a)

    @property
    def discontinuous(self) -> bool:
        return self.critical_order is None


def _poly_exp_antiderivative(n: int) -> Callable[[Any], Any]:
    # int x^n e^x dx = e^x sum_m (-1)^m n!/(n-m)! x^(n-m)
    coeffs = [(-1) ** m * math.factorial(n) // math.factorial(n - m) for m in range(n + 1)]

    def F(x: Any) -> Any:
        return mpmath.exp(x) * sum(c * x ** (n - m) for m, c in enumerate(coeffs))

    return F


def critical_point_function(k: int) -> TestFunction:
    """``f_k(x) = x**(k+1) exp(x)``, a critical point of order ``k`` at 0."""
    n = k + 1
    return TestFunction(
        name=f"f{k}",
        pointwise=lambda x: x ** n * mpmath.exp(x),
        antiderivative=_poly_exp_antiderivative(n),
        critical_order=k,
    )


def exponential_function() -> TestFunction:
    return TestFunction("exp", mpmath.exp, mpmath.exp, critical_order=0)


def jump_function() -> TestFunction:
    """``exp(x)`` for ``x <= 0`` and ``exp(x + 1)`` for ``x > 0``."""

    def f(x: Any) -> Any:
        return mpmath.exp(x) if x <= 0 else mpmath.exp(x + 1)

    def F(x: Any) -> Any:
        # continuous antiderivative across the jump
        return mpmath.exp(x) if x <= 0 else mpmath.exp(x + 1) - mpmath.e + 1

    return TestFunction("jump", f, F, critical_order=None)


def sample_stencil(
    function: TestFunction, r: int, mode: DataMode, h: Any, offset: Any = -0.5
) -> list[Any]:
    """High-precision data at ``x_i = (i + offset) h``, ``i = -r+1, ..., r-1``."""
    with mpmath.workdps(DATA_DPS):
        h = mpmath.mpf(h)
        offset = mpmath.mpf(offset)
        out = []
        for i in range(-r + 1, r):
            x = (i + offset) * h
            if mode is DataMode.POINT:
                out.append(function.pointwise(x))
            else:
                out.append(function.cell_average(x - h / 2, x + h / 2))
        return out


# }}}


# {{{ reports


@dataclass(frozen=True)
class LevelResult:
    N: int
    error: Any
    local_order: float | None


@dataclass
class ConvergenceReport:
    variant: Variant
    r: int
    mode: DataMode
    label: str
    value: int
    levels: list[LevelResult] = dc_field(default_factory=list)
    skip: int = 0

    @property
    def J(self) -> int:
        return len(self.levels)

    @property
    def local_orders(self) -> list[float]:
        return [lv.local_order for lv in self.levels if lv.local_order is not None]

    @property
    def order(self) -> float:
        """Averaged observed order over the reported level pairs."""
        orders = self.local_orders[self.skip:]
        return float(np.mean(orders))


def local_order(coarse: Any, fine: Any) -> float:
    with mpmath.workdps(40):
        return float(mpmath.log(mpmath.mpf(_as_mpf(coarse)) / _as_mpf(fine), 2))


def _as_mpf(x: Any) -> Any:
    from oweno.fields import DD

    if isinstance(x, DD):
        return mpmath.mpf(x.hi) + mpmath.mpf(x.lo)
    return mpmath.mpf(x)


def level_sizes(levels: int, start: int = 1) -> list[int]:
    return [5 * 2 ** j for j in range(start, start + levels)]


def check_precision(r: int, levels: int, field: Field, expected_order: int, start: int = 1) -> None:
    """Raise when the finest expected error sinks below ``100 eps``."""
    floor = 100 * float(field.eps)

    def ok(j: int) -> bool:
        return (1 / (5 * 2 ** j)) ** expected_order > floor

    if not ok(start + levels - 1):
        safe = 0
        while ok(start + safe):
            safe += 1
        raise PrecisionInsufficient(
            f"{field.name} cannot resolve order {expected_order} over {levels} levels; "
            f"at most {safe} levels are safe",
            max_levels=safe,
        )


def _run_study(
    function: TestFunction,
    r: int,
    mode: DataMode,
    params: WeightParams,
    levels: int,
    field: Field,
    offset: float,
    target: float,
    label: str,
    value: int,
    observer: Observer | None = None,
) -> ConvergenceReport:
    tables = build_tables(r, mode)
    report = ConvergenceReport(params.variant, r, mode, label, value, skip=1 if levels >= 5 else 0)
    prev = None
    for N in level_sizes(levels):
        with mpmath.workdps(DATA_DPS):
            h = mpmath.mpf(1) / N
            data = sample_stencil(function, r, mode, h, offset)
            exact = function.pointwise(target * h)
        values = np.empty(len(data), dtype=field.dtype)
        for i, v in enumerate(data):
            values[i] = field(v)
        res = reconstruct(tables, values, params, field)
        if observer is not None:
            observer(res)
        q = res.value
        err = abs(q - field(exact))
        order = local_order(prev, err) if prev is not None else None
        report.levels.append(LevelResult(N, err, order))
        prev = err
    return report


def run_smooth_order_study(
    r: int,
    mode: DataMode | str,
    variant: Variant | str,
    k: int,
    levels: int = 6,
    field: Field = DOUBLE_DOUBLE,
    params: WeightParams | None = None,
    observer: Observer | None = None,
) -> ConvergenceReport:
    """Error ``|q(0) - f_k(0)|`` on the grid ``x_i = (i - 1/2) h``, ``h = 1/(5 2^j)``."""
    mode = DataMode.parse(mode)
    if not 0 <= k <= 2 * r - 3:
        raise ValueError(f"k must lie in [0, {2 * r - 3}]")
    if levels < 4:
        raise ValueError("at least 4 levels are required")
    params = params or default_params(variant, r, eps=1e-100)
    check_precision(r, levels, field, 2 * r - 1)
    return _run_study(critical_point_function(k), r, mode, params, levels, field,
                      offset=-0.5, target=0.0, label="k", value=k, observer=observer)


def run_discontinuous_order_study(
    r: int,
    mode: DataMode | str,
    variant: Variant | str,
    theta: int,
    levels: int = 6,
    field: Field = DOUBLE_DOUBLE,
    params: WeightParams | None = None,
    observer: Observer | None = None,
) -> ConvergenceReport:
    """Error at ``x_{1/2} = theta h`` on the grid ``x_i = (i - 1/2 + theta) h``."""
    mode = DataMode.parse(mode)
    if not -r + 2 <= theta <= r - 1:
        raise ValueError(f"theta must lie in [{-r + 2}, {r - 1}]")
    if levels < 4:
        raise ValueError("at least 4 levels are required")
    params = params or default_params(variant, r, eps=1e-100)
    check_precision(r, levels, field, r)
    return _run_study(jump_function(), r, mode, params, levels, field,
                      offset=theta - 0.5, target=float(theta), label="theta", value=theta,
                      observer=observer)


# }}}


# {{{ slope probes

QUANTITIES = ("I", "d1", "d2", "D")


def probe_values(
    quantity: str,
    function: TestFunction,
    r: int,
    mode: DataMode | str,
    levels: int = 6,
    field: Field = DOUBLE_DOUBLE,
    offset: float = -0.5,
    params: WeightParams | None = None,
) -> tuple[list[float], list[Any]]:
    """``(h, quantity)`` pairs; ``quantity`` is ``I<i>``, ``d1``, ``d2`` or ``D``."""
    mode = DataMode.parse(mode)
    tables = build_tables(r, mode)
    params = params or default_params(Variant.OWENO, r)
    hs, qs = [], []
    for N in level_sizes(levels):
        with mpmath.workdps(DATA_DPS):
            data = sample_stencil(function, r, mode, mpmath.mpf(1) / N, offset)
        values = np.empty(len(data), dtype=field.dtype)
        for i, v in enumerate(data):
            values[i] = field(v)
        res = reconstruct(tables, values, params, field)
        if quantity.startswith("I"):
            q = res.indicators[int(quantity[1:])]
        elif quantity in ("d1", "d2", "D"):
            q = {"d1": res.d1, "d2": res.d2, "D": res.d}[quantity]
        else:
            raise ValueError(f"unknown quantity {quantity!r}")
        hs.append(1.0 / N)
        qs.append(abs(q))
    return hs, qs


def slope_probe(
    quantity: str,
    function: TestFunction,
    r: int,
    mode: DataMode | str,
    levels: int = 6,
    field: Field = DOUBLE_DOUBLE,
    offset: float = -0.5,
) -> float:
    """Least-squares slope of ``log2 |quantity|`` against ``log2 h``."""
    hs, qs = probe_values(quantity, function, r, mode, levels, field, offset)
    if any(q == 0 for q in qs):
        raise DegenerateData(f"{quantity} vanishes on {function.name}")
    x = np.log2(hs)
    y = np.array([float(mpmath.log(_as_mpf(q), 2)) for q in qs])
    return float(np.polyfit(x, y, 1)[0])


# }}}


# {{{ output


def reports_to_csv(reports: Sequence[ConvergenceReport], field: Field) -> str:
    from oweno.fields import format_scalar

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variant", "r", "mode", "k_or_theta", "N", "error", "local_order"])
    for rep in reports:
        for lv in rep.levels:
            order = "" if lv.local_order is None else f"{lv.local_order:.17e}"
            w.writerow([rep.variant.value, rep.r, rep.mode.value, rep.value, lv.N,
                        format_scalar(lv.error, field), order])
    return buf.getvalue()


def reports_to_markdown(reports: Sequence[ConvergenceReport]) -> str:
    """Averaged orders laid out as rows ``k`` (or ``theta``) by variant columns."""
    variants = list(dict.fromkeys(rep.variant for rep in reports))
    keys = list(dict.fromkeys((rep.r, rep.mode, rep.label, rep.value) for rep in reports))
    table = {(rep.r, rep.mode, rep.label, rep.value, rep.variant): rep.order for rep in reports}

    lines = []
    for r, mode in dict.fromkeys((k[0], k[1]) for k in keys):
        label = next(k[2] for k in keys if k[0] == r and k[1] is mode)
        lines.append(f"### Order {2 * r - 1} ({mode.value} values)")
        lines.append("")
        lines.append(f"| {label} | " + " | ".join(v.name for v in variants) + " |")
        lines.append("|" + "---|" * (len(variants) + 1))
        for key in keys:
            if key[0] != r or key[1] is not mode:
                continue
            cells = []
            for v in variants:
                o = table.get((*key, v))
                cells.append("" if o is None else f"{o:.4f}")
            lines.append(f"| {key[3]} | " + " | ".join(cells) + " |")
        lines.append("")
    return "\n".join(lines)


# }}}
