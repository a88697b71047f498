"""Exact-rational coefficient tables for WENO reconstructions of order 2r-1.

The full stencil holds the values ``f_j``, ``j = -r+1, ..., r-1``, at nodes
``w = j`` of the normalised coordinate ``x = x_0 + w h``; the target point is
``w = 1/2``. Point values interpolate ``P(j) = f_j``; cell averages satisfy
``int_{j-1/2}^{j+1/2} P(w) dw = f_j``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from oweno.fields import rational_inverse, rational_solve

R_MIN, R_MAX = 3, 6
FORMAT_VERSION = "weno-tables v1"

Vector = tuple[Fraction, ...]
Matrix = tuple[Vector, ...]


class UnsupportedOrder(ValueError):
    pass


class DataMode(enum.Enum):
    POINT = "point"
    CELL = "cell"

    @classmethod
    def parse(cls, value: str | DataMode) -> DataMode:
        if isinstance(value, DataMode):
            return value
        aliases = {"point": cls.POINT, "points": cls.POINT, "pointvalues": cls.POINT,
                   "cell": cls.CELL, "cells": cls.CELL, "cellaverages": cls.CELL}
        try:
            return aliases[value.lower().replace("_", "").replace("-", "")]
        except KeyError:
            raise ValueError(f"unknown data mode: {value!r}") from None


# {{{ polynomial helpers


def moment_row(node: int, ncoeffs: int, mode: DataMode) -> list[Fraction]:
    """Data functional of node ``node`` applied to the monomials ``w**m``."""
    if mode is DataMode.POINT:
        return [Fraction(node) ** m for m in range(ncoeffs)]

    a, b = Fraction(2 * node - 1, 2), Fraction(2 * node + 1, 2)
    return [(b ** (m + 1) - a ** (m + 1)) / (m + 1) for m in range(ncoeffs)]


def monomial_coefficients(nodes: list[int], mode: DataMode) -> list[list[Fraction]]:
    """Matrix ``C`` such that the interpolant on ``nodes`` is ``sum_m (C f)_m w**m``."""
    n = len(nodes)
    return rational_inverse([moment_row(j, n, mode) for j in nodes])


def _falling(m: int, l: int) -> int:
    return factorial(m) // factorial(m - l)


def _cell_moment(p: int) -> Fraction:
    # int_{-1/2}^{1/2} w**p dw
    if p % 2:
        return Fraction(0)
    return Fraction(2, p + 1) * Fraction(1, 2) ** (p + 1)


def _to_differences(functional: list[Fraction]) -> Vector:
    """Rewrite a functional annihilating constants over first differences."""
    if sum(functional) != 0:
        raise ValueError("functional does not annihilate constants")
    out, acc = [], Fraction(0)
    for v in functional[:-1]:
        acc += v
        out.append(-acc)
    return tuple(out)


def _ldl(matrix: list[list[Fraction]]) -> tuple[list[Fraction], list[list[Fraction]]]:
    """Exact ``L D L^T`` factorisation of a symmetric positive definite matrix."""
    n = len(matrix)
    lower = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    diag = [Fraction(0)] * n
    for j in range(n):
        diag[j] = matrix[j][j] - sum(lower[j][k] ** 2 * diag[k] for k in range(j))
        if diag[j] <= 0:
            raise ValueError("matrix is not positive definite")
        for i in range(j + 1, n):
            lower[i][j] = (
                matrix[i][j] - sum(lower[i][k] * lower[j][k] * diag[k] for k in range(j))
            ) / diag[j]
    return diag, lower


# }}}


@dataclass(frozen=True)
class SchemeTables:
    """Every coefficient a reconstruction of order ``2r-1`` needs.

    ``sub_coeffs[i]`` acts on the ``r`` values of substencil ``i`` (full-stencil
    positions ``i, ..., i+r-1``); ``full_coeffs`` and the ``d1``/``d2``
    functionals act on all ``2r-1`` values.
    """

    r: int
    mode: DataMode
    sub_coeffs: Matrix
    ideal_weights: Vector
    si_forms: tuple[Matrix, ...]
    d1_coeffs: Vector
    d2_functionals: tuple[Vector, Vector, Vector]
    full_coeffs: Vector

    @property
    def width(self) -> int:
        return 2 * self.r - 1

    def padded_sub_coeffs(self, i: int) -> Vector:
        zeros = (Fraction(0),)
        return zeros * i + self.sub_coeffs[i] + zeros * (self.r - 1 - i)

    # {{{ difference-based forms used by the kernels

    def sub_corrections(self) -> Matrix:
        """``p_i(x_{1/2}) - f_0`` as functionals of substencil differences."""
        out = []
        for i, coeffs in enumerate(self.sub_coeffs):
            centre = self.r - 1 - i
            shifted = [c - int(k == centre) for k, c in enumerate(coeffs)]
            out.append(_to_differences(shifted))
        return tuple(out)

    def si_squares(self) -> tuple[tuple[Vector, Matrix], ...]:
        """Smoothness indicators as weighted sums of squares of differences.

        For substencil ``i`` returns ``(weights, rows)`` with
        ``I_i = sum_k weights[k] * (rows[k] . diff)**2`` where ``diff`` holds
        the ``r-1`` first differences of the substencil values.
        """
        out = []
        for q in self.si_forms:
            n = len(q) - 1
            # Q = D^T Q' D with D the difference operator
            qd = [[sum(q[a][b] for a in range(k + 1) for b in range(l + 1))
                   for l in range(n)] for k in range(n)]
            diag, lower = _ldl(qd)
            rows = tuple(tuple(lower[l][k] for l in range(n)) for k in range(n))
            out.append((tuple(diag), rows))
        return tuple(out)

    def d1_differences(self) -> Vector:
        return _to_differences(list(self.d1_coeffs))

    def d2_differences(self) -> tuple[Vector, Vector, Vector]:
        a, b, c = self.d2_functionals
        return (_to_differences(list(a)), _to_differences(list(b)), _to_differences(list(c)))

    # }}}

    def dumps(self) -> str:
        return dump_tables(self)


# {{{ generation


def _sub_nodes(r: int, i: int) -> list[int]:
    return list(range(-r + 1 + i, i + 1))


def _evaluate_at_half(coeffs: list[list[Fraction]]) -> list[Fraction]:
    n = len(coeffs)
    return [sum(Fraction(1, 2) ** m * coeffs[m][j] for m in range(n)) for j in range(n)]


def si_forms_from_integration(r: int, mode: DataMode | str) -> tuple[Matrix, ...]:
    """Exact quadratic forms ``Q_i`` with ``I_i = f^T Q_i f`` on substencil values.

    ``I_i = sum_{l=1}^{r-1} int_{-1/2}^{1/2} (P_i^{(l)}(w))**2 dw`` after the
    change of variables ``x = x_0 + w h``, which removes every power of ``h``.
    """
    mode = DataMode.parse(mode)
    _check_order(r)
    forms = []
    for i in range(r):
        coeffs = monomial_coefficients(_sub_nodes(r, i), mode)
        q = [[Fraction(0)] * r for _ in range(r)]
        for l in range(1, r):
            for m in range(l, r):
                for mm in range(l, r):
                    w = _falling(m, l) * _falling(mm, l) * _cell_moment(m + mm - 2 * l)
                    if w == 0:
                        continue
                    for a in range(r):
                        for b in range(r):
                            q[a][b] += w * coeffs[m][a] * coeffs[mm][b]
        forms.append(tuple(tuple(row) for row in q))
    return tuple(forms)


def _check_order(r: int) -> None:
    if not isinstance(r, int) or not R_MIN <= r <= R_MAX:
        raise UnsupportedOrder(f"r must be an integer in [{R_MIN}, {R_MAX}], got {r!r}")


def ideal_weights_for(
    sub: list[list[Fraction]], full: list[Fraction], r: int, mode: DataMode
) -> list[Fraction]:
    """Solve ``sum_i c_i p_i(x_{1/2}) = p(x_{1/2})`` on the monomials ``1, w**r, ..., w**(2r-2)``.

    Monomials of degree ``1..r-1`` are reproduced by every substencil and
    only contribute the normalisation, hence the choice of equations.
    """
    padded = [[Fraction(0)] * i + list(sub[i]) + [Fraction(0)] * (r - 1 - i) for i in range(r)]
    matrix, rhs = [], []
    for deg in [0, *range(r, 2 * r - 1)]:
        data = [moment_row(j, deg + 1, mode)[deg] for j in range(-r + 1, r)]
        matrix.append([sum(p * v for p, v in zip(padded[i], data)) for i in range(r)])
        rhs.append(sum(p * v for p, v in zip(full, data)))
    return rational_solve(matrix, rhs)


@lru_cache(maxsize=None)
def build_tables(r: int, mode: DataMode | str) -> SchemeTables:
    mode = DataMode.parse(mode)
    _check_order(r)

    sub = [_evaluate_at_half(monomial_coefficients(_sub_nodes(r, i), mode)) for i in range(r)]

    full_monomials = monomial_coefficients(list(range(-r + 1, r)), mode)
    full = _evaluate_at_half(full_monomials)

    ideal = ideal_weights_for(sub, full, r, mode)

    d1 = [Fraction((-1) ** (j + r - 1) * comb(2 * r - 2, j + r - 1)) for j in range(-r + 1, r)]

    s = 2 * r - 4
    c_h = [factorial(s) * v for v in full_monomials[s]]
    b_h = [factorial(s + 1) * v for v in full_monomials[s + 1]]
    a_h = [Fraction(factorial(s + 2), 2) * v for v in full_monomials[s + 2]]

    tables = SchemeTables(
        r=r,
        mode=mode,
        sub_coeffs=tuple(tuple(row) for row in sub),
        ideal_weights=tuple(ideal),
        si_forms=si_forms_from_integration(r, mode),
        d1_coeffs=tuple(d1),
        d2_functionals=(tuple(a_h), tuple(b_h), tuple(c_h)),
        full_coeffs=tuple(full),
    )
    _verify(tables)
    return tables


def _verify(t: SchemeTables) -> None:
    if sum(t.ideal_weights) != 1 or min(t.ideal_weights) <= 0:
        raise AssertionError("ideal weights must be positive and sum to one")
    combined = [sum(c * t.padded_sub_coeffs(i)[j] for i, c in enumerate(t.ideal_weights))
                for j in range(t.width)]
    if combined != list(t.full_coeffs):
        raise AssertionError("ideal weights do not reproduce the full-stencil reconstruction")


# }}}


# {{{ serialisation


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def dump_tables(t: SchemeTables) -> str:
    def line(group: str, values) -> str:
        return f"{group}: " + " ".join(format_rational(Fraction(v)) for v in values)

    lines = [f"# {FORMAT_VERSION}", f"r: {t.r}", f"mode: {t.mode.value}"]
    lines += [line(f"sub.{i}", row) for i, row in enumerate(t.sub_coeffs)]
    lines.append(line("ideal", t.ideal_weights))
    for i, q in enumerate(t.si_forms):
        lines += [line(f"si.{i}.{k}", row) for k, row in enumerate(q)]
    lines.append(line("d1", t.d1_coeffs))
    for name, values in zip("ABC", t.d2_functionals):
        lines.append(line(f"d2.{name}", values))
    lines.append(line("full", t.full_coeffs))
    return "\n".join(lines) + "\n"


def loads_tables(text: str) -> SchemeTables:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != f"# {FORMAT_VERSION}":
        raise ValueError("not a weno-tables v1 dump")

    groups: dict[str, list[str]] = {}
    for ln in lines[1:]:
        key, _, rest = ln.partition(":")
        groups[key.strip()] = rest.split()

    r = int(groups["r"][0])
    mode = DataMode.parse(groups["mode"][0])

    def vec(key: str) -> Vector:
        return tuple(Fraction(v) for v in groups[key])

    return SchemeTables(
        r=r,
        mode=mode,
        sub_coeffs=tuple(vec(f"sub.{i}") for i in range(r)),
        ideal_weights=vec("ideal"),
        si_forms=tuple(tuple(vec(f"si.{i}.{k}") for k in range(r)) for i in range(r)),
        d1_coeffs=vec("d1"),
        d2_functionals=(vec("d2.A"), vec("d2.B"), vec("d2.C")),
        full_coeffs=vec("full"),
    )


# }}}
