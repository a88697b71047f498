from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb, factorial

import mpmath
import pytest
from hypothesis import given, strategies as st

from oweno.tables import (
    DataMode,
    UnsupportedOrder,
    build_tables,
    dump_tables,
    loads_tables,
    si_forms_from_integration,
)

ORDERS = range(3, 7)
MODES = (DataMode.POINT, DataMode.CELL)
ALL = list(itertools.product(ORDERS, MODES))

F = Fraction


def _apply(coeffs, values):
    return sum(F(c) * v for c, v in zip(coeffs, values))


def _data(poly, nodes, mode):
    """Exact samples of a polynomial given by monomial coefficients in ``w``."""
    def prim(w):
        return sum(c * F(w) ** (m + 1) / (m + 1) for m, c in enumerate(poly))

    if mode is DataMode.POINT:
        return [sum(c * F(j) ** m for m, c in enumerate(poly)) for j in nodes]
    return [prim(F(2 * j + 1, 2)) - prim(F(2 * j - 1, 2)) for j in nodes]


# {{{ independent mpmath oracle


def _oracle_interpolant(values, nodes, mode):
    """Monomial coefficients of the interpolant, solved in mpmath."""
    n = len(nodes)
    rows = []
    for j in nodes:
        if mode is DataMode.POINT:
            rows.append([mpmath.mpf(j) ** m for m in range(n)])
        else:
            a, b = mpmath.mpf(j) - 0.5, mpmath.mpf(j) + 0.5
            rows.append([(b ** (m + 1) - a ** (m + 1)) / (m + 1) for m in range(n)])
    return mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix([mpmath.mpf(v) for v in values]))


def _oracle_indicator(values, nodes, mode):
    coeffs = _oracle_interpolant(values, nodes, mode)
    r = len(nodes)

    def deriv(w, l):
        return sum(coeffs[m] * mpmath.ff(m, l) * w ** (m - l) for m in range(l, r))

    total = mpmath.mpf(0)
    for l in range(1, r):
        total += mpmath.quad(lambda w: deriv(w, l) ** 2, [-0.5, 0.5], method="gauss-legendre")
    return total


# }}}


def test_r3_point_d2_functionals_exact():
    A, B, C = build_tables(3, "point").d2_functionals
    assert A == (F(1, 2), F(-2), F(3), F(-2), F(1, 2))
    assert B == (F(-1, 2), F(1), F(0), F(-1), F(1, 2))
    assert C == (F(-1, 12), F(4, 3), F(-5, 2), F(4, 3), F(-1, 12))


def test_r3_cell_d2_functionals_exact():
    A, B, C = build_tables(3, "cell").d2_functionals
    assert A == (F(1, 2), F(-2), F(3), F(-2), F(1, 2))
    assert B == (F(-1, 2), F(1), F(0), F(-1), F(1, 2))
    assert C == (F(-1, 8), F(3, 2), F(-11, 4), F(3, 2), F(-1, 8))


@pytest.mark.parametrize("mode", MODES)
def test_r3_d1(mode):
    assert build_tables(3, mode).d1_coeffs == (1, -4, 6, -4, 1)


def test_r3_ideal_weights_frozen():
    assert build_tables(3, "point").ideal_weights == (F(1, 16), F(5, 8), F(5, 16))
    assert build_tables(3, "cell").ideal_weights == (F(1, 10), F(3, 5), F(3, 10))


def test_r3_cell_substencils_are_the_classical_ones():
    t = build_tables(3, "cell")
    assert t.sub_coeffs[0] == (F(1, 3), F(-7, 6), F(11, 6))
    assert t.sub_coeffs[1] == (F(-1, 6), F(5, 6), F(1, 3))
    assert t.sub_coeffs[2] == (F(1, 3), F(5, 6), F(-1, 6))


def test_r3_cell_indicator_is_jiang_shu():
    # beta_0 = 13/12 (f0 - 2 f1 + f2)^2 + 1/4 (f0 - 4 f1 + 3 f2)^2 on (f_{-2}, f_{-1}, f_0)
    q = build_tables(3, "cell").si_forms[0]
    a = [1, -2, 1]
    b = [1, -4, 3]
    expected = [[F(13, 12) * a[i] * a[j] + F(1, 4) * b[i] * b[j] for j in range(3)] for i in range(3)]
    assert [list(row) for row in q] == expected


@pytest.mark.parametrize("r, mode", ALL)
def test_invariants(r, mode):
    t = build_tables(r, mode)
    assert sum(t.ideal_weights) == 1
    assert all(c > 0 for c in t.ideal_weights)
    combined = [sum(c * t.padded_sub_coeffs(i)[j] for i, c in enumerate(t.ideal_weights))
                for j in range(t.width)]
    assert combined == list(t.full_coeffs)
    for q in t.si_forms:
        assert all(q[a][b] == q[b][a] for a in range(r) for b in range(r))
        assert all(sum(row) == 0 for row in q)  # constants are annihilated
    assert sum(t.d1_coeffs) == 0
    for functional in t.d2_functionals:
        assert sum(functional) == 0


@pytest.mark.parametrize("r, mode", ALL)
def test_si_forms_are_psd(r, mode):
    for weights, _ in build_tables(r, mode).si_squares():
        assert all(w >= 0 for w in weights)


@pytest.mark.parametrize("r, mode", ALL)
def test_polynomial_reproduction(r, mode):
    t = build_tables(r, mode)
    nodes = list(range(-r + 1, r))
    for deg in range(2 * r - 1):
        poly = [0] * deg + [1]
        exact_at_half = F(1, 2) ** deg
        data = _data(poly, nodes, mode)
        assert _apply(t.full_coeffs, data) == exact_at_half
        if deg <= r - 1:
            for i in range(r):
                assert _apply(t.sub_coeffs[i], data[i:i + r]) == exact_at_half


@pytest.mark.parametrize("r, mode", ALL)
def test_d2_functionals_give_derivative_coefficients(r, mode):
    """On polynomials of degree <= 2r-2, A, B, C are the coefficients of P^{(2r-4)}."""
    t = build_tables(r, mode)
    nodes = list(range(-r + 1, r))
    s = 2 * r - 4
    poly = [F(k * k - 3, k + 1) for k in range(2 * r - 1)]
    data = _data(poly, nodes, mode)
    # derivative of order s: w^m -> m!/(m-s)! w^(m-s)
    expect = [F(factorial(m), factorial(m - s)) * poly[m] for m in range(s, 2 * r - 1)]
    A, B, C = (_apply(f, data) for f in t.d2_functionals)
    assert (C, B, A) == tuple(expect)


@pytest.mark.parametrize("r", ORDERS)
def test_d1_is_signed_binomial(r):
    expect = tuple((-1) ** k * comb(2 * r - 2, k) for k in range(2 * r - 1))
    for mode in MODES:
        coeffs = build_tables(r, mode).d1_coeffs
        assert coeffs == expect or coeffs == tuple(-c for c in expect)


@pytest.mark.parametrize("r, mode", [(3, DataMode.POINT), (3, DataMode.CELL), (4, DataMode.POINT), (5, DataMode.CELL)])
def test_indicators_match_quadrature_oracle(r, mode):
    t = build_tables(r, mode)
    with mpmath.workdps(40):
        for i in range(r):
            nodes = list(range(-r + 1 + i, i + 1))
            values = [F(k * k + 1, k + 7) for k in range(r)]
            exact = sum(t.si_forms[i][a][b] * values[a] * values[b] for a in range(r) for b in range(r))
            oracle = _oracle_indicator([mpmath.mpf(v.numerator) / v.denominator for v in values], nodes, mode)
            assert abs(mpmath.mpf(exact.numerator) / exact.denominator - oracle) < mpmath.mpf(10) ** -25


def test_unit_vector_indicator_against_quadrature():
    t = build_tables(3, "point")
    f = [0, 0, 0, 0, 1]
    values = f[2:5]
    exact = sum(t.si_forms[2][a][b] * values[a] * values[b] for a in range(3) for b in range(3))
    oracle = _oracle_indicator(values, [0, 1, 2], DataMode.POINT)
    assert abs(float(exact) - float(oracle)) < 1e-12


def test_linear_data_gives_equal_indicators():
    t = build_tables(3, "cell")
    f = [F(j) for j in range(-2, 3)]
    ind = [sum(q[a][b] * f[i + a] * f[i + b] for a in range(3) for b in range(3)) for i, q in enumerate(t.si_forms)]
    assert ind[0] == ind[1] == ind[2] > 0


def test_si_forms_from_integration_matches_tables():
    for r, mode in ALL[:4]:
        assert si_forms_from_integration(r, mode) == build_tables(r, mode).si_forms


@pytest.mark.parametrize("r, mode", ALL)
def test_dump_round_trip(r, mode):
    t = build_tables(r, mode)
    text = dump_tables(t)
    assert text.startswith("# weno-tables v1\n")
    assert loads_tables(text) == t
    assert "\r" not in text


def test_dump_lines():
    text = dump_tables(build_tables(3, "point"))
    assert "d2.A: 1/2 -2 3 -2 1/2" in text.splitlines()
    text = dump_tables(build_tables(3, "cell"))
    assert "d2.C: -1/8 3/2 -11/4 3/2 -1/8" in text.splitlines()


@pytest.mark.parametrize("r", [2, 7, 0, -1])
def test_unsupported_orders(r):
    with pytest.raises(UnsupportedOrder):
        build_tables(r, "point")


def test_loads_rejects_foreign_text():
    with pytest.raises(ValueError):
        loads_tables("hello\n")


@given(st.integers(3, 6), st.sampled_from(MODES), st.lists(st.integers(-50, 50), min_size=11, max_size=11))
def test_difference_forms_agree_with_plain_forms(r, mode, raw):
    """The sum-of-squares and difference representations equal ``f^T Q f`` exactly."""
    t = build_tables(r, mode)
    f = [F(v, 7) for v in raw[:2 * r - 1]]
    diffs = [b - a for a, b in zip(f[:-1], f[1:])]
    for i, (weights, rows) in enumerate(t.si_squares()):
        q = t.si_forms[i]
        plain = sum(q[a][b] * f[i + a] * f[i + b] for a in range(r) for b in range(r))
        sq = sum(w * sum(c * d for c, d in zip(row, diffs[i:i + r - 1])) ** 2 for w, row in zip(weights, rows))
        assert plain == sq
    assert _apply(t.d1_differences(), diffs) == _apply(t.d1_coeffs, f)
    for fd, fv in zip(t.d2_differences(), t.d2_functionals):
        assert _apply(fd, diffs) == _apply(fv, f)
    for i, corr in enumerate(t.sub_corrections()):
        assert f[r - 1] + _apply(corr, diffs[i:i + r - 1]) == _apply(t.sub_coeffs[i], f[i:i + r])
