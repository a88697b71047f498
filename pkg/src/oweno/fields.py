"""Scalar fields: exact rationals, binary64 and double-double arithmetic.

Every kernel in the package is written against numpy arrays whose element
type is one of the fields below. ``Field`` objects carry the conversion from
exact rationals plus an epsilon query; arrays of ``float64`` are used for the
binary64 field and object arrays for the others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

Rational = Fraction


class SingularMatrix(ValueError):
    pass


# {{{ exact linear algebra


def rational_solve(matrix: Sequence[Sequence[Any]], rhs: Sequence[Any]) -> list[Fraction]:
    """Solve ``matrix @ x = rhs`` exactly by Gauss-Jordan elimination."""
    n = len(matrix)
    if any(len(row) != n for row in matrix) or len(rhs) != n:
        raise ValueError("matrix must be square and match rhs")

    a = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if a[i][col] != 0), None)
        if pivot is None:
            raise SingularMatrix(f"zero pivot column {col}")
        a[col], a[pivot] = a[pivot], a[col]

        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                m = a[i][col]
                a[i] = [u - m * v for u, v in zip(a[i], a[col])]

    return [row[n] for row in a]


def rational_inverse(matrix: Sequence[Sequence[Any]]) -> list[list[Fraction]]:
    n = len(matrix)
    cols = [rational_solve(matrix, [int(i == j) for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


# }}}


# {{{ double-double

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    return s, b - (s - a)


def _split(a: float) -> tuple[float, float]:
    if abs(a) > 6.69692879491417e299:
        # avoid overflow in the splitter product
        hi, lo = _split(a * 3.7252902984619140625e-09)
        return hi * 268435456.0, lo * 268435456.0
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


class DD:
    """Unevaluated sum ``hi + lo`` of two doubles with ``|lo| <= ulp(hi)/2``.

    Addition uses the IEEE-style (two two-sums) variant, so every operation
    has a relative error of a few units of 2**-106.
    """

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0) -> None:
        self.hi = float(hi)
        self.lo = float(lo)

    @classmethod
    def from_fraction(cls, q: Fraction) -> DD:
        q = Fraction(q)
        hi = float(q)
        if not math.isfinite(hi):
            return cls(hi, 0.0)
        lo = float(q - Fraction(hi))
        hi, lo = _quick_two_sum(hi, lo)
        return cls(hi, lo)

    @classmethod
    def from_mpf(cls, x: Any) -> DD:
        hi = float(x)
        lo = float(x - hi)
        return cls(*_quick_two_sum(hi, lo))

    def to_fraction(self) -> Fraction:
        return Fraction(self.hi) + Fraction(self.lo)

    def isfinite(self) -> bool:
        return math.isfinite(self.hi) and math.isfinite(self.lo)

    # {{{ arithmetic

    @staticmethod
    def _coerce(other: Any) -> DD:
        if isinstance(other, DD):
            return other
        if isinstance(other, (int, Fraction)):
            return DD.from_fraction(Fraction(other))
        return DD(float(other))

    # ndarray operands are handed back to numpy's reflected operators

    def __add__(self, other: Any) -> DD:
        if isinstance(other, np.ndarray):
            return NotImplemented
        if not isinstance(other, DD):
            if isinstance(other, float):
                s, e = _two_sum(self.hi, other)
                e += self.lo
                return DD(*_quick_two_sum(s, e))
            other = DD._coerce(other)
        s, e = _two_sum(self.hi, other.hi)
        t, f = _two_sum(self.lo, other.lo)
        e += t
        s, e = _quick_two_sum(s, e)
        e += f
        return DD(*_quick_two_sum(s, e))

    __radd__ = __add__

    def __neg__(self) -> DD:
        return DD(-self.hi, -self.lo)

    def __pos__(self) -> DD:
        return self

    def __sub__(self, other: Any) -> DD:
        if isinstance(other, np.ndarray):
            return NotImplemented
        return self + (-DD._coerce(other))

    def __rsub__(self, other: Any) -> DD:
        if isinstance(other, np.ndarray):
            return NotImplemented
        return DD._coerce(other) + (-self)

    def __mul__(self, other: Any) -> DD:
        if isinstance(other, np.ndarray):
            return NotImplemented
        if not isinstance(other, DD):
            if isinstance(other, float):
                p, e = _two_prod(self.hi, other)
                e += self.lo * other
                return DD(*_quick_two_sum(p, e))
            other = DD._coerce(other)
        p, e = _two_prod(self.hi, other.hi)
        e += self.hi * other.lo + self.lo * other.hi
        return DD(*_quick_two_sum(p, e))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> DD:
        if isinstance(other, np.ndarray):
            return NotImplemented
        other = DD._coerce(other)
        if other.hi == 0.0:
            # non-finite result; mirror IEEE semantics instead of raising
            if self.hi == 0.0:
                return DD(math.nan)
            return DD(math.copysign(math.inf, self.hi) * math.copysign(1.0, other.hi))
        q1 = self.hi / other.hi
        r = self - other * q1
        q2 = r.hi / other.hi
        r = r - other * q2
        q3 = r.hi / other.hi
        q1, q2 = _quick_two_sum(q1, q2)
        return DD(q1, q2) + q3

    def __rtruediv__(self, other: Any) -> DD:
        if isinstance(other, np.ndarray):
            return NotImplemented
        return DD._coerce(other) / self

    def __pow__(self, n: Any) -> DD:
        if isinstance(n, Fraction) and n.denominator == 1:
            n = n.numerator
        if isinstance(n, float) and n.is_integer():
            n = int(n)
        if not isinstance(n, int):
            raise TypeError("double-double supports integer powers only")
        if n < 0:
            return DD(1.0) / (self ** (-n))
        result, base = DD(1.0), self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __abs__(self) -> DD:
        return -self if self.hi < 0.0 or (self.hi == 0.0 and self.lo < 0.0) else self

    def sqrt(self) -> DD:
        if self.hi <= 0.0:
            return DD(math.sqrt(self.hi) if self.hi == 0.0 else math.nan)
        x = math.sqrt(self.hi)
        # one Newton step in double-double
        return DD(x) + (self - DD(x) * x) / (2.0 * x)

    # }}}

    # {{{ comparisons

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, np.ndarray):
            return NotImplemented
        o = DD._coerce(other)
        return self.hi == o.hi and self.lo == o.lo

    def __hash__(self) -> int:
        return hash((self.hi, self.lo))

    def __lt__(self, other: Any) -> bool:
        if isinstance(other, np.ndarray):
            return NotImplemented
        o = DD._coerce(other)
        return self.hi < o.hi or (self.hi == o.hi and self.lo < o.lo)

    def __le__(self, other: Any) -> bool:
        if isinstance(other, np.ndarray):
            return NotImplemented
        return self < other or self == other

    def __gt__(self, other: Any) -> bool:
        if isinstance(other, np.ndarray):
            return NotImplemented
        return DD._coerce(other) < self

    def __ge__(self, other: Any) -> bool:
        if isinstance(other, np.ndarray):
            return NotImplemented
        return DD._coerce(other) <= self

    # }}}

    def __float__(self) -> float:
        return self.hi + self.lo

    def __repr__(self) -> str:
        return f"DD({self.hi!r}, {self.lo!r})"


def dd_add(a: DD, b: DD) -> DD:
    return a + b


def dd_mul(a: DD, b: DD) -> DD:
    return a * b


def dd_div(a: DD, b: DD) -> DD:
    return a / b


# }}}


# {{{ fields


@dataclass(frozen=True)
class Field:
    """A scalar field together with its array representation.

    ``dtype`` is the numpy dtype of arrays holding field values; ``convert``
    maps a python number, :class:`~fractions.Fraction` or ``mpf`` into a field
    scalar.
    """

    name: str
    dtype: Any
    convert: Callable[[Any], Any]
    eps: Any
    digits: int

    def __call__(self, value: Any) -> Any:
        return self.convert(value)

    def array(self, values: Any) -> np.ndarray:
        values = np.asarray(values, dtype=object) if self.dtype is object else values
        if self.dtype is object:
            out = np.empty(np.shape(values), dtype=object)
            flat = out.reshape(-1)
            for i, v in enumerate(np.asarray(values, dtype=object).reshape(-1)):
                flat[i] = self.convert(v)
            return out
        return np.asarray([float(v) for v in np.ravel(values)], dtype=self.dtype).reshape(
            np.shape(values)
        )

    def zero(self) -> Any:
        return self.convert(0)

    def isfinite(self, x: Any) -> bool:
        if isinstance(x, DD):
            return x.isfinite()
        if isinstance(x, Fraction):
            return True
        return math.isfinite(float(x))


def _to_float(v: Any) -> float:
    if isinstance(v, DD):
        return float(v)
    return float(v)


def _to_dd(v: Any) -> DD:
    if isinstance(v, DD):
        return v
    if isinstance(v, (int, Fraction)):
        return DD.from_fraction(Fraction(v))
    if isinstance(v, float):
        return DD(v)
    # mpmath mpf and friends
    return DD.from_mpf(v)


def _to_fraction(v: Any) -> Fraction:
    if isinstance(v, DD):
        return v.to_fraction()
    if isinstance(v, (int, float, Fraction)):
        return Fraction(v)
    import mpmath

    man, exp = mpmath.mpf(v).man_exp
    return Fraction(int(man)) * Fraction(2) ** int(exp)


F64 = Field("f64", np.float64, _to_float, np.finfo(np.float64).eps, 17)
DOUBLE_DOUBLE = Field("dd", object, _to_dd, DD(2.0**-104), 32)
RATIONAL = Field("rational", object, _to_fraction, Fraction(0), 0)


def mp_field(dps: int = 60) -> Field:
    """Multiprecision field backed by :mod:`mpmath` with ``dps`` digits.

    The working precision is a process-global ``mpmath`` setting; callers
    should hold it fixed while computing with this field.
    """
    import mpmath

    mpmath.mp.dps = max(mpmath.mp.dps, dps)

    def convert(v: Any) -> Any:
        if isinstance(v, Fraction):
            return mpmath.mpf(v.numerator) / v.denominator
        if isinstance(v, DD):
            return mpmath.mpf(v.hi) + mpmath.mpf(v.lo)
        return mpmath.mpf(v)

    return Field(f"mp{dps}", object, convert, mpmath.mpf(10) ** (1 - dps), dps)


FIELDS = {"f64": F64, "dd": DOUBLE_DOUBLE}


def get_field(name: str) -> Field:
    if name in FIELDS:
        return FIELDS[name]
    if name.startswith("mp") and name[2:].isdigit():
        return mp_field(int(name[2:]))
    raise ValueError(f"unknown precision backend: {name!r}")


def format_scalar(x: Any, field: Field) -> str:
    """Full-precision scientific notation for CSV output."""
    if isinstance(x, DD):
        import mpmath

        with mpmath.workprec(120):
            return mpmath.nstr(mpmath.mpf(x.hi) + mpmath.mpf(x.lo), 32, min_fixed=1, max_fixed=0)
    if isinstance(x, float) or field is F64:
        return f"{float(x):.16e}"
    if isinstance(x, Fraction):
        return f"{float(x):.16e}"
    import mpmath

    return mpmath.nstr(x, field.digits, min_fixed=1, max_fixed=0)


# }}}
