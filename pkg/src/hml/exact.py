"""Exact Gaussian-rational arithmetic and linear algebra.

Everything in this module is exact: numbers are pairs of ``fractions.Fraction``
and the solvers are fraction-preserving Gaussian elimination.  No floats enter
unless explicitly requested via :meth:`QQi.to_complex`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

RationalLike = Union[int, Fraction, str]


def _as_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class QQi:
    """A Gaussian rational re + im*sqrt(-1) with exact Fraction parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(re: RationalLike = 0, im: RationalLike = 0) -> "QQi":
        return QQi(_as_fraction(re), _as_fraction(im))

    @staticmethod
    def i() -> "QQi":
        return QQi(Fraction(0), Fraction(1))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __add__(self, other: "QQi | RationalLike") -> "QQi":
        o = _coerce(other)
        return QQi(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self) -> "QQi":
        return QQi(-self.re, -self.im)

    def __sub__(self, other: "QQi | RationalLike") -> "QQi":
        o = _coerce(other)
        return QQi(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: "QQi | RationalLike") -> "QQi":
        return _coerce(other) - self

    def __mul__(self, other: "QQi | RationalLike") -> "QQi":
        o = _coerce(other)
        return QQi(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other: "QQi | RationalLike") -> "QQi":
        o = _coerce(other)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return QQi((self.re * o.re + self.im * o.im) / n,
                   (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other: "QQi | RationalLike") -> "QQi":
        return _coerce(other) / self

    def __pow__(self, n: int) -> "QQi":
        if n < 0:
            return QQi.of(1) / self ** (-n)
        out = QQi.of(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conj(self) -> "QQi":
        return QQi(self.re, -self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        return f"({self.re} + {self.im}*i)"


def _coerce(x: "QQi | RationalLike") -> QQi:
    if isinstance(x, QQi):
        return x
    return QQi(_as_fraction(x))


ZERO = QQi()
ONE = QQi.of(1)
I = QQi.i()


def ipow(n: int) -> QQi:
    """sqrt(-1) raised to an arbitrary integer power (positive or negative)."""
    return (I ** (n % 4))


def qqi_matmul(a: Sequence[Sequence[QQi]], b: Sequence[Sequence[QQi]]) -> list[list[QQi]]:
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = [[ZERO for _ in range(cols)] for _ in range(rows)]
    for i in range(rows):
        ai = a[i]
        for k in range(inner):
            aik = ai[k]
            if not aik:
                continue
            bk = b[k]
            oi = out[i]
            for j in range(cols):
                if bk[j]:
                    oi[j] = oi[j] + aik * bk[j]
    return out


def solve_exact(matrix: Sequence[Sequence[QQi]], rhs: Sequence[Sequence[QQi]]) -> list[list[QQi]]:
    """Solve matrix @ X = rhs exactly (rhs may have several columns).

    Raises ValueError on a singular (or non-square) system.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("solve_exact requires a square matrix")
    m = len(rhs[0]) if rhs else 0
    a = [list(row) + list(r) for row, r in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ValueError("singular system")
        a[col], a[piv] = a[piv], a[col]
        inv = ONE / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:n + m] for row in a]


def lstsq_exact_unique(matrix: Sequence[Sequence[QQi]], rhs: Sequence[QQi]) -> list[QQi]:
    """Solve a consistent, possibly rectangular system with a unique solution.

    Used for over-determined exact systems (reconstruction + side constraints).
    Performs fraction-free-ish row reduction; raises ValueError if the system
    is inconsistent or under-determined.
    """
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    a = [list(matrix[r]) + [rhs[r]] for r in range(rows)]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((k for k in range(r, rows) if a[k][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = ONE / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for k in range(rows):
            if k != r and a[k][c]:
                f = a[k][c]
                a[k] = [x - f * y for x, y in zip(a[k], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for k in range(r, rows):
        if a[k][cols]:
            raise ValueError("inconsistent system")
    if len(pivots) < cols:
        raise ValueError("under-determined system")
    out = [ZERO for _ in range(cols)]
    for row_idx, c in enumerate(pivots):
        out[c] = a[row_idx][cols]
    return out


def det_exact(matrix: Sequence[Sequence[QQi]]) -> QQi:
    n = len(matrix)
    a = [list(row) for row in matrix]
    det = ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return ZERO
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det = det * a[col][col]
        inv = ONE / a[col][col]
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def inv_exact(matrix: Sequence[Sequence[QQi]]) -> list[list[QQi]]:
    n = len(matrix)
    eye = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    return solve_exact(matrix, eye)


def nullspace_exact(matrix: Sequence[Sequence[QQi]]) -> list[list[QQi]]:
    """Basis of the right nullspace of an exact (possibly rectangular) matrix."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    a = [list(row) for row in matrix]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((k for k in range(r, rows) if a[k][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = ONE / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for k in range(rows):
            if k != r and a[k][c]:
                f = a[k][c]
                a[k] = [x - f * y for x, y in zip(a[k], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        vec = [ZERO] * cols
        vec[f] = ONE
        for row_idx, c in enumerate(pivots):
            vec[c] = -a[row_idx][f]
        basis.append(vec)
    return basis
