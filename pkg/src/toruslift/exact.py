"""Exact rational linear algebra on top of :class:`fractions.Fraction`.

The whole structural layer of the library (symplectic forms, brane supports,
lattice reductions, admissibility and positivity certificates) is computed
here without any floating point.  Matrices are immutable; every operation
returns a new value.  Vectors are plain tuples of Fractions.

Floats are accepted as inputs and converted *exactly* (every binary float is
a rational), so positivity tests on float-valued data are still rigorous.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

Rat = Fraction


def rat(x) -> Fraction:
    """Exact conversion to Fraction. Floats convert via their exact binary value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def ratvec(xs: Iterable) -> tuple[Fraction, ...]:
    return tuple(rat(x) for x in xs)


def vec_add(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vec_sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vec_scale(c, a: Sequence[Fraction]) -> tuple[Fraction, ...]:
    c = rat(c)
    return tuple(c * x for x in a)


def vec_dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    # accumulate over a common denominator; one normalization at the end
    num = 0
    den = 1
    for x, y in zip(a, b, strict=True):
        xn = x.numerator
        if not xn:
            continue
        yn = y.numerator
        if not yn:
            continue
        d = x.denominator * y.denominator
        if d == 1:
            num += xn * yn * den
        else:
            num = num * d + xn * yn * den
            den *= d
    return Fraction(num, den)


class RatMat:
    """Immutable matrix of Fractions.

    >>> m = RatMat([[1, 2], [3, 4]])
    >>> m.det()
    Fraction(-2, 1)
    >>> (m @ m.inv()) == RatMat.identity(2)
    True
    """

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(rat(x) for x in r) for r in rows)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged rows")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def _of_rows(cls, rows) -> "RatMat":
        # internal: rows is a rectangular tuple of tuples of Fractions
        m = object.__new__(cls)
        object.__setattr__(m, "rows", rows)
        return m

    # -- construction -------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "RatMat":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RatMat":
        return cls([[0] * ncols for _ in range(nrows)])

    @classmethod
    def diag(cls, entries: Iterable) -> "RatMat":
        entries = list(entries)
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, cols: Iterable[Iterable]) -> "RatMat":
        cols = [list(c) for c in cols]
        if not cols:
            return cls([])
        return cls([[cols[j][i] for j in range(len(cols))] for i in range(len(cols[0]))])

    @classmethod
    def column(cls, v: Iterable) -> "RatMat":
        return cls([[x] for x in v])

    # -- shape / access -----------------------------------------------

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.rows[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[tuple[Fraction, ...]]:
        return [self.col(j) for j in range(self.ncols)]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RatMat":
        return RatMat._of_rows(
            tuple(tuple(self.rows[i][j] for j in cols) for i in rows)
        )

    # -- algebra -------------------------------------------------------

    def __add__(self, other: "RatMat") -> "RatMat":
        self._check_same_shape(other)
        return RatMat._of_rows(
            tuple(
                tuple(a + b for a, b in zip(r1, r2))
                for r1, r2 in zip(self.rows, other.rows)
            )
        )

    def __sub__(self, other: "RatMat") -> "RatMat":
        self._check_same_shape(other)
        return RatMat._of_rows(
            tuple(
                tuple(a - b for a, b in zip(r1, r2))
                for r1, r2 in zip(self.rows, other.rows)
            )
        )

    def __neg__(self) -> "RatMat":
        return RatMat._of_rows(tuple(tuple(-a for a in r) for r in self.rows))

    def __mul__(self, scalar) -> "RatMat":
        c = rat(scalar)
        return RatMat._of_rows(tuple(tuple(c * a for a in r) for r in self.rows))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, RatMat):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            cols = tuple(zip(*other.rows))
            return RatMat._of_rows(
                tuple(tuple(vec_dot(r, c) for c in cols) for r in self.rows)
            )
        # vector: sequence of scalars -> tuple
        v = ratvec(other)
        if self.ncols != len(v):
            raise ValueError(f"shape mismatch {self.shape} @ vector[{len(v)}]")
        return tuple(vec_dot(r, v) for r in self.rows)

    @property
    def T(self) -> "RatMat":
        return RatMat._of_rows(tuple(zip(*self.rows)))

    def _check_same_shape(self, other: "RatMat"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    # -- predicates ----------------------------------------------------

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.rows for a in r)

    def is_integer(self) -> bool:
        return all(a.denominator == 1 for r in self.rows for a in r)

    def is_symmetric(self) -> bool:
        return self.is_square() and self == self.T

    def is_antisymmetric(self) -> bool:
        return self.is_square() and self == -self.T

    def __eq__(self, other) -> bool:
        return isinstance(other, RatMat) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(a) for a in r) for r in self.rows)
        return f"RatMat[{body}]"

    # -- conversions ---------------------------------------------------

    def to_int_rows(self) -> list[list[int]]:
        if not self.is_integer():
            raise ValueError("matrix has non-integer entries")
        return [[int(a) for a in r] for r in self.rows]

    def to_float_rows(self) -> list[list[float]]:
        return [[float(a) for a in r] for r in self.rows]

    def map(self, fn) -> "RatMat":
        return RatMat([[fn(a) for a in r] for r in self.rows])

    # -- elimination-based operations -----------------------------------

    def det(self) -> Fraction:
        if not self.is_square():
            raise ValueError("det of non-square matrix")
        n = self.nrows
        m = [list(r) for r in self.rows]
        det = Fraction(1)
        for c in range(n):
            piv = next((r for r in range(c, n) if m[r][c] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                m[c], m[piv] = m[piv], m[c]
                det = -det
            det *= m[c][c]
            inv = 1 / m[c][c]
            for r in range(c + 1, n):
                if m[r][c] != 0:
                    f = m[r][c] * inv
                    for j in range(c, n):
                        m[r][j] -= f * m[c][j]
        return det

    def inv(self) -> "RatMat":
        if not self.is_square():
            raise ValueError("inverse of non-square matrix")
        n = self.nrows
        m = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self.rows)]
        for c in range(n):
            piv = next((r for r in range(c, n) if m[r][c] != 0), None)
            if piv is None:
                raise ZeroDivisionError("matrix is singular")
            m[c], m[piv] = m[piv], m[c]
            inv = 1 / m[c][c]
            m[c] = [a * inv for a in m[c]]
            for r in range(n):
                if r != c and m[r][c] != 0:
                    f = m[r][c]
                    m[r] = [a - f * b for a, b in zip(m[r], m[c])]
        return RatMat([r[n:] for r in m])

    def solve(self, rhs: Sequence) -> tuple[Fraction, ...]:
        """Solve self @ x = rhs for square invertible self."""
        return self.inv() @ ratvec(rhs)

    def rank(self) -> int:
        # fraction-free: clear denominators per row, then integer cross-
        # multiplication elimination (no gcd work in the inner loop)
        nr, nc = self.nrows, self.ncols
        m = []
        for r in self.rows:
            den = 1
            for x in r:
                den = lcm(den, x.denominator)
            m.append([x.numerator * (den // x.denominator) for x in r])
        rank = 0
        for c in range(nc):
            piv = next((r for r in range(rank, nr) if m[r][c]), None)
            if piv is None:
                continue
            m[rank], m[piv] = m[piv], m[rank]
            pv = m[rank][c]
            for r in range(rank + 1, nr):
                if m[r][c]:
                    f = m[r][c]
                    m[r] = [pv * a - f * b for a, b in zip(m[r], m[rank])]
            rank += 1
            if rank == nr:
                break
        return rank

    def kernel(self) -> "RatMat":
        """Columns spanning the rational kernel {x : self @ x = 0}."""
        nr, nc = self.nrows, self.ncols
        m = [list(r) for r in self.rows]
        pivots: list[int] = []
        row = 0
        for c in range(nc):
            piv = next((r for r in range(row, nr) if m[r][c] != 0), None)
            if piv is None:
                continue
            m[row], m[piv] = m[piv], m[row]
            inv = 1 / m[row][c]
            m[row] = [a * inv for a in m[row]]
            for r in range(nr):
                if r != row and m[r][c] != 0:
                    f = m[r][c]
                    m[r] = [a - f * b for a, b in zip(m[r], m[row])]
            pivots.append(c)
            row += 1
        free = [c for c in range(nc) if c not in pivots]
        cols = []
        for fc in free:
            v = [Fraction(0)] * nc
            v[fc] = Fraction(1)
            for prow, pc in enumerate(pivots):
                v[pc] = -m[prow][fc]
            cols.append(v)
        return RatMat.from_columns(cols) if cols else RatMat([[] for _ in range(nc)])

    def leading_principal_minors(self) -> list[Fraction]:
        if not self.is_square():
            raise ValueError("minors of non-square matrix")
        return [
            self.submatrix(range(k), range(k)).det() for k in range(1, self.nrows + 1)
        ]

    def is_positive_definite(self) -> bool:
        """Sylvester test; requires a symmetric matrix."""
        if not self.is_symmetric():
            raise ValueError("positive-definiteness test needs a symmetric matrix")
        return all(mk > 0 for mk in self.leading_principal_minors())


def hstack(*mats: RatMat) -> RatMat:
    rows = mats[0].nrows
    if any(m.nrows != rows for m in mats):
        raise ValueError("hstack: row counts differ")
    return RatMat([sum((list(m.rows[i]) for m in mats), []) for i in range(rows)])


def vstack(*mats: RatMat) -> RatMat:
    cols = mats[0].ncols
    if any(m.ncols != cols for m in mats):
        raise ValueError("vstack: column counts differ")
    return RatMat([r for m in mats for r in m.rows])
