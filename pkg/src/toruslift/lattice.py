"""Integer lattice normal forms with unimodular witnesses.

Row Hermite form ``H = U @ M``, column Hermite form ``H = M @ V`` and Smith
form ``S = U @ M @ V`` all return their transforms, and ``|det U| = |det V|
= 1`` always holds (checked cheaply in tests, relied on everywhere).

Built on :class:`toruslift.exact.RatMat`; inputs must have integer entries.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product

from .errors import SingularModulus
from .exact import RatMat

__all__ = [
    "row_hnf",
    "column_hnf",
    "smith",
    "int_kernel",
    "saturate_columns",
    "cosets",
    "coset_reduce",
    "solve_integer_system",
]


def _as_int_matrix(m: RatMat) -> list[list[int]]:
    return m.to_int_rows()


def row_hnf(m: RatMat) -> tuple[RatMat, RatMat]:
    """Row Hermite normal form.

    Returns (H, U) with H = U @ M, U unimodular.  Pivots are positive,
    entries below a pivot are zero and entries above it are reduced into
    [0, pivot).  Pivot selection is deterministic (smallest |value|, first
    on ties), so the output is a canonical form of the row span.
    """
    a = _as_int_matrix(m)
    nr, nc = len(a), len(a[0]) if a else 0
    u = [[int(i == j) for j in range(nr)] for i in range(nr)]

    def swap(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def addmul(dst, src, q):
        # row_dst += q * row_src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def negate(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    row = 0
    for col in range(nc):
        if row == nr:
            break
        # eliminate below (row, col) by repeated division
        while True:
            nz = [i for i in range(row, nr) if a[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(a[i][col]), i))
            if piv != row:
                swap(row, piv)
            done = True
            for i in range(row + 1, nr):
                if a[i][col] != 0:
                    q = -(a[i][col] // a[row][col])
                    addmul(i, row, q)
                    if a[i][col] != 0:
                        done = False
            if done:
                break
        if row < nr and a[row][col] != 0:
            if a[row][col] < 0:
                negate(row)
            for i in range(row):
                q = -(a[i][col] // a[row][col])
                if q:
                    addmul(i, row, q)
            row += 1
    return RatMat(a), RatMat(u)


def column_hnf(m: RatMat) -> tuple[RatMat, RatMat]:
    """Column Hermite normal form: (H, V) with H = M @ V."""
    h_t, u = row_hnf(m.T)
    return h_t.T, u.T


def smith(m: RatMat) -> tuple[RatMat, RatMat, RatMat]:
    """Smith normal form.

    Returns (S, U, V) with S = U @ M @ V diagonal, s_1 | s_2 | ... >= 0.
    """
    a = _as_int_matrix(m)
    nr = len(a)
    nc = len(a[0]) if a else 0
    u = [[int(i == j) for j in range(nr)] for i in range(nr)]
    v = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def col_swap(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def row_addmul(dst, src, q):
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def col_addmul(dst, src, q):
        for r in a:
            r[dst] += q * r[src]
        for r in v:
            r[dst] += q * r[src]

    def row_negate(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    n = min(nr, nc)
    rank = 0
    for t in range(n):
        # find a nonzero pivot in the trailing block
        entries = [
            (abs(a[i][j]), i, j)
            for i in range(t, nr)
            for j in range(t, nc)
            if a[i][j] != 0
        ]
        if not entries:
            break
        _, pi, pj = min(entries)
        row_swap(t, pi)
        col_swap(t, pj)
        while True:
            # clear column t
            for i in range(t + 1, nr):
                if a[i][t] != 0:
                    row_addmul(i, t, -(a[i][t] // a[t][t]))
            if any(a[i][t] != 0 for i in range(t + 1, nr)):
                _, pi = min((abs(a[i][t]), i) for i in range(t, nr) if a[i][t] != 0)
                row_swap(t, pi)
                continue
            # clear row t (cannot disturb the already-cleared column: its
            # below-pivot entries are zero, so col ops add nothing there)
            for j in range(t + 1, nc):
                if a[t][j] != 0:
                    col_addmul(j, t, -(a[t][j] // a[t][t]))
            if any(a[t][j] != 0 for j in range(t + 1, nc)):
                _, pj = min((abs(a[t][j]), j) for j in range(t, nc) if a[t][j] != 0)
                col_swap(t, pj)
                continue
            break
        if a[t][t] < 0:
            row_negate(t)
        rank = t + 1

    # enforce divisibility s_i | s_j via the standard pairwise 2x2 reduction
    # diag(x, y) -> diag(gcd(x, y), lcm(x, y))
    for i in range(rank):
        for j in range(i + 1, rank):
            if a[j][j] % a[i][i] == 0:
                continue
            col_addmul(i, j, 1)  # block now [[x, 0], [y, y]]
            # Euclid on column i entries (rows i and j)
            while a[j][i] != 0:
                q = a[i][i] // a[j][i]
                row_addmul(i, j, -q)
                if a[i][i] == 0:
                    row_swap(i, j)
                    break
                if a[j][i] != 0:
                    row_addmul(j, i, -(a[j][i] // a[i][i]))
            # block is [[g, *], [0, ±lcm]]; g divides the fill-in exactly
            if a[i][j] != 0:
                col_addmul(j, i, -(a[i][j] // a[i][i]))
            if a[i][i] < 0:
                row_negate(i)
            if a[j][j] < 0:
                row_negate(j)
    return RatMat(a), RatMat(u), RatMat(v)


def int_kernel(m: RatMat) -> RatMat:
    """Basis (columns) of the integer kernel {x in Z^c : M x = 0}.

    The basis is primitive: it also spans the rational kernel, so it is a
    basis of the saturated kernel lattice.
    """
    s, _, v = smith(m)
    n = min(s.nrows, s.ncols)
    r = sum(1 for i in range(n) if s[i, i] != 0)
    cols = [v.col(j) for j in range(r, v.ncols)]
    if not cols:
        return RatMat([[] for _ in range(m.ncols)])
    return RatMat.from_columns(cols)


def saturate_columns(m: RatMat) -> RatMat:
    """Basis of the saturation span_Q(columns of M) ∩ Z^r, as columns."""
    s, u, _ = smith(m)
    n = min(s.nrows, s.ncols)
    r = sum(1 for i in range(n) if s[i, i] != 0)
    p = u.inv()
    cols = [p.col(j) for j in range(r)]
    if not cols:
        return RatMat([[] for _ in range(m.nrows)])
    return RatMat.from_columns(cols)


@lru_cache(maxsize=256)
def _coset_data(m: RatMat):
    if not m.is_square():
        raise SingularModulus("coset enumeration needs a square integer matrix")
    d = m.det()
    if d == 0:
        raise SingularModulus("coset enumeration needs a nonsingular matrix")
    h, _ = column_hnf(m)
    # h is lower triangular with positive diagonal (full rank square case)
    diag = [int(h[i, i]) for i in range(h.nrows)]
    return h, diag


def coset_reduce(m: RatMat, x) -> tuple[int, ...]:
    """Canonical representative of integer vector x in Z^n / (M Z^n)."""
    h, _ = _coset_data(m)
    n = h.nrows
    y = [int(v) for v in x]
    for i in range(n):
        q = y[i] // int(h[i, i])
        if q:
            for r in range(i, n):
                y[r] -= q * int(h[r, i])
    return tuple(y)


def cosets(m: RatMat) -> list[tuple[int, ...]]:
    """Canonical representatives of Z^n / (M Z^n), lexicographically sorted.

    The count is |det M|; raises SingularModulus when det M = 0.
    """
    h, diag = _coset_data(m)
    n = h.nrows
    reps = []
    for box in product(*(range(d) for d in diag)):
        # box coordinates are taken in the triangular fundamental domain
        reps.append(coset_reduce(m, box))
    reps = sorted(set(reps))
    return reps


def solve_integer_system(a: RatMat, w) -> tuple[Fraction, ...]:
    """One rational solution x of A x = w (A integer), via the Smith form.

    Raises ValueError when the system is inconsistent.
    """
    s, u, v = smith(a)
    rhs = u @ tuple(Fraction(x) if not isinstance(x, Fraction) else x for x in w)
    n = min(s.nrows, s.ncols)
    y = [Fraction(0)] * s.ncols
    for i in range(s.nrows):
        si = s[i, i] if i < n else Fraction(0)
        if si != 0:
            y[i] = rhs[i] / si
        elif rhs[i] != 0:
            raise ValueError("inconsistent integer linear system")
    return v @ y
