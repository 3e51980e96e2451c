"""Generators of admissible coisotropic branes used by the certification tests.

The four-torus family solves omega + F omega^{-1} F = 0 in closed form:
with the standard split form on T^4 and

    F = [[p*J, G], [-G^T, s*J]],   J = [[0, 1], [-1, 0]],

the equation reduces (via the 2x2 Cayley-Hamilton identity) to tr G = 0 and
det G = 1 + p*s; the rotation-invariance blocks vanish automatically once
the trace does.  The six-torus family takes a T^4-factor brane times a
primitive line in the remaining T^2, which is coisotropic with a
one-dimensional characteristic direction.
"""

import random
from fractions import Fraction
from math import gcd

from toruslift.brane import Brane
from toruslift.exact import RatMat, hstack, vstack
from toruslift.torus import Torus

J2 = RatMat([[0, 1], [-1, 0]])


def _rand_frac(rng, den_max=4):
    den = rng.randint(1, den_max)
    return Fraction(rng.randint(-den, den), den)


def t4_curvature(rng):
    p = rng.randint(-2, 2)
    s = rng.randint(-2, 2)
    a = rng.randint(-2, 2)
    b = rng.choice([1, -1])
    c = -(a * a + 1 + p * s) // b
    g = RatMat([[a, b], [c, -a]])
    return vstack(hstack(p * J2, g), hstack(-g.T, s * J2))


def _conn_from_curvature(f, rng):
    d = f.nrows
    sym = [[Fraction(0)] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            sym[i][j] = sym[j][i] = Fraction(rng.randint(-2, 2), 2)
    return Fraction(-1, 2) * f + RatMat(sym)


def t4_brane(rng):
    torus = Torus.from_period(RatMat.zeros(2, 2), RatMat.identity(2))
    f = t4_curvature(rng)
    return Brane(
        torus,
        RatMat.identity(4),
        offset=[_rand_frac(rng) for _ in range(4)],
        conn_quad=_conn_from_curvature(f, rng),
        conn_flat=[_rand_frac(rng) for _ in range(4)],
        xi_lin=[rng.randint(0, 1) for _ in range(4)],
    )


def t6_brane(rng):
    torus = Torus.from_period(RatMat.zeros(3, 3), RatMat.identity(3))
    i, j = rng.choice([(0, 1), (0, 2), (1, 2)])
    k = 3 - i - j
    u, v = 0, 0
    while (u, v) == (0, 0):
        u, v = rng.randint(-3, 3), rng.randint(-3, 3)
    g = gcd(u, v)
    u, v = u // g, v // g
    cols = []
    for amb in (i, j, 3 + i, 3 + j):
        e = [0] * 6
        e[amb] = 1
        cols.append(e)
    line = [0] * 6
    line[k], line[3 + k] = u, v
    cols.append(line)
    support = RatMat.from_columns(cols)

    f4 = t4_curvature(rng)
    f = vstack(
        hstack(f4, RatMat.zeros(4, 1)),
        hstack(RatMat.zeros(1, 4), RatMat.zeros(1, 1)),
    )
    return Brane(
        torus,
        support,
        offset=[_rand_frac(rng) for _ in range(6)],
        conn_quad=_conn_from_curvature(f, rng),
        conn_flat=[_rand_frac(rng) for _ in range(5)],
        xi_lin=[rng.randint(0, 1) for _ in range(5)],
    )


def coisotropic_sample(count_t4, count_t6, seed=20240811):
    rng = random.Random(seed)
    branes = [t4_brane(rng) for _ in range(count_t4)]
    branes += [t6_brane(rng) for _ in range(count_t6)]
    return branes


def graph_slopes(n, bound):
    """All nonsingular integer n x n slope matrices with |entries| <= bound."""
    from itertools import product

    out = []
    for entries in product(range(-bound, bound + 1), repeat=n * n):
        m = RatMat([entries[r * n:(r + 1) * n] for r in range(n)])
        if m.det() != 0:
            out.append(m)
    return out
