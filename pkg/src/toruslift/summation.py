"""Deterministic compensated summation and the two floating backends.

Accumulation order is part of this library's contract: series terms are
produced in a canonical order (sup-norm shells, lexicographic inside each
shell) and reduced with Neumaier-compensated chunk sums of a fixed size.
Partitioning work across 1, 2 or 4 workers assigns whole chunks; the final
reduction walks chunk results in index order, so the result is bit-identical
for every partition count by construction.

Two numeric contexts are provided:

* ``double`` - Python floats / complex (IEEE binary64), default tol 1e-10;
* ``dd`` - double-double-equivalent precision, realized as mpmath arithmetic
  at 106 bits (the width of a binary64 pair), default tol 1e-20.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

CHUNK_SIZE = 256


def neumaier_sum(values: Iterable[float]) -> float:
    """Compensated sequential sum (Neumaier's improved Kahan scheme)."""
    s = 0.0
    comp = 0.0
    for x in values:
        t = s + x
        if abs(s) >= abs(x):
            comp += (s - t) + x
        else:
            comp += (x - t) + s
        s = t
    return s + comp


def _chunks(seq: Sequence, size: int):
    for start in range(0, len(seq), size):
        yield seq[start : start + size]


def compensated_sum(values: Sequence, partitions: int = 1):
    """Deterministic chunked compensated sum of real or complex floats.

    ``partitions`` only decides how chunks would be dealt out to workers;
    chunk boundaries and the final reduction order are fixed by index, so
    the value is independent of it.  Passing it exercises that invariant.
    """
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    values = list(values)
    if not values:
        return 0.0
    is_complex = any(isinstance(v, complex) for v in values)
    chunk_list = list(_chunks(values, CHUNK_SIZE))
    # round-robin deal to workers, then gather per-chunk sums back in order
    slots: list = [None] * len(chunk_list)
    for w in range(partitions):
        for idx in range(w, len(chunk_list), partitions):
            ch = chunk_list[idx]
            if is_complex:
                slots[idx] = complex(
                    neumaier_sum(v.real if isinstance(v, complex) else v for v in ch),
                    neumaier_sum(v.imag if isinstance(v, complex) else 0.0 for v in ch),
                )
            else:
                slots[idx] = neumaier_sum(ch)
    if is_complex:
        return complex(
            neumaier_sum(s.real for s in slots), neumaier_sum(s.imag for s in slots)
        )
    return neumaier_sum(slots)


class DoubleContext:
    """IEEE binary64 backend (plain floats, cmath)."""

    name = "double"
    eps = 2.220446049250313e-16
    default_tol = 1e-10

    def real(self, x) -> float:
        if isinstance(x, Fraction):
            return float(x)  # correctly rounded by CPython
        return float(x)

    def to_complex(self, re, im=0) -> complex:
        return complex(self.real(re), self.real(im))

    def exp(self, z):
        if isinstance(z, complex):
            return cmath.exp(z)
        return math.exp(z)

    def sqrt(self, x):
        if isinstance(x, complex):
            return cmath.sqrt(x)
        return math.sqrt(x)

    @property
    def pi(self) -> float:
        return math.pi

    def abs(self, z) -> float:
        return abs(z)

    def sum(self, terms: Sequence, partitions: int = 1):
        return compensated_sum(terms, partitions)

    def as_builtin_complex(self, z) -> complex:
        return complex(z)

    def format_real(self, x) -> str:
        return repr(float(x))


class DDContext:
    """106-bit backend via mpmath (double-double equivalent width)."""

    name = "dd"
    prec = 106
    eps = 2.0 ** -105
    default_tol = 1e-20

    def __init__(self):
        ctx = mpmath.mp.clone()
        ctx.prec = self.prec
        self._mp = ctx

    def real(self, x):
        if isinstance(x, Fraction):
            return self._mp.mpf(x.numerator) / self._mp.mpf(x.denominator)
        return self._mp.mpf(x)

    def to_complex(self, re, im=0):
        return self._mp.mpc(self.real(re), self.real(im))

    def exp(self, z):
        return self._mp.exp(z)

    def sqrt(self, x):
        return self._mp.sqrt(x)

    @property
    def pi(self):
        return +self._mp.pi

    def abs(self, z):
        return self._mp.fabs(z)

    def sum(self, terms: Sequence, partitions: int = 1):
        # mpmath addition at fixed precision is deterministic in any given
        # order; keep the exact same chunked order as the double backend.
        if partitions < 1:
            raise ValueError("partitions must be >= 1")
        terms = list(terms)
        if not terms:
            return self._mp.mpf(0)
        chunk_list = list(_chunks(terms, CHUNK_SIZE))
        slots: list = [None] * len(chunk_list)
        for w in range(partitions):
            for idx in range(w, len(chunk_list), partitions):
                acc = self._mp.mpf(0)
                for t in chunk_list[idx]:
                    acc = acc + t
                slots[idx] = acc
        acc = self._mp.mpf(0)
        for s in slots:
            acc = acc + s
        return acc

    def as_builtin_complex(self, z) -> complex:
        return complex(z)

    def format_real(self, x) -> str:
        return mpmath.nstr(x, 28)


_CONTEXTS = {"double": DoubleContext(), "dd": DDContext()}


def get_context(name: str):
    try:
        return _CONTEXTS[name]
    except KeyError:
        raise ValueError(f"unknown precision {name!r}; expected 'double' or 'dd'") from None
