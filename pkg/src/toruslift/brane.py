"""Linear branes: subtori with unitary connections and a sign structure.

A brane on a torus of real dimension 2N is stored as

* ``support``  -- integer 2N x d matrix whose columns generate a saturated
  rank-d sublattice (the tangent directions of the subtorus),
* ``offset``   -- a rational base point of the subtorus,
* ``conn_quad``-- rational d x d matrix N giving the connection 1-form
  ``2 pi i (t^T N dt + phi^T dt)`` in support coordinates t
  (a point of the subtorus is offset + support @ t),
* ``conn_flat``-- the flat part phi (rational d-vector, kept mod 1),
* ``xi_lin``   -- sign bits on the support generators.

The curvature Gram F = N^T - N must have integer entries.  The sign
function on the whole support lattice is

    xi(m) = sum_{i<j} F_ij m_i m_j + xi_lin . m   (mod 2),

which satisfies xi(m+m') - xi(m) - xi(m') = F(m, m') mod 2 for every pair;
different admissible sign functions for the same F differ by a linear
functional mod 2, and flipping bits translates the lift of the brane by a
half-lattice covector.

Conventions (locked by the convention tests in tests/test_brane.py):

* transition over a lattice shift m:
      e_m(t) = (-1)^xi(m) exp(-2 pi i (m^T N t + 1/2 m^T N m)),
  so a graph brane over slope matrix D with N = -A/2 transports sections by
  (-1)^xi(m) e^{pi i <m, A r>}.
* holonomy of the straight loop with direction gamma based at t0:
      hol = (-1)^xi(gamma) exp(2 pi i (t0^T F gamma - phi . gamma)).
* the lift of a brane pairs each ambient dual coordinate x_hat against the
  support loops through x = offset + support @ t by
      support^T x_hat = xi_lin / 2 - phi + F^T t  (mod 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InadmissibleD, InvalidBrane, InvalidXi
from .exact import RatMat, hstack, ratvec, vec_add, vec_dot, vec_sub, vstack
from .lattice import column_hnf, int_kernel, smith
from .torus import DoubledTorus, Torus, double_torus


def admissible_d(d: RatMat, torus: Torus, require_positive: bool = True) -> RatMat:
    """Check the slope matrix of a graph brane and return A = Re(tau)D - D^T Re(tau)^T.

    Requirements: D integer and nonsingular, Im(tau) D symmetric (equal to
    D^T Im(tau)^T) and, unless ``require_positive`` is disabled, positive
    definite; A must be an integer matrix.  Raises InadmissibleD naming the
    first failed condition.
    """
    re, im = torus.period()
    n = im.nrows
    if d.shape != (n, n):
        raise InadmissibleD(f"slope matrix must be {n}x{n}, got {d.shape}")
    if not d.is_integer():
        raise InadmissibleD("slope matrix must have integer entries")
    if d.det() == 0:
        raise InadmissibleD("slope matrix must be nonsingular")
    prod = im @ d
    if prod != prod.T:
        raise InadmissibleD("Im(tau) D is not symmetric")
    if require_positive and not prod.is_positive_definite():
        raise InadmissibleD("Im(tau) D is not positive definite")
    a = re @ d - d.T @ re.T
    if not a.is_integer():
        raise InadmissibleD("Re(tau) D - D^T Re(tau)^T is not an integer matrix")
    return a


def _as_frac_vec(v, length, what):
    vec = ratvec(v)
    if len(vec) != length:
        raise ValueError(f"{what} must have length {length}, got {len(vec)}")
    return vec


def _mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


class Brane:
    """A linear brane; the constructor canonicalizes the support basis.

    The support is rewritten in column Hermite normal form and the offset
    is reduced modulo 1 and modulo the support directions, so two branes
    with the same underlying subtorus compare equal on their supports.
    The connection data is transported along with the basis change.
    """

    def __init__(self, torus, support: RatMat, offset=None, conn_quad=None,
                 conn_flat=None, xi_lin=None):
        if not isinstance(torus, (Torus, DoubledTorus)):
            raise TypeError("torus must be a Torus or DoubledTorus")
        dim2 = torus.dim
        if support.nrows != dim2:
            raise ValueError(
                f"support must have {dim2} rows for this torus, got {support.nrows}"
            )
        d = support.ncols
        if d == 0 or d > dim2:
            raise InvalidBrane(f"support rank {d} is out of range 1..{dim2}")
        if not support.is_integer():
            raise InvalidBrane("support basis must have integer entries")
        if support.rank() != d:
            raise InvalidBrane("support basis columns are linearly dependent")
        diag, _, _ = smith(support)
        if any(diag[i, i] != 1 for i in range(d)):
            raise InvalidBrane("support basis does not generate a saturated lattice")

        offset = _as_frac_vec(offset if offset is not None else [0] * dim2,
                              dim2, "offset")
        n_mat = conn_quad if conn_quad is not None else RatMat.zeros(d, d)
        if n_mat.shape != (d, d):
            raise ValueError(f"conn_quad must be {d}x{d}, got {n_mat.shape}")
        phi = _as_frac_vec(conn_flat if conn_flat is not None else [0] * d,
                           d, "conn_flat")
        bits = tuple(int(b) for b in (xi_lin if xi_lin is not None else [0] * d))
        if len(bits) != d or any(b not in (0, 1) for b in bits):
            raise InvalidXi("xi_lin must be a 0/1 vector on the support generators")

        f_old = n_mat.T - n_mat
        if not f_old.is_integer():
            raise InvalidBrane("curvature N^T - N is not integral on the lattice")

        # canonical basis: column Hermite form, connection data transported
        hnf, v = column_hnf(support)
        n_new = v.T @ n_mat @ v
        phi_new = v.T @ phi
        bits_new = tuple(
            _xi_of(f_old, bits, tuple(int(v[i, j]) for i in range(d)))
            for j in range(d)
        )
        f_new = n_new.T - n_new

        # canonical offset: reduce mod 1, then kill the pivot-row entries by
        # sliding along the support.  Moving the chart origin by -H @ shift
        # re-bases the flat part as phi -> phi - F @ shift (this is forced by
        # invariance of the holonomy of every lattice loop).
        off = tuple(_mod1(x) for x in offset)
        pivots = []
        for j in range(d):
            row = next(i for i in range(dim2) if hnf[i, j] != 0)
            pivots.append(row)
        shift = [Fraction(0)] * d
        for j in range(d):
            acc = off[pivots[j]]
            for jj in range(j):
                acc -= hnf[pivots[j], jj] * shift[jj]
            shift[j] = acc / hnf[pivots[j], j]
        moved = hnf @ tuple(shift)
        off = tuple(_mod1(x - m) for x, m in zip(off, moved))
        phi_new = vec_sub(phi_new, f_new @ tuple(shift))

        self.torus = torus
        self.support = hnf
        self.offset = off
        self.conn_quad = n_new
        self.conn_flat = tuple(_mod1(x) for x in phi_new)
        self.xi_lin = bits_new
        self.f_gram = f_new

    # -- basic structure ---------------------------------------------------

    @property
    def dim(self) -> int:
        return self.support.ncols

    def __eq__(self, other):
        if not isinstance(other, Brane):
            return NotImplemented
        return (
            self.torus == other.torus
            and self.support == other.support
            and self.offset == other.offset
            and self.conn_quad == other.conn_quad
            and self.conn_flat == other.conn_flat
            and self.xi_lin == other.xi_lin
        )

    def __hash__(self):
        return hash((self.support, self.offset, self.conn_flat, self.xi_lin))

    def same_support(self, other: "Brane") -> bool:
        """Set equality of the underlying subtori (basis + offset are canonical)."""
        return (
            self.torus == other.torus
            and self.support == other.support
            and self.offset == other.offset
        )

    def __repr__(self):
        return (f"Brane(dim={self.dim}, support={self.support!r}, "
                f"offset={self.offset!r})")

    # -- sign structure and holonomy ----------------------------------------

    def xi_value(self, m) -> int:
        return _xi_of(self.f_gram, self.xi_lin, tuple(int(x) for x in m))

    def transition_turns(self, m, t) -> Fraction:
        """Exact phase (in turns, mod 1) of the transition over lattice shift m
        at support coordinate t; the unit-modulus transition value is
        (-1)^xi(m) exp(-2 pi i (m^T N t + m^T N m / 2))."""
        m = ratvec(m)
        t = ratvec(t)
        quad = vec_dot(m, self.conn_quad @ t) + Fraction(1, 2) * vec_dot(
            m, self.conn_quad @ m
        )
        return _mod1(Fraction(self.xi_value(m), 2) - quad)

    def holonomy_turns(self, gamma, base=None) -> Fraction:
        """Exact holonomy phase (turns, mod 1) of the straight lattice loop
        gamma based at support coordinate ``base`` (default 0, which is the
        chart origin, i.e. the offset point)."""
        gamma = ratvec(gamma)
        base = ratvec(base) if base is not None else tuple(
            Fraction(0) for _ in range(self.dim)
        )
        lin = vec_dot(base, self.f_gram @ gamma) - vec_dot(self.conn_flat, gamma)
        return _mod1(Fraction(self.xi_value(gamma), 2) + lin)

    def holonomy(self, gamma, base=None) -> complex:
        import cmath

        return cmath.exp(2j * cmath.pi * float(self.holonomy_turns(gamma, base)))


def _xi_of(f_gram: RatMat, bits, m) -> int:
    d = len(m)
    quad = 0
    for i in range(d):
        for j in range(i + 1, d):
            quad += int(f_gram[i, j]) * m[i] * m[j]
    lin = sum(b * mi for b, mi in zip(bits, m))
    return (quad + lin) % 2


def check_xi_pairs(brane: Brane, declared) -> None:
    """Check declared values of xi on sums of generator pairs.

    ``declared`` maps (i, j) index pairs to claimed bits for xi(e_i + e_j);
    a mismatch with the cocycle rule raises InvalidXi naming the pair.
    """
    for (i, j), bit in sorted(declared.items()):
        m = [0] * brane.dim
        m[i] += 1
        m[j] += 1
        actual = brane.xi_value(m)
        if actual != int(bit) % 2:
            raise InvalidXi(
                f"xi declaration for generator pair ({i}, {j}) is {int(bit)} but the "
                f"cocycle rule forces {actual}"
            )


# -- constructors ------------------------------------------------------------


def graph_brane(torus: Torus, d_mat: RatMat, xi_lin=None, phi=None) -> Brane:
    """Brane supported on {theta = -D r} with the curvature matching the
    restricted background 2-form; requires an admissible slope matrix."""
    a = admissible_d(d_mat, torus)
    n = d_mat.nrows
    support = vstack(RatMat.identity(n), -d_mat)
    conn_quad = Fraction(-1, 2) * a
    return Brane(torus, support, conn_quad=conn_quad, conn_flat=phi, xi_lin=xi_lin)


def zero_section_brane(torus: Torus) -> Brane:
    """The brane supported on {theta = 0} with the trivial flat connection."""
    if not torus.is_split:
        raise InvalidBrane("the zero section needs a split torus")
    n = torus.dim // 2
    support = vstack(RatMat.identity(n), RatMat.zeros(n, n))
    return Brane(torus, support)


def fiber_brane(torus: Torus, position, phi=None) -> Brane:
    """Brane supported on a fiber {r = position} x T_theta with a flat
    connection 2 pi i phi . d theta."""
    if not torus.is_split:
        raise InvalidBrane("fiber branes need a split torus")
    n = torus.dim // 2
    support = vstack(RatMat.zeros(n, n), RatMat.identity(n))
    position = _as_frac_vec(position, n, "position")
    offset = position + tuple(Fraction(0) for _ in range(n))
    return Brane(torus, support, offset=offset, conn_flat=phi)


def full_torus_brane(torus, conn_quad: RatMat, phi=None, xi_lin=None,
                     offset=None) -> Brane:
    """Space-filling brane with a given connection matrix."""
    support = RatMat.identity(torus.dim)
    return Brane(torus, support, offset=offset, conn_quad=conn_quad,
                 conn_flat=phi, xi_lin=xi_lin)


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class BraneReport:
    passed: bool
    failures: tuple

    def __bool__(self):
        return self.passed


def _report(failures) -> BraneReport:
    return BraneReport(not failures, tuple(failures))


def validate_lagrangian(brane: Brane) -> BraneReport:
    """Exact check: middle dimension, vanishing restricted symplectic form,
    curvature opposite to the restricted background 2-form."""
    torus = brane.torus
    u = brane.support
    failures = []
    if brane.dim * 2 != torus.dim:
        failures.append(
            f"dimension {brane.dim} is not half the torus dimension {torus.dim}"
        )
    if not (u.T @ torus.omega @ u).is_zero():
        failures.append("symplectic form does not vanish on the support")
    b_res = u.T @ torus.b_field @ u
    if brane.f_gram != -b_res:
        failures.append(
            "curvature does not equal the negated restriction of the B-field"
        )
    return _report(failures)


def validate_coisotropic(brane: Brane) -> BraneReport:
    """Exact check that the brane is coisotropic with compatible curvature.

    The support must contain its own symplectic complement.  Then, with G
    the restricted symplectic Gram and H = F + B restricted: (1) H vanishes
    on the null directions of G, and (2) the square condition G + c^T H = 0
    where c expresses the transverse endomorphism in support coordinates;
    the endomorphism must also preserve the support.
    """
    torus = brane.torus
    u = brane.support
    failures = []
    # coisotropy proper: the symplectic complement of the support must be
    # tangent to the support (exact rank computation over Q)
    ann = int_kernel(u.T)
    if ann.ncols and hstack(u, torus.omega_inv() @ ann).rank() != u.ncols:
        failures.append("symplectic complement of the support is not tangent to it")
    g = u.T @ torus.omega @ u
    h = brane.f_gram + u.T @ torus.b_field @ u
    iso = g.kernel()  # columns: null directions of the restricted form
    if iso.ncols and not (iso.T @ h).is_zero():
        failures.append("F + B does not vanish on the isotropic directions")
    # transverse square: solve for the endomorphism ambient image and demand
    # that it stays tangent to the support.
    gram_inv = (u.T @ u).inv()
    e_amb = u @ gram_inv @ h.T
    v_amb = -(torus.omega.inv() @ e_amb)
    if hstack(u, v_amb).rank() != u.ncols:
        failures.append("transverse endomorphism does not preserve the support")
    else:
        c = gram_inv @ (u.T @ v_amb)
        if not (g + c.T @ h).is_zero():
            failures.append("transverse square condition fails on the support")
    return _report(failures)


# -- lifting -----------------------------------------------------------------


def lift(brane: Brane) -> Brane:
    """Lift a validated brane to the doubled torus.

    The support tangent consists of pairs (u, f) with u tangent to the brane
    and f pairing against support vectors through the curvature; the dual
    offset solves the holonomy-matching equation on the generators.  The
    connection is pulled back along the projection to the base torus.
    """
    torus = brane.torus
    if not isinstance(torus, Torus):
        raise InvalidBrane("only branes on a base torus can be lifted")
    lag = validate_lagrangian(brane)
    coi = validate_coisotropic(brane)
    if not (lag.passed or coi.passed):
        raise InvalidBrane(
            "brane passes neither validation; lagrangian: "
            + "; ".join(lag.failures)
            + " / coisotropic: "
            + "; ".join(coi.failures)
        )
    doubled = double_torus(torus)
    u = brane.support
    dim2 = torus.dim
    d = brane.dim
    f = brane.f_gram

    # Tangent lattice of the lift: {(U m, b) : U^T b = F^T m} plus the dual
    # directions annihilating the support.  Since the support is primitive,
    # the Smith form of U^T has unit diagonal, so the particular solutions
    # below are integral and the block basis generates the full lattice.
    kernel = int_kernel(u.T)
    s, p_uni, q_uni = smith(u.T)
    assert all(s[i, i] == 1 for i in range(d))
    q_left = q_uni.submatrix(range(dim2), range(d))
    bmat = q_left @ (p_uni @ f.T)
    assert u.T @ bmat == f.T
    w = vstack(
        hstack(u, RatMat.zeros(dim2, kernel.ncols)),
        hstack(bmat, kernel),
    )

    rho = tuple(
        Fraction(bit, 2) - ph for bit, ph in zip(brane.xi_lin, brane.conn_flat)
    )
    xhat = q_left @ (p_uni @ rho)
    assert u.T @ xhat == ratvec(rho)
    offset = brane.offset + tuple(xhat)

    # the projection of the lift tangent onto the brane support is [I | 0]
    # in this basis, so the connection data extends by zero on the kernel.
    zeros_k = RatMat.zeros(d, kernel.ncols)
    n_lift = hstack(brane.conn_quad, zeros_k)
    if kernel.ncols:
        n_lift = vstack(
            n_lift,
            hstack(RatMat.zeros(kernel.ncols, d),
                   RatMat.zeros(kernel.ncols, kernel.ncols)),
        )
    phi_lift = brane.conn_flat + tuple(Fraction(0) for _ in range(kernel.ncols))
    xi_lift = brane.xi_lin + (0,) * kernel.ncols
    lifted = Brane(doubled, w, offset=offset, conn_quad=n_lift,
                   conn_flat=phi_lift, xi_lin=xi_lift)
    # pulled-back curvature must agree with the brane condition in the double
    assert lifted.f_gram == -(
        lifted.support.T @ doubled.b_field @ lifted.support
    ), "lifted curvature does not match the doubled background form"
    return lifted


def verify_lift_lagrangian(lifted: Brane) -> bool:
    """True iff the lift has half dimension and the doubled symplectic form
    restricts to exactly zero on it."""
    torus = lifted.torus
    if not isinstance(torus, DoubledTorus):
        raise TypeError("expected a brane on a doubled torus")
    if 2 * lifted.dim != torus.dim:
        return False
    w = lifted.support
    return (w.T @ torus.omega @ w).is_zero()


def verify_lift_complex(lifted: Brane) -> bool:
    """True iff the doubled complex structure maps the lift tangent space
    onto itself (exact rank test)."""
    torus = lifted.torus
    if not isinstance(torus, DoubledTorus):
        raise TypeError("expected a brane on a doubled torus")
    w = lifted.support
    jw = torus.j_mat @ w
    return hstack(w, jw).rank() == w.ncols


# -- the B-twist -------------------------------------------------------------


def twist_brane(lifted: Brane) -> Brane:
    """Tensor the connection with the canonical connection whose curvature is
    twice the pairing 2-form; the result lives on the doubled torus with the
    background 2-form sign reversed.  Twisting twice shifts the curvature by
    four times the restricted pairing form (the square is not the identity).
    """
    torus = lifted.torus
    if not isinstance(torus, DoubledTorus):
        raise InvalidBrane("the twist acts on branes on a doubled torus")
    half = torus.dim // 2
    w = lifted.support
    w_x = w.submatrix(range(half), range(w.ncols))
    w_hat = w.submatrix(range(half, torus.dim), range(w.ncols))
    o_x = lifted.offset[:half]
    n_new = lifted.conn_quad - w_x.T @ w_hat
    phi_new = vec_add(lifted.conn_flat, tuple(-x for x in (w_hat.T @ o_x)))
    return Brane(
        torus.flipped(),
        w,
        offset=lifted.offset,
        conn_quad=n_new,
        conn_flat=phi_new,
        xi_lin=lifted.xi_lin,
    )


# -- worked example ----------------------------------------------------------


def t4_space_filling_brane() -> Brane:
    """The standard four-torus space-filling brane with connection
    d + 2 pi i (r1 d theta2 - r2 d theta1)."""
    torus = Torus.from_period(RatMat.zeros(2, 2), RatMat.identity(2))
    n_mat = RatMat([
        [0, 0, 0, 1],
        [0, 0, -1, 0],
        [0, 0, 0, 0],
        [0, 0, 0, 0],
    ])
    return full_torus_brane(torus, n_mat)
