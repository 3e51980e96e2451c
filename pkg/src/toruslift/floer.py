"""Intersection bases, certified product sums, and the u-part subspace.

The objects here live on a split torus T^{2n} with modulus tau (an n x n
complex matrix given by exact rational real/imaginary parts) and on its
twisted double.  Graph branes are indexed by integer slope matrices D with
Im(tau) D symmetric positive definite and A := Re(tau) D - D^T Re(tau)^T
integral; transversal pairs of graphs reduce, after tensoring, to the pair
(zero-section, graph of the difference map).

Key quantities:

* ``mu2_base``    -- the coefficient of the short generator in the triangle
  product on the base torus, a certified n-dimensional lattice sum.
* ``mu2_double``  -- the corresponding coefficient on the doubled torus, a
  certified 2n-dimensional lattice sum indexed by a pair of coset classes.
* ``u_part_basis``/``project_u`` -- the span of the fiber-summed generators
  and the averaging projector onto it.
* ``verify_usub`` -- checks that the fiber-summed double sum factors into
  sqrt(det(2 Im tau D)) theta(u) conj-theta(v) times an explicit
  trivialization factor, with the mirror coordinates

      u = tau^T (r - kappa) - phi,      v = -conj(tau)^T kappa - theta_hat - phi.

* ``u_part_self`` -- splits the complexified tangent space of a lifted brane
  under the doubled complex structure and reports the anti-holomorphic
  exterior-power dimensions.

All phases are assembled in exact rational "turns" (fractions of a full
circle) and reduced mod 1 before any floating-point conversion; decay
exponents are exact rationals times pi.  Summation order is the canonical
shell order, so results are bitwise reproducible across partition counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .brane import Brane
from .errors import (
    InadmissibleD,
    InvalidBrane,
    JNotPreserving,
    NonTransversal,
    NotPositiveDefinite,
    UnsupportedTriple,
)
from .exact import RatMat, ratvec, vec_add, vec_dot, vec_sub
from .lattice import coset_reduce, cosets, int_kernel, solve_integer_system
from .summation import get_context
from .theta import (
    DEFAULT_MAX_RADIUS,
    CertifiedValue,
    ThetaSpec,
    iter_ball,
    theta_bar_dk,
    theta_dk,
    truncation_radius,
)
from .torus import DoubledTorus, MirrorCoords


def _mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def _resolved_tol(tol, ctx) -> float:
    return ctx.default_tol if tol is None else float(tol)


def _int_vec(v, n: int, name: str) -> tuple:
    out = tuple(int(c) for c in v)
    if len(out) != n:
        raise ValueError(f"{name} must have length {n}")
    return out


def _rat_vec(v, n: int, name: str) -> tuple:
    out = ratvec(v)
    if len(out) != n:
        raise ValueError(f"{name} must have length {n}")
    return out


def _pairing_form(tau_re: RatMat, d_mat: RatMat) -> RatMat:
    return tau_re @ d_mat - d_mat.T @ tau_re.T


def _check_slope(tau_re: RatMat, tau_im: RatMat, d_mat: RatMat) -> RatMat:
    """Slope admissibility; returns the integral pairing form A."""
    n = tau_im.nrows
    if d_mat.shape != (n, n):
        raise InadmissibleD(f"slope matrix must be {n}x{n}, got {d_mat.shape}")
    if not d_mat.is_integer():
        raise InadmissibleD("slope matrix must have integer entries")
    if d_mat.det() == 0:
        raise InadmissibleD("slope matrix must be nonsingular")
    qf = tau_im @ d_mat
    if qf.T != qf or not qf.is_positive_definite():
        raise NotPositiveDefinite(
            "Im(tau) D must be symmetric positive definite"
        )
    a = _pairing_form(tau_re, d_mat)
    if not a.is_integer():
        raise InadmissibleD("Re(tau) D - D^T Re(tau)^T must be integral")
    return a


def _xi_bits(xi_lin, n: int) -> tuple:
    bits = tuple(int(b) for b in xi_lin) or (0,) * n
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ValueError("xi_lin must be a 0/1 vector of length n")
    return bits


def _xi_value(a_form: RatMat, bits, m) -> int:
    n = len(bits)
    total = sum(
        int(a_form[i, j]) * m[i] * m[j]
        for i in range(n)
        for j in range(i + 1, n)
    )
    total += sum(b * c for b, c in zip(bits, m))
    return total % 2


# -- intersection bases --------------------------------------------------------


@dataclass(frozen=True)
class FloerBasisElement:
    """One intersection point with its coset indices.

    ``point`` is exact-rational, length 2n on the base torus and 4n on the
    double (coordinate order r, theta, r-hat, theta-hat); ``l`` is None for
    base points.
    """

    point: tuple
    k: tuple
    l: Optional[tuple] = None


@dataclass(frozen=True)
class FloerVector:
    basis: tuple
    coeffs: tuple

    def __post_init__(self):
        if len(self.basis) != len(self.coeffs):
            raise ValueError("coefficient and basis lengths differ")
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    def scaled(self, factor) -> "FloerVector":
        return FloerVector(self.basis, tuple(factor * c for c in self.coeffs))

    def __add__(self, other: "FloerVector") -> "FloerVector":
        if self.basis != other.basis:
            raise ValueError("vectors live on different bases")
        return FloerVector(
            self.basis, tuple(a + b for a, b in zip(self.coeffs, other.coeffs))
        )


def intersections(d_from: RatMat, d_to: RatMat, *, tau_re: Optional[RatMat] = None,
                  doubled: bool = False) -> list:
    """Intersection points of two graph branes, via the difference map.

    Pairs of graphs are tensor-reduced to (zero-section, graph of
    ``d_to - d_from``); on the base there is one point r = Delta^{-1} k per
    coset k, on the double additionally theta-hat = (Delta^T)^{-1}(A k' + l)
    with k' = Delta^{-1} k.  Raises NonTransversal when the difference map
    is singular.
    """
    delta = d_to - d_from
    if not delta.is_integer():
        raise InadmissibleD("slope matrices must have integer entries")
    if delta.det() == 0:
        raise NonTransversal("the difference of the slope matrices is singular")
    n = delta.nrows
    delta_inv = delta.inv()
    zero = (Fraction(0),) * n
    out = []
    if not doubled:
        for k in cosets(delta):
            p = delta_inv @ k
            out.append(FloerBasisElement(tuple(p) + zero, k))
        return out
    if tau_re is None:
        raise ValueError("doubled intersections need the real part of the modulus")
    a_form = _pairing_form(tau_re, delta)
    if not a_form.is_integer():
        raise InadmissibleD("Re(tau) D - D^T Re(tau)^T must be integral")
    dt_inv = delta.T.inv()
    for k in cosets(delta):
        p = delta_inv @ k
        ap = a_form @ p
        for l in cosets(delta.T):
            q = dt_inv @ vec_add(ap, ratvec(l))
            point = tuple(p) + zero + zero + tuple(q)
            out.append(FloerBasisElement(point, k, l))
    return out


# -- evaluation data on the double ---------------------------------------------


@dataclass(frozen=True)
class DoublePoint:
    """Evaluation data (r, phi, theta_hat, kappa) for the doubled products.

    r and phi locate the fiber brane on the base (position and flat
    connection), theta_hat and kappa the corresponding data in the dual
    directions.  All entries are exact rationals.
    """

    r: tuple
    phi: tuple
    theta_hat: tuple
    kappa: tuple

    def __post_init__(self):
        object.__setattr__(self, "r", ratvec(self.r))
        object.__setattr__(self, "phi", ratvec(self.phi))
        object.__setattr__(self, "theta_hat", ratvec(self.theta_hat))
        object.__setattr__(self, "kappa", ratvec(self.kappa))
        n = len(self.r)
        for name in ("phi", "theta_hat", "kappa"):
            if len(getattr(self, name)) != n:
                raise ValueError("point components must all have length n")

    @property
    def n(self) -> int:
        return len(self.r)

    @classmethod
    def zero(cls, n: int) -> "DoublePoint":
        z = (0,) * n
        return cls(z, z, z, z)


def mirror_coordinates(tau_re: RatMat, tau_im: RatMat,
                       pt: DoublePoint) -> tuple:
    """The holomorphic coordinates (u, v) of an evaluation point, as exact
    (Re, Im) rational pairs accepted by the theta evaluators."""
    mc = MirrorCoords(tau_re, tau_im)
    u_re, u_im = mc.u_coord(pt.r, pt.kappa, pt.phi)
    v_re, v_im = mc.v_coord(pt.kappa, pt.theta_hat, pt.phi)
    return list(zip(u_re, u_im)), list(zip(v_re, v_im))


# -- the base product sum ------------------------------------------------------


def mu2_base(tau_re: RatMat, tau_im: RatMat, d_mat: RatMat, k, r, phi, *,
             xi_lin=(), tol: Optional[float] = None, context: str = "double",
             partitions: int = 1,
             max_radius: int = DEFAULT_MAX_RADIUS) -> CertifiedValue:
    """Coefficient of the short generator in the base triangle product.

    The sum runs over the lattice of triangle classes:

        sum_m (-1)^xi(m) e^{pi i <p, A m>} e^{pi i <tau D (m-p), m-p>}
              e^{2 pi i <D m - k, tau^T r - phi>}

    times the prefactor e^{pi i <tau D r, r>} e^{-2 pi i <D r, phi>}, with
    p = D^{-1} k.  The result carries the truncation certificate of the sum;
    the prefactor has modulus at most one, so the tail bound still applies.
    """
    a_form = _check_slope(tau_re, tau_im, d_mat)
    n = d_mat.nrows
    ctx = get_context(context)
    tol_f = _resolved_tol(tol, ctx)
    k = _int_vec(k, n, "characteristic")
    r = _rat_vec(r, n, "fiber position")
    phi = _rat_vec(phi, n, "flat connection")
    bits = _xi_bits(xi_lin, n)
    p = d_mat.solve(ratvec(k))

    z_re = vec_sub(tau_re.T @ r, phi)
    z_im = tau_im.T @ r
    q_form = tau_im @ d_mat
    lin = 2 * sum(abs(c) for c in (d_mat.T @ z_im))
    const = 2 * vec_dot(ratvec(k), z_im)
    shift = max((abs(c) for c in p), default=Fraction(0))
    cert = truncation_radius(q_form, linear_bound=lin, tol=tol_f,
                             center_shift=shift, constant_exponent=const,
                             max_radius=max_radius)

    re_q = tau_re @ d_mat
    terms = []
    for m in iter_ball(n, cert.radius):
        w = vec_sub(ratvec(m), p)
        turns = (
            Fraction(_xi_value(a_form, bits, m), 2)
            + vec_dot(p, a_form @ m) / 2
            + vec_dot(re_q @ w, w) / 2
            + vec_dot(d_mat @ w, z_re)
        )
        decay = vec_dot(q_form @ w, w) + 2 * vec_dot(d_mat @ w, z_im)
        terms.append(ctx.exp(ctx.to_complex(
            -ctx.pi * ctx.real(decay),
            2 * ctx.pi * ctx.real(_mod1(turns)),
        )))
    total = ctx.sum(terms, partitions)

    pref_turns = _mod1(vec_dot(re_q @ r, r) / 2 - vec_dot(d_mat @ r, phi))
    pref_decay = vec_dot(q_form @ r, r)
    prefactor = ctx.exp(ctx.to_complex(
        -ctx.pi * ctx.real(pref_decay), 2 * ctx.pi * ctx.real(pref_turns)
    ))
    return CertifiedValue(total * prefactor, cert, context)


# -- the doubled product sum ---------------------------------------------------


def _double_gram(tau_re: RatMat, tau_im: RatMat, d_mat: RatMat) -> tuple:
    """Decay Gram of the doubled sum and the matrices entering its phases.

    With X = Im(tau)^{-1} D^T (symmetric positive definite), the real decay
    part of the exponent is -pi (w+c)^T G (w+c) on w = (m, n), where

        G = 1/2 [[Re(tau) X Re(tau)^T + Im(tau) X Im(tau)^T,  Re(tau) X],
                 [X Re(tau)^T,                                X        ]].

    The imaginary quadratic parts collapse: the only cross term is
    Im <X tau^T m', n'> = <D m', n'> because X Im(tau)^T = D exactly.
    """
    x_mat = tau_im.inv() @ d_mat.T
    c_mat = tau_re @ x_mat @ tau_re.T + tau_im @ x_mat @ tau_im.T
    cross = x_mat @ tau_re.T
    half = Fraction(1, 2)
    n = d_mat.nrows
    rows = []
    for i in range(n):
        rows.append([half * c_mat[i, j] for j in range(n)]
                    + [half * cross[j, i] for j in range(n)])
    for i in range(n):
        rows.append([half * cross[i, j] for j in range(n)]
                    + [half * x_mat[i, j] for j in range(n)])
    return RatMat(rows), x_mat


def mu2_double(tau_re: RatMat, tau_im: RatMat, d_mat: RatMat, k, l,
               pt: DoublePoint, *, xi_lin=(), tol: Optional[float] = None,
               context: str = "double", partitions: int = 1,
               radius: Optional[int] = None,
               max_radius: int = DEFAULT_MAX_RADIUS) -> CertifiedValue:
    """One doubled product coefficient: the certified (m, n) lattice sum
    attached to the coset pair (k, l) and the evaluation point.

    Phase bookkeeping (exact rational turns): the doubled-structure cross
    term -<D m', n'>/2, the connection pairing <D^T n', kappa> - <A m',
    kappa> - <D m', phi>, and the sign/transport factors xi(m)/2 -
    <m - p, A r>/2 + <p, A m>/2, with m' = m + (r-p), n' = n + (that-q).

    The inner loop runs on integers: exponent and phase are affine-quadratic
    in the lattice vector, so both reduce to integer forms over one fixed
    denominator each, with a single exact rational (and a single rounding)
    per term.  This keeps 2n-dimensional balls cheap without changing any
    summand or the canonical summation order.
    """
    a_form = _check_slope(tau_re, tau_im, d_mat)
    n = d_mat.nrows
    if pt.n != n:
        raise ValueError(f"evaluation point must have n = {n}")
    ctx = get_context(context)
    tol_f = _resolved_tol(tol, ctx)
    k = _int_vec(k, n, "characteristic")
    l = _int_vec(l, n, "dual characteristic")
    bits = _xi_bits(xi_lin, n)

    p = d_mat.solve(ratvec(k))
    q = d_mat.T.solve(vec_add(a_form @ p, ratvec(l)))
    cm = vec_sub(pt.r, p)
    cn = vec_sub(pt.theta_hat, q)

    gram, _ = _double_gram(tau_re, tau_im, d_mat)
    shift = max(
        (abs(c) for c in tuple(cm) + tuple(cn)), default=Fraction(0)
    )
    cert = truncation_radius(gram, tol=tol_f, center_shift=shift,
                             max_radius=max_radius)
    use = cert.radius if radius is None else max(radius, cert.radius)

    center = tuple(cm) + tuple(cn)
    dim = 2 * n

    # decay(w) = (w+c)^T G (w+c) = w^T G w + (2 G c) . w + c^T G c
    g_den = math.lcm(*(gram[i, j].denominator
                       for i in range(dim) for j in range(dim)))
    g_int = [[int(gram[i, j] * g_den) for j in range(dim)] for i in range(dim)]
    d_lin = tuple(2 * x for x in (gram @ center))
    d_const = vec_dot(gram @ center, center)
    d_den = math.lcm(g_den, *(x.denominator for x in d_lin),
                     d_const.denominator)
    d_lin_i = [int(x * d_den) for x in d_lin]
    d_const_i = int(d_const * d_den)
    g_scale = d_den // g_den

    # turns(w) = [xi_raw(m) - <D m, n>] / 2 + lin_m . m + lin_n . n + const
    d_int = d_mat.to_int_rows()
    a_int = a_form.to_int_rows()
    half = Fraction(1, 2)
    t_lin_m = tuple(
        -half * x - y - z - half * u + half * v
        for x, y, z, u, v in zip(
            d_mat.T @ cn, a_form.T @ pt.kappa, d_mat.T @ pt.phi,
            a_form @ pt.r, a_form.T @ p,
        )
    )
    t_lin_n = tuple(
        -half * x + y for x, y in zip(d_mat @ cm, d_mat @ pt.kappa)
    )
    t_const = (
        -half * vec_dot(cn, d_mat @ cm)
        + vec_dot(cn, d_mat @ pt.kappa)
        - vec_dot(cm, vec_add(a_form.T @ pt.kappa, d_mat.T @ pt.phi))
        + half * vec_dot(p, a_form @ pt.r)
    )
    t_den = math.lcm(2, *(x.denominator for x in t_lin_m + t_lin_n),
                     t_const.denominator)
    t_lin_i = [int(x * t_den) for x in t_lin_m + t_lin_n]
    t_const_i = int(t_const * t_den)
    t_half = t_den // 2

    pi = ctx.pi
    two_pi = 2 * pi
    real = ctx.real
    exp = ctx.exp
    to_complex = ctx.to_complex
    terms = []
    for w in iter_ball(dim, use):
        quad = 0
        for i in range(dim):
            wi = w[i]
            if wi:
                row = g_int[i]
                quad += wi * sum(row[j] * w[j] for j in range(dim))
        dec_num = quad * g_scale + d_const_i
        xi_cross = 0
        for i in range(n):
            wi = w[i]
            if wi:
                arow = a_int[i]
                xi_cross += wi * sum(arow[j] * w[j] for j in range(i + 1, n))
                xi_cross += bits[i] * wi
            drow = d_int[i]
            xi_cross -= w[n + i] * sum(drow[j] * w[j] for j in range(n))
        t_num = xi_cross * t_half + t_const_i
        for i in range(dim):
            wi = w[i]
            if wi:
                dec_num += d_lin_i[i] * wi
                t_num += t_lin_i[i] * wi
        terms.append(exp(to_complex(
            -pi * real(Fraction(dec_num, d_den)),
            two_pi * real(Fraction(t_num % t_den, t_den)),
        )))
    return CertifiedValue(ctx.sum(terms, partitions), cert, context)


def trivialization_factor(tau_re: RatMat, tau_im: RatMat, d_mat: RatMat,
                          pt: DoublePoint, *, context: str = "double"):
    """The explicit factor relating the doubled product normalization to the
    holomorphic theta normalization (never dropped, always reported):

        e^{pi/2 <X(u-v), u-v>}
        e^{-pi/2 <X that, that> - pi/2 <conj(tau) X tau^T r, r> - pi <X tau^T r, that>}
        e^{-2 pi i <D r, phi> + 2 pi i <D^T that - A r, kappa>}
    """
    a_form = _check_slope(tau_re, tau_im, d_mat)
    ctx = get_context(context)
    x_mat = tau_im.inv() @ d_mat.T
    that = pt.theta_hat

    # u - v = tau^T r + theta_hat - 2 i Im(tau)^T kappa, exactly
    uv_re = vec_add(tau_re.T @ pt.r, that)
    uv_im = vec_sub(tau_im.T @ pt.r,
                    tuple(2 * c for c in (tau_im.T @ pt.kappa)))
    # complex bilinear <X w, w> for w = wr + i wi
    quad_re = vec_dot(x_mat @ uv_re, uv_re) - vec_dot(x_mat @ uv_im, uv_im)
    quad_im = 2 * vec_dot(x_mat @ uv_re, uv_im)

    c_mat = tau_re @ x_mat @ tau_re.T + tau_im @ x_mat @ tau_im.T
    decay = (
        Fraction(1, 2) * quad_re
        - Fraction(1, 2) * vec_dot(x_mat @ that, that)
        - Fraction(1, 2) * vec_dot(c_mat @ pt.r, pt.r)
        - vec_dot(x_mat @ (tau_re.T @ pt.r), that)
    )
    turns = (
        Fraction(1, 4) * quad_im
        - vec_dot(d_mat @ pt.r, that) / 2
        - vec_dot(d_mat @ pt.r, pt.phi)
        + vec_dot(vec_sub(d_mat.T @ that, a_form @ pt.r), pt.kappa)
    )
    return ctx.exp(ctx.to_complex(
        ctx.pi * ctx.real(decay), 2 * ctx.pi * ctx.real(_mod1(turns))
    ))


# -- the u-part subspace -------------------------------------------------------


@dataclass(frozen=True)
class UPartSpace:
    """Span of the fiber-summed generators for a transversal graph pair."""

    delta: RatMat
    elements: tuple
    vectors: tuple

    @property
    def dimension(self) -> int:
        return len(self.vectors)


def u_part_basis(tau_re: RatMat, d_from: RatMat, d_to: RatMat) -> UPartSpace:
    """Basis {sum_l s_{k,l}}_k over the doubled intersection points."""
    elements = tuple(intersections(d_from, d_to, tau_re=tau_re, doubled=True))
    k_reps = []
    for e in elements:
        if e.k not in k_reps:
            k_reps.append(e.k)
    vectors = tuple(
        FloerVector(elements,
                    tuple(1.0 if e.k == k else 0.0 for e in elements))
        for k in k_reps
    )
    delta = d_to - d_from
    if len(vectors) != abs(int(delta.det())):
        raise NonTransversal("basis size does not match the difference determinant")
    return UPartSpace(delta, elements, vectors)


def project_u(space: UPartSpace, vec: FloerVector) -> FloerVector:
    """The averaging projector s_j x s'_h -> s_j x (sum_l s'_l)/det."""
    if vec.basis != space.elements:
        raise ValueError("vector is not expressed in the space's basis")
    det = abs(int(space.delta.det()))
    sums = {}
    for e, c in zip(vec.basis, vec.coeffs):
        sums[e.k] = sums.get(e.k, 0j) + c
    coeffs = tuple(sums[e.k] / det for e in vec.basis)
    return FloerVector(vec.basis, coeffs)


def mu2_u(tau_re: RatMat, tau_im: RatMat, d_mat: RatMat, third, vec: FloerVector,
          *, x=None, xi_lin=(), tol: Optional[float] = None,
          context: str = "double", partitions: int = 1) -> FloerVector:
    """Averaged triangle product against the doubled fiber brane.

    ``third`` is the fiber-brane evaluation data (a DoublePoint); a slope
    matrix in that slot means a triple of three graph branes, which has no
    product formula here and raises UnsupportedTriple.  ``vec`` is a vector
    over the doubled (k, l) intersection basis; ``x`` optionally scales the
    long generator (a one-element FloerVector or a complex number).

    The image lands on the single short generator, where the averaging
    projector is the identity, so the output is always in the u-part.
    """
    if isinstance(third, RatMat):
        raise UnsupportedTriple(
            "products of three graph branes have no closed sum here; the "
            "third brane must be a fiber"
        )
    if not isinstance(third, DoublePoint):
        raise TypeError("third must be a DoublePoint or a slope matrix")
    scale = 1.0 + 0j
    if x is not None:
        scale = complex(x.coeffs[0]) if isinstance(x, FloerVector) else complex(x)
    n = d_mat.nrows
    total = 0j
    for e, c in zip(vec.basis, vec.coeffs):
        if c == 0:
            continue
        if e.l is None:
            raise ValueError("vector must be over doubled intersection points")
        val = mu2_double(tau_re, tau_im, d_mat, e.k, e.l, third,
                         xi_lin=xi_lin, tol=tol, context=context,
                         partitions=partitions)
        total += c * complex(val)
    zero = (Fraction(0),) * n
    target = FloerBasisElement(
        tuple(third.r) + zero + zero + tuple(third.theta_hat),
        (0,) * n, (0,) * n,
    )
    return FloerVector((target,), (scale * total,))


# -- the factorization and diagram checks --------------------------------------


def verify_usub(tau_re: RatMat, tau_im: RatMat, d_mat: RatMat, k,
                points: Sequence, *, xi_lin=(), tol: Optional[float] = None,
                context: str = "double", partitions: int = 1) -> float:
    """Max residual of the fiber-summed factorization over the sample points:

        sum_l s_{k,l} = sqrt(det(2 Im tau D)) theta_{D,k}(u)
                        conj-theta_{D,0}(v) * trivialization factor.

    (The constant is one factor sqrt(2) per dimension: det(2 Im tau D) =
    2^n det(Im tau D).)
    """
    _check_slope(tau_re, tau_im, d_mat)
    n = d_mat.nrows
    ctx = get_context(context)
    tol_f = _resolved_tol(tol, ctx)
    k = _int_vec(k, n, "characteristic")
    l_reps = cosets(d_mat.T)
    spec = ThetaSpec(tau_re, tau_im, d_mat, k, xi_lin, tol_f)
    spec0 = spec.with_char((0,) * n)
    root = ctx.sqrt(ctx.real(abs((2 * (tau_im @ d_mat)).det())))
    worst = 0.0
    for pt in points:
        lhs = ctx.to_complex(0, 0)
        for l in l_reps:
            lhs = lhs + mu2_double(tau_re, tau_im, d_mat, k, l, pt,
                                   xi_lin=xi_lin, tol=tol_f, context=context,
                                   partitions=partitions).value
        u, v = mirror_coordinates(tau_re, tau_im, pt)
        rhs = (root
               * theta_dk(spec, u, context=context, partitions=partitions).value
               * theta_bar_dk(spec0, v, context=context,
                              partitions=partitions).value
               * trivialization_factor(tau_re, tau_im, d_mat, pt,
                                       context=context))
        worst = max(worst, float(ctx.abs(lhs - rhs)))
    return worst


@dataclass(frozen=True)
class DiagramReport:
    """Constancy data for the ratio of doubled to base product coefficients.

    ``skipped`` counts grid samples where the base product vanishes (the
    ratio is undefined there; a signed series with an odd characteristic is
    identically zero at symmetric points, so such grid points are legal).
    """

    rho: tuple
    predicted: complex
    spread: float
    max_error: float
    tolerance: float
    passed: bool
    skipped: int = 0


def verify_main_diagram(tau_re: RatMat, tau_im: RatMat, d_mat: RatMat,
                        k_list, z_grid, *, xi_lin=(),
                        tol: Optional[float] = None, context: str = "double",
                        partitions: int = 1,
                        reference_char=None) -> DiagramReport:
    """Check that base and doubled products agree through the fiber-summed
    identification.

    For each coset k and base point (r, phi), the doubled product of the
    fiber-summed generator is evaluated at the point with kappa = 0 and
    theta_hat = -phi (the unique real solution of v = 0, where the mirror
    coordinate u equals the base coordinate tau^T r - phi), and divided by
    the base product.  The ratio must be one constant across all (k, z):
    sqrt(det(2 Im tau D)) times the conjugate series at 0, whose
    characteristic can be overridden for negative controls.
    """
    _check_slope(tau_re, tau_im, d_mat)
    n = d_mat.nrows
    ctx = get_context(context)
    tol_f = _resolved_tol(tol, ctx)
    space = u_part_basis(tau_re, RatMat.zeros(n, n), d_mat)
    ratios = []
    skipped = 0
    for k in [_int_vec(k, n, "characteristic") for k in k_list]:
        kk = coset_reduce(d_mat, k)
        vec = next(v for v in space.vectors
                   if any(c != 0 and e.k == kk
                          for e, c in zip(v.basis, v.coeffs)))
        for (r, phi) in z_grid:
            r = _rat_vec(r, n, "fiber position")
            phi = _rat_vec(phi, n, "flat connection")
            pt = DoublePoint(*MirrorCoords(tau_re, tau_im).point_with_v_zero(r, phi))
            den = mu2_base(tau_re, tau_im, d_mat, k, r, phi, xi_lin=xi_lin,
                           tol=tol_f, context=context, partitions=partitions)
            if abs(complex(den)) <= tol_f ** 0.5:
                skipped += 1
                continue
            num = mu2_u(tau_re, tau_im, d_mat, pt, vec, xi_lin=xi_lin,
                        tol=tol_f, context=context, partitions=partitions)
            ratios.append(complex(num.coeffs[0]) / complex(den))
    if not ratios:
        raise ValueError(
            "the base product vanishes at every grid point; the ratio is "
            "undefined (choose non-symmetric sample points)"
        )
    ref = _int_vec(reference_char, n, "reference characteristic") \
        if reference_char is not None else (0,) * n
    spec = ThetaSpec(tau_re, tau_im, d_mat, ref, xi_lin, tol_f)
    root = ctx.sqrt(ctx.real(abs((2 * (tau_im @ d_mat)).det())))
    predicted = complex(
        root * theta_bar_dk(spec, [0] * n, context=context).value
    )
    mean = sum(ratios) / len(ratios)
    spread = max(abs(rho - mean) for rho in ratios) / abs(mean)
    max_error = max(abs(rho - predicted) for rho in ratios) / abs(predicted)
    budget = 10 * tol_f
    return DiagramReport(tuple(ratios), predicted, spread, max_error,
                         tol_f, spread <= budget and max_error <= budget,
                         skipped)


# -- self-Hom dimensions of a lifted brane --------------------------------------


@dataclass(frozen=True)
class UPartSelf:
    """Anti-holomorphic splitting data of a lifted brane's tangent space."""

    dims: tuple
    basis: tuple
    j_restricted: RatMat


def u_part_self(brane: Brane) -> UPartSelf:
    """Split the complexified tangent space of a lifted brane under the
    doubled complex structure and return exterior-power dimensions.

    The restriction M of J to the support solves W M = J W exactly; a
    failure means J does not preserve the tangent space (JNotPreserving).
    The anti-holomorphic covectors form the kernel of M^T + i on
    coefficients, computed as the rational kernel of the realified block
    system; its complex dimension n gives degree dimensions C(n, q).
    """
    torus = brane.torus
    if not isinstance(torus, DoubledTorus):
        raise InvalidBrane("the u-part splitting needs a brane on a doubled torus")
    w = brane.support
    jw = torus.j_mat @ w
    cols = []
    for j in range(jw.ncols):
        try:
            cols.append(solve_integer_system(w, jw.col(j)))
        except ValueError:
            raise JNotPreserving(
                "the doubled complex structure does not preserve the tangent "
                "space of this brane"
            )
    m_res = RatMat.from_columns(cols)

    # realified kernel of (M^T + i I): vectors x + i y with
    # M^T x = y and M^T y = -x
    k = m_res.nrows
    mt = m_res.T
    rows = []
    for i in range(k):
        rows.append([mt[i, j] for j in range(k)]
                    + [0 if j != i else -1 for j in range(k)])
    for i in range(k):
        rows.append([0 if j != i else 1 for j in range(k)]
                    + [mt[i, j] for j in range(k)])
    real_sys = RatMat(rows)
    den = 1
    for i in range(real_sys.nrows):
        for j in range(real_sys.ncols):
            den = den * real_sys[i, j].denominator // math.gcd(
                den, real_sys[i, j].denominator)
    kern = int_kernel(real_sys * den)
    if kern.ncols % 2 != 0:
        raise JNotPreserving("the realified eigenspace has odd dimension")
    dim_c = kern.ncols // 2

    # pick a complex basis: greedily take kernel columns that stay
    # independent over C (realified rank grows by two per new vector)
    chosen = []
    taken_cols = []
    for j in range(kern.ncols):
        x = [kern[i, j] for i in range(k)]
        y = [kern[i + k, j] for i in range(k)]
        trial = taken_cols + [tuple(x) + tuple(y),
                              tuple(-c for c in y) + tuple(x)]
        if RatMat.from_columns(trial).rank() == len(trial):
            taken_cols = trial
            chosen.append(tuple(complex(float(a), float(b))
                                for a, b in zip(x, y)))
        if len(chosen) == dim_c:
            break
    dims = tuple(math.comb(dim_c, q) for q in range(dim_c + 1))
    return UPartSelf(dims, tuple(chosen), m_res)
