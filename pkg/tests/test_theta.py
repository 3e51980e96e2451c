import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toruslift.errors import (
    InadmissibleSpec,
    NotPositiveDefinite,
    TruncationBudgetExceeded,
)
from toruslift.exact import RatMat
from toruslift.theta import (
    ThetaSpec,
    gaussian_theta_lhs,
    iter_ball,
    iter_shell,
    min_eigenvalue_bound,
    shell_count,
    spec_n1,
    theta_bar_dk,
    theta_dk,
    truncation_radius,
    verify_characteristic_shift,
    verify_identity_1,
    verify_identity_2,
    verify_quasi_periodicity,
)

TAU_GRID = (1j, 0.5 + 1j, -0.3 + 0.7j)
Z_GRID = (0.0, 0.2, 0.3 + 0.4j, -0.45 + 0.1j, 0.11 - 0.23j)
UV_GRID = ((0.1, 0.0), (0.0, 0.0), (0.2 + 0.1j, -0.1), (0.3, 0.3), (-0.2j, 0.15))

# Reference values from a direct box sum over |m|_inf <= 14 at 50 decimal
# digits.  The evaluation points are the binary doubles written below, so
# the comparisons are exact up to each context's truncation + rounding.
FROZEN_BASE = 1.0864348112133080  # theta at tau=i, D=1, k=0, z=0
FROZEN_HALFCHAR = "0.415760602596027032314507136284743925"

ORACLE_CASES = {
    "n1_generic": (
        "0.123700080236925285941821015121390955",
        "0.318353212419998702973570493908669849",
    ),
    "n1_xi": (
        "-0.136968016099197662803906805293759748",
        "0.0575545121223549700746452126384044029",
    ),
    "n2_split": (
        "-0.923464212212239049845799816226436849",
        "-0.318748645274759381454649508478676",
    ),
    "n2_re": (
        "1.00904463674351579256278701822371058",
        "-0.374121629406417965904878375258642307",
    ),
}


def generic_spec(tol=None):
    # n=1, half-integer Re(tau), nontrivial characteristic
    return ThetaSpec(
        RatMat([[Fraction(1, 2)]]), RatMat([[1]]), RatMat([[2]]), (1,), tol=tol
    )


def xi_spec(tol=None):
    return ThetaSpec(
        RatMat([[Fraction(1, 2)]]), RatMat([[1]]), RatMat([[3]]), (2,), (1,),
        tol=tol,
    )


def split_spec2(tol=None):
    return ThetaSpec(
        RatMat.zeros(2, 2), RatMat.identity(2), RatMat([[2, 1], [1, 1]]),
        (1, 0), (1, 0), tol=tol,
    )


def re_spec2(tol=None):
    # Re(tau) = [[0,1],[0,0]] pairs with D = [[2,1],[1,1]] to an integral
    # antisymmetric form [[0,1],[-1,0]], so the sign structure is quadratic.
    return ThetaSpec(
        RatMat([[0, 1], [0, 0]]), RatMat.identity(2), RatMat([[2, 1], [1, 1]]),
        (1, 0), (0, 1), tol=tol,
    )


ORACLE_SPECS = {
    "n1_generic": (generic_spec, [0.13 - 0.07j]),
    "n1_xi": (xi_spec, [-0.2 + 0.11j]),
    "n2_split": (split_spec2, [0.1 + 0.2j, -0.3 + 0.1j]),
    "n2_re": (re_spec2, [0.1 + 0.2j, -0.3 + 0.1j]),
}

Z2 = [0.1 + 0.2j, -0.3 + 0.1j]


def oracle_mpc(name):
    with mpmath.workdps(40):
        re, im = ORACLE_CASES[name]
        return mpmath.mpc(mpmath.mpf(re), mpmath.mpf(im))


# --- shell enumeration --------------------------------------------------------


def test_shell_counts():
    for dim in (1, 2, 3):
        assert shell_count(dim, 0) == 1
        for s in (1, 2, 3):
            pts = list(iter_shell(dim, s))
            assert len(pts) == shell_count(dim, s)
            assert all(max(abs(c) for c in p) == s for p in pts)
    # shells partition the ball
    assert len(list(iter_ball(2, 3))) == 7 * 7


def test_shell_order_is_lexicographic():
    pts = list(iter_shell(2, 1))
    assert pts == sorted(pts)
    ball = list(iter_ball(1, 2))
    assert ball == [(0,), (-1,), (1,), (-2,), (2,)]


# --- certified truncation -----------------------------------------------------


def test_truncation_radius_unit_gram():
    cert = truncation_radius(RatMat([[1]]), tol=1e-12)
    assert cert.radius <= 4
    assert 0 < cert.tail_bound <= 1e-12
    assert 0.9 < cert.lambda_min <= 1


def test_truncation_radius_loose_tolerance():
    cert = truncation_radius(RatMat([[1]]), tol=1.0)
    assert cert.radius == 0


def test_truncation_rejects_degenerate_gram():
    with pytest.raises(NotPositiveDefinite):
        truncation_radius(RatMat([[1, 1], [1, 1]]), tol=1e-10)
    with pytest.raises(NotPositiveDefinite):
        truncation_radius(RatMat([[0]]), tol=1e-10)
    with pytest.raises(NotPositiveDefinite):
        min_eigenvalue_bound(RatMat([[0, 1], [1, 0]]))


def test_truncation_budget_exceeded_for_flat_gram():
    with pytest.raises(TruncationBudgetExceeded):
        truncation_radius(RatMat([[Fraction(1, 10000)]]), tol=1e-30)


def test_linear_term_enlarges_radius():
    plain = truncation_radius(RatMat([[1]]), tol=1e-12)
    pushed = truncation_radius(
        RatMat([[1]]), linear_bound=Fraction(3), tol=1e-12
    )
    assert pushed.radius > plain.radius
    assert pushed.tail_bound <= 1e-12


def test_min_eigenvalue_bound_is_a_lower_bound():
    lam = min_eigenvalue_bound(RatMat([[2, 1], [1, 2]]))
    assert Fraction(9, 10) < lam <= 1  # exact smallest eigenvalue is 1


# --- spec admissibility -------------------------------------------------------


def test_spec_rejections():
    one = RatMat([[1]])
    with pytest.raises(InadmissibleSpec):
        ThetaSpec(RatMat.zeros(2, 2), RatMat.identity(2), one)
    with pytest.raises(InadmissibleSpec):
        ThetaSpec(RatMat([[0]]), one, RatMat([[Fraction(1, 2)]]))
    with pytest.raises(InadmissibleSpec):
        ThetaSpec(RatMat([[0]]), one, RatMat([[0]]))
    with pytest.raises(InadmissibleSpec):
        ThetaSpec(RatMat([[0]]), RatMat([[-1]]), one)  # Im(tau) D not pd
    with pytest.raises(InadmissibleSpec):  # Im(tau) D not symmetric
        ThetaSpec(RatMat.zeros(2, 2), RatMat.identity(2), RatMat([[2, 1], [0, 3]]))
    with pytest.raises(InadmissibleSpec):  # pairing form not integral
        ThetaSpec(
            RatMat([[0, Fraction(1, 2)], [Fraction(1, 2), 0]]),
            RatMat.identity(2), RatMat([[2, 1], [1, 1]]),
        )
    with pytest.raises(InadmissibleSpec):
        ThetaSpec(RatMat([[0]]), one, one, (1, 2))  # characteristic length
    with pytest.raises(InadmissibleSpec):
        ThetaSpec(RatMat([[0]]), one, one, (0,), (2,))  # sign bits not 0/1


def test_spec_defaults_and_derived_data():
    sp = generic_spec()
    assert sp.xi_lin == (0,)
    assert sp.p_vec == (Fraction(1, 2),)
    assert sp.a_form.is_zero()
    sp2 = re_spec2()
    assert sp2.a_form == RatMat([[0, 1], [-1, 0]])
    # quadratic part A_{12} m_1 m_2 plus the linear bit on m_2
    assert sp2.xi_value((1, 1)) == 0
    assert sp2.xi_value((1, 0)) == 0
    assert sp2.xi_value((0, 1)) == 1
    assert sp2.with_char((0, 2)).char == (0, 2)
    assert sp2.bar().tau_re == -sp2.tau_re


# --- frozen values ------------------------------------------------------------


def test_base_value_matches_frozen_constant():
    sp = spec_n1(1j, tol=1e-13)
    v = theta_dk(sp, [0])
    assert abs(complex(v) - FROZEN_BASE) < 1e-12
    assert v.certificate.tail_bound <= 1e-13


def test_half_characteristic_value_two_ways():
    # classical one-variable series with characteristic 1/2:
    # sum over m of e^{2 pi i tau (m - 1/2)^2} at tau = i
    classical = 2 * sum(math.exp(-2 * math.pi * (j + 0.5) ** 2) for j in range(8))
    sp = spec_n1(1j, d=2, k=1, tol=1e-13)
    got = complex(theta_dk(sp, [0]))
    assert abs(got - classical) < 1e-13
    assert abs(got - float(mpmath.mpf(FROZEN_HALFCHAR))) < 1e-13
    assert abs(got.imag) < 1e-15


@pytest.mark.parametrize("name", sorted(ORACLE_CASES))
def test_values_against_box_sum_double(name):
    build, z = ORACLE_SPECS[name]
    got = complex(theta_dk(build(tol=1e-12), z))
    assert abs(got - complex(oracle_mpc(name))) < 5e-13


@pytest.mark.parametrize("name", sorted(ORACLE_CASES))
def test_values_against_box_sum_dd(name):
    build, z = ORACLE_SPECS[name]
    got = theta_dk(build(), z, context="dd").value
    with mpmath.workdps(40):
        diff = abs(mpmath.mpc(got.real, got.imag) - oracle_mpc(name))
        assert diff < 1e-19


def test_enlarged_radius_stays_within_tail_bound():
    sp = generic_spec()
    z = [0.13 - 0.07j]
    base = theta_dk(sp, z)
    wide = theta_dk(sp, z, radius=2 * base.certificate.radius + 3)
    assert abs(complex(base) - complex(wide)) < base.certificate.tail_bound


def test_double_and_dd_agree():
    for name in ("n1_generic", "n2_split"):
        build, z = ORACLE_SPECS[name]
        vd = complex(theta_dk(build(), z))
        vq = theta_dk(build(), z, context="dd").value
        assert abs(vd - complex(float(vq.real), float(vq.imag))) < 1e-10


def test_integer_shift_invariance():
    sp = generic_spec()
    a = complex(theta_dk(sp, [0.13 - 0.07j]))
    b = complex(theta_dk(sp, [1.13 - 0.07j]))
    assert abs(a - b) < 1e-13
    sp2 = split_spec2()
    c = complex(theta_dk(sp2, Z2))
    d = complex(theta_dk(sp2, [Z2[0] + 1, Z2[1]]))
    assert abs(c - d) < 1e-13


def test_point_length_is_checked():
    with pytest.raises(InadmissibleSpec):
        theta_dk(generic_spec(), [0.1, 0.2])


def test_error_scales_with_tolerance():
    # shells are discrete, so compare decades that cross a radius step;
    # the certified tail bound must respect the tolerance at every level
    oracle = None
    errors = {}
    for tol in (1.0, 1e-2, 1e-4, 1e-6, 1e-8):
        v = theta_dk(spec_n1(1j, tol=tol), [0], context="dd")
        assert v.certificate.tail_bound <= tol
        if oracle is None:
            with mpmath.workdps(40):
                oracle = mpmath.mpf(
                    "1.08643481121330801457531612151022346"
                )
        errors[tol] = abs(mpmath.mpc(v.value.real, v.value.imag) - oracle)
    assert errors[1.0] / errors[1e-2] >= 10
    assert errors[1e-4] / errors[1e-6] >= 10


# --- transformation laws ------------------------------------------------------


def test_shift_law_reference_point():
    sp = spec_n1(1j)
    assert verify_quasi_periodicity(sp, [0.3 + 0.4j], [1]) < 1e-10


def test_shift_law_trivial_for_zero():
    sp = generic_spec()
    assert verify_quasi_periodicity(sp, [0.13 - 0.07j], [0]) == 0.0


def test_shift_law_contract_at_explicit_tolerance():
    sp = spec_n1(0.5 + 1j, d=2, k=1, tol=1e-8)
    assert verify_quasi_periodicity(sp, [0.3 + 0.4j], [1]) <= 10 * 1e-8


def test_shift_law_dd_large_determinants():
    for tau in (1j, 0.5 + 1j):
        for d in (1, 2, 3, 6):
            sp = spec_n1(tau, d=d, k=d // 2, xi=d % 2)
            r = verify_quasi_periodicity(sp, [0.3 + 0.4j], [1], context="dd")
            assert r < 1e-12, (tau, d, r)


def test_shift_law_rank_two_generators():
    for sp in (split_spec2(), re_spec2()):
        for h in ([1, 0], [0, 1], [1, 1]):
            assert verify_quasi_periodicity(sp, Z2, h, context="dd") < 1e-12


def test_characteristic_shift_law():
    sp = generic_spec()
    assert verify_characteristic_shift(sp, [0.13 - 0.07j], [1]) < 1e-10
    assert verify_characteristic_shift(sp, [0.13 - 0.07j], [2]) < 1e-10
    # rank two with a nontrivial phase from the integral pairing form
    for s in ([1, 0], [0, 1], [1, 1]):
        assert verify_characteristic_shift(re_spec2(), Z2, s, context="dd") < 1e-12


@settings(max_examples=25, deadline=None)
@given(
    tau=st.sampled_from(TAU_GRID),
    d=st.integers(min_value=1, max_value=3),
    k=st.integers(min_value=0, max_value=2),
    xi=st.integers(min_value=0, max_value=1),
    h=st.integers(min_value=-1, max_value=1),
    z=st.sampled_from(Z_GRID),
)
def test_shift_law_property(tau, d, k, xi, h, z):
    sp = spec_n1(tau, d=d, k=k % d, xi=xi)
    assert verify_quasi_periodicity(sp, [z], [h], context="dd") < 1e-10


# --- the periodized Gaussian identities ----------------------------------------


def test_identity_one_on_grid():
    for tau in TAU_GRID:
        for z in Z_GRID:
            assert verify_identity_1(tau, z, tol=1e-12) < 1e-10, (tau, z)


def test_identity_two_on_grid():
    for tau in TAU_GRID:
        for u, v in UV_GRID:
            assert verify_identity_2(tau, u, v, tol=1e-12) < 1e-10, (tau, u, v)


def test_gaussian_sum_factorizes_at_origin():
    # at tau=i, u=v=0 the double sum collapses to sqrt(2) times the square
    # of the plain one-variable sum
    one_var = sum(math.exp(-math.pi * l * l) for l in range(-6, 7))
    got = complex(gaussian_theta_lhs(1j, 0.0, 0.0, tol=1e-12))
    assert abs(got - math.sqrt(2) * one_var**2) < 1e-10
    assert abs(got.imag) < 1e-12


def test_gaussian_sum_is_real_for_real_arguments():
    got = complex(gaussian_theta_lhs(1j, 0.25, -0.4, tol=1e-12))
    assert abs(got.imag) < 1e-11


def test_gaussian_sum_budget_guard():
    with pytest.raises(TruncationBudgetExceeded):
        gaussian_theta_lhs(1j, 25.0, 0.0, tol=1e-10)


def test_identity_two_symmetric_diagonal():
    # u = v makes both sides real positive at purely imaginary tau
    got = complex(gaussian_theta_lhs(1j, 0.3, 0.3, tol=1e-12))
    assert got.real > 0
    assert abs(got.imag) < 1e-11


@settings(max_examples=20, deadline=None)
@given(
    tau=st.sampled_from((1j, 0.5 + 1j)),
    u=st.integers(min_value=-8, max_value=8),
    v=st.integers(min_value=-8, max_value=8),
)
def test_identity_two_property(tau, u, v):
    assert verify_identity_2(tau, u / 20, v / 20, tol=1e-11) < 1e-9
