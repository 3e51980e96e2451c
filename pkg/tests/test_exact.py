from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toruslift.exact import RatMat, hstack, rat, ratvec, vec_dot, vstack

rationals = st.fractions(
    min_value=-9, max_value=9, max_denominator=7
) | st.integers(min_value=-9, max_value=9)


def square_matrices(n, elems=rationals):
    return st.lists(
        st.lists(elems, min_size=n, max_size=n), min_size=n, max_size=n
    ).map(RatMat)


def test_rat_is_exact_on_floats():
    assert rat(0.5) == Fraction(1, 2)
    assert rat(0.1) == Fraction(0.1)  # the exact binary value, not 1/10
    assert rat(0.1) != Fraction(1, 10)
    assert rat("3/7") == Fraction(3, 7)


def test_basic_shapes_and_access():
    m = RatMat([[1, 2, 3], [4, 5, 6]])
    assert m.shape == (2, 3)
    assert m[1, 2] == 6
    assert m.col(1) == (2, 5)
    assert m.T.shape == (3, 2)
    assert m.T.T == m


def test_matmul_matrix_and_vector():
    a = RatMat([[1, 2], [3, 4]])
    assert a @ (1, 1) == (3, 7)
    assert (a @ a) == RatMat([[7, 10], [15, 22]])
    with pytest.raises(ValueError):
        a @ RatMat([[1, 2, 3]])


def test_det_known_values():
    assert RatMat([[2]]).det() == 2
    assert RatMat([[1, 2], [3, 4]]).det() == -2
    assert RatMat([[0, 1], [1, 0]]).det() == -1
    # Hilbert 3x3 determinant is 1/2160
    h = RatMat([[Fraction(1, i + j + 1) for j in range(3)] for i in range(3)])
    assert h.det() == Fraction(1, 2160)


def test_inverse_of_hilbert_is_exact():
    n = 4
    h = RatMat([[Fraction(1, i + j + 1) for j in range(n)] for i in range(n)])
    assert h @ h.inv() == RatMat.identity(n)


@settings(max_examples=60, deadline=None)
@given(square_matrices(3), square_matrices(3))
def test_det_is_multiplicative(a, b):
    assert (a @ b).det() == a.det() * b.det()


@settings(max_examples=60, deadline=None)
@given(square_matrices(3))
def test_inverse_round_trip_or_zero_det(m):
    if m.det() == 0:
        with pytest.raises(ZeroDivisionError):
            m.inv()
    else:
        assert m.inv() @ m == RatMat.identity(3)
        assert m.solve((1, 2, 3)) == (m.inv() @ (1, 2, 3))


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.lists(rationals, min_size=4, max_size=4), min_size=2, max_size=5
    ).map(RatMat)
)
def test_rank_nullity_and_kernel(m):
    k = m.kernel()
    assert m.rank() + k.ncols == m.ncols
    for j in range(k.ncols):
        assert all(x == 0 for x in (m @ k.col(j)))


def test_leading_minors_and_positive_definite():
    g = RatMat([[2, 1], [1, 1]])
    assert g.leading_principal_minors() == [2, 1]
    assert g.is_positive_definite()
    assert not RatMat([[1, 2], [2, 1]]).is_positive_definite()
    with pytest.raises(ValueError):
        RatMat([[0, 1], [0, 0]]).is_positive_definite()


def test_symmetry_predicates():
    assert RatMat([[0, 1], [-1, 0]]).is_antisymmetric()
    assert RatMat([[2, 1], [1, 3]]).is_symmetric()
    assert not RatMat([[1, 1], [-1, 0]]).is_antisymmetric()


def test_stacking():
    a = RatMat([[1, 2]])
    b = RatMat([[3, 4]])
    assert vstack(a, b) == RatMat([[1, 2], [3, 4]])
    assert hstack(a.T, b.T) == RatMat([[1, 3], [2, 4]])


def test_vec_helpers():
    assert vec_dot(ratvec([1, 2]), ratvec([3, 4])) == 11
    assert ratvec(["1/2", 1]) == (Fraction(1, 2), Fraction(1))
