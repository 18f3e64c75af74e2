from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from tate_transfer import arith
from tate_transfer.arith import Mat

primes = st.sampled_from([2, 3, 5])


@st.composite
def int_matrices(draw, max_dim=4, bound=30):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    rows = draw(st.lists(st.lists(st.integers(-bound, bound), min_size=c, max_size=c), min_size=r, max_size=r))
    return rows


def test_valuation_and_units():
    assert arith.valuation(Fraction(12, 5), 2) == 2
    assert arith.valuation(Fraction(5, 12), 2) == -2
    assert arith.valuation(0, 3) == float("inf")
    assert arith.unit_part(Fraction(18, 7), 3) == Fraction(2, 7)
    assert arith.is_integral(Fraction(1, 5), 3)
    assert not arith.is_integral(Fraction(1, 6), 3)


def test_check_prime():
    assert arith.check_prime(7) == 7
    for bad in (4, 1, 0, -3, 9):
        with pytest.raises(ValueError, match="prime required"):
            arith.check_prime(bad)


def test_local_scalar():
    x = arith.LocalScalar(Fraction(2, 5), 3)
    assert x.is_unit()
    assert (x * 3).value == Fraction(6, 5)
    with pytest.raises(ArithmeticError):
        arith.LocalScalar(Fraction(1, 3), 3)
    with pytest.raises(ArithmeticError):
        x.divide(3)


def test_fstr():
    assert arith.fstr(Fraction(-3, 6)) == "-1/2"
    assert arith.fstr(4) == "4"


@given(st.integers(-500, 500), st.integers(1, 500), primes)
def test_matlis_reduce_canonical(a, b, p):
    v = arith.matlis_reduce(Fraction(a, b), p)
    if v.is_zero():
        assert arith.is_integral(Fraction(a, b), p)
    else:
        assert 0 < v.num < p ** v.exp and v.num % p
        assert arith.is_integral(Fraction(a, b) - v.to_fraction(), p)


@given(st.integers(-99, 99), st.integers(1, 99), st.integers(-99, 99), st.integers(1, 99), primes)
def test_matlis_additive(a, b, c, d, p):
    x, y = Fraction(a, b), Fraction(c, d)
    assert arith.matlis_reduce(x + y, p) == arith.matlis_reduce(x, p) + arith.matlis_reduce(y, p)


def test_matlis_str():
    assert str(arith.matlis_reduce(Fraction(1, 2), 2)) == "1/2^1"
    assert str(arith.matlis_reduce(Fraction(7, 9), 3)) == "7/3^2"
    assert str(arith.matlis_reduce(5, 3)) == "0"


@given(int_matrices(), primes)
def test_mod_p_matrix_matches_entrywise(rows, p):
    m = arith.matrix([[Fraction(x, 7) for x in r] for r in rows], len(rows[0]))
    red = arith.mod_p_matrix(m, p)
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            assert int(red[i, j]) == arith.mod_pk(Fraction(x, 7), p, 1)


def test_mod_p_matrix_rejects_nonintegral():
    with pytest.raises(ArithmeticError):
        arith.mod_p_matrix(arith.matrix([[Fraction(1, 3)]], 1), 3)


@settings(max_examples=60, deadline=None)
@given(int_matrices(), primes)
def test_smith_form_reconstructs_and_matches_sympy(rows, p):
    m = arith.matrix(rows, len(rows[0]))
    snf = arith.smith_normal_form(m, p)
    assert snf.left * snf.diag_matrix(m.nrows(), m.ncols()) * snf.right == m
    assert snf.exponents == sorted(snf.exponents)
    # second route: p-parts of the integer invariant factors
    S = sympy_snf(Matrix(rows), domain=ZZ)
    ints = [abs(int(S[i, i])) for i in range(min(S.shape)) if S[i, i] != 0]
    assert sorted(arith.valuation(x, p) for x in ints) == snf.exponents


@settings(max_examples=60, deadline=None)
@given(int_matrices(), primes)
def test_kernel_lattice_is_saturated_kernel(rows, p):
    m = arith.matrix(rows, len(rows[0]))
    K = arith.kernel_lattice(m, p)
    assert arith.is_zero(m * K)
    assert K.ncols() == m.ncols() - m.rank()
    if K.ncols():
        assert arith.rank_mod_p(K, p) == K.ncols()


@settings(max_examples=60, deadline=None)
@given(int_matrices(), st.lists(st.integers(-9, 9), min_size=4, max_size=4), primes)
def test_solve_over_O(a_rows, xs, p):
    a = arith.matrix(a_rows, len(a_rows[0]))
    x = arith.matrix([[v] for v in xs[:a.ncols()]], 1)
    b = a * x
    y = arith.solve_over_O(a, b, p)
    assert y is not None and a * y == b and arith.is_integral_matrix(y, p)


def test_solve_over_O_detects_obstruction():
    a = arith.matrix([[3]], 1)
    assert arith.solve_over_O(a, arith.matrix([[1]], 1), 3) is None
    assert arith.solve_over_O(a, arith.matrix([[1]], 1), 2) == arith.matrix([[Fraction(1, 3)]], 1)


def test_lattice_containment():
    big = arith.matrix([[1, 0], [0, 3]], 2)
    assert arith.lattice_contains(big, arith.matrix([[2], [6]], 1), 3)
    assert not arith.lattice_contains(big, arith.matrix([[0], [1]], 1), 3)
    assert arith.same_lattice(big, arith.matrix([[2, 0], [0, 6]], 2), 3)
    assert not arith.same_lattice(big, arith.identity(2), 3)


def test_one_sided_inverses():
    m = arith.matrix([[1, 0], [2, 1], [5, 4]], 2)
    r = arith.o_left_inverse(m, 3)
    assert r * m == arith.identity(2) and arith.is_integral_matrix(r, 3)
    with pytest.raises(ArithmeticError):
        arith.o_left_inverse(arith.matrix([[3], [6]], 1), 3)


def test_stacking_helpers():
    a = arith.matrix([[1, 2]], 2)
    b = arith.matrix([[3]], 1)
    assert arith.hstack([a, b]) == arith.matrix([[1, 2, 3]], 3)
    assert arith.vstack([a, arith.matrix([[4, 5]], 2)]) == arith.matrix([[1, 2], [4, 5]], 2)
    assert arith.block_diag([b, b]) == arith.matrix([[3, 0], [0, 3]], 2)
    assert arith.kron(arith.identity(2), b) == arith.matrix([[3, 0], [0, 3]], 2)
    assert arith.hstack([], 3).nrows() == 3
    assert isinstance(arith.zeros(2, 2), Mat)
