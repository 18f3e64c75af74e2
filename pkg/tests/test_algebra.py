from fractions import Fraction

import pytest

from tate_transfer import arith
from tate_transfer.algebra import (Algebra, AlgebraError, Group, cyclic_group_algebra, cyclic_table,
                                   direct_product, enveloping_algebra, ground_ring, group_algebra,
                                   matrix_algebra, opposite, symmetric_group_algebra, symmetric_group_table,
                                   tensor_product, validate_algebra, validate_form)


def test_group_validation():
    with pytest.raises(AlgebraError):
        Group([[0, 1], [1, 1]])
    with pytest.raises(AlgebraError):
        Group([[1, 0], [0, 1], [0, 1]])
    g = Group(symmetric_group_table(3)[0], "S3")
    assert g.order == 6
    assert sorted(g.element_order(x) for x in range(6)) == [1, 2, 2, 2, 3, 3]


@pytest.mark.parametrize("n,p", [(2, 2), (3, 3), (4, 2), (5, 3)])
def test_group_algebra_z_is_group_order(n, p):
    A = cyclic_group_algebra(n, p)
    assert A.z == tuple(Fraction(n * (i == A.unit_index)) for i in range(n))
    assert validate_algebra(A) == [] and validate_form(A) == []


def test_symmetric_group_algebra():
    A = symmetric_group_algebra(3, 3)
    assert A.z[A.unit_index] == 6
    assert A.center.ncols() == 3          # three conjugacy classes
    assert A.is_central(A.z)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_matrix_algebra_trace_form(d):
    A = matrix_algebra(d, 5)
    unit = arith.col_vector(A.unit)
    assert arith.col_vector(A.z) == arith.scalar_mul(d, unit)
    assert validate_algebra(A) == []


def test_dual_basis_property():
    A = symmetric_group_algebra(3, 2)
    for i in range(A.n):
        for j in range(A.n):
            assert A.s(A.mul(A.basis_element(i), A.dual_element(j))) == (i == j)


def test_rescaled_form_scales_z():
    A = cyclic_group_algebra(3, 3)
    B = A.rescaled(4)
    assert tuple(4 * x for x in B.z) == A.z
    assert validate_form(B) == []


def test_nonunit_form_rejected():
    A = cyclic_group_algebra(2, 2)
    assert validate_form(A.rescaled(2))


def test_structure_constants_roundtrip():
    A = cyclic_group_algebra(3, 3)
    c = [[[A.constant(i, j, k) for k in range(3)] for j in range(3)] for i in range(3)]
    B = Algebra.from_structure_constants(3, c, A.unit, A.form)
    assert all(x == y for x, y in zip(A.L, B.L))


def test_non_associative_detected():
    def e(k):
        return [int(i == k) for i in range(3)]
    z = [0, 0, 0]
    c = [[e(0), e(1), e(2)], [e(1), e(2), z], [e(2), e(1), z]]
    X = Algebra.from_structure_constants(3, c, [1, 0, 0], [1, 0, 0])
    assert "associativity fails at (1,1,1)" in validate_algebra(X)


def test_nonintegral_constants_rejected():
    c = [[[1, 0], [0, 1]], [[0, 1], [Fraction(1, 3), 0]]]
    with pytest.raises(AlgebraError, match="not in Z_\\(3\\)"):
        Algebra.from_structure_constants(3, c, [1, 0], [1, 0])


def test_constructions():
    A = cyclic_group_algebra(2, 3)
    B = cyclic_group_algebra(3, 3)
    assert opposite(A).z == A.z
    T = tensor_product(A, B)
    assert T.z == tuple(x * y for x in A.z for y in B.z)
    P = direct_product(A, B)
    assert P.z == A.z + B.z
    E = enveloping_algebra(B)
    assert E.n == 9 and validate_algebra(E) == []
    assert ground_ring(5).n == 1


def test_prime_mismatch_and_prime_check():
    with pytest.raises(ValueError, match="prime required"):
        group_algebra(cyclic_table(2), 4)
    with pytest.raises(ValueError):
        tensor_product(cyclic_group_algebra(2, 2), cyclic_group_algebra(2, 3))
