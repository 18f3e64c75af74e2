import random
from fractions import Fraction

import pytest

from tate_transfer import arith
from tate_transfer.oracle_matrix import (MatrixInstance, check_adj_inverse, check_morita_triangle,
                                         check_prop_matrix_1, check_prop_matrix_2, check_scaled_transfer,
                                         generic_comparison, oracle_transfer, run_oracle_suite)


def one(x=1):
    return arith.matrix([[x]], 1)


def test_prop1_identity_maps():
    r = check_prop_matrix_1(MatrixInstance(2, 3), one(), one())
    assert r.passed and r.lhs == r.rhs == 1


def test_prop1_zero():
    r = check_prop_matrix_1(MatrixInstance(2, 3), one(), one(0))
    assert r.passed and r.lhs == 0


def test_prop2_product_formula():
    r = check_prop_matrix_2(MatrixInstance(1, 1), one(2), one(3), one(5))
    assert r.passed and r.lhs == r.rhs == 30
    r = check_prop_matrix_2(MatrixInstance(2, 3), one(), one(), one())
    assert r.passed and r.lhs == 1
    r = check_prop_matrix_2(MatrixInstance(2, 3), one(2), one(3), one(0))
    assert r.passed and r.lhs == 0


def test_prop2_expected_includes_scalars():
    r = check_prop_matrix_2(MatrixInstance(2, 2, Fraction(3), Fraction(5)), one(2), one(3), one(5))
    assert r.passed and r.lhs == 3 * 5 * 30


@pytest.mark.parametrize("lam,mu", [(1, 1), (2, 3), (Fraction(1, 4), -7)])
def test_adjunction_inverse(lam, mu):
    assert all(r.passed for r in check_adj_inverse(MatrixInstance(2, 3, lam, mu)))


def test_scaling_examples():
    rng = random.Random(0)
    rs = check_scaled_transfer(2, 3, 1, 3, rng)
    assert all(r.passed for r in rs)
    zb = next(r for r in rs if r.check.startswith("z'_B"))
    assert zb.lhs == 1
    za = next(r for r in check_scaled_transfer(2, 1, 2, 1, rng) if r.check.startswith("z'_A"))
    assert za.lhs == 1


def test_equal_scalars_leave_transfer_unchanged():
    b = arith.matrix([[1, 2], [3, 4]], 2)
    assert oracle_transfer(MatrixInstance(2, 3, 5, 5), b) == oracle_transfer(MatrixInstance(2, 3), b)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_morita_triangle(d):
    assert all(r.passed for r in check_morita_triangle(d))


def test_invalid_instances():
    with pytest.raises(ValueError):
        MatrixInstance(0, 1)
    with pytest.raises(ValueError):
        MatrixInstance(1, 1, 0, 1)
    with pytest.raises(ValueError, match="p not dividing"):
        generic_comparison(2, 3, 3)


def test_suite_and_generic_agree():
    assert all(r.passed for r in run_oracle_suite(3, 2, Fraction(2), Fraction(5, 3), seed=9))
    assert all(r.passed for r in generic_comparison(3, 2, 5, Fraction(2), Fraction(-1), seed=9))
