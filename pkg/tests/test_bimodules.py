import random

import pytest

from tate_transfer import arith
from tate_transfer.algebra import cyclic_group_algebra, matrix_algebra, symmetric_group_algebra
from tate_transfer.bimodules import (Bimodule, BimoduleError, adjunction_data, direct_sum_bimodule,
                                     hochschild_tate, induction_bimodule, outer_tensor, regular_bimodule,
                                     subgroup_algebra, subgroup_generated, transfer_hh_via_bimodule_hom,
                                     transfer_hochschild, transfer_hom, triangle_identities)
from tate_transfer.lattices import TateGroup, TowerMap, regular_lattice, trivial_lattice, validate_lattice
from tate_transfer.oracle_matrix import matrix_bimodule


def _unit_multiple(alg, c):
    return tuple(c * x for x in alg.unit)


def test_regular_bimodule_is_perfect():
    A = cyclic_group_algebra(3, 3)
    M = regular_bimodule(A)
    assert M.validate() == [] and M.is_perfect()
    D = M.dual()
    assert D.dual() is M
    assert D.left_alg is A and D.right_alg is A


def test_subgroup_algebra_errors():
    A = symmetric_group_algebra(3, 3)
    with pytest.raises(BimoduleError, match="subgroup"):
        subgroup_algebra(A, [0, 1, 3])
    with pytest.raises(BimoduleError):
        subgroup_algebra(matrix_algebra(2, 3), [0])
    assert len(subgroup_generated(A, [3])) == 3


def test_prime_mismatch():
    A, B = cyclic_group_algebra(2, 2), cyclic_group_algebra(2, 3)
    with pytest.raises(BimoduleError, match="prime mismatch"):
        Bimodule(A, B, 2, A.L, B.L)


@pytest.fixture(scope="module")
def s3c3():
    A = symmetric_group_algebra(3, 3)
    B, incl = subgroup_algebra(A, subgroup_generated(A, [3]))
    return A, B, induction_bimodule(A, B, incl)


def test_induction_bimodule(s3c3):
    A, B, M = s3c3
    assert M.rank == 6 and M.validate() == [] and M.is_perfect()
    d = adjunction_data(M)
    assert triangle_identities(d) == []
    # π_M = [G:H]·1 and π_{M^∨} = 1
    assert d.pi_M == _unit_multiple(A, 2)
    assert d.pi_Mdual == _unit_multiple(B, 1)


def test_functor_ranks(s3c3):
    A, B, M = s3c3
    d = adjunction_data(M)
    FT = d.F.apply(trivial_lattice(A))
    assert FT.rank == 1 and validate_lattice(FT) == []
    FA = d.F.apply(regular_lattice(A))
    assert FA.rank == 6


def test_transfer_of_identity_is_index(s3c3):
    A, B, M = s3c3
    d = adjunction_data(M)
    T = trivial_lattice(A)
    FT = d.F.apply(T)
    t = transfer_hom(d, T, T, arith.identity(FT.rank))
    assert t == arith.scalar_mul(2, arith.identity(1))


def test_transfer_hom_shape_check(s3c3):
    A, B, M = s3c3
    d = adjunction_data(M)
    T = trivial_lattice(A)
    with pytest.raises(BimoduleError):
        transfer_hom(d, T, T, arith.identity(3))


def test_sum_and_outer_tensor(s3c3):
    A, B, M = s3c3
    S = direct_sum_bimodule(M, M)
    assert S.rank == 12 and S.validate() == [] and S.is_perfect()
    P = outer_tensor(regular_bimodule(cyclic_group_algebra(2, 3)), regular_bimodule(cyclic_group_algebra(2, 3)))
    assert P.validate() == [] and P.is_perfect()


@pytest.mark.parametrize("d,e", [(1, 2), (2, 3), (3, 3)])
def test_matrix_bimodule_triangles(d, e):
    M = matrix_bimodule(matrix_algebra(d, 5), matrix_algebra(e, 5))
    assert M.validate() == [] and M.is_perfect()
    assert triangle_identities(adjunction_data(M)) == []


def test_hochschild_groups():
    A = symmetric_group_algebra(3, 3)
    assert [hochschild_tate(A, n).describe() for n in (-1, 0, 1, 2)] == ["0", "Z/3 x Z/3", "0", "Z/3"]
    assert hochschild_tate(cyclic_group_algebra(3, 3), 0).describe() == "Z/3 x Z/3 x Z/3"
    assert hochschild_tate(cyclic_group_algebra(2, 2), 0).describe() == "Z/2 x Z/2"


def test_hochschild_transfer_two_routes(s3c3):
    A, B, M = s3c3
    d = adjunction_data(M)
    rng = random.Random(4)
    for n in (0, 2):
        G = hochschild_tate(B, n)
        z = G.random_element(rng)
        r1 = transfer_hochschild(M, d, z)
        r2 = transfer_hh_via_bimodule_hom(M, d, z)
        assert r1.certified
        H = TateGroup(r1.value.src, r1.value.a, r1.value.tgt, r1.value.b)
        assert H.classify(r1.value.mat) == H.classify(r2.mat)


def test_hochschild_transfer_rejects_non_hh_class(s3c3):
    A, B, M = s3c3
    d = adjunction_data(M)
    T = trivial_lattice(B).tower()
    with pytest.raises(BimoduleError):
        transfer_hochschild(M, d, TowerMap(T, 0, T, 0, arith.identity(1)))
