import random

import pytest

from tate_transfer import arith
from tate_transfer.arith import MatlisValue
from tate_transfer.bimodules import adjunction_data, functor_tower, tensor_id_with, transfer_graded
from tate_transfer.duality import (PairingError, check_nondegenerate, check_symmetry, check_theorem1,
                                   check_theorem2, check_well_defined, identity_class, pairing_matrix,
                                   tate_pairing, witness_nonzero_product, yoneda_product)
from tate_transfer.lattices import TateGroup, TowerMap, tate_ext


def test_identity_pairing_values(c2, c3, s3):
    for inst, expect in ((c2, MatlisValue(1, 1, 2)), (c3, MatlisValue(1, 1, 3)), (s3, MatlisValue(2, 1, 3))):
        T = inst.lattices["triv"]
        ident = identity_class(T.tower())
        assert tate_pairing(ident, ident) == expect


def test_pairing_degree_mismatch(c2):
    T = c2.lattices["triv"]
    tw = T.tower()
    a = TowerMap(tw, 0, tw, 0, arith.identity(1))
    b = tate_ext(T, T, 1).random_element(random.Random(0))
    with pytest.raises(PairingError, match="do not add up"):
        tate_pairing(a, b)


def test_pairing_is_bilinear(s3, rng):
    U, V = s3.lattices["triv"], s3.lattices["sign"]
    G, D = tate_ext(U, V, 2), tate_ext(V, U, -2)
    for _ in range(5):
        a1, a2, b = G.random_element(rng), G.random_element(rng), D.random_element(rng)
        assert tate_pairing(a1 + a2, b) == tate_pairing(a1, b) + tate_pairing(a2, b)


def test_symmetry_and_well_definedness(s3, rng):
    U, V = s3.lattices["triv"], s3.lattices["sign"]
    for n in (-2, 0, 2):
        G, D = tate_ext(U, V, n), tate_ext(V, U, -n)
        a, b = G.random_element(rng), D.random_element(rng)
        assert check_symmetry(a, b).passed
        assert check_well_defined(a, b, rng).passed


def test_pairing_table_and_nondegeneracy(c3):
    T = c3.lattices["triv"]
    G = tate_ext(T, T, 0)
    table = pairing_matrix(G, G)
    assert [[str(v) for v in row] for row in table] == [["1/3^1"]]
    assert check_nondegenerate(G, G)


def test_degenerate_pairing_detected(c3):
    T = c3.lattices["triv"]
    G = tate_ext(T, T, 0)
    zero = lambda a, b: MatlisValue(0, 0, 3)
    assert not check_nondegenerate(G, G, zero)


def test_witness(s3):
    U = s3.lattices["triv"]
    G = tate_ext(U, U, 0)
    w = witness_nonzero_product(G.gen_elements()[0], G)
    assert w.ok and not w.pairing.is_zero()
    with pytest.raises(PairingError):
        witness_nonzero_product(G.wrap(arith.scalar_mul(0, G.gen_elements()[0].mat)), G)


def test_yoneda_product_of_identities(c2):
    T = c2.lattices["triv"]
    ident = identity_class(T.tower())
    assert yoneda_product(ident, ident).mat == ident.mat


def test_theorem1_small(s3):
    rs = check_theorem1(s3.M, s3.lattices["triv"], s3.lattices["sign"], 2, 4, seed=1)
    assert len(rs) == 8 and all(r.passed for r in rs)


def test_theorem1_detects_wrong_transfer(s3, rng):
    """Doubling the transfer breaks the identity whenever the pairing is nonzero."""
    M = s3.M
    data = adjunction_data(M)
    U, V = s3.lattices["triv"], s3.lattices["sign"]
    TU, TV = U.tower(), V.tower()
    GA = TateGroup(TU, 0, TV, 2)
    GB = TateGroup(functor_tower(data, TV), 0, functor_tower(data, TU), -2)
    alpha = GA.gen_elements()[0]
    mismatches = 0
    for beta in GB.gen_elements():
        trb = transfer_graded(data, beta, TV, TU)
        right = tate_pairing(tensor_id_with(data, alpha), beta)
        assert tate_pairing(alpha, trb) == right
        if tate_pairing(alpha, trb.scaled(2)) != right:
            mismatches += 1
    assert mismatches > 0


def test_theorem2_small(s3):
    rs = check_theorem2(s3.M, 0, 2, seed=1)
    assert all(r.passed for r in rs)


def test_theorem2_rescaled(s3):
    rs = check_theorem2(s3.rescaled(4, 7).M, 0, 2, seed=2)
    assert all(r.passed for r in rs)
