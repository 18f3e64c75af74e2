"""Tate duality pairings, Yoneda products and the transfer checkers."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from . import arith
from .algebra import Algebra
from .arith import MatlisValue, Mat, matlis_reduce
from .bimodules import (AdjunctionData, Bimodule, adjunction_data, functor_tower, hh_tower,
                        tensor_id_with, transfer_graded, transfer_hochschild)
from .lattices import Lattice, TateGroup, TowerMap


class PairingError(ValueError):
    pass


@dataclass
class PairingReport:
    check: str
    instance: str
    degree: int
    left: str
    right: str
    lhs: MatlisValue
    rhs: MatlisValue
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {"check": self.check, "instance": self.instance, "degree": self.degree,
                "left": self.left, "right": self.right, "lhs": str(self.lhs), "rhs": str(self.rhs),
                "passed": self.passed, "note": self.note}

    def row(self) -> str:
        mark = "ok" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"{mark:4} {self.check:28} {self.instance:24} n={self.degree:+d}  {self.lhs} = {self.rhs}{extra}"


def report_table(reports: list[PairingReport]) -> str:
    return "\n".join(r.row() for r in reports)


# ---------------------------------------------------------------- pairings


def _close_up(alpha: TowerMap, beta: TowerMap) -> Mat:
    """Σ^n(β)∘α as an endomorphism of the source of α."""
    if beta.src is not alpha.tgt or beta.tgt is not alpha.src:
        raise PairingError("pairing arguments do not live in matching towers")
    if alpha.degree + beta.degree != 0:
        raise PairingError(f"degrees {alpha.degree} and {beta.degree} do not add up to 0")
    sb = beta.shift(alpha.b - beta.a)
    if sb.b != alpha.a:  # pragma: no cover - follows from the degree check
        raise PairingError("shifted map does not land in the source")
    return sb.mat * alpha.mat


def _algebra_of(t) -> Algebra:
    return t.algebra


def phi_form(alpha: TowerMap, beta: TowerMap) -> Fraction:
    """Trace on KU of z^{-1}·Σ^n(β)∘α (an element of K)."""
    A = _algebra_of(alpha.src)
    U = alpha.source
    return arith.trace(U.act_elem(A.z_inverse) * _close_up(alpha, beta))


def tate_pairing(alpha: TowerMap, beta: TowerMap) -> MatlisValue:
    return matlis_reduce(phi_form(alpha, beta), _algebra_of(alpha.src).p)


def hh_phi(zeta: TowerMap, tau: TowerMap, A: Algebra) -> Fraction:
    """Trace on KA of z_A^{-2}·Σ^n(τ)∘ζ for classes in the Hochschild towers of A."""
    zi = A.z_inverse
    z2 = A.left_mult_of(A.mul(zi, zi))
    return arith.trace(z2 * _close_up(zeta, tau))


def hh_pairing(zeta: TowerMap, tau: TowerMap, A: Algebra) -> MatlisValue:
    return matlis_reduce(hh_phi(zeta, tau, A), A.p)


def yoneda_product(beta: TowerMap, alpha: TowerMap) -> TowerMap:
    """βα = Σ^m(β)∘α for α: U -> Σ^m V and β: V -> Σ^n W."""
    if beta.src is not alpha.tgt:
        raise PairingError("Yoneda product of maps in unrelated towers")
    return alpha.then(beta.shift(alpha.b - beta.a))


def identity_class(tower, level: int = 0) -> TowerMap:
    return TowerMap(tower, level, tower, level, arith.identity(tower.level(level).rank))


# ---------------------------------------------------------------- associativity


def check_adjointness_associativity(alpha: TowerMap, beta: TowerMap, gamma: TowerMap,
                                    instance: str = "") -> list[PairingReport]:
    """⟨βα, γ⟩ = ⟨α, γβ⟩ and ⟨(γβ)α, Id_U⟩ = ⟨α, γβ⟩."""
    ba = yoneda_product(beta, alpha)
    gb = yoneda_product(gamma, beta)
    lhs = tate_pairing(ba, gamma)
    rhs = tate_pairing(alpha, gb)
    out = [PairingReport("adjoint-associativity", instance, alpha.degree, "<ba,c>", "<a,cb>", lhs, rhs, lhs == rhs)]
    gba = yoneda_product(gb, alpha)
    idu = identity_class(alpha.src, alpha.a)
    lhs2 = tate_pairing(gba, idu)
    out.append(PairingReport("pairing-with-identity", instance, alpha.degree, "<(cb)a,Id>", "<a,cb>",
                             lhs2, rhs, lhs2 == rhs))
    return out


def check_symmetry(alpha: TowerMap, beta: TowerMap, instance: str = "") -> PairingReport:
    lhs = tate_pairing(alpha, beta)
    rhs = tate_pairing(beta, alpha)
    return PairingReport("symmetry", instance, alpha.degree, "<a,b>", "<b,a>", lhs, rhs, lhs == rhs)


# ---------------------------------------------------------------- nondegeneracy


def pairing_matrix(X: TateGroup, Y: TateGroup, pair=tate_pairing) -> list[list[MatlisValue]]:
    xs, ys = X.gen_elements(), Y.gen_elements()
    return [[pair(x, y) for y in ys] for x in xs]


def check_nondegenerate(X: TateGroup, Y: TateGroup, pair=tate_pairing) -> bool:
    """Is X -> Hom(Y, K/O) an isomorphism?

    With Y = ⊕ Z/p^{b_j} the target is ⊕ Z/p^{b_j} via evaluation on the
    generators; the map is onto iff the Smith form of the pairing matrix
    stacked on diag(p^{b_j}) is trivial, and then bijective iff |X| = |Y|.
    """
    if X.order != Y.order:
        return False
    if X.order == 1:
        return True
    p = X.p
    mat = pairing_matrix(X, Y, pair)
    bs = Y.exponents
    rows = []
    for i, row in enumerate(mat):
        vals = []
        for j, v in enumerate(row):
            if v.exp > bs[j]:
                return False  # value not killed by the order of the generator
            vals.append(v.num * p ** (bs[j] - v.exp) if v.num else 0)
        rows.append(vals)
        # the map is well defined only if p^{a_i} kills the row
        if any((x * p ** X.exponents[i]) % (p ** b) for x, b in zip(vals, bs)):
            return False
    for j, b in enumerate(bs):
        rows.append([p ** b if k == j else 0 for k in range(len(bs))])
    snf = arith.smith_normal_form(arith.matrix(rows), p)
    return all(e == 0 for e in snf.exponents) and len(snf.exponents) >= len(bs)


# ---------------------------------------------------------------- witnesses


@dataclass
class Witness:
    zeta: TowerMap
    eta: TowerMap
    pairing: MatlisValue
    product: TowerMap            # ηζ ∈ Ext-hat^0(U, U)
    product_class: tuple
    other_product_class: tuple   # ζη ∈ Ext-hat^0(V, V)
    identity_pairing: MatlisValue

    @property
    def ok(self) -> bool:
        return (not self.pairing.is_zero() and any(self.product_class) and any(self.other_product_class)
                and self.identity_pairing == self.pairing)


def dual_group(zeta: TowerMap) -> TateGroup:
    """Ext-hat^{-n}(V, U) in the towers of ζ: U -> Σ^n V."""
    return TateGroup(zeta.tgt, zeta.b - zeta.degree, zeta.src, zeta.a - zeta.degree)


def witness_nonzero_product(zeta: TowerMap, group: TateGroup | None = None) -> Witness:
    """Find η with ⟨ζ, η⟩ ≠ 0 and certify that ηζ and ζη are nonzero."""
    G = group or TateGroup(zeta.src, zeta.a, zeta.tgt, zeta.b)
    if G.is_zero(zeta.mat):
        raise PairingError("witness search needs a nonzero class")
    D = dual_group(zeta)
    gens = D.gen_elements()
    found = None
    for g in gens:
        if not tate_pairing(zeta, g).is_zero():
            found = g
            break
    if found is None:
        ranges = [range(o) for o in D.invariant_factors()]
        for coeffs in itertools.product(*ranges):
            if not any(coeffs):
                continue
            eta = D.wrap(D.element(coeffs))
            if not tate_pairing(zeta, eta).is_zero():
                found = eta
                break
    if found is None:
        raise PairingError("no η pairs nontrivially with ζ: the pairing is degenerate")
    eta = found
    val = tate_pairing(zeta, eta)
    prod = yoneda_product(eta, zeta)
    EU = TateGroup(zeta.src, zeta.a, zeta.src, zeta.a)
    prod2 = yoneda_product(zeta, eta)
    EV = TateGroup(eta.src, eta.a, eta.src, eta.a)
    idp = tate_pairing(prod, identity_class(zeta.src, zeta.a))
    return Witness(zeta, eta, val, prod, EU.classify_map(prod), EV.classify_map(prod2), idp)


# ---------------------------------------------------------------- theorem checkers


def _describe(g: TateGroup, f: TowerMap) -> str:
    c = g.classify_map(f)
    return "(" + ",".join(map(str, c)) + ")"


def check_theorem1(M: Bimodule, U: Lattice, V: Lattice, n: int, trials: int, seed: int,
                   data: AdjunctionData | None = None, instance: str = "",
                   rng: random.Random | None = None) -> list[PairingReport]:
    """⟨α, tr_M β⟩_A = ⟨Id⊗α, β⟩_B and ⟨tr_M β, α⟩_A = ⟨β, Id⊗α⟩_B on random classes.

    α ∈ Ext-hat^n_A(U, V) and β ∈ Ext-hat^{-n}_B(M^∨⊗_A V, M^∨⊗_A U).
    """
    data = data or adjunction_data(M)
    rng = rng or random.Random(seed)
    instance = instance or M.name
    TU, TV = U.tower(), V.tower()
    GA = TateGroup(TU, 0, TV, n)
    FU, FV = functor_tower(data, TU), functor_tower(data, TV)
    GB = TateGroup(FV, 0, FU, -n)
    out = []
    for t in range(trials):
        alpha = GA.random_element(rng)
        beta = GB.random_element(rng)
        trb = transfer_graded(data, beta, TV, TU)
        ida = tensor_id_with(data, alpha)
        left = f"a={_describe(GA, alpha)}"
        right = f"b={_describe(GB, beta)}"
        l1, r1 = tate_pairing(alpha, trb), tate_pairing(ida, beta)
        l2, r2 = tate_pairing(trb, alpha), tate_pairing(beta, ida)
        out.append(PairingReport("thm1 <a,tr b>=<1xa,b>", instance, n, left, right, l1, r1, l1 == r1, f"trial {t}"))
        out.append(PairingReport("thm1 <tr b,a>=<b,1xa>", instance, n, left, right, l2, r2, l2 == r2, f"trial {t}"))
    return out


def check_theorem2(M: Bimodule, n: int, trials: int, seed: int, data: AdjunctionData | None = None,
                   dual_data: AdjunctionData | None = None, instance: str = "",
                   rng: random.Random | None = None) -> list[PairingReport]:
    """⟨ζ, tr_M τ⟩_{A^e} = ⟨tr_{M^∨} ζ, τ⟩_{B^e} and the swapped equality.

    ζ ∈ HH-hat^n(A), τ ∈ HH-hat^{-n}(B).
    """
    A, B = M.left_alg, M.right_alg
    data = data or adjunction_data(M)
    Md = M.dual()
    dual_data = dual_data or adjunction_data(Md)
    rng = rng or random.Random(seed)
    instance = instance or M.name
    TA, TB = hh_tower(A), hh_tower(B)
    GA = TateGroup(TA, 0, TA, n)
    GB = TateGroup(TB, 0, TB, -n)
    out = []
    for t in range(trials):
        zeta = GA.random_element(rng)
        tau = GB.random_element(rng)
        tr_tau = transfer_hochschild(M, data, tau)
        tr_zeta = transfer_hochschild(Md, dual_data, zeta)
        note = f"trial {t}"
        if not (tr_tau.certified and tr_zeta.certified):
            note += "; comparison map not certified"
        ok = tr_tau.certified and tr_zeta.certified
        left = f"z={_describe(GA, zeta)}"
        right = f"t={_describe(GB, tau)}"
        l1, r1 = hh_pairing(zeta, tr_tau.value, A), hh_pairing(tr_zeta.value, tau, B)
        l2, r2 = hh_pairing(tr_tau.value, zeta, A), hh_pairing(tau, tr_zeta.value, B)
        out.append(PairingReport("thm2 <z,tr t>=<tr z,t>", instance, n, left, right, l1, r1, ok and l1 == r1, note))
        out.append(PairingReport("thm2 <tr t,z>=<t,tr z>", instance, n, left, right, l2, r2, ok and l2 == r2, note))
    return out


def all_passed(reports: list[PairingReport]) -> bool:
    return all(r.passed for r in reports)


# ---------------------------------------------------------------- structural identities


@dataclass
class CheckResult:
    check: str
    instance: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"check": self.check, "instance": self.instance, "passed": self.passed, "detail": self.detail}

    def row(self) -> str:
        mark = "ok" if self.passed else "FAIL"
        return f"{mark:4} {self.check:28} {self.instance:24} {self.detail}"


def _tuple_str(t) -> str:
    return "(" + ",".join(arith.fstr(x) for x in t) + ")"


def check_z_identities(A: Algebra, B: Algebra) -> list[CheckResult]:
    """z of the opposite, tensor and product algebras."""
    from .algebra import direct_product, opposite, tensor_product
    inst = f"{A.name},{B.name}"
    zt = tensor_product(A, B).z
    expect_t = tuple(x * y for x in A.z for y in B.z)
    zp = direct_product(A, B).z
    return [
        CheckResult("z(A^op) = z(A)", inst, tuple(opposite(A).z) == tuple(A.z), _tuple_str(A.z)),
        CheckResult("z(A(x)B) = z(A)(x)z(B)", inst, tuple(zt) == expect_t),
        CheckResult("z(AxB) = (z(A),z(B))", inst, tuple(zp) == tuple(A.z) + tuple(B.z)),
    ]


def regular_over_ground(A: Algebra) -> Bimodule:
    """A as an A-O-bimodule."""
    from .algebra import ground_ring
    O = ground_ring(A.p)
    e = arith.col_vector(A.unit) * A.form_row
    return Bimodule(A, O, A.n, A.L, [arith.identity(A.n)], f"{A.name}|O", left_higman=e)


def check_pi_regular(A: Algebra) -> CheckResult:
    M = regular_over_ground(A)
    pi = adjunction_data(M).pi_M
    return CheckResult("pi_M = z_A (M = A over O)", A.name, tuple(pi) == tuple(A.z), _tuple_str(pi))


def check_well_defined(alpha: TowerMap, beta: TowerMap, rng: random.Random, instance: str = "") -> CheckResult:
    """⟨α + π, β⟩ = ⟨α, β + π'⟩ = ⟨α, β⟩ for random π, π' ∈ Hom^pr."""
    Ga = TateGroup(alpha.src, alpha.a, alpha.tgt, alpha.b)
    Gb = TateGroup(beta.src, beta.a, beta.tgt, beta.b)
    v = tate_pairing(alpha, beta)
    ok = True
    if Ga.hom.rank:
        pa = Ga.pr_element([rng.randint(-9, 9) for _ in range(Ga.hom.pr_lattice.ncols())])
        ok &= tate_pairing(Ga.wrap(alpha.mat + pa), beta) == v
    if Gb.hom.rank:
        pb = Gb.pr_element([rng.randint(-9, 9) for _ in range(Gb.hom.pr_lattice.ncols())])
        ok &= tate_pairing(alpha, Gb.wrap(beta.mat + pb)) == v
    return CheckResult("pairing well defined", instance, ok, str(v))


def check_transfer_shift(data: AdjunctionData, U: Lattice, V: Lattice, n: int, k: int,
                         rng: random.Random, instance: str = "") -> CheckResult:
    """Σ^k(tr_M β) = tr_M(Σ^k β) in Ext-hat^n_A(Σ^k U, Σ^k V)."""
    TU, TV = U.tower(), V.tower()
    FU, FV = functor_tower(data, TU), functor_tower(data, TV)
    GB = TateGroup(FU, 0, FV, n)
    beta = GB.random_element(rng)
    left = transfer_graded(data, beta, TU, TV).shift(k)
    right = transfer_graded(data, beta.shift(k), TU, TV)
    G = TateGroup(TU, k, TV, n + k)
    diff = G.classify(left.mat - right.mat)
    return CheckResult("transfer commutes with shift", instance, not any(diff),
                       f"n={n} k={k} class={_describe(G, left)}")


def _sum_inclusion(dS: AdjunctionData, dM: AdjunctionData, dN: AdjunctionData, W: Lattice) -> Mat:
    """F_M(W)⊕F_N(W) -> F_{M⊕N}(W) induced by the inclusions of M^∨, N^∨."""
    m, nn = dM.M.rank, dN.M.rank
    FS, FM, FN = dS.F.apply(W), dM.F.apply(W), dN.F.apply(W)
    I = arith.identity(W.rank)
    i1 = arith.submatrix(arith.identity(m + nn), range(m + nn), range(m))
    i2 = arith.submatrix(arith.identity(m + nn), range(m + nn), range(m, m + nn))
    return FS.q * arith.hstack([arith.kron(i1, I) * FM.sigma, arith.kron(i2, I) * FN.sigma])


def check_transfer_additivity(M: Bimodule, N: Bimodule, U: Lattice, V: Lattice, n: int,
                              rng: random.Random, instance: str = "") -> list[CheckResult]:
    """tr_{M⊕N}(β_M ⊕ β_N) = tr_M(β_M) + tr_N(β_N), on representatives and on classes."""
    from .bimodules import direct_sum_bimodule, transfer_hom
    S = direct_sum_bimodule(M, N)
    dM, dN, dS = adjunction_data(M), adjunction_data(N), adjunction_data(S)
    TU, TV = U.tower(), V.tower()
    X, Y = TU.level(0), TV.level(n)
    GM = TateGroup(functor_tower(dM, TU), 0, functor_tower(dM, TV), n)
    GN = TateGroup(functor_tower(dN, TU), 0, functor_tower(dN, TV), n)
    bM, bN = GM.random_element(rng), GN.random_element(rng)
    JX, JY = _sum_inclusion(dS, dM, dN, X), _sum_inclusion(dS, dM, dN, Y)
    bS = JY * arith.block_diag([bM.mat, bN.mat]) * JX.inv()
    tS = transfer_hom(dS, X, Y, bS)
    tsum = transfer_hom(dM, X, Y, bM.mat) + transfer_hom(dN, X, Y, bN.mat)
    G = TateGroup(TU, 0, TV, n)
    out = [CheckResult("transfer additive (maps)", instance, tS == tsum, f"n={n}"),
           CheckResult("transfer additive (classes)", instance, G.classify(tS) == G.classify(tsum),
                       f"n={n} class={_tuple_str(G.classify(tS))}")]
    # pairing values double for M ⊕ M with β ⊕ β
    if N is M:
        alpha = TateGroup(TV, 0, TU, -n).random_element(rng)
        b2 = JY * arith.block_diag([bM.mat, bM.mat]) * JX.inv()
        t2 = TowerMap(TU, 0, TV, n, transfer_hom(dS, X, Y, b2))
        t1 = TowerMap(TU, 0, TV, n, transfer_hom(dM, X, Y, bM.mat))
        v2, v1 = tate_pairing(alpha, t2), tate_pairing(alpha, t1)
        out.append(CheckResult("pairing doubles for M+M", instance, v2 == v1 + v1, f"{v2} = 2*{v1}"))
    return out


def check_hh_additivity(M: Bimodule, N: Bimodule, zeta: TowerMap, instance: str = "") -> CheckResult:
    from .bimodules import direct_sum_bimodule
    S = direct_sum_bimodule(M, N)
    rS = transfer_hochschild(S, adjunction_data(S), zeta).value
    rM = transfer_hochschild(M, adjunction_data(M), zeta).value
    rN = transfer_hochschild(N, adjunction_data(N), zeta).value
    G = TateGroup(rS.src, 0, rS.tgt, rS.b)
    ok = G.classify((rM + rN).mat - rS.mat) == tuple(0 for _ in G.exponents)
    return CheckResult("HH transfer additive", instance, ok, f"n={zeta.degree}")
