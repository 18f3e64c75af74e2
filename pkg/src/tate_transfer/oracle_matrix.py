"""Closed-form adjunction and transfer for matrix algebras, over Q.

A = End(U), B = End(V) with dim U = d, dim V = e, forms λ·trace_U and
μ·trace_V, and M = U⊗V^∨ (d×e matrices, basis E_ab at index a·e + b).
We identify M⊗_B M^∨ = U⊗U^∨ and M^∨⊗_A M = V⊗V^∨ (index a·d + a'
resp. b·e + b'), and A, B with U⊗U^∨, V⊗V^∨ through E_ab ↔ u_a⊗u_b^∨.

Everything in the first half of this module is written from the
closed formulas alone; the second half feeds the same instances through
the generic machinery and compares.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import arith
from .arith import Mat, frac, q


@dataclass(frozen=True)
class MatrixInstance:
    d: int
    e: int
    lam: Fraction = Fraction(1)
    mu: Fraction = Fraction(1)

    def __post_init__(self):
        if self.d < 1 or self.e < 1:
            raise ValueError("dimensions must be positive")
        if frac(self.lam) == 0 or frac(self.mu) == 0:
            raise ValueError("form scalars must be nonzero")
        object.__setattr__(self, "lam", frac(self.lam))
        object.__setattr__(self, "mu", frac(self.mu))

    @property
    def z_A(self) -> Fraction:
        return self.d / self.lam

    @property
    def z_B(self) -> Fraction:
        return self.e / self.mu


@dataclass
class ClosedAdjunction:
    eps_M: Mat       # V⊗V^∨ column: image of 1_B
    eta_M: Mat       # U⊗U^∨ -> A
    eps_Mdual: Mat   # U⊗U^∨ column: image of 1_A
    eta_Mdual: Mat   # V⊗V^∨ -> B


@dataclass
class OracleReport:
    check: str
    lhs: Fraction
    rhs: Fraction
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"check": self.check, "lhs": arith.fstr(self.lhs), "rhs": arith.fstr(self.rhs),
                "passed": self.passed, "detail": self.detail}

    def row(self) -> str:
        mark = "ok" if self.passed else "FAIL"
        return f"{mark:4} {self.check:34} {arith.fstr(self.lhs)} = {arith.fstr(self.rhs)}  {self.detail}"


def _diag_vector(n: int, c) -> Mat:
    v = Mat(n * n, 1)
    for a in range(n):
        v[a * n + a, 0] = q(c)
    return v


def closed_form_adjunction(inst: MatrixInstance) -> ClosedAdjunction:
    """ε_M(1) = λ·Σ v⊗v^∨, η_M = λ^{-1}·(u⊗μ ↦ uμ^T), ε_{M^∨}(1) = μ·Σ u⊗u^∨, η_{M^∨} = μ^{-1}·(...)."""
    d, e = inst.d, inst.e
    return ClosedAdjunction(
        _diag_vector(e, inst.lam),
        q(1 / inst.lam) * arith.identity(d * d),
        _diag_vector(d, inst.mu),
        q(1 / inst.mu) * arith.identity(e * e),
    )


def unit_counit_composites(inst: MatrixInstance) -> tuple[Mat, Mat]:
    """η_M∘ε_{M^∨} on A and η_{M^∨}∘ε_M on B, as multiplication operators (d²×d², e²×e²)."""
    c = closed_form_adjunction(inst)
    d, e = inst.d, inst.e
    # ε_{M^∨}(a) = a·ε_{M^∨}(1): left multiplication by a on U⊗U^∨
    epsA = Mat(d * d, d * d)
    for i in range(d * d):
        epsA = epsA + _left_mult_u(d, i) * c.eps_Mdual * arith.submatrix(arith.identity(d * d), [i], range(d * d))
    epsB = Mat(e * e, e * e)
    for i in range(e * e):
        epsB = epsB + _left_mult_u(e, i) * c.eps_M * arith.submatrix(arith.identity(e * e), [i], range(e * e))
    return c.eta_M * epsA, c.eta_Mdual * epsB


def _left_mult_u(n: int, i: int) -> Mat:
    """E_{ij} acting on the first factor of U⊗U^∨."""
    a, b = divmod(i, n)
    m = Mat(n * n, n * n)
    for c in range(n):
        m[a * n + c, b * n + c] = 1
    return m


def check_adj_inverse(inst: MatrixInstance) -> list[OracleReport]:
    """η_M∘ε_{M^∨} = λ^{-1}μ·Id_A and η_{M^∨}∘ε_M = λμ^{-1}·Id_B, entrywise."""
    pa, pb = unit_counit_composites(inst)
    d, e = inst.d, inst.e
    ea = q(inst.mu / inst.lam) * arith.identity(d * d)
    eb = q(inst.lam / inst.mu) * arith.identity(e * e)
    return [
        OracleReport("eta_M.eps_Mv = (mu/lam) Id", arith.trace(pa), arith.trace(ea), pa == ea, f"d={d}"),
        OracleReport("eta_Mv.eps_M = (lam/mu) Id", arith.trace(pb), arith.trace(eb), pb == eb, f"e={e}"),
    ]


# ---- transfer on sums of copies of U


def _contract_u(d: int, k: int) -> Mat:
    """U^∨⊗U^k -> O^k, u_a^∨⊗(x in copy c at a') ↦ δ_{aa'} e_c (index a·dk + c·d + a')."""
    m = Mat(k, d * d * k)
    for a in range(d):
        for c in range(k):
            m[c, a * d * k + c * d + a] = 1
    return m


def oracle_transfer(inst: MatrixInstance, b: Mat) -> Mat:
    """tr_M(β) for β = b⊗I_e: V^{k2} -> V^{k1}, as a map U^{k2} -> U^{k1} (k1×k2 matrix b).

    Built as (η_M⊗Id)∘(Id_M⊗β)∘(ε_{M^∨}⊗Id) through U⊗U^∨⊗U^{k2} ≅ U⊗O^{k2}.
    """
    d = inst.d
    k1, k2 = b.nrows(), b.ncols()
    c = closed_form_adjunction(inst)
    # ε_{M^∨}⊗Id: x ↦ ε(1)⊗x in (U⊗U^∨)⊗U^{k2}
    eps = arith.kron(c.eps_Mdual, arith.identity(d * k2))
    # contract U^∨⊗U^{k2} to O^{k2}: lands in U⊗O^{k2} = M⊗_B(M^∨⊗_A U^{k2})
    con = arith.kron(arith.identity(d), _contract_u(d, k2))
    # Id_M⊗β on U⊗O^{k2} -> U⊗O^{k1}
    mid = arith.kron(arith.identity(d), b)
    # η_M⊗Id: U⊗O^{k1} = U⊗U^∨⊗_A U^{k1} -> U^{k1}; u_a⊗e_c ↦ λ^{-1}·(copy c, coordinate a)
    eta = Mat(d * k1, d * k1)
    lam_inv = 1 / inst.lam
    for a in range(d):
        for cc in range(k1):
            eta[cc * d + a, a * k1 + cc] = q(lam_inv)
    return eta * mid * con * eps


def phi_A(inst: MatrixInstance, alpha: Mat, beta: Mat) -> Fraction:
    """z_A^{-1}·trace(β∘α) for maps between sums of copies of U."""
    return arith.trace(beta * alpha) / inst.z_A


def phi_B(inst: MatrixInstance, alpha: Mat, beta: Mat) -> Fraction:
    return arith.trace(beta * alpha) / inst.z_B


def _rand_mat(rng: random.Random, r: int, c: int, bound: int = 9) -> Mat:
    return arith.matrix([[rng.randint(-bound, bound) for _ in range(c)] for _ in range(r)], c)


def check_prop_matrix_1(inst: MatrixInstance, a: Mat, b: Mat) -> OracleReport:
    """φ_A(α, tr_M β) = φ_B(Id⊗α, β) for α = a⊗I_d: U^{k1} -> U^{k2}, β = b⊗I_e: V^{k2} -> V^{k1}."""
    d, e = inst.d, inst.e
    alpha = arith.kron(a, arith.identity(d))
    tr = oracle_transfer(inst, b)
    lhs = phi_A(inst, alpha, tr)
    rhs = phi_B(inst, arith.kron(a, arith.identity(e)), arith.kron(b, arith.identity(e)))
    return OracleReport("prop-matrix-1", lhs, rhs, lhs == rhs, f"d={d} e={e} lam={inst.lam} mu={inst.mu}")


def check_prop_matrix_2(inst: MatrixInstance, zeta: Mat, xi: Mat, sigma: Mat) -> OracleReport:
    """Both traces of the matrix proposition on X = A^x, Y = B^y.

    ζ: A -> A^x is a column of scalars, ξ: M^x -> M^y a y×x scalar matrix,
    σ: B^y -> B a row of scalars.
    """
    d, e = inst.d, inst.e
    c = closed_form_adjunction(inst)
    x, y = zeta.nrows(), sigma.ncols()
    # A side, on A = U⊗U^∨ (d² dims) with copies as the outer index
    epsA = Mat(d * d, d * d)
    for i in range(d * d):
        epsA = epsA + _left_mult_u(d, i) * c.eps_Mdual * arith.submatrix(arith.identity(d * d), [i], range(d * d))
    z2A = q(1 / inst.z_A ** 2)
    Id = arith.identity(d * d)
    mapA = z2A * (c.eta_M * arith.kron(sigma, Id) * arith.kron(xi, Id) * arith.kron(arith.identity(x), epsA)
                  * arith.kron(zeta, Id))
    # B side, on B = V⊗V^∨
    epsB = Mat(e * e, e * e)
    for i in range(e * e):
        epsB = epsB + _left_mult_u(e, i) * c.eps_M * arith.submatrix(arith.identity(e * e), [i], range(e * e))
    z2B = q(1 / inst.z_B ** 2)
    Ie = arith.identity(e * e)
    mapB = z2B * (arith.kron(sigma, Ie) * arith.kron(arith.identity(y), c.eta_Mdual) * arith.kron(xi, Ie)
                  * arith.kron(zeta, Ie) * epsB)
    lhs, rhs = arith.trace(mapA), arith.trace(mapB)
    expected = inst.lam * inst.mu * frac((sigma * xi * zeta)[0, 0])
    return OracleReport("prop-matrix-2", lhs, rhs, lhs == rhs == expected,
                        f"d={d} e={e} expected={arith.fstr(expected)}")


def check_scaled_transfer(d: int, e: int, lam, mu, rng: random.Random, k1: int = 2, k2: int = 2) -> list[OracleReport]:
    """tr'_M = λ^{-1}μ·tr_M on a random β, z'_A = λ^{-1}d, z'_B = μ^{-1}e."""
    base = MatrixInstance(d, e)
    sc = MatrixInstance(d, e, lam, mu)
    b = _rand_mat(rng, k1, k2)
    t0 = oracle_transfer(base, b)
    t1 = oracle_transfer(sc, b)
    factor = sc.mu / sc.lam
    ok = t1 == q(factor) * t0
    return [
        OracleReport("tr' = lam^-1 mu tr", arith.trace(t1), factor * arith.trace(t0), ok, f"d={d} e={e}"),
        OracleReport("z'_A = lam^-1 d", sc.z_A, Fraction(d) / sc.lam, sc.z_A == Fraction(d) / sc.lam),
        OracleReport("z'_B = mu^-1 e", sc.z_B, Fraction(e) / sc.mu, sc.z_B == Fraction(e) / sc.mu),
    ]


def check_morita_triangle(d: int) -> list[OracleReport]:
    """The trace/adjunction triangle for U⊗Hom_A(U, A), U⊗U^∨, A and R.

    Hom_A(U, A) has basis λ_b: u ↦ u e_b^T; σ(u⊗λ_b) = u⊗e_b^∨,
    ρ(u⊗λ_b) = u e_b^T, α(u⊗μ) = uμ^T, τ(u⊗μ) = μ(u).
    """
    n = d * d
    sig = arith.identity(n)          # u_a⊗λ_b ↦ u_a⊗e_b^∨ (trace∘λ_b = e_b^∨)
    rho = Mat(n, n)
    alpha = Mat(n, n)
    tau = Mat(1, n)
    tr = Mat(1, n)
    for a in range(d):
        for b in range(d):
            rho[a * d + b, a * d + b] = 1      # u_a e_b^T = E_ab
            alpha[a * d + b, a * d + b] = 1
            if a == b:
                tau[0, a * d + b] = 1
                tr[0, a * d + b] = 1
    # trace∘λ_b really is e_b^∨: trace(u_c e_b^T) = δ_cb
    hom_ok = all(arith.trace(_e(d, c, b)) == int(c == b) for b in range(d) for c in range(d))
    up = alpha * sig == rho
    low = tr * alpha == tau
    return [OracleReport("morita upper triangle", Fraction(int(up)), Fraction(1), up and hom_ok, f"d={d}"),
            OracleReport("morita lower triangle", Fraction(int(low)), Fraction(1), low, f"d={d}")]


def _e(d: int, a: int, b: int) -> Mat:
    m = Mat(d, d)
    m[a, b] = 1
    return m


def run_oracle_suite(d: int, e: int, lam, mu, seed: int, trials: int = 5) -> list[OracleReport]:
    """All closed-form checks for one (d, e, λ, μ)."""
    rng = random.Random(seed)
    inst = MatrixInstance(d, e, lam, mu)
    out = list(check_adj_inverse(inst))
    for _ in range(trials):
        k1, k2 = rng.randint(1, 3), rng.randint(1, 3)
        out.append(check_prop_matrix_1(inst, _rand_mat(rng, k2, k1), _rand_mat(rng, k1, k2)))
        x, y = rng.randint(1, 3), rng.randint(1, 3)
        out.append(check_prop_matrix_2(inst, _rand_mat(rng, x, 1), _rand_mat(rng, y, x), _rand_mat(rng, 1, y)))
    out += check_scaled_transfer(d, e, lam, mu, rng)
    out += check_morita_triangle(d)
    return out


# ---------------------------------------------------------------- generic comparison


def matrix_bimodule(A, B):
    """d×e matrices as an M_d-M_e-bimodule (A, B from algebra.matrix_algebra)."""
    from .bimodules import Bimodule
    d = int(round(A.n ** 0.5))
    e = int(round(B.n ** 0.5))
    m = d * e
    left, right = [], []
    for i in range(d):
        for j in range(d):
            L = Mat(m, m)
            for b in range(e):
                L[i * e + b, j * e + b] = 1       # E_ij E_jb = E_ib
            left.append(L)
    for k in range(e):
        for l in range(e):
            R = Mat(m, m)
            for a in range(d):
                R[a * e + l, a * e + k] = 1       # E_ak E_kl = E_al
            right.append(R)
    return Bimodule(A, B, m, left, right, f"M{d}x{e}")


def _contract_MMd(d: int, e: int) -> Mat:
    """M⊗_O M^∨ -> U⊗U^∨: (u_a⊗v_b^∨)⊗(v_b'⊗u_a'^∨) ↦ δ_bb' u_a⊗u_a'^∨."""
    m = d * e
    c = Mat(d * d, m * m)
    for a in range(d):
        for b in range(e):
            for a2 in range(d):
                c[a * d + a2, (a * e + b) * m + (a2 * e + b)] = 1
    return c


def _contract_MdM(d: int, e: int) -> Mat:
    """M^∨⊗_O M -> V⊗V^∨: (v_b⊗u_a^∨)⊗(u_a'⊗v_b'^∨) ↦ δ_aa' v_b⊗v_b'^∨."""
    m = d * e
    c = Mat(e * e, m * m)
    for a in range(d):
        for b in range(e):
            for b2 in range(e):
                c[b * e + b2, (a * e + b) * m + (a * e + b2)] = 1
    return c


def column_module(A, k: int = 1):
    from .lattices import Lattice
    d = int(round(A.n ** 0.5))
    acts = [arith.kron(arith.identity(k), _e(d, i, j)) for i in range(d) for j in range(d)]
    return Lattice(A, d * k, acts, name=f"U^{k}")


def generic_comparison(d: int, e: int, p: int, lam=1, mu=1, seed: int = 0) -> list[OracleReport]:
    """Generic adjunction maps and transfer against the closed forms (p must not divide d·e)."""
    from .algebra import matrix_algebra
    from .bimodules import adjunction_data, transfer_hom
    if (d * e) % p == 0:
        raise ValueError("closed-form comparison needs p not dividing d·e")
    inst = MatrixInstance(d, e, lam, mu)
    A = matrix_algebra(d, p, inst.lam)
    B = matrix_algebra(e, p, inst.mu)
    M = matrix_bimodule(A, B)
    data = adjunction_data(M)
    c = closed_form_adjunction(inst)
    C1, C2 = _contract_MMd(d, e), _contract_MdM(d, e)
    out = []
    checks = [
        ("generic eps_Mv = closed", C1 * data.eps_Mdual == c.eps_Mdual),
        ("generic eps_M = closed", C2 * data.eps_M == c.eps_M),
        ("generic eta_M = closed", data.eta_M == c.eta_M * C1),
        ("generic eta_Mv = closed", data.eta_Mdual == c.eta_Mdual * C2),
        ("generic z_A = lam^-1 d", tuple(A.z) == tuple(frac(x) * inst.z_A for x in A.unit)),
        ("generic z_B = mu^-1 e", tuple(B.z) == tuple(frac(x) * inst.z_B for x in B.unit)),
    ]
    for name, ok in checks:
        out.append(OracleReport(name, Fraction(int(ok)), Fraction(1), ok, f"d={d} e={e} p={p}"))
    # transfer of β = b⊗I_e between sums of copies, through the identification M^∨⊗_A U^k = V^k
    rng = random.Random(seed)
    k1, k2 = 2, 1 + (d + e) % 2
    b = _rand_mat(rng, k1, k2)
    U1, U2 = column_module(A, k1), column_module(A, k2)
    iso1, iso2 = _iso_to_vk(data, U1, d, e, k1), _iso_to_vk(data, U2, d, e, k2)
    beta = iso1.inv() * arith.kron(b, arith.identity(e)) * iso2
    tr = transfer_hom(data, U2, U1, beta)
    expect = oracle_transfer(inst, b)
    ok = tr == expect
    out.append(OracleReport("generic transfer = closed", Fraction(int(ok)), Fraction(1), ok, f"d={d} e={e} p={p}"))
    return out


def _iso_to_vk(data, U, d: int, e: int, k: int) -> Mat:
    """M^∨⊗_A U^k -> V^k: (v_b⊗u_a^∨)⊗x ↦ Σ_c x_{c,a} v_b in copy c."""
    m = d * e
    pre = Mat(k * e, m * d * k)
    for a in range(d):
        for b in range(e):
            for c in range(k):
                pre[c * e + b, (a * e + b) * (d * k) + c * d + a] = 1
    FU = data.F.apply(U)
    return pre * FU.sigma
