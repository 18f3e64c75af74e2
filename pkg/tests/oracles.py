"""Independent oracles, written without the package's lattice machinery.

Tate cohomology of C_p with trivial coefficients from the standard complete
(periodic) resolution:

    ... -> ZG --N--> ZG --(g-1)--> ZG --N--> ZG --(g-1)--> ZG -> ...

indexed so that d_i: P_i -> P_{i-1} is g-1 for odd i and the norm N for even
i (the splice P_0 -> Z -> P_{-1} is the norm).  Hom_G(-, Z) is computed by
brute force from the invariant functionals and cohomology from the Smith
normal form of the incoming differential (sympy over ZZ).
"""

from __future__ import annotations

from math import gcd, lcm

from sympy import Matrix, ZZ, eye, zeros
from sympy.matrices.normalforms import smith_normal_form


def regular_rep(p: int, k: int) -> Matrix:
    """Permutation matrix of g^k on ZG = Z^p (basis g^0..g^{p-1})."""
    m = zeros(p, p)
    for j in range(p):
        m[(j + k) % p, j] = 1
    return m


def differential(p: int, i: int) -> Matrix:
    g = regular_rep(p, 1)
    if i % 2:
        return g - eye(p)
    return sum((regular_rep(p, k) for k in range(p)), zeros(p, p))


def invariant_functionals(p: int) -> Matrix:
    """Rows spanning Hom_G(ZG, Z) = {f : f·g = f}, as an integer basis."""
    g = regular_rep(p, 1)
    ns = (g.T - eye(p)).nullspace()
    rows = []
    for v in ns:
        den = lcm(*(x.q for x in v))
        w = [int(x * den) for x in v]
        c = gcd(*w)
        rows.append([x // c for x in w])
    return Matrix(rows)


def cochain_map(p: int, i: int) -> Matrix:
    """d_i^*: Hom_G(P_{i-1}, Z) -> Hom_G(P_i, Z) in the invariant-functional basis."""
    F = invariant_functionals(p)
    D = differential(p, i)
    img = F * D                      # f ∘ d_i, as rows
    # solve img = C·F for C (F has full row rank; use a left pseudo-inverse over Q)
    C = img * F.T * (F * F.T).inv()
    assert C * F == img
    return C.T                       # acts on column coordinates


def tate_cohomology_cp(p: int, n: int) -> list[int]:
    """Invariant factors (> 1) of Ĥ^n(C_p, Z), plus 0 for each free summand."""
    d_in = cochain_map(p, n)         # C^{n-1} -> C^n
    d_out = cochain_map(p, n + 1)    # C^n -> C^{n+1}
    # ker d_out is a direct summand, so H^n = Z^(nullity - rank d_in) ⊕ torsion of coker d_in
    snf = smith_normal_form(d_in, domain=ZZ)
    diag = [abs(int(snf[i, i])) for i in range(min(snf.shape))]
    rank_in = sum(1 for x in diag if x)
    nullity = d_out.shape[1] - d_out.rank()
    torsion = sorted(x for x in diag if x > 1)
    return [0] * (nullity - rank_in) + torsion


def describe(factors: list[int]) -> str:
    if not factors:
        return "0"
    return " x ".join("Z" if f == 0 else f"Z/{f}" for f in factors)
