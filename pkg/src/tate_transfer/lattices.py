"""Lattices over an O-algebra, stable homs, shift towers and Tate-Ext groups.

Conventions:

* a lattice is O^m with one action matrix per algebra basis element;
* homs U -> W are |W| x |U| matrices;
* a tower of W has levels W_k (k in Z, W_0 = W) and for every k a short
  exact sequence ``ses(k)``: W_{k-1} -> P_k -> W_k with P_k relatively
  projective.  Levels k <= 0 are built downwards (syzygies), levels k >= 1
  upwards (cosyzygies), so going down and back up reuses the same sequence.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import flint

from . import arith
from .algebra import Algebra, opposite
from .arith import LatticeBasis, Mat, frac, q


class LatticeError(ValueError):
    pass


class HypothesisError(LatticeError):
    """A standing hypothesis (semisimplicity, projectivity, ...) fails."""


class TowerDepthError(LatticeError):
    pass


def tower_depth_cap() -> int:
    return int(os.environ.get("TATE_TOWER_DEPTH", "4"))


def same_algebra(a: Algebra, b: Algebra) -> bool:
    if a is b:
        return True
    return (a.p == b.p and a.n == b.n and a.unit == b.unit and a.form == b.form
            and all(x == y for x, y in zip(a.L, b.L)))


# ---------------------------------------------------------------- lattices


class Lattice:
    """An O-free module over ``algebra`` with explicit action matrices.

    Action matrices may be produced lazily by ``builder(i)``; once produced
    they never change.
    """

    def __init__(self, algebra: Algebra, rank: int, actions=None, *, name: str = "",
                 builder=None, cyclic=None, higman: Mat | None = None):
        self.algebra = algebra
        self.rank = rank
        self.name = name
        self._act: dict[int, Mat] = {}
        if actions is not None:
            actions = list(actions)
            if len(actions) != algebra.n:
                raise LatticeError(f"expected {algebra.n} action matrices, got {len(actions)}")
            for i, m in enumerate(actions):
                if m.nrows() != rank or m.ncols() != rank:
                    raise LatticeError(f"action matrix {i} has wrong shape")
                self._act[i] = m
        self._builder = builder
        self._cyclic = cyclic
        self._higman = higman
        self._towers: dict = {}

    def act(self, i: int) -> Mat:
        m = self._act.get(i)
        if m is None:
            m = self._builder(i)
            self._act[i] = m
        return m

    def actions(self) -> list[Mat]:
        return [self.act(i) for i in range(self.algebra.n)]

    def left_apply(self, i: int, m: Mat) -> Mat:
        return self.act(i) * m

    def act_elem(self, c) -> Mat:
        out = Mat(self.rank, self.rank)
        for i, x in enumerate(c):
            if x:
                out += q(x) * self.act(i)
        return out

    def elem_apply(self, c, m: Mat) -> Mat:
        out = Mat(self.rank, m.ncols())
        for i, x in enumerate(c):
            if x:
                out += q(x) * self.left_apply(i, m)
        return out

    @cached_property
    def gen_actions(self) -> list[Mat]:
        return [self.act_elem(g) for g in self.algebra.generators]

    def act_dual(self, i: int) -> Mat:
        return self._dual_acts[i]

    @cached_property
    def _dual_acts(self) -> list[Mat]:
        d = self.algebra.dual
        return [self.act_elem([d[k, i] for k in range(self.algebra.n)]) for i in range(self.algebra.n)]

    @property
    def higman(self) -> Mat | None:
        """An O-endomorphism e with Tr(e) = id, when known."""
        return self._higman

    def over(self, algebra: Algebra) -> "Lattice":
        """The same lattice viewed over an algebra with identical structure (e.g. rescaled form)."""
        if algebra.n != self.algebra.n or any(x != y for x, y in zip(algebra.L, self.algebra.L)):
            raise LatticeError("rebasing needs identical structure constants")
        return Lattice(algebra, self.rank, self.actions(), name=self.name, cyclic=self._cyclic)

    def tower(self, cover: str = "bar") -> "ShiftTower":
        t = self._towers.get(cover)
        if t is None:
            t = ShiftTower(self, cover)
            self._towers[cover] = t
        return t

    # cyclic presentation: generator u0, annihilator elements, and a_b with u_b = a_b u0
    @cached_property
    def cyclic(self):
        if self._cyclic is not None:
            return self._cyclic
        return _find_cyclic(self)

    def __repr__(self):
        return f"Lattice({self.name or '?'}, rank={self.rank}, over {self.algebra.name})"


@dataclass(frozen=True)
class Cyclic:
    u0: Mat            # generator (column)
    ann: tuple         # elements generating the annihilator as a left ideal over K
    expr: tuple        # expr[b] = element a_b with a_b·u0 = e_b


def _find_cyclic(U: Lattice) -> Cyclic | None:
    A = U.algebra
    p = A.p
    if U.rank > A.n:
        return None
    cands = [arith.column(arith.identity(U.rank), j) for j in range(U.rank)]
    if U.rank > 1:
        cands.append(arith.col_vector([1] * U.rank))
    for u0 in cands:
        orbit = arith.hstack([U.left_apply(i, u0) for i in range(A.n)])
        if arith.rank_mod_p(orbit, p) < U.rank:
            continue
        ann = arith.kernel_lattice(orbit, p)
        # a_b: any solution of orbit·c = e_b over K
        expr = []
        piv = arith.pivots_mod_p(orbit, p)
        sub = arith.submatrix(orbit, range(U.rank), piv).inv()
        for b in range(U.rank):
            c = [Fraction(0)] * A.n
            col = arith.column(sub, b)
            for t, j in enumerate(piv):
                c[j] = frac(col[t, 0])
            expr.append(tuple(c))
        anns = tuple(tuple(arith.vector_entries(arith.column(ann, j))) for j in range(ann.ncols()))
        return Cyclic(u0, anns, tuple(expr))
    return None


class KronLattice(Lattice):
    """Lattice X⊗_O O^z with action x ↦ ρ_X(x)⊗I_z; A⊗_O Z when X = A."""

    def __init__(self, algebra: Algebra, factor: list[Mat], zrank: int, *, name: str = "",
                 factor_higman: Mat | None = None, induced: bool = False):
        self.factor = factor
        self.zrank = zrank
        self.fdim = factor[0].nrows()
        self.induced = induced
        self.factor_higman = factor_higman
        super().__init__(algebra, self.fdim * zrank, name=name,
                         builder=lambda i: arith.kron(self.factor[i], arith.identity(self.zrank)))

    def left_apply(self, i: int, m: Mat) -> Mat:
        return arith.kron_left_apply(self.factor[i], self.zrank, m)

    @property
    def higman(self):
        if self._higman is None and self.factor_higman is not None:
            self._higman = arith.kron(self.factor_higman, arith.identity(self.zrank))
        return self._higman


def induced_lattice(A: Algebra, zrank: int, name: str = "") -> KronLattice:
    u = arith.col_vector(A.unit)
    e = u * A.form_row  # a ↦ s(a)·1
    return KronLattice(A, A.L, zrank, name=name or f"A(x)O^{zrank}", factor_higman=e, induced=True)


def regular_lattice(A: Algebra) -> Lattice:
    cyc = Cyclic(arith.col_vector(A.unit), (), tuple(A.basis_element(b) for b in range(A.n)))
    u = arith.col_vector(A.unit)
    return Lattice(A, A.n, A.L, name="A", cyclic=cyc, higman=u * A.form_row)


def character_lattice(A: Algebra, values, name: str = "") -> Lattice:
    """Rank-one lattice with x_i acting by values[i]."""
    acts = [arith.matrix([[v]]) for v in values]
    return Lattice(A, 1, acts, name=name)


def trivial_lattice(A: Algebra) -> Lattice:
    if A.group is None:
        raise LatticeError("trivial module needs a group algebra")
    return character_lattice(A, [1] * A.n, "triv")


def sign_lattice(A: Algebra, signs) -> Lattice:
    return character_lattice(A, signs, "sign")


def direct_sum(*ls: Lattice) -> Lattice:
    A = ls[0].algebra
    acts = [arith.block_diag([l.act(i) for l in ls]) for i in range(A.n)]
    hig = None
    if all(l.higman is not None for l in ls):
        hig = arith.block_diag([l.higman for l in ls])
    return Lattice(A, sum(l.rank for l in ls), acts, name="+".join(l.name or "?" for l in ls), higman=hig)


def free_lattice(A: Algebra, k: int) -> Lattice:
    return direct_sum(*[regular_lattice(A) for _ in range(k)])


def dual_lattice(U: Lattice) -> Lattice:
    """U^∨ = Hom_O(U, O) as a module over A^op (transposed actions)."""
    A = U.algebra
    Aop = opposite(A)
    cached = getattr(U, "_dual", None)
    if cached is not None:
        return cached
    D = Lattice(Aop, U.rank, [U.act(i).transpose() for i in range(A.n)], name=f"{U.name}^v")
    U._dual = D
    D._dual = U
    return D


def sublattice(P: Lattice, N: Mat, r: Mat, name: str = "") -> Lattice:
    """Lattice spanned by the columns of N inside P; r is a left inverse of N."""
    return Lattice(P.algebra, N.ncols(), name=name,
                   builder=lambda i: r * P.left_apply(i, N))


def quotient_lattice(P: Lattice, s: Mat, t: Mat, name: str = "") -> Lattice:
    """Quotient of P via the O-split surjection s with section t."""
    return Lattice(P.algebra, s.nrows(), name=name,
                   builder=lambda i: s * P.left_apply(i, t))


def validate_lattice(U: Lattice) -> list[str]:
    A = U.algebra
    out = []
    for i in range(A.n):
        if not arith.is_integral_matrix(U.act(i), A.p):
            out.append(f"action of x_{i} is not over Z_({A.p})")
    if U.act_elem(A.unit) != arith.identity(U.rank):
        out.append("unit does not act as the identity")
    for i in range(A.n):
        for j in range(A.n):
            prod = A.mul(A.basis_element(i), A.basis_element(j))
            if U.act(i) * U.act(j) != U.act_elem(prod):
                out.append(f"action does not respect x_{i}·x_{j}")
    return out


def is_intertwiner(U: Lattice, W: Lattice, f: Mat) -> bool:
    return all(g2 * f == f * g1 for g1, g2 in zip(U.gen_actions, W.gen_actions))


def relative_trace(U: Lattice, W: Lattice, E: Mat) -> Mat:
    """Tr(E) = sum_i ρ_W(x_i)·E·ρ_U(x_i^∨) for an O-linear E: U -> W."""
    A = U.algebra
    out = Mat(W.rank, U.rank)
    for i in range(A.n):
        out += W.left_apply(i, E * U.act_dual(i))
    return out


def module_generators(U: Lattice, dual: bool = False) -> Mat:
    """Columns generating U as an A-module (rows of the dual when dual=True), chosen greedily."""
    A = U.algebra
    p = A.p
    R = U.rank
    # work mod p: by Nakayama, generators mod p generate over O
    acts = [[int(x) for x in arith.mod_p_matrix(U.act(i) if dual else U.act(i).transpose(), p).entries()]
            for i in range(A.n)]
    orbit = {j: flint.nmod_mat(A.n, R, [x for e in acts for x in e[j * R:(j + 1) * R]], p) for j in range(R)}
    chosen: list[int] = []
    span = flint.nmod_mat(0, R, [], p)
    rows: list[int] = []
    r = 0
    while r < R:
        # a row o lies in the span iff o kills ker(span), so the gain of j is rank(orbit_j · K)
        if r == 0:
            K = flint.nmod_mat(R, R, [int(i == j) for i in range(R) for j in range(R)], p)
        else:
            ns, k = span.nullspace()
            e = ns.entries()
            K = flint.nmod_mat(R, k, [int(e[i * R + j]) for i in range(R) for j in range(k)], p)
        best = None
        for j in range(R):
            if j in chosen:
                continue
            g = (orbit[j] * K).rank()
            if best is None or g > best[0]:
                best = (g, j)
                if r + g == R:
                    break
        if best is None or best[0] == 0:  # pragma: no cover - standard basis always generates
            raise LatticeError("could not find module generators")
        g, j = best
        chosen.append(j)
        rows += [int(x) for x in orbit[j].entries()]
        span = flint.nmod_mat(len(rows) // R, R, rows, p)
        r += g
    out = Mat(R, len(chosen))
    for t, j in enumerate(chosen):
        out[j, t] = 1
    return out


# ---------------------------------------------------------------- hom spaces


class HomSpace:
    """Hom_A(U, W) as a saturated O-lattice.

    For cyclic U = A·u0 a hom is determined by w = f(u0) with Ann(u0)·w = 0,
    so the lattice lives in W; otherwise in Hom_O(U, W) (row-major vec).
    """

    def __init__(self, U: Lattice, W: Lattice):
        if not same_algebra(U.algebra, W.algebra):
            raise LatticeError("hom space needs lattices over the same algebra")
        self.source = U
        self.target = W
        A = U.algebra
        p = A.p
        cyc = U.cyclic
        self.cyc = cyc
        if cyc is not None:
            if cyc.ann:
                eqs = arith.vstack([W.act_elem(a) for a in cyc.ann])
                B = arith.kernel_lattice(eqs, p)
            else:
                B = arith.identity(W.rank)
        else:
            eqs = []
            I_U = arith.identity(U.rank)
            I_W = arith.identity(W.rank)
            for g1, g2 in zip(U.gen_actions, W.gen_actions):
                eqs.append(arith.kron(g2, I_U) - arith.kron(I_W, g1.transpose()))
            B = arith.kernel_lattice(arith.vstack(eqs), p) if eqs else arith.identity(W.rank * U.rank)
        self.basis = LatticeBasis.of(B, p)

    @property
    def rank(self) -> int:
        return self.basis.rank

    def _mats_from_w(self, Wcols: Mat) -> list[Mat]:
        W = self.target
        cols = [W.elem_apply(a, Wcols) for a in self.cyc.expr]   # column b of each hom
        out = []
        for k in range(Wcols.ncols()):
            out.append(arith.hstack([arith.column(c, k) for c in cols]))
        return out

    @cached_property
    def matrices(self) -> list[Mat]:
        B = self.basis.basis
        if self.cyc is not None:
            return self._mats_from_w(B)
        U, W = self.source, self.target
        return [arith.reshape(arith.column(B, k), W.rank, U.rank) for k in range(self.rank)]

    def element(self, c) -> Mat:
        out = Mat(self.target.rank, self.source.rank)
        for x, m in zip(c, self.matrices):
            if x:
                out += q(x) * m
        return out

    def _raw(self, f: Mat) -> Mat:
        if self.cyc is not None:
            return f * self.cyc.u0
        return arith.reshape(f, f.nrows() * f.ncols(), 1)

    def coords(self, f: Mat) -> Mat:
        return self.basis.coords(self._raw(f))

    def contains(self, f: Mat) -> bool:
        if not is_intertwiner(self.source, self.target, f):
            return False
        c = self.coords(f)
        return arith.is_integral_matrix(c, self.source.algebra.p) and self.element(
            arith.vector_entries(c)) == f

    def pr_relations(self) -> Mat:
        """Hom-coordinates of generators of Hom^pr (relative trace image)."""
        U, W = self.source, self.target
        A = U.algebra
        if self.rank == 0:
            return Mat(0, 0)
        if self.cyc is not None:
            u0 = self.cyc.u0
            duals = [U.act_dual(i) * u0 for i in range(A.n)]
            blocks = []
            for u in range(U.rank):
                G = Mat(W.rank, W.rank)
                for i in range(A.n):
                    c = duals[i][u, 0]
                    if c:
                        G += c * W.act(i)
                blocks.append(self.basis.coords(G))
            return arith.hstack(blocks)
        T = Mat(W.rank * U.rank, W.rank * U.rank)
        for i in range(A.n):
            T += arith.kron(W.act(i), U.act_dual(i).transpose())
        return self.basis.coords(T)

    @cached_property
    def pr_lattice(self) -> Mat:
        """Basis (columns, in hom coordinates) of Hom^pr_A(U, W)."""
        if self.rank == 0:
            return Mat(0, 0)
        return arith.image_lattice(self.pr_relations(), self.source.algebra.p)

    def is_projective_factoring(self, f: Mat) -> bool:
        c = self.coords(f)
        if self.rank == 0:
            return arith.is_zero(f)
        return arith.lattice_contains(self.pr_lattice, c, self.source.algebra.p)


def hom_space(U: Lattice, W: Lattice) -> HomSpace:
    return HomSpace(U, W)


def cyclic_hom(U: Lattice, W: Lattice, w: Mat) -> Mat:
    """The hom from the cyclic lattice U sending its generator u0 to w."""
    cyc = U.cyclic
    if cyc is None:
        raise LatticeError("source is not cyclic")
    return arith.hstack([W.elem_apply(a, w) for a in cyc.expr], W.rank)


def factors_through_projective(X: Lattice, Y: Lattice, f: Mat) -> bool:
    """Does f: X -> Y factor through a projective?

    Equivalent to extending f along a relatively injective envelope
    X -> A⊗O^k; maps A⊗O^k -> Y are free choices y_1..y_k in Y.
    """
    A = X.algebra
    s = _cosyzygy_ses(X, "gens", "")
    k = s.middle.zrank
    cols = []
    acts = [Y.act(b) for b in range(A.n)]
    for w in range(Y.rank):
        Cw = arith.hstack([arith.column(m, w) for m in acts])
        for j in range(k):
            Rj = arith.submatrix(s.inj, [b * k + j for b in range(A.n)], range(X.rank))
            cols.append(arith.reshape(Cw * Rj, Y.rank * X.rank, 1))
    phi = arith.hstack(cols, Y.rank * X.rank)
    return arith.lattice_contains(phi, arith.reshape(f, Y.rank * X.rank, 1), A.p)


def projective_factoring_subspace(h: HomSpace) -> Mat:
    return h.pr_lattice


def hom_pr_by_definition(U: Lattice, W: Lattice) -> Mat:
    """Hom^pr as the image of Hom_A(U, A⊗W) under the multiplication A⊗W -> W."""
    A = U.algebra
    h = hom_space(U, W)
    P = induced_lattice(A, W.rank)
    mult = arith.hstack([W.act(b) for b in range(A.n)])
    hp = hom_space(U, P)
    if h.rank == 0:
        return Mat(0, 0)
    cols = [h.coords(mult * f) for f in hp.matrices]
    if not cols:
        return Mat(h.rank, 0)
    return arith.image_lattice(arith.hstack(cols), A.p)


def higman_element(U: Lattice) -> Mat | None:
    """O-endomorphism e with Tr(e) = id_U, or None if U is not projective."""
    if U.higman is not None:
        return U.higman
    A = U.algebra
    m = U.rank
    T = Mat(m * m, m * m)
    for i in range(A.n):
        T += arith.kron(U.act(i), U.act_dual(i).transpose())
    x = arith.solve_over_O(T, arith.reshape(arith.identity(m), m * m, 1), A.p)
    if x is None:
        return None
    e = arith.reshape(x, m, m)
    U._higman = e
    return e


def is_projective(U: Lattice) -> bool:
    A = U.algebra
    if A.group is not None:
        return _is_projective_group(U)
    return higman_element(U) is not None


def _is_projective_group(U: Lattice) -> bool:
    """Projective over O[G] iff free over a Sylow p-subgroup S iff
    dim (U/pU)^S · |S| = rank U."""
    A = U.algebra
    p = A.p
    S = A.group.sylow(p)
    if len(S) == 1:
        return True
    if U.rank % len(S):
        return False
    sub = A.group.subgroup_table(S)
    from .algebra import Group
    gens = [S[g] for g in Group(sub).generators]
    I = arith.identity(U.rank)
    eqs = arith.vstack([U.act(g) - I for g in gens])
    fixed = U.rank - arith.rank_mod_p(eqs, p)
    return fixed * len(S) == U.rank


def projective_basis(U: Lattice):
    """Pairs (u_k, φ_k) with sum_k φ_k(u)·u_k = u, φ_k ∈ Hom_A(U, A); None if U is not projective.

    From a Higman element e: u_k = k-th basis vector, φ_k(u) = sum_i e_k^*(e(x_i^∨ u)) x_i.
    """
    e = higman_element(U)
    if e is None:
        return None
    A = U.algebra
    out = []
    for k in range(U.rank):
        # φ_k as an n × m matrix: row i is e_k^*·e·ρ(x_i^∨)
        phi = arith.vstack([arith.submatrix(e, [k], range(U.rank)) * U.act_dual(i) for i in range(A.n)])
        out.append((arith.column(arith.identity(U.rank), k), phi))
    return out


# ---------------------------------------------------------------- torsion modules


class TorsionModule:
    """Hom / Hom^pr presented by invariant factors p^{e_1} | ... | p^{e_r}."""

    def __init__(self, hom: HomSpace):
        self.hom = hom
        A = hom.source.algebra
        p = A.p
        self.p = p
        h = hom.rank
        if h == 0:
            self.exponents = []
            self._Linv = Mat(0, 0)
            self._L = Mat(0, 0)
            self._idx = []
            self.generators = []
            return
        rel = hom.pr_lattice
        if rel.ncols() < h:
            raise HypothesisError("Hom/Hom^pr is not torsion: K⊗A is not semisimple")
        snf = arith.smith_normal_form(rel, p)
        exps = snf.exponents
        self._L = snf.left
        self._Linv = snf.left_inv
        self._idx = [i for i, e in enumerate(exps) if e > 0]
        self.exponents = [exps[i] for i in self._idx]
        self.generators = [hom.element(arith.vector_entries(arith.column(self._L, i))) for i in self._idx]

    @property
    def order(self) -> int:
        return self.p ** sum(self.exponents)

    def classify(self, f: Mat) -> tuple:
        if not self._idx:
            return ()
        c = self.hom.coords(f)
        y = self._Linv * c
        return tuple(arith.mod_pk(y[i, 0], self.p, e) for i, e in zip(self._idx, self.exponents))

    def is_zero(self, f: Mat) -> bool:
        return all(x == 0 for x in self.classify(f))

    def element(self, coeffs) -> Mat:
        out = Mat(self.hom.target.rank, self.hom.source.rank)
        for c, g in zip(coeffs, self.generators):
            if c:
                out += q(c) * g
        return out

    def pr_element(self, coeffs) -> Mat:
        """An element of Hom^pr from integer coefficients on its generators."""
        rel = self.hom.pr_lattice
        v = Mat(self.hom.rank, 1)
        for c, j in zip(coeffs, range(rel.ncols())):
            if c:
                v += q(c) * arith.column(rel, j)
        return self.hom.element(arith.vector_entries(v))

    def describe(self) -> str:
        if not self.exponents:
            return "0"
        return " x ".join(f"Z/{self.p}" + (f"^{e}" if e > 1 else "") for e in self.exponents)

    def invariant_factors(self) -> list[int]:
        return [self.p ** e for e in self.exponents]


# ---------------------------------------------------------------- towers


@dataclass
class SES:
    """lower --inj--> middle --surj--> upper, O-split with r·inj = I, surj·t = I."""

    lower: Lattice
    middle: Lattice
    upper: Lattice
    inj: Mat
    surj: Mat
    r: Mat
    t: Mat


def _syzygy_ses(W: Lattice, cover: str, name: str) -> SES:
    A = W.algebra
    p = A.p
    gens = arith.identity(W.rank) if cover == "bar" else module_generators(W)
    k = gens.ncols()
    P = induced_lattice(A, k)
    surj = arith.hstack([W.left_apply(b, gens) for b in range(A.n)])
    ui = A.unit_index
    if cover == "bar" and ui is not None:
        piv = [ui * k + j for j in range(k)]
    else:
        piv = arith.pivots_mod_p(surj, p)
    if len(piv) < W.rank:  # pragma: no cover - generators always span mod p
        raise LatticeError("cover is not surjective")
    pivset = set(piv)
    free = [j for j in range(P.rank) if j not in pivset]
    Sinv = arith.submatrix(surj, range(W.rank), piv).inv()
    X = Sinv * arith.submatrix(surj, range(W.rank), free)
    N = Mat(P.rank, len(free))
    for t, j in enumerate(free):
        N[j, t] = 1
    for a, i in enumerate(piv):
        for t in range(len(free)):
            x = X[a, t]
            if x:
                N[i, t] = -x
    r = Mat(len(free), P.rank)
    for t, j in enumerate(free):
        r[t, j] = 1
    tt = Mat(P.rank, W.rank)
    for a, i in enumerate(piv):
        for b in range(W.rank):
            x = Sinv[a, b]
            if x:
                tt[i, b] = x
    lower = sublattice(P, N, r, name)
    return SES(lower, P, W, N, surj, r, tt)


def _cosyzygy_ses(W: Lattice, cover: str, name: str) -> SES:
    A = W.algebra
    p = A.p
    phi = arith.identity(W.rank) if cover == "bar" else module_generators(W, dual=True).transpose()
    k = phi.nrows()
    P = induced_lattice(A, k)
    # ι(w) = sum_b x_b ⊗ Φ(x_b^∨ w)
    inj = arith.vstack([phi * W.act_dual(b) for b in range(A.n)])
    if cover == "bar":
        # retraction ε_s(a⊗w) = s(a)w, upper level realized as ker ε_s
        r = arith.kron(A.form_row, arith.identity(k))
        N = arith.kernel_lattice(r, p)
        rows = arith.pivots_mod_p(N.transpose(), p)
        Ninv = arith.submatrix(N, rows, range(N.ncols())).inv()
        proj = arith.identity(P.rank) - inj * r
        surj = Ninv * arith.submatrix(proj, rows, range(P.rank))
        t = N
    else:
        r = arith.o_left_inverse(inj, p)
        rows = set(arith.pivots_mod_p(inj.transpose(), p))
        comp = [j for j in range(P.rank) if j not in rows]
        proj = arith.identity(P.rank) - inj * r
        surj = arith.submatrix(proj, comp, range(P.rank))
        t = Mat(P.rank, len(comp))
        for a, j in enumerate(comp):
            t[j, a] = 1
    upper = quotient_lattice(P, surj, t, name)
    return SES(W, P, upper, inj, surj, r, t)


class ShiftTower:
    """Levels Σ^k(W) with the registered sequences realizing them.

    ``cover="bar"`` uses A⊗_O W (and its dual) at every step;
    ``cover="gens"`` uses A⊗_O O^k for an A-generating set of size k, which
    keeps ranks small for large algebras such as enveloping algebras.
    """

    def __init__(self, base: Lattice, cover: str = "bar", name: str = ""):
        if cover not in ("bar", "gens"):
            raise LatticeError(f"unknown cover {cover!r}")
        self.base = base
        self.algebra = base.algebra
        self.cover = cover
        self.name = name or base.name
        self._levels: dict[int, Lattice] = {0: base}
        self._ses: dict[int, SES] = {}

    def _check_depth(self, k: int):
        if abs(k) > tower_depth_cap():
            raise TowerDepthError(f"tower level {k} exceeds depth cap {tower_depth_cap()} (TATE_TOWER_DEPTH)")

    def level(self, k: int) -> Lattice:
        if k not in self._levels:
            self._check_depth(k)
            if k < 0:
                self.ses(k + 1)
            else:
                self.ses(k)
        return self._levels[k]

    def ses(self, k: int) -> SES:
        """The sequence level(k-1) -> P_k -> level(k)."""
        s = self._ses.get(k)
        if s is not None:
            return s
        self._check_depth(k if k > 0 else k - 1)
        if k >= 1:
            low = self.level(k - 1)
            s = _cosyzygy_ses(low, self.cover, f"S^{k}({self.name})")
            self._levels[k] = s.upper
        else:
            up = self.level(k)
            s = _syzygy_ses(up, self.cover, f"S^{k - 1}({self.name})")
            self._levels[k - 1] = s.lower
        self._ses[k] = s
        return s

    def syzygy(self, levels: int = 1) -> Lattice:
        return self.level(-levels)

    def cosyzygy(self, levels: int = 1) -> Lattice:
        return self.level(levels)


def _coinduced(A: Algebra, P: Lattice, zrank: int, psi: Mat) -> Mat:
    """G(x) = sum_i x_i^∨ ⊗ ψ(x_i x): the A-linear map P -> A⊗O^z induced by ψ: P -> O^z."""
    n = A.n
    m = P.rank
    if isinstance(P, KronLattice):
        pieces = [arith.kron_right_apply(psi, P.factor[i], P.zrank) for i in range(n)]
    else:
        pieces = [psi * P.act(i) for i in range(n)]
    big = arith.reshape(arith.vstack(pieces), n, zrank * m)
    return arith.reshape(A.dual * big, n * zrank, m)


def _induced_ext(Pt: Lattice, A: Algebra, F0: Mat) -> Mat:
    """The A-linear map A⊗O^z -> Pt with 1⊗z ↦ F0 z."""
    return arith.hstack([Pt.left_apply(b, F0) for b in range(A.n)])


def _one_tensor(A: Algebra, zrank: int) -> Mat:
    return arith.kron(arith.col_vector(A.unit), arith.identity(zrank))


def lift_down(S: SES, T: SES, f: Mat) -> Mat:
    """F: S.middle -> T.middle with T.surj·F = f·S.surj (f: S.upper -> T.upper)."""
    A = S.middle.algebra
    P = S.middle
    if isinstance(P, KronLattice) and P.induced:
        F0 = T.t * (f * (S.surj * _one_tensor(A, P.zrank)))
        return _induced_ext(T.middle, A, F0)
    e = P.higman
    if e is None:
        raise LatticeError("middle term has no Higman element")
    return relative_trace(P, T.middle, T.t * (f * (S.surj * e)))


def extend_up(S: SES, T: SES, f: Mat) -> Mat:
    """G: S.middle -> T.middle with G·S.inj = T.inj·f (f: S.lower -> T.lower)."""
    A = S.middle.algebra
    Pt = T.middle
    if isinstance(Pt, KronLattice) and Pt.induced:
        eps = arith.kron(A.form_row, arith.identity(Pt.zrank))
        psi = eps * (T.inj * (f * S.r))
        return _coinduced(A, S.middle, Pt.zrank, psi)
    e = Pt.higman
    if e is None:
        raise LatticeError("middle term has no Higman element")
    return relative_trace(S.middle, Pt, e * (T.inj * (f * S.r)))


def sigma_down(S: SES, T: SES, f: Mat) -> Mat:
    return T.r * (lift_down(S, T, f) * S.inj)


def sigma_up(S: SES, T: SES, f: Mat) -> Mat:
    return T.surj * (extend_up(S, T, f) * S.t)


@dataclass(frozen=True, eq=False)
class TowerMap:
    """A homomorphism from level a of ``src`` to level b of ``tgt``."""

    src: ShiftTower
    a: int
    tgt: ShiftTower
    b: int
    mat: Mat

    @property
    def degree(self) -> int:
        return self.b - self.a

    @property
    def source(self) -> Lattice:
        return self.src.level(self.a)

    @property
    def target(self) -> Lattice:
        return self.tgt.level(self.b)

    def shift(self, k: int) -> "TowerMap":
        f, a, b = self.mat, self.a, self.b
        while k > 0:
            f = sigma_up(self.src.ses(a + 1), self.tgt.ses(b + 1), f)
            a, b, k = a + 1, b + 1, k - 1
        while k < 0:
            f = sigma_down(self.src.ses(a), self.tgt.ses(b), f)
            a, b, k = a - 1, b - 1, k + 1
        return TowerMap(self.src, a, self.tgt, b, f)

    def then(self, g: "TowerMap") -> "TowerMap":
        """g∘self (levels must match on the nose)."""
        if g.src is not self.tgt or g.a != self.b:
            raise LatticeError("tower mismatch in composition")
        return TowerMap(self.src, self.a, g.tgt, g.b, g.mat * self.mat)

    def __add__(self, other: "TowerMap") -> "TowerMap":
        self._check_parallel(other)
        return TowerMap(self.src, self.a, self.tgt, self.b, self.mat + other.mat)

    def __sub__(self, other: "TowerMap") -> "TowerMap":
        self._check_parallel(other)
        return TowerMap(self.src, self.a, self.tgt, self.b, self.mat - other.mat)

    def scaled(self, c) -> "TowerMap":
        return TowerMap(self.src, self.a, self.tgt, self.b, q(c) * self.mat)

    def _check_parallel(self, other):
        if other.src is not self.src or other.tgt is not self.tgt or other.a != self.a or other.b != self.b:
            raise LatticeError("tower mismatch")


def shift_hom(tower_src: ShiftTower, a: int, tower_tgt: ShiftTower, b: int, f: Mat, n: int) -> Mat:
    return TowerMap(tower_src, a, tower_tgt, b, f).shift(n).mat


# ---------------------------------------------------------------- Tate-Ext


class TateGroup(TorsionModule):
    """Ext-hat^n(U, V) = Hom_A(U, Σ^n V)/Hom^pr, with tower context for its elements."""

    def __init__(self, src: ShiftTower, a: int, tgt: ShiftTower, b: int):
        self.src, self.a, self.tgt, self.b = src, a, tgt, b
        super().__init__(HomSpace(src.level(a), tgt.level(b)))

    @property
    def degree(self) -> int:
        return self.b - self.a

    def wrap(self, f: Mat) -> TowerMap:
        return TowerMap(self.src, self.a, self.tgt, self.b, f)

    def gen_elements(self) -> list[TowerMap]:
        return [self.wrap(g) for g in self.generators]

    def random_hom(self, rng: random.Random, bound: int | None = None) -> TowerMap:
        """Random element of the full hom lattice (integer coordinates in [-p^3, p^3])."""
        bound = bound if bound is not None else self.p ** 3
        c = [rng.randint(-bound, bound) for _ in range(self.hom.rank)]
        return self.wrap(self.hom.element(c))

    def random_element(self, rng: random.Random, bound: int | None = None) -> TowerMap:
        """Random combination of generator lifts plus a random Hom^pr perturbation."""
        bound = bound if bound is not None else self.p ** 3
        c = [rng.randint(-bound, bound) for _ in self.generators]
        d = [rng.randint(-bound, bound) for _ in range(self.hom.pr_lattice.ncols())] if self.hom.rank else []
        f = self.element(c)
        if d:
            f = f + self.pr_element(d)
        return self.wrap(f)

    def classify_map(self, g: TowerMap) -> tuple:
        if g.src is not self.src or g.tgt is not self.tgt or g.a != self.a or g.b != self.b:
            raise LatticeError("tower mismatch")
        return self.classify(g.mat)


def tate_ext(U: Lattice, V: Lattice, n: int, cover: str = "bar") -> TateGroup:
    """Ext-hat^n_A(U, V) presented via Smith form; elements live in U.tower → V.tower."""
    if not same_algebra(U.algebra, V.algebra):
        raise LatticeError("algebra mismatch")
    return TateGroup(U.tower(cover), 0, V.tower(cover), n)


def tate_group_between(src: ShiftTower, a: int, tgt: ShiftTower, b: int) -> TateGroup:
    return TateGroup(src, a, tgt, b)
