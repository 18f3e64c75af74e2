"""Perfect bimodules, tensor functors, adjunction maps and transfer.

Bimodule conventions: ``left[i]`` is the matrix of m ↦ x_i·m and
``right[j]`` the matrix of m ↦ m·y_j.  The dual M^∨ has the transposed
actions with the sides exchanged, and M^∨ ⊗_O M, M ⊗_O M^∨ are indexed
(first factor, second factor) in row-major order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from . import arith
from .algebra import (Algebra, Group, enveloping_algebra, group_algebra, opposite,
                      tensor_product)
from .arith import Mat, q
from .lattices import (Cyclic, KronLattice, Lattice, LatticeError, SES, ShiftTower,
                       TateGroup, TowerMap, cyclic_hom, factors_through_projective,
                       higman_element, is_projective, module_generators, same_algebra)


class BimoduleError(ValueError):
    pass


# ---------------------------------------------------------------- bimodules


class Bimodule:
    """An A-B-bimodule, O-free of finite rank."""

    def __init__(self, left_alg: Algebra, right_alg: Algebra, rank: int, left, right, name: str = "",
                 left_higman: Mat | None = None, right_higman: Mat | None = None):
        if left_alg.p != right_alg.p:
            raise BimoduleError("prime mismatch")
        self.left_alg = left_alg
        self.right_alg = right_alg
        self.rank = rank
        self.left = list(left)
        self.right = list(right)
        self.name = name
        if len(self.left) != left_alg.n or len(self.right) != right_alg.n:
            raise BimoduleError("wrong number of action matrices")
        self._lh = left_higman
        self._rh = right_higman
        self._dual = None

    @property
    def p(self) -> int:
        return self.left_alg.p

    @cached_property
    def left_lattice(self) -> Lattice:
        return Lattice(self.left_alg, self.rank, self.left, name=f"{self.name}|left", higman=self._lh)

    @cached_property
    def right_lattice(self) -> Lattice:
        """M as a left module over the opposite of the right algebra."""
        return Lattice(opposite(self.right_alg), self.rank, self.right, name=f"{self.name}|right",
                       higman=self._rh)

    @property
    def left_higman(self) -> Mat | None:
        if self._lh is None:
            self._lh = higman_element(self.left_lattice)
        return self._lh

    @property
    def right_higman(self) -> Mat | None:
        if self._rh is None:
            self._rh = higman_element(self.right_lattice)
        return self._rh

    def left_elem(self, c) -> Mat:
        return arith.lin_comb(c, self.left, self.rank, self.rank)

    def right_elem(self, c) -> Mat:
        return arith.lin_comb(c, self.right, self.rank, self.rank)

    def dual(self) -> "Bimodule":
        if self._dual is None:
            lh = self._rh.transpose() if self._rh is not None else None
            rh = self._lh.transpose() if self._lh is not None else None
            d = Bimodule(self.right_alg, self.left_alg, self.rank,
                         [m.transpose() for m in self.right], [m.transpose() for m in self.left],
                         f"{self.name}^v", lh, rh)
            d._dual = self
            self._dual = d
        return self._dual

    def flip(self) -> "Bimodule":
        """The same module as a B^op-A^op-bimodule."""
        return Bimodule(opposite(self.right_alg), opposite(self.left_alg), self.rank,
                        self.right, self.left, f"{self.name}^flip", self._rh, self._lh)

    def validate(self) -> list[str]:
        out = []
        for side, alg, acts in (("left", self.left_alg, self.left), ("right", self.right_alg, self.right)):
            for i, m in enumerate(acts):
                if m.nrows() != self.rank or m.ncols() != self.rank:
                    out.append(f"{side} action {i} has wrong shape")
                    return out
                if not arith.is_integral_matrix(m, self.p):
                    out.append(f"{side} action of basis element {i} is not over Z_({self.p})")
            if arith.lin_comb(alg.unit, acts, self.rank, self.rank) != arith.identity(self.rank):
                out.append(f"{side} unit does not act as the identity")
            for i in range(alg.n):
                for j in range(alg.n):
                    prod = alg.mul(alg.basis_element(i), alg.basis_element(j))
                    lhs = acts[i] * acts[j] if side == "left" else acts[j] * acts[i]
                    if lhs != arith.lin_comb(prod, acts, self.rank, self.rank):
                        out.append(f"{side} action does not respect basis product ({i},{j})")
        for i, a in enumerate(self.left):
            for j, b in enumerate(self.right):
                if a * b != b * a:
                    out.append(f"left action {i} and right action {j} do not commute")
        return out

    def is_perfect(self) -> bool:
        return is_projective(self.left_lattice) and is_projective(self.right_lattice)

    def __repr__(self):
        return f"Bimodule({self.name}, rank={self.rank}, {self.left_alg.name}-{self.right_alg.name})"


def regular_bimodule(A: Algebra) -> Bimodule:
    e = arith.col_vector(A.unit) * A.form_row
    return Bimodule(A, A, A.n, A.L, A.R, A.name, e, e)


def subgroup_algebra(A: Algebra, elements) -> tuple[Algebra, Mat]:
    """O[H] for a subgroup H of the group of A, with its inclusion (columns = images)."""
    if A.group is None:
        raise BimoduleError("subgroup algebra needs a group algebra")
    elements = list(elements)
    if A.group.identity in elements:
        elements.remove(A.group.identity)
        elements.insert(0, A.group.identity)
    closure = sorted(A.group.generated(elements))
    if sorted(set(elements)) != closure:
        raise BimoduleError("elements do not form a subgroup")
    sub = A.group.subgroup_table(elements)
    B = group_algebra(Group(sub, f"H{len(elements)}"), A.p, f"O[H{len(elements)}]")
    incl = Mat(A.n, B.n)
    for j, g in enumerate(elements):
        incl[g, j] = 1
    return B, incl


def subgroup_generated(A: Algebra, gens) -> list[int]:
    """Elements of the subgroup generated by gens, identity first, in discovery order."""
    g = A.group
    out = [g.identity]
    frontier = [g.identity]
    while frontier:
        new = []
        for x in frontier:
            for s in gens:
                y = g.mul(x, s)
                if y not in out:
                    out.append(y)
                    new.append(y)
        frontier = new
    return out


def induction_bimodule(A: Algebra, B: Algebra, incl: Mat) -> Bimodule:
    """A as an A-B-bimodule through the algebra inclusion B -> A."""
    if incl.nrows() != A.n or incl.ncols() != B.n:
        raise BimoduleError("inclusion has wrong shape")
    images = [arith.vector_entries(arith.column(incl, j)) for j in range(B.n)]
    if tuple(arith.vector_entries(incl * B.vec(B.unit))) != A.unit:
        raise BimoduleError("inclusion does not preserve the unit")
    for i in range(B.n):
        for j in range(B.n):
            lhs = A.mul(images[i], images[j])
            rhs = arith.vector_entries(incl * B.vec(B.mul(B.basis_element(i), B.basis_element(j))))
            if tuple(lhs) != tuple(rhs):
                raise BimoduleError(f"inclusion is not multiplicative on ({i},{j})")
    right = [A.right_mult_of(c) for c in images]
    e = arith.col_vector(A.unit) * A.form_row
    return Bimodule(A, B, A.n, A.L, right, f"{A.name}|{B.name}", left_higman=e)


def restriction_bimodule(A: Algebra, B: Algebra, incl: Mat) -> Bimodule:
    """A as a B-A-bimodule through the algebra inclusion B -> A."""
    images = [arith.vector_entries(arith.column(incl, j)) for j in range(B.n)]
    left = [A.left_mult_of(c) for c in images]
    e = arith.col_vector(A.unit) * A.form_row
    return Bimodule(B, A, A.n, left, A.R, f"{B.name}|{A.name}", right_higman=e)


def direct_sum_bimodule(M: Bimodule, N: Bimodule) -> Bimodule:
    if not (same_algebra(M.left_alg, N.left_alg) and same_algebra(M.right_alg, N.right_alg)):
        raise BimoduleError("direct sum needs matching algebras")
    lh = arith.block_diag([M.left_higman, N.left_higman]) if (M.left_higman is not None and N.left_higman is not None) else None
    rh = arith.block_diag([M.right_higman, N.right_higman]) if (M.right_higman is not None and N.right_higman is not None) else None
    return Bimodule(M.left_alg, M.right_alg, M.rank + N.rank,
                    [arith.block_diag([a, b]) for a, b in zip(M.left, N.left)],
                    [arith.block_diag([a, b]) for a, b in zip(M.right, N.right)],
                    f"{M.name}+{N.name}", lh, rh)


def outer_tensor(P: Bimodule, Q: Bimodule) -> Bimodule:
    """P⊗_O Q as an (A1⊗A2)-(B1⊗B2)-bimodule."""
    la = tensor_product(P.left_alg, Q.left_alg)
    ra = tensor_product(P.right_alg, Q.right_alg)
    left = [arith.kron(a, b) for a in P.left for b in Q.left]
    right = [arith.kron(a, b) for a in P.right for b in Q.right]
    lh = arith.kron(P.left_higman, Q.left_higman)
    rh = arith.kron(P.right_higman, Q.right_higman)
    return Bimodule(la, ra, P.rank * Q.rank, left, right, f"{P.name}(x){Q.name}", lh, rh)


def bimodule_lattice(M: Bimodule, env: Algebra | None = None) -> Lattice:
    """M as a left module over A⊗B^op: x_i⊗y_j acts by m ↦ x_i m y_j."""
    env = env or tensor_product(M.left_alg, opposite(M.right_alg))
    nb = M.right_alg.n
    return Lattice(env, M.rank, name=M.name,
                   builder=lambda k: M.left[k // nb] * M.right[k % nb])


def ae_lattice(A: Algebra) -> Lattice:
    """A as a module over A^e = A⊗A^op (cached per algebra)."""
    cached = getattr(A, "_ae_lattice", None)
    if cached is not None:
        return cached
    E = enveloping_algebra(A)
    n = A.n
    unit = list(A.unit)
    ann = []
    for g in A.generators:
        left = [x * y for x in g for y in unit]
        right = [x * y for x in unit for y in g]
        ann.append(tuple(a - b for a, b in zip(left, right)))
    expr = tuple(tuple(arith.frac(int(i == b)) * y for i in range(n) for y in unit) for b in range(n))
    cyc = Cyclic(arith.col_vector(A.unit), tuple(ann), expr)
    L = Lattice(E, n, name=f"{A.name}", cyclic=cyc,
                builder=lambda k: A.L[k // n] * A.R[k % n])
    A._ae_lattice = L
    return L


def restrict_left(W: Lattice, A: Algebra) -> Lattice:
    """A lattice over A⊗C^op viewed as an A-lattice (x ↦ x⊗1)."""
    E = W.algebra
    c = E.n // A.n
    # the unit of the second factor, read off from the unit of E
    cunit = [E.unit[k] for k in range(c)] if A.unit[0] else None
    if cunit is None:
        i0 = next(i for i, x in enumerate(A.unit) if x)
        cunit = [E.unit[i0 * c + k] / A.unit[i0] for k in range(c)]
    def build(i):
        coeffs = [0] * E.n
        for k in range(c):
            coeffs[i * c + k] = cunit[k]
        return W.act_elem(coeffs)
    return Lattice(A, W.rank, name=f"{W.name}|{A.name}", builder=build)


# ---------------------------------------------------------------- tensor functors


class TensorLattice(Lattice):
    """X⊗_C U for a D-C-bimodule X, with quotient map q and a section sigma."""

    def __init__(self, functor: "TensorFunctor", U: Lattice, rank: int, q_map: Mat, sigma: Mat, builder):
        self.functor = functor
        self.base = U
        self.q = q_map
        self.sigma = sigma
        super().__init__(functor.D, rank, name=f"{functor.X.name}(x){U.name}", builder=builder)


class TensorFunctor:
    """U ↦ X⊗_C U from C-lattices to D-lattices.

    When X is free as a right C-module with basis e_1..e_k, X⊗_C U ≅ U^k and
    the D-action is read off from the coordinates of d·e_l; otherwise the
    tensor product is the saturated cokernel of the balancing relations.
    """

    def __init__(self, X: Bimodule, higman: Mat | None = None):
        self.X = X
        self.D = X.left_alg
        self.C = X.right_alg
        self._higman = higman
        self._cache: dict[int, tuple] = {}
        self._free = self._find_free_basis()

    @property
    def higman(self) -> Mat:
        if self._higman is None:
            self._higman = self.X.left_higman
            if self._higman is None:
                raise BimoduleError("tensor functor needs X projective over the left algebra")
        return self._higman

    def _find_free_basis(self):
        X, C = self.X, self.C
        if X.rank % C.n:
            return None
        gens = module_generators(X.right_lattice)
        k = gens.ncols()
        if k * C.n != X.rank:
            return None
        E = arith.hstack([X.right[i] * arith.column(gens, l) for l in range(k) for i in range(C.n)])
        if arith.rank_mod_p(E, X.p) < X.rank:
            return None
        return gens, E.inv(), k

    @property
    def is_free(self) -> bool:
        return self._free is not None

    def apply(self, U: Lattice) -> TensorLattice:
        if not same_algebra(U.algebra, self.C):
            raise BimoduleError(f"tensor functor over {self.C.name} applied to a lattice over {U.algebra.name}")
        hit = self._cache.get(id(U))
        if hit is not None and hit[0] is U:
            return hit[1]
        T = self._apply_free(U) if self._free is not None else self._apply_generic(U)
        self._cache[id(U)] = (U, T)
        return T

    def _einv_rows(self, i: int) -> Mat:
        gens, Einv, k = self._free
        return arith.submatrix(Einv, [l * self.C.n + i for l in range(k)], range(self.X.rank))

    def _apply_free(self, U: Lattice) -> TensorLattice:
        gens, Einv, k = self._free
        C, X = self.C, self.X
        m = U.rank
        qm = Mat(k * m, X.rank * m)
        for i in range(C.n):
            qm += arith.kron(self._einv_rows(i), U.act(i))
        sigma = arith.kron(gens, arith.identity(m))

        def build(j):
            c = Einv * (X.left[j] * gens)   # column l: coordinates of d_j·e_l
            out = Mat(k * m, k * m)
            for l in range(k):
                for l2 in range(k):
                    elem = [c[l2 * C.n + i, l] for i in range(C.n)]
                    if any(elem):
                        blk = U.act_elem(elem)
                        for a in range(m):
                            for b in range(m):
                                x = blk[a, b]
                                if x:
                                    out[l2 * m + a, l * m + b] = x
            return out
        return TensorLattice(self, U, k * m, qm, sigma, build)

    def _apply_generic(self, U: Lattice) -> TensorLattice:
        X, C = self.X, self.C
        p = X.p
        m = U.rank
        I_U = arith.identity(m)
        I_X = arith.identity(X.rank)
        rel = arith.hstack([arith.kron(X.right[i], I_U) - arith.kron(I_X, U.act(i)) for i in range(C.n)])
        qm = arith.left_kernel(rel, p)
        sigma = arith.o_right_inverse(qm, p)
        return TensorLattice(self, U, qm.nrows(), qm, sigma,
                             lambda j: qm * (arith.kron(X.left[j], I_U) * sigma))

    def apply_map(self, f: Mat, U: Lattice, W: Lattice) -> Mat:
        """X⊗f: X⊗_C U -> X⊗_C W."""
        if self._free is not None:
            return arith.kron(arith.identity(self._free[2]), f)
        FU, FW = self.apply(U), self.apply(W)
        return FW.q * (arith.kron(arith.identity(self.X.rank), f) * FU.sigma)

    def pure(self, U: Lattice, x: Mat, u: Mat) -> Mat:
        """Coordinates of the class of x⊗u."""
        return self.apply(U).q * arith.kron(x, u)

    # -- middle terms of tower sequences
    def middle(self, P: KronLattice) -> KronLattice:
        return KronLattice(self.D, self.X.left, P.zrank, name=f"{self.X.name}(x)O^{P.zrank}",
                           factor_higman=self.higman)

    def into_middle(self, s: SES) -> Mat:
        """F(lower) -> X⊗Z: class of x⊗l ↦ sum_b x·y_b ⊗ inj_b(l)."""
        C, X = self.C, self.X
        z = s.middle.zrank
        blocks = [arith.submatrix(s.inj, range(b * z, (b + 1) * z), range(s.lower.rank)) for b in range(C.n)]
        if self._free is not None:
            gens = self._free[0]
            out = Mat(X.rank * z, self._free[2] * s.lower.rank)
            for b in range(C.n):
                out += arith.kron(X.right[b] * gens, blocks[b])
            return out
        FL = self.apply(s.lower)
        phi = Mat(X.rank * z, X.rank * s.lower.rank)
        for b in range(C.n):
            phi += arith.kron(X.right[b], blocks[b])
        return phi * FL.sigma

    def out_of_middle(self, s: SES) -> Mat:
        """X⊗Z -> F(upper): x⊗z ↦ class of x⊗surj(1⊗z)."""
        C, X = self.C, self.X
        z = s.middle.zrank
        one = arith.kron(arith.col_vector(C.unit), arith.identity(z))
        S1 = s.surj * one
        if self._free is not None:
            out = Mat(self._free[2] * s.upper.rank, X.rank * z)
            for i in range(C.n):
                out += arith.kron(self._einv_rows(i), s.upper.act(i) * S1)
            return out
        FU = self.apply(s.upper)
        return FU.q * arith.kron(arith.identity(X.rank), S1)


class FunctorTower:
    """The image of a shift tower under an exact tensor functor."""

    def __init__(self, F: TensorFunctor, base: ShiftTower, name: str = ""):
        self.F = F
        self.base = base
        self.algebra = F.D
        self.name = name or f"F({base.name})"
        self._ses: dict[int, SES] = {}

    def level(self, k: int) -> Lattice:
        return self.F.apply(self.base.level(k))

    def ses(self, k: int) -> SES:
        s = self._ses.get(k)
        if s is not None:
            return s
        b = self.base.ses(k)
        if not isinstance(b.middle, KronLattice):
            raise LatticeError("functor tower needs induced middle terms")
        F = self.F
        p = F.X.p
        inj = F.into_middle(b)
        surj = F.out_of_middle(b)
        s = SES(F.apply(b.lower), F.middle(b.middle), F.apply(b.upper), inj, surj,
                arith.o_left_inverse(inj, p), arith.o_right_inverse(surj, p))
        self._ses[k] = s
        return s


# ---------------------------------------------------------------- adjunction data


@dataclass
class AdjunctionData:
    """Units and counits of the two adjunctions between M⊗_B- and M^∨⊗_A-.

    Elements of M^∨⊗_O M are indexed (l, k) ~ b_l^*⊗b_k, elements of
    M⊗_O M^∨ by (j, l) ~ b_j⊗b_l^*.
    """

    M: Bimodule
    e: Mat          # left-A Higman element of M
    f: Mat          # right-B Higman element of M
    eps_M: Mat      # ε_M(1) ∈ M^∨⊗_O M (representative)
    eps_Mdual: Mat  # ε_{M^∨}(1) ∈ M⊗_O M^∨ (representative)
    eta_M: Mat      # M⊗_O M^∨ -> A
    eta_Mdual: Mat  # M^∨⊗_O M -> B

    @cached_property
    def F(self) -> TensorFunctor:
        """M^∨⊗_A - : A-lattices -> B-lattices."""
        Md = self.M.dual()
        return TensorFunctor(Md, higman=Md.left_higman)

    @cached_property
    def G(self) -> TensorFunctor:
        """M⊗_B - : B-lattices -> A-lattices."""
        return TensorFunctor(self.M, higman=self.M.left_higman)

    @property
    def pi_M(self) -> tuple:
        return tuple(arith.vector_entries(self.eta_M * self.eps_Mdual))

    @property
    def pi_Mdual(self) -> tuple:
        return tuple(arith.vector_entries(self.eta_Mdual * self.eps_M))


def eta_matrix(M: Bimodule) -> Mat:
    """η_M(b_j⊗b_l^*) = sum_i b_l^*(x_i^∨ b_j)·x_i, as an |A| × m² matrix."""
    A = M.left_alg
    m = M.rank
    out = Mat(A.n, m * m)
    for i in range(A.n):
        d = M.left_elem(A.dual_element(i))
        for j in range(m):
            for l in range(m):
                x = d[l, j]
                if x:
                    out[i, j * m + l] = x
    return out


def eta_dual_matrix(M: Bimodule) -> Mat:
    """η_{M^∨}(b_l^*⊗b_j) = sum_t b_l^*(b_j y_t^∨)·y_t, as a |B| × m² matrix."""
    B = M.right_alg
    m = M.rank
    out = Mat(B.n, m * m)
    for t in range(B.n):
        d = M.right_elem(B.dual_element(t))
        for l in range(m):
            for j in range(m):
                x = d[l, j]
                if x:
                    out[t, l * m + j] = x
    return out


def adjunction_data(M: Bimodule, e: Mat | None = None, f: Mat | None = None) -> AdjunctionData:
    """Adjunction maps from Higman elements (any e, f with Tr(e) = id, Tr^R(f) = id)."""
    if e is None:
        e = M.left_higman
    if f is None:
        f = M.right_higman
    if e is None or f is None:
        raise BimoduleError(f"{M.name} is not perfect (no projective basis on one side)")
    m = M.rank
    eps_M = arith.reshape(e.transpose(), m * m, 1)
    eps_Md = arith.reshape(f, m * m, 1)
    return AdjunctionData(M, e, f, eps_M, eps_Md, eta_matrix(M), eta_dual_matrix(M))


def projective_basis_pairs(M: Bimodule):
    """Left pairs (m_k, α_k) with α_k ∈ Hom_A(M, A) and sum α_k(m)m_k = m, from the Higman element.

    α_k(m) = sum_i e_k^*(e(x_i^∨ m))·x_i, returned as |A| × m matrices.
    """
    e = M.left_higman
    if e is None:
        return None
    A = M.left_alg
    duals = [M.left_elem(A.dual_element(i)) for i in range(A.n)]
    out = []
    for k in range(M.rank):
        row = arith.submatrix(e, [k], range(M.rank))
        alpha = arith.vstack([row * d for d in duals])
        out.append((arith.column(arith.identity(M.rank), k), alpha))
    return out


def triangle_identities(data: AdjunctionData) -> list[str]:
    """The four triangle identities, checked on representatives."""
    M = data.M
    m = M.rank
    e, f = data.e, data.f
    fails = []
    I = arith.identity(m)
    # (η_M⊗Id_M)(Id_M⊗ε_M) = Id_M : m ↦ sum e[k,l] η_M(m⊗b_l^*)·b_k
    T1 = Mat(m, m)
    T2 = Mat(m, m)  # on M^∨ (columns are functionals)
    T3 = Mat(m, m)
    T4 = Mat(m, m)
    for k in range(m):
        for l in range(m):
            c = e[k, l]
            if c:
                for x in range(m):
                    # T1: m = b_x
                    a = arith.vector_entries(arith.column(data.eta_M, x * m + l))
                    T1 += q(c) * (M.left_elem(a) * arith.column(I, k)) * arith.submatrix(I, [x], range(m))
                    # T2: φ = b_x^* ↦ sum e[k,l] b_l^*·η_M(b_k⊗φ)
                    a = arith.vector_entries(arith.column(data.eta_M, k * m + x))
                    # right action of a on b_l^* is the functional b_l^*∘left(a)
                    T2 += q(c) * (M.left_elem(a).transpose() * arith.column(I, l)) * arith.submatrix(I, [x], range(m))
    for j in range(m):
        for l in range(m):
            c = f[j, l]
            if c:
                for x in range(m):
                    # T3: φ = b_x^* ↦ sum f[j,l] η_{M^∨}(φ⊗b_j)·b_l^*  (left B action on M^∨)
                    b = arith.vector_entries(arith.column(data.eta_Mdual, x * m + j))
                    T3 += q(c) * (M.right_elem(b).transpose() * arith.column(I, l)) * arith.submatrix(I, [x], range(m))
                    # T4: m = b_x ↦ sum f[j,l] b_j·η_{M^∨}(b_l^*⊗m)
                    b = arith.vector_entries(arith.column(data.eta_Mdual, l * m + x))
                    T4 += q(c) * (M.right_elem(b) * arith.column(I, j)) * arith.submatrix(I, [x], range(m))
    for name, T in (("(eta_M x Id_M)(Id_M x eps_M)", T1), ("(Id_Mv x eta_M)(eps_M x Id_Mv)", T2),
                    ("(eta_Mv x Id_Mv)(Id_Mv x eps_Mv)", T3), ("(Id_M x eta_Mv)(eps_Mv x Id_M)", T4)):
        if T != I:
            fails.append(name)
    return fails


def unit_classes(data: AdjunctionData) -> tuple[Mat, Mat]:
    """Classes of ε_{M^∨}(1) in M⊗_B M^∨ and ε_M(1) in M^∨⊗_A M (basis-free comparison)."""
    M = data.M
    Md = M.dual()
    G = data.G
    F = data.F
    GMd = G.apply(Md_as_left(Md))
    FM = F.apply(M_as_left(M))
    return GMd.q * data.eps_Mdual, FM.q * data.eps_M


def Md_as_left(Md: Bimodule) -> Lattice:
    cached = getattr(Md, "_as_left", None)
    if cached is None:
        cached = Md.left_lattice
        Md._as_left = cached
    return cached


def M_as_left(M: Bimodule) -> Lattice:
    return M.left_lattice


def counit_on_quotient(data: AdjunctionData) -> Mat:
    """η_M as a map on M⊗_B M^∨ (via a section of the quotient)."""
    GMd = data.G.apply(Md_as_left(data.M.dual()))
    return data.eta_M * GMd.sigma


def dual_tensor_iso(M: Bimodule, U: Lattice) -> Mat:
    """M^∨⊗_A U -> Hom_A(M, U) (row-major vec of |U|×|M| matrices), φ⊗u ↦ (m ↦ α_φ(m)u).

    α_φ(m) = sum_i φ(x_i^∨ m) x_i is the preimage of φ under α ↦ s∘α.
    """
    A = M.left_alg
    m = M.rank
    Md = M.dual()
    F = TensorFunctor(Md)
    FU = F.apply(U)
    duals = [M.left_elem(A.dual_element(i)) for i in range(A.n)]
    acts = [U.act(i) for i in range(A.n)]
    # column (l, u) of the map on M^∨⊗_O U, then precompose the section
    cols = []
    for l in range(m):
        for u in range(U.rank):
            img = Mat(U.rank, m)
            for i in range(A.n):
                row = arith.submatrix(duals[i], [l], range(m))    # m ↦ b_l^*(x_i^∨ m)
                if not arith.is_zero(row):
                    img += arith.column(acts[i], u) * row
            cols.append(arith.reshape(img, U.rank * m, 1))
    pre = arith.hstack(cols, U.rank * m)
    return pre * FU.sigma


# ---------------------------------------------------------------- transfer


def transfer_hom(data: AdjunctionData, U: Lattice, V: Lattice, beta: Mat) -> Mat:
    """tr_M(β) = (η_M⊗Id_V)∘(Id_M⊗β)∘(ε_{M^∨}⊗Id_U) for β: M^∨⊗_A U -> M^∨⊗_A V."""
    F, G = data.F, data.G
    M = data.M
    m = M.rank
    FU, FV = F.apply(U), F.apply(V)
    if beta.nrows() != FV.rank or beta.ncols() != FU.rank:
        raise BimoduleError("transfer: β has the wrong shape")
    GFU, GFV = G.apply(FU), G.apply(FV)
    f = data.f
    blocks = []
    for j in range(m):
        W = Mat(FU.rank, U.rank)
        for l in range(m):
            c = f[j, l]
            if c:
                W += q(c) * arith.submatrix(FU.q, range(FU.rank), range(l * U.rank, (l + 1) * U.rank))
        blocks.append(W)
    eps_U = GFU.q * arith.vstack(blocks, U.rank)
    gb = G.apply_map(beta, FU, FV)
    H = arith.hstack([V.act_elem(arith.vector_entries(arith.column(data.eta_M, jl))) for jl in range(m * m)])
    eta_V = H * (arith.kron(arith.identity(m), FV.sigma) * GFV.sigma)
    return eta_V * (gb * eps_U)


def functor_tower(data: AdjunctionData, tower: ShiftTower) -> FunctorTower:
    """M^∨⊗_A T for a tower T of A-lattices (cached per tower)."""
    cache = data.__dict__.setdefault("_ftowers", {})
    hit = cache.get(id(tower))
    if hit is not None and hit.base is tower:
        return hit
    ft = FunctorTower(data.F, tower, f"Mv(x){tower.name}")
    cache[id(tower)] = ft
    return ft


def transfer_graded(data: AdjunctionData, beta: TowerMap, src: ShiftTower, tgt: ShiftTower) -> TowerMap:
    """Degree-preserving transfer of β: F(T_U)[a] -> F(T_V)[b] to T_U[a] -> T_V[b]."""
    if not (isinstance(beta.src, FunctorTower) and beta.src.base is src and beta.tgt.base is tgt):
        raise BimoduleError("transfer: tower mismatch")
    mat = transfer_hom(data, src.level(beta.a), tgt.level(beta.b), beta.mat)
    return TowerMap(src, beta.a, tgt, beta.b, mat)


def tensor_id_with(data: AdjunctionData, alpha: TowerMap) -> TowerMap:
    """Id_{M^∨}⊗α on the functor towers."""
    fs = functor_tower(data, alpha.src)
    ft = functor_tower(data, alpha.tgt)
    mat = data.F.apply_map(alpha.mat, alpha.source, alpha.target)
    return TowerMap(fs, alpha.a, ft, alpha.b, mat)


# ---------------------------------------------------------------- Hochschild


def hh_tower(A: Algebra) -> ShiftTower:
    """The A^e shift tower of A (generator covers keep ranks small)."""
    return ae_lattice(A).tower("gens")


def hochschild_tate(A: Algebra, n: int) -> TateGroup:
    T = hh_tower(A)
    return TateGroup(T, 0, T, n)


def sandwich_functor(M: Bimodule) -> TensorFunctor:
    """Z ↦ M⊗_B Z⊗_B M^∨ from B^e-lattices to A^e-lattices."""
    cached = getattr(M, "_sandwich", None)
    if cached is None:
        X = outer_tensor(M, M.dual().flip())
        cached = TensorFunctor(X, higman=X.left_higman)
        M._sandwich = cached
    return cached


@dataclass
class HHTransfer:
    """Result of a Hochschild transfer with its comparison certificate."""

    value: TowerMap
    comparison_kernel_projective: bool | None
    comparison_cokernel_projective: bool | None
    stable_inverse_checked: bool | None

    @property
    def certified(self) -> bool:
        if self.comparison_kernel_projective and self.comparison_cokernel_projective:
            return True
        return bool(self.stable_inverse_checked)


def _saturated_image(m: Mat, p: int) -> bool:
    if m.ncols() == 0:
        return True
    img = arith.image_lattice(m, p)
    return arith.rank_mod_p(img, p) == img.ncols()


def comparison_certificate(chi: Mat, X: Lattice, Y: Lattice) -> tuple[bool, bool]:
    """Are kernel and cokernel of chi: X -> Y projective (cokernel O-free)?"""
    from .lattices import sublattice, quotient_lattice, is_projective
    p = X.algebra.p
    K = arith.kernel_lattice(chi, p)
    if K.ncols():
        r = arith.o_left_inverse(K, p)
        kp = is_projective(sublattice(X, K, r))
    else:
        kp = True
    if not _saturated_image(chi, p):
        return kp, False
    img = arith.image_lattice(chi, p) if chi.ncols() else Mat(Y.rank, 0)
    if img.ncols() == Y.rank:
        return kp, True
    # complement of the image: cokernel via a left kernel
    s = arith.left_kernel(img, p)
    t = arith.o_right_inverse(s, p)
    return kp, is_projective(quotient_lattice(Y, s, t))


def transfer_hochschild(M: Bimodule, data: AdjunctionData, zeta: TowerMap,
                        certify: bool = True) -> HHTransfer:
    """tr_M(ζ) = Σ^n(η_M)∘χ_n∘(Id_M⊗ζ⊗Id_{M^∨})∘ε_{M^∨} for ζ ∈ HH-hat^n(B).

    χ_n: M⊗_B Σ^n(B)⊗_B M^∨ -> Σ^n(M⊗_B M^∨) is obtained by shifting the
    identity of M⊗_B M^∨ between the two towers.
    """
    A, B = M.left_alg, M.right_alg
    TB = zeta.src
    if zeta.a != 0 or zeta.tgt is not TB:
        raise BimoduleError("Hochschild class must be a map B -> Σ^n(B) in one tower")
    n = zeta.b
    S = sandwich_functor(M)
    FT = FunctorTower(S, TB, f"M(x){TB.name}(x)Mv")
    N = FT.level(0)
    TN = N.tower("gens")
    TA = hh_tower(A)
    chi = TowerMap(FT, 0, TN, 0, arith.identity(N.rank)).shift(n)
    Fz = S.apply_map(zeta.mat, zeta.source, zeta.target)
    # ε_{M^∨}: A -> N, determined by the class of ε_{M^∨}(1)⊗1_B
    w0 = N.q * arith.kron(data.eps_Mdual, arith.col_vector(B.unit))
    AA = ae_lattice(A)
    eps = cyclic_hom(AA, N, w0)
    eta = _eta_on_sandwich(M, data, N)
    eta_n = TowerMap(TN, 0, TA, 0, eta).shift(n)
    value = TowerMap(TA, 0, TA, n, eta_n.mat * (chi.mat * (Fz * eps)))
    kp = cp = inv = None
    if certify:
        kp, cp = comparison_certificate(chi.mat, FT.level(n), TN.level(n))
        if not (kp and cp):
            back = TowerMap(TN, 0, FT, 0, arith.identity(N.rank)).shift(n)
            X, Y = FT.level(n), TN.level(n)
            inv = (factors_through_projective(X, X, back.mat * chi.mat - arith.identity(X.rank))
                   and factors_through_projective(Y, Y, chi.mat * back.mat - arith.identity(Y.rank)))
    return HHTransfer(value, kp, cp, inv)


def _eta_on_sandwich(M: Bimodule, data: AdjunctionData, N: TensorLattice) -> Mat:
    """η_M on M⊗_B B⊗_B M^∨: (m⊗φ)⊗b ↦ η_M(m·b⊗φ)."""
    B = M.right_alg
    m = M.rank
    Xr = m * m
    cols = {}
    for b in range(B.n):
        cols[b] = data.eta_M * arith.kron(M.right[b], arith.identity(m))
    out = Mat(data.eta_M.nrows(), Xr * B.n)
    for b in range(B.n):
        blk = cols[b]
        for x in range(Xr):
            for a in range(blk.nrows()):
                v = blk[a, x]
                if v:
                    out[a, x * B.n + b] = v
    return out * N.sigma


def transfer_hh_via_bimodule_hom(M: Bimodule, data: AdjunctionData, zeta: TowerMap) -> TowerMap:
    """The second construction: apply -⊗_B M^∨ to ζ, identify Σ^n(B)⊗_B M^∨ with
    M^∨⊗_A Σ^n(A) by shifting the identity of M^∨ between the two towers of
    B⊗A^op-lattices, then apply the transfer for left A-modules (the right
    A-structure is carried along)."""
    A, B = M.left_alg, M.right_alg
    Md = M.dual()
    TB = zeta.src
    n = zeta.b
    TA = hh_tower(A)
    X1 = outer_tensor(regular_bimodule(B), Md.flip())      # (B⊗A^op)-(B⊗B^op)
    X2 = outer_tensor(Md, regular_bimodule(A).flip())      # (B⊗A^op)-(A⊗A^op)
    F1 = TensorFunctor(X1, higman=X1.left_higman)
    F2 = TensorFunctor(X2, higman=X2.left_higman)
    T1 = FunctorTower(F1, TB, "T_B(x)Mv")
    T2 = FunctorTower(F2, TA, "Mv(x)T_A")
    B0, A0 = T1.level(0), T2.level(0)
    to_md_1 = _to_Mdual_1(B, Md, B0)
    to_md_2 = _to_Mdual_2(A, Md, A0)
    iso0 = to_md_2.inv() * to_md_1
    chi = TowerMap(T1, 0, T2, 0, iso0).shift(n)
    F1z = F1.apply_map(zeta.mat, zeta.source, zeta.target)
    # identification F2(W) -> M^∨⊗_A W (left A-structure only)
    Fl = data.F
    AA = TA.level(0)
    Wn = TA.level(n)
    resA = restrict_left(AA, A)
    resW = restrict_left(Wn, A)
    conv0 = _conv(A, Md, Fl, AA, resA, A0)
    convn = _conv(A, Md, Fl, Wn, resW, T2.level(n))
    J0 = conv0 * iso0
    beta = convn * (chi.mat * (F1z * J0.inv()))
    mat = transfer_hom(data, resA, resW, beta)
    return TowerMap(TA, 0, TA, n, mat)


def _to_Mdual_1(B: Algebra, Md: Bimodule, T: TensorLattice) -> Mat:
    """(B⊗M^∨)⊗_{B^e} B -> M^∨: (b1⊗φ)⊗b ↦ (b1 b)·φ."""
    m = Md.rank
    cols = []
    for b1 in range(B.n):
        for phi in range(m):
            for b in range(B.n):
                prod = B.mul(B.basis_element(b1), B.basis_element(b))
                cols.append(Md.left_elem(prod) * arith.column(arith.identity(m), phi))
    pre = arith.hstack(cols, m)
    return pre * T.sigma


def _to_Mdual_2(A: Algebra, Md: Bimodule, T: TensorLattice) -> Mat:
    """(M^∨⊗A)⊗_{A^e} A -> M^∨: (φ⊗a1)⊗a ↦ φ·(a a1)."""
    m = Md.rank
    cols = []
    for phi in range(m):
        for a1 in range(A.n):
            for a in range(A.n):
                prod = A.mul(A.basis_element(a), A.basis_element(a1))
                cols.append(Md.right_elem(prod) * arith.column(arith.identity(m), phi))
    pre = arith.hstack(cols, m)
    return pre * T.sigma


def _conv(A: Algebra, Md: Bimodule, Fl: TensorFunctor, W: Lattice, resW: Lattice, T: TensorLattice) -> Mat:
    """(M^∨⊗A)⊗_{A^e} W -> M^∨⊗_A W: (φ⊗a1)⊗w ↦ φ⊗(w·a1)."""
    n = A.n
    E = W.algebra
    unitA = A.unit
    rights = []
    for a1 in range(n):
        coeffs = [0] * E.n
        for i in range(n):
            if unitA[i]:
                coeffs[i * n + a1] = unitA[i]
        rights.append(W.act_elem(coeffs))
    psi = arith.kron(arith.identity(Md.rank), arith.hstack(rights))
    FW = Fl.apply(resW)
    return FW.q * (psi * T.sigma)
