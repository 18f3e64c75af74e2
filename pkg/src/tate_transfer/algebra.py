"""Finite O-free algebras with a symmetrising form.

An algebra is stored by its left regular representation: ``L[i]`` is the
matrix of left multiplication by the basis element x_i, so that
x_i x_j = sum_k L[i][k, j] x_k, i.e. c[i][j][k] = L[i][k, j].
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import product

from . import arith
from .arith import Mat, frac, q


class AlgebraError(ValueError):
    pass


# ---------------------------------------------------------------- groups


class Group:
    """A finite group given by its Cayley table on 0..N-1."""

    def __init__(self, table, name: str = ""):
        table = [list(map(int, row)) for row in table]
        n = len(table)
        if n == 0 or any(len(row) != n for row in table):
            raise AlgebraError("Cayley table must be square and nonempty")
        for row in table:
            if sorted(row) != list(range(n)):
                raise AlgebraError("Cayley table rows must be permutations of the elements")
        ids = [e for e in range(n) if all(table[e][g] == g and table[g][e] == g for g in range(n))]
        if len(ids) != 1:
            raise AlgebraError("Cayley table has no identity element")
        for a, b, c in product(range(n), repeat=3):
            if table[table[a][b]][c] != table[a][table[b][c]]:
                raise AlgebraError(f"Cayley table not associative at ({a},{b},{c})")
        self.table = table
        self.order = n
        self.identity = ids[0]
        self.inverse = [next(b for b in range(n) if table[a][b] == ids[0]) for a in range(n)]
        self.name = name

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def generated(self, gens) -> set[int]:
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = self.table[a][g]
                    if b not in seen:
                        seen.add(b)
                        nxt.append(b)
            frontier = nxt
        return seen

    @cached_property
    def generators(self) -> list[int]:
        gens: list[int] = []
        span = {self.identity}
        for g in range(self.order):
            if g not in span:
                gens.append(g)
                span = self.generated(gens)
            if len(span) == self.order:
                break
        return gens

    def element_order(self, g: int) -> int:
        k, a = 1, g
        while a != self.identity:
            a = self.table[a][g]
            k += 1
        return k

    def sylow(self, p: int) -> list[int]:
        """Elements of a Sylow p-subgroup."""
        n = self.order
        pa = 1
        while n % (pa * p) == 0:
            pa *= p
        pel = [g for g in range(n) if _is_power(self.element_order(g), p)]
        h = {self.identity}
        gens: list[int] = []
        while len(h) < pa:
            for g in pel:
                if g in h:
                    continue
                cand = self.generated(gens + [g])
                if _is_power(len(cand), p):
                    gens.append(g)
                    h = cand
                    break
            else:  # pragma: no cover - Sylow theory guarantees progress
                raise AlgebraError("Sylow search failed")
        return sorted(h)

    def direct_product(self, other: "Group") -> "Group":
        m = other.order
        table = [[self.table[a // m][b // m] * m + other.table[a % m][b % m]
                  for b in range(self.order * m)] for a in range(self.order * m)]
        return Group(table, f"{self.name}x{other.name}")

    def opposite(self) -> "Group":
        return Group([list(col) for col in zip(*self.table)], f"{self.name}^op")

    def subgroup_table(self, elements: list[int]) -> list[list[int]]:
        idx = {g: i for i, g in enumerate(elements)}
        return [[idx[self.table[a][b]] for b in elements] for a in elements]


def _is_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def cyclic_table(n: int) -> list[list[int]]:
    return [[(a + b) % n for b in range(n)] for a in range(n)]


def symmetric_group_table(n: int) -> tuple[list[list[int]], list[tuple]]:
    """Cayley table of S_n on its permutations (identity first)."""
    from itertools import permutations

    perms = list(permutations(range(n)))
    idx = {s: i for i, s in enumerate(perms)}
    # (s*t)(x) = s(t(x))
    table = [[idx[tuple(s[t[x]] for x in range(n))] for t in perms] for s in perms]
    return table, perms


# ---------------------------------------------------------------- algebras


class Algebra:
    """An O-order with basis x_0..x_{n-1}, unit and symmetrising form."""

    def __init__(self, p: int, left_mult: list[Mat], unit, form, name: str = "",
                 generators=None, group: Group | None = None, validate: bool = True):
        self.p = arith.check_prime(p)
        self.L = list(left_mult)
        self.n = len(self.L)
        self.unit = tuple(frac(x) for x in unit)
        self.form = tuple(frac(x) for x in form)
        self.name = name
        self.group = group
        if len(self.unit) != self.n or len(self.form) != self.n:
            raise AlgebraError("unit/form length must equal the rank")
        if generators is None:
            generators = [self.basis_element(i) for i in range(self.n)]
        self.generators = [tuple(frac(x) for x in g) for g in generators]
        if validate:
            for msg in _integrality_problems(self):
                raise AlgebraError(msg)

    # -- construction helpers
    @classmethod
    def from_structure_constants(cls, p, constants, unit, form, name="", generators=None):
        n = len(constants)
        L = []
        for i in range(n):
            m = Mat(n, n)
            for j in range(n):
                for k in range(n):
                    x = frac(constants[i][j][k])
                    if x:
                        m[k, j] = q(x)
            L.append(m)
        return cls(p, L, unit, form, name, generators)

    def constant(self, i: int, j: int, k: int) -> Fraction:
        return frac(self.L[i][k, j])

    def basis_element(self, i: int) -> tuple:
        return tuple(Fraction(int(i == j)) for j in range(self.n))

    def with_form(self, form, name: str | None = None) -> "Algebra":
        a = Algebra(self.p, self.L, self.unit, form, name or self.name, self.generators, self.group)
        return a

    def rescaled(self, lam) -> "Algebra":
        lam = frac(lam)
        return self.with_form([lam * x for x in self.form], f"{self.name}*{arith.fstr(lam)}")

    # -- arithmetic on coordinate tuples
    def vec(self, a) -> Mat:
        return arith.col_vector(a)

    def mul(self, a, b) -> tuple:
        return tuple(arith.vector_entries(self.left_mult_of(a) * self.vec(b)))

    def left_mult_of(self, a) -> Mat:
        return arith.lin_comb(a, self.L, self.n, self.n)

    @cached_property
    def R(self) -> list[Mat]:
        """R[j] = matrix of right multiplication by x_j."""
        out = []
        for j in range(self.n):
            m = Mat(self.n, self.n)
            for i in range(self.n):
                col = self.L[i]
                for k in range(self.n):
                    x = col[k, j]
                    if x:
                        m[k, i] = x
            out.append(m)
        return out

    def right_mult_of(self, a) -> Mat:
        return arith.lin_comb(a, self.R, self.n, self.n)

    def s(self, a) -> Fraction:
        return sum((f * frac(x) for f, x in zip(self.form, a)), Fraction(0))

    @cached_property
    def unit_index(self) -> int | None:
        for i in range(self.n):
            if self.unit == self.basis_element(i):
                return i
        return None

    @cached_property
    def form_row(self) -> Mat:
        return arith.matrix([self.form])

    @cached_property
    def gram(self) -> Mat:
        # G[i, j] = s(x_i x_j) = form · L[i] e_j
        rows = [arith.vector_entries(self.form_row * self.L[i]) for i in range(self.n)]
        return arith.matrix(rows)

    @cached_property
    def dual(self) -> Mat:
        """Column j holds the coordinates of x_j^∨ (s(x_i x_j^∨) = δ_ij)."""
        g = self.gram
        if arith.valuation(frac(g.det()), self.p) != 0:
            raise AlgebraError("Gram matrix of the form is not invertible over O")
        return g.inv()

    def dual_element(self, j: int) -> tuple:
        return tuple(arith.vector_entries(arith.column(self.dual, j)))

    @cached_property
    def z(self) -> tuple:
        """Relative projective element z = sum_i x_i x_i^∨."""
        acc = Mat(self.n, 1)
        for i in range(self.n):
            acc += self.L[i] * arith.column(self.dual, i)
        return tuple(arith.vector_entries(acc))

    @cached_property
    def z_inverse(self) -> tuple:
        """z^{-1} in K⊗A (requires K⊗A semisimple)."""
        lz = self.left_mult_of(self.z)
        if lz.det() == 0:
            raise AlgebraError("z_A is not invertible over K")
        return tuple(arith.vector_entries(lz.solve(self.vec(self.unit))))

    @cached_property
    def center(self) -> Mat:
        """Saturated basis (columns) of Z(A)."""
        eqs = [self.left_mult_of(g) - self.right_mult_of(g) for g in self.generators]
        return arith.kernel_lattice(arith.vstack(eqs), self.p)

    def is_central(self, a) -> bool:
        v = self.vec(a)
        return all(arith.is_zero(self.left_mult_of(g) * v - self.right_mult_of(g) * v)
                   for g in self.generators)

    def __repr__(self):
        return f"Algebra({self.name or '?'}, rank={self.n}, p={self.p})"


def _integrality_problems(a: Algebra):
    for i, m in enumerate(a.L):
        if not arith.is_integral_matrix(m, a.p):
            yield f"structure constants with x_{i} are not in Z_({a.p})"
    for x in a.unit + a.form:
        if not arith.is_integral(x, a.p):
            yield f"unit/form coordinate {x} not in Z_({a.p})"


def validate_algebra(a: Algebra) -> list[str]:
    """Associativity and unit violations (empty list when valid)."""
    out = list(_integrality_problems(a))
    n = a.n
    cols = [[arith.column(a.L[i], j) for j in range(n)] for i in range(n)]  # x_i x_j
    for i, j, k in product(range(n), repeat=3):
        lhs = a.left_mult_of(arith.vector_entries(cols[i][j])) * arith.column(arith.identity(n), k)
        rhs = a.L[i] * cols[j][k]
        if lhs != rhs:
            out.append(f"associativity fails at ({i},{j},{k})")
    u = a.left_mult_of(a.unit)
    if u != arith.identity(n):
        out.append("unit is not a left unit")
    if a.right_mult_of(a.unit) != arith.identity(n):
        out.append("unit is not a right unit")
    return out


def validate_form(a: Algebra) -> list[str]:
    out = []
    g = a.gram
    for i in range(a.n):
        for j in range(i + 1, a.n):
            if g[i, j] != g[j, i]:
                out.append(f"form not symmetric at ({i},{j})")
    if not out:
        d = frac(g.det())
        if d == 0 or arith.valuation(d, a.p) != 0:
            out.append(f"Gram determinant {arith.fstr(d)} is not a unit in Z_({a.p})")
    return out


def dual_basis(a: Algebra) -> list[tuple]:
    return [a.dual_element(j) for j in range(a.n)]


def relative_projective_element(a: Algebra) -> tuple:
    return a.z


def check_K_semisimple(a: Algebra) -> bool:
    """Nondegeneracy of the regular trace form over K (char 0 criterion)."""
    n = a.n
    t = Mat(n, n)
    for i in range(n):
        for j in range(n):
            t[i, j] = q(arith.trace(a.L[i] * a.L[j]))
    return t.det() != 0


# ---------------------------------------------------------------- constructions


def group_algebra(table, p: int, name: str = "") -> Algebra:
    g = table if isinstance(table, Group) else Group(table, name)
    n = g.order
    L = []
    for a in range(n):
        m = Mat(n, n)
        for b in range(n):
            m[g.table[a][b], b] = 1
        L.append(m)
    unit = [int(i == g.identity) for i in range(n)]
    gens = [tuple(int(i == x) for i in range(n)) for x in g.generators] or [tuple(unit)]
    return Algebra(p, L, unit, unit, name or g.name, gens, g)


def ground_ring(p: int) -> Algebra:
    """O itself, as the group algebra of the trivial group."""
    return group_algebra([[0]], p, "O")


def cyclic_group_algebra(n: int, p: int) -> Algebra:
    return group_algebra(Group(cyclic_table(n), f"C{n}"), p, f"O[C{n}]")


def symmetric_group_algebra(n: int, p: int) -> Algebra:
    table, _ = symmetric_group_table(n)
    return group_algebra(Group(table, f"S{n}"), p, f"O[S{n}]")


def matrix_algebra(d: int, p: int, scale=1) -> Algebra:
    """M_d(O) on the basis E_ij (index i*d + j) with form scale·trace."""
    if d < 1:
        raise AlgebraError("matrix algebra needs d >= 1")
    n = d * d
    L = []
    for i in range(d):
        for j in range(d):
            m = Mat(n, n)
            # E_ij E_kl = δ_jk E_il
            for l in range(d):
                m[i * d + l, j * d + l] = 1
            L.append(m)
    unit = [int(i == j) for i in range(d) for j in range(d)]
    form = [frac(scale) * int(i == j) for i in range(d) for j in range(d)]
    if d == 1:
        gens = [tuple(unit)]
    else:
        gens = []
        for i in range(d - 1):
            for (a, b) in ((i, i + 1), (i + 1, i)):
                gens.append(tuple(int(x == a * d + b) for x in range(n)))
    return Algebra(p, L, unit, form, f"M{d}", gens)


def opposite(a: Algebra) -> Algebra:
    """A^op (cached, so that opposite(opposite(A)) is A itself)."""
    cached = getattr(a, "_opposite", None)
    if cached is not None:
        return cached
    g = a.group.opposite() if a.group else None
    o = Algebra(a.p, a.R, a.unit, a.form, f"{a.name}^op", a.generators, g)
    a._opposite = o
    o._opposite = a
    return o


def _check_same_prime(a: Algebra, b: Algebra):
    if a.p != b.p:
        raise AlgebraError(f"prime mismatch: {a.p} vs {b.p}")


def tensor_product(a: Algebra, b: Algebra) -> Algebra:
    """A⊗_O B on the basis x_i⊗y_j (index i*m + j), form s⊗t."""
    _check_same_prime(a, b)
    L = [arith.kron(a.L[i], b.L[j]) for i in range(a.n) for j in range(b.n)]
    unit = [x * y for x in a.unit for y in b.unit]
    form = [x * y for x in a.form for y in b.form]
    gens = [tuple(x * y for x in g for y in b.unit) for g in a.generators]
    gens += [tuple(x * y for x in a.unit for y in h) for h in b.generators]
    grp = a.group.direct_product(b.group) if (a.group and b.group) else None
    return Algebra(a.p, L, unit, form, f"{a.name}(x){b.name}", gens, grp)


def direct_product(a: Algebra, b: Algebra) -> Algebra:
    """A×B on the basis (x_i, 0), (0, y_j), form s + t."""
    _check_same_prime(a, b)
    n, m = a.n, b.n
    L = []
    for i in range(n):
        L.append(arith.block_diag([a.L[i], Mat(m, m)]))
    for j in range(m):
        L.append(arith.block_diag([Mat(n, n), b.L[j]]))
    unit = list(a.unit) + list(b.unit)
    form = list(a.form) + list(b.form)
    gens = [tuple(g) + tuple(Fraction(0) for _ in range(m)) for g in a.generators]
    gens += [tuple(Fraction(0) for _ in range(n)) + tuple(h) for h in b.generators]
    # the two central idempotents are needed to separate the factors
    gens += [tuple(a.unit) + tuple(Fraction(0) for _ in range(m))]
    return Algebra(a.p, L, unit, form, f"{a.name}x{b.name}", gens)


def enveloping_algebra(a: Algebra) -> Algebra:
    """A^e = A⊗A^op; basis x_i⊗x_j acts on A by a ↦ x_i a x_j."""
    cached = getattr(a, "_envelope", None)
    if cached is not None:
        return cached
    e = tensor_product(a, opposite(a))
    e.name = f"{a.name}^e"
    e.base = a
    a._envelope = e
    return e


def change_basis(a: Algebra, P: Mat) -> Algebra:
    """Same algebra on the basis y_j = sum_i P[i, j] x_i (P unimodular over O)."""
    Pinv = P.inv()
    L = []
    for j in range(a.n):
        y = arith.vector_entries(arith.column(P, j))
        L.append(Pinv * a.left_mult_of(y) * P)
    unit = arith.vector_entries(Pinv * a.vec(a.unit))
    form = arith.vector_entries(a.form_row * P)
    gens = [tuple(arith.vector_entries(Pinv * a.vec(g))) for g in a.generators]
    return Algebra(a.p, L, unit, form, f"{a.name}'", gens)


def element_in_basis(a: Algebra, P: Mat, x) -> tuple:
    """Coordinates of x (given in the old basis) in the basis of change_basis(a, P)."""
    return tuple(arith.vector_entries(P.inv() * a.vec(x)))
