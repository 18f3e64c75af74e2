"""Exact arithmetic over O = Z_(p), K = Q and K/O.

Matrices are ``flint.fmpq_mat``; the bulk products and row reductions run in
FLINT, while everything that needs the valuation (Smith form over the DVR,
saturation, O-splittings) is done here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import flint

Mat = flint.fmpq_mat


class ArithmeticError_(ArithmeticError):
    """Raised when an operation would leave O (division by a non-unit)."""


# ---------------------------------------------------------------- scalars


def frac(x) -> Fraction:
    """Coerce int, str, Fraction or fmpq to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, flint.fmpz):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def q(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    f = frac(x)
    return flint.fmpq(f.numerator, f.denominator)


def check_prime(p: int) -> int:
    if not isinstance(p, int) or p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise ValueError(f"prime required, got {p!r}")
    return p


def _vint(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(x, p: int) -> float | int:
    """p-adic valuation of a rational; ``inf`` for zero."""
    x = frac(x)
    if x == 0:
        return float("inf")
    return _vint(abs(x.numerator), p) - _vint(x.denominator, p)


def is_integral(x, p: int) -> bool:
    x = frac(x)
    return x.denominator % p != 0


def unit_part(x, p: int) -> Fraction:
    x = frac(x)
    v = valuation(x, p)
    return x / Fraction(p) ** v


@dataclass(frozen=True)
class LocalScalar:
    """An element of Z_(p)."""

    value: Fraction
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", frac(self.value))
        if not is_integral(self.value, self.p):
            raise ArithmeticError_(f"{self.value} is not in Z_({self.p})")

    def __add__(self, other):
        return LocalScalar(self.value + _val(other), self.p)

    def __sub__(self, other):
        return LocalScalar(self.value - _val(other), self.p)

    def __mul__(self, other):
        return LocalScalar(self.value * _val(other), self.p)

    def __neg__(self):
        return LocalScalar(-self.value, self.p)

    def is_unit(self) -> bool:
        return self.value != 0 and valuation(self.value, self.p) == 0

    def divide(self, other) -> "LocalScalar":
        d = _val(other)
        if d == 0 or valuation(d, self.p) > 0:
            raise ArithmeticError_(f"division by non-unit {d} in Z_({self.p})")
        return LocalScalar(self.value / d, self.p)

    def to_field(self) -> Fraction:
        return self.value

    def __str__(self):
        return fstr(self.value)


def _val(x):
    return x.value if isinstance(x, LocalScalar) else frac(x)


def fstr(x) -> str:
    """Serialize a rational as "a/b" (or "a" when b = 1)."""
    x = frac(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True, order=True)
class MatlisValue:
    """num/p^exp + O, canonical: 0 <= num < p^exp, p does not divide num."""

    num: int
    exp: int
    p: int

    def is_zero(self) -> bool:
        return self.num == 0

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, self.p ** self.exp)

    def __add__(self, other: "MatlisValue") -> "MatlisValue":
        return matlis_reduce(self.to_fraction() + other.to_fraction(), self.p)

    def __neg__(self):
        return matlis_reduce(-self.to_fraction(), self.p)

    def __str__(self):
        if self.num == 0:
            return "0"
        return f"{self.num}/{self.p}^{self.exp}"


def matlis_reduce(x, p: int) -> MatlisValue:
    """Canonical representative of x + O in K/O."""
    x = frac(x)
    k = _vint(x.denominator, p)
    if k == 0:
        return MatlisValue(0, 0, p)
    pk = p ** k
    u = x.denominator // pk
    # x = a/(u p^k) = a u^{-1} / p^k, with u^{-1} taken mod p^k
    num = (x.numerator * pow(u, -1, pk)) % pk
    return MatlisValue(num, k, p)


def mod_pk(x, p: int, k: int) -> int:
    """Image of x in Z_(p)/p^k = Z/p^k."""
    x = frac(x)
    if not is_integral(x, p):
        raise ArithmeticError_(f"{x} is not in Z_({p})")
    m = p ** k
    return (x.numerator * pow(x.denominator, -1, m)) % m


# ---------------------------------------------------------------- matrices


def matrix(rows, ncols: int | None = None) -> Mat:
    rows = [list(r) for r in rows]
    r = len(rows)
    c = len(rows[0]) if rows else (ncols or 0)
    return Mat(r, c, [q(x) for row in rows for x in row])


def zeros(r: int, c: int) -> Mat:
    return Mat(r, c)


def identity(n: int) -> Mat:
    m = Mat(n, n)
    for i in range(n):
        m[i, i] = 1
    return m


def entries(m: Mat) -> list:
    return m.entries()


def to_rows(m: Mat) -> list[list[Fraction]]:
    e = m.entries()
    c = m.ncols()
    return [[frac(e[i * c + j]) for j in range(c)] for i in range(m.nrows())]


def reshape(m: Mat, r: int, c: int) -> Mat:
    return Mat(r, c, m.entries())


def col_vector(v) -> Mat:
    v = list(v)
    return Mat(len(v), 1, [q(x) for x in v])


def column(m: Mat, j: int) -> Mat:
    return Mat(m.nrows(), 1, [m[i, j] for i in range(m.nrows())])


def columns_of(m: Mat) -> list[Mat]:
    return [column(m, j) for j in range(m.ncols())]


def vector_entries(v: Mat) -> list[Fraction]:
    return [frac(x) for x in v.entries()]


def submatrix(m: Mat, rows, cols) -> Mat:
    rows = list(rows)
    cols = list(cols)
    e = m.entries()
    c = m.ncols()
    return Mat(len(rows), len(cols), [e[i * c + j] for i in rows for j in cols])


def hstack(ms: list[Mat], nrows: int | None = None) -> Mat:
    ms = list(ms)
    if not ms:
        return Mat(nrows or 0, 0)
    r = ms[0].nrows()
    parts = [m.entries() for m in ms]
    widths = [m.ncols() for m in ms]
    out = []
    for i in range(r):
        for e, w in zip(parts, widths):
            out.extend(e[i * w:(i + 1) * w])
    return Mat(r, sum(widths), out)


def vstack(ms: list[Mat], ncols: int | None = None) -> Mat:
    ms = list(ms)
    if not ms:
        return Mat(0, ncols or 0)
    c = ms[0].ncols()
    out = []
    for m in ms:
        out.extend(m.entries())
    return Mat(sum(m.nrows() for m in ms), c, out)


def block_diag(ms: list[Mat]) -> Mat:
    r = sum(m.nrows() for m in ms)
    c = sum(m.ncols() for m in ms)
    out = Mat(r, c)
    i0 = j0 = 0
    for m in ms:
        e = m.entries()
        mc = m.ncols()
        for i in range(m.nrows()):
            for j in range(mc):
                x = e[i * mc + j]
                if x:
                    out[i0 + i, j0 + j] = x
        i0 += m.nrows()
        j0 += mc
    return out


def kron(a: Mat, b: Mat) -> Mat:
    ar, ac, br, bc = a.nrows(), a.ncols(), b.nrows(), b.ncols()
    ae, be = a.entries(), b.entries()
    out = Mat(ar * br, ac * bc)
    for i in range(ar):
        for j in range(ac):
            x = ae[i * ac + j]
            if not x:
                continue
            for k in range(br):
                for l in range(bc):
                    y = be[k * bc + l]
                    if y:
                        out[i * br + k, j * bc + l] = x * y
    return out


def kron_left_apply(a: Mat, z: int, m: Mat) -> Mat:
    """(a ⊗ I_z)·m without forming the Kronecker product."""
    n = a.ncols()
    c = m.ncols()
    return reshape(a * reshape(m, n, z * c), a.nrows() * z, c)


def kron_right_apply(m: Mat, a: Mat, z: int) -> Mat:
    """m·(a ⊗ I_z)."""
    return kron_left_apply(a.transpose(), z, m.transpose()).transpose()


def is_zero(m: Mat) -> bool:
    return all(x == 0 for x in m.entries())


def trace(m: Mat) -> Fraction:
    return sum((frac(m[i, i]) for i in range(m.nrows())), Fraction(0))


def scalar_mul(c, m: Mat) -> Mat:
    return q(c) * m


def lin_comb(coeffs, mats: list[Mat], r: int, c: int) -> Mat:
    out = Mat(r, c)
    for x, m in zip(coeffs, mats):
        if x:
            out += q(x) * m
    return out


def denominator_lcm(m: Mat) -> int:
    d = 1
    for x in m.entries():
        qd = int(x.q)
        d = d * qd // gcd(d, qd)
    return d


def is_integral_matrix(m: Mat, p: int) -> bool:
    return denominator_lcm(m) % p != 0


def min_valuation(m: Mat, p: int):
    return min((valuation(x, p) for x in m.entries() if x != 0), default=float("inf"))


def mod_p_matrix(m: Mat, p: int) -> flint.nmod_mat:
    num, den = m.numer_denom()
    den = int(den)
    if den % p == 0:
        raise ArithmeticError_("matrix is not p-integral")
    out = flint.nmod_mat(num, p)
    return out if den == 1 else out * flint.nmod(pow(den, -1, p), p)


def rank_mod_p(m: Mat, p: int) -> int:
    if m.nrows() == 0 or m.ncols() == 0:
        return 0
    return mod_p_matrix(m, p).rank()


def pivots_mod_p(m: Mat, p: int) -> list[int]:
    """Pivot columns of the reduction of m mod p."""
    if m.nrows() == 0 or m.ncols() == 0:
        return []
    r, rank = mod_p_matrix(m, p).rref()
    piv = []
    c = m.ncols()
    e = r.entries()
    j = 0
    for i in range(rank):
        while int(e[i * c + j]) == 0:
            j += 1
        piv.append(j)
        j += 1
    return piv


def rank(m: Mat) -> int:
    if m.nrows() == 0 or m.ncols() == 0:
        return 0
    return m.rref()[1]


# ---------------------------------------------------------------- Smith form


@dataclass(frozen=True)
class SmithDecomposition:
    """left·D·right = input, D = diag(diag) padded with zeros."""

    left: Mat
    diag: tuple
    right: Mat
    left_inv: Mat
    right_inv: Mat
    p: int

    @property
    def exponents(self) -> list[int]:
        return [valuation(d, self.p) for d in self.diag]

    def diag_matrix(self, r: int, c: int) -> Mat:
        d = Mat(r, c)
        for i, x in enumerate(self.diag):
            d[i, i] = q(x)
        return d


def smith_normal_form(m: Mat, p: int) -> SmithDecomposition:
    """Smith form over Z_(p): invariant factors are pure p-powers.

    Pivoting on an entry of minimal valuation means every later entry stays
    divisible by the pivot, so no gcd steps are needed.
    """
    r, c = m.nrows(), m.ncols()
    if not is_integral_matrix(m, p):
        raise ArithmeticError_("smith_normal_form needs a matrix over O")
    a = to_rows(m)
    L = [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]
    Li = [row[:] for row in L]
    R = [[Fraction(int(i == j)) for j in range(c)] for i in range(c)]
    Ri = [row[:] for row in R]
    diag = []
    for k in range(min(r, c)):
        best = None
        for i in range(k, r):
            row = a[i]
            for j in range(k, c):
                x = row[j]
                if x:
                    v = valuation(x, p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, i, j = best
        if i != k:
            a[i], a[k] = a[k], a[i]
            Li[i], Li[k] = Li[k], Li[i]
            for row in L:
                row[i], row[k] = row[k], row[i]
        if j != k:
            for row in a:
                row[j], row[k] = row[k], row[j]
            for row in Ri:
                row[j], row[k] = row[k], row[j]
            R[j], R[k] = R[k], R[j]
        u = a[k][k] / Fraction(p) ** v
        if u != 1:
            a[k] = [x / u for x in a[k]]
            Li[k] = [x / u for x in Li[k]]
            for row in L:
                row[k] = row[k] * u
        piv = a[k][k]
        for i in range(k + 1, r):
            f = a[i][k] / piv
            if f:
                ri, rk = a[i], a[k]
                for j in range(k, c):
                    if rk[j]:
                        ri[j] -= f * rk[j]
                li, lk = Li[i], Li[k]
                for j in range(r):
                    if lk[j]:
                        li[j] -= f * lk[j]
                for row in L:
                    if row[i]:
                        row[k] += f * row[i]
        rk = a[k]
        for j in range(k + 1, c):
            f = rk[j] / piv
            if f:
                rk[j] = Fraction(0)
                Rk, Rj = R[k], R[j]
                for t in range(c):
                    if Rj[t]:
                        Rk[t] += f * Rj[t]
                for row in Ri:
                    if row[k]:
                        row[j] -= f * row[k]
        diag.append(piv)
    return SmithDecomposition(matrix(L, r), tuple(diag), matrix(R, c),
                              matrix(Li, r), matrix(Ri, c), p)


def solve_over_O(a: Mat, b: Mat, p: int) -> Mat | None:
    """Some x over O with a·x = b, or None when no such x exists."""
    if a.nrows() != b.nrows():
        raise ValueError(f"shape mismatch: {a.nrows()} rows vs {b.nrows()} rows")
    snf = smith_normal_form(a, p)
    rhs = snf.left_inv * b
    k = len(snf.diag)
    y = Mat(a.ncols(), b.ncols())
    for i in range(rhs.nrows()):
        for j in range(b.ncols()):
            x = rhs[i, j]
            if i < k:
                val = frac(x) / snf.diag[i]
                if not is_integral(val, p):
                    return None
                y[i, j] = q(val)
            elif x != 0:
                return None
    return snf.right_inv * y


# ---------------------------------------------------------------- lattices


def _rref_nullspace(a: Mat, order: list[int]) -> tuple[Mat, list[int], list[int]]:
    """Nullspace basis with identity on the free coordinates (columns in ``order`` first)."""
    n = a.ncols()
    ap = submatrix(a, range(a.nrows()), order)
    red, rk = ap.rref()
    e = red.entries()
    piv = []
    j = 0
    for i in range(rk):
        while e[i * n + j] == 0:
            j += 1
        piv.append(j)
        j += 1
    pivset = set(piv)
    free = [j for j in range(n) if j not in pivset]
    out = Mat(n, len(free))
    for t, fj in enumerate(free):
        out[order[fj], t] = 1
        for i, pj in enumerate(piv):
            x = e[i * n + fj]
            if x:
                out[order[pj], t] = -x
    return out, [order[j] for j in piv], [order[j] for j in free]


def kernel_lattice(a: Mat, p: int) -> Mat:
    """Columns form a saturated O-basis of {x in O^n : a·x = 0}."""
    n = a.ncols()
    if a.nrows() == 0:
        return identity(n)
    if is_zero(a):
        return identity(n)
    mp = pivots_mod_p(_primitive_rows(a, p), p)
    order = mp + [j for j in range(n) if j not in set(mp)]
    basis, piv, free = _rref_nullspace(a, order)
    if is_integral_matrix(basis, p):
        return basis
    return saturate_columns(basis, p)


def _primitive_rows(m: Mat, p: int) -> Mat:
    """Rescale each row by a power of p so that it is p-integral with a unit entry."""
    c = m.ncols()
    e = m.entries()
    out = []
    for i in range(m.nrows()):
        row = e[i * c:(i + 1) * c]
        v = min((valuation(x, p) for x in row if x != 0), default=0)
        s = q(Fraction(p) ** (-v))
        out.extend(x * s for x in row)
    return Mat(m.nrows(), c, out)


def saturate_columns(basis: Mat, p: int) -> Mat:
    """O-basis of (K-span of the columns) ∩ O^n."""
    n, k = basis.nrows(), basis.ncols()
    if k == 0:
        return basis
    # clear p-denominators: column j scaled to be p-integral and primitive
    cols = []
    for j in range(k):
        c = column(basis, j)
        v = min_valuation(c, p)
        cols.append(c * q(Fraction(1, p) ** int(v) if v != float("inf") else 1))
    b = hstack(cols)
    # b has full column rank; saturate via Smith form: b = L D R, span_K ∩ O^n
    # is spanned by the first k columns of L.
    snf = smith_normal_form(b, p)
    return submatrix(snf.left, range(n), range(len(snf.diag)))


def saturate(basis: Mat, p: int) -> Mat:
    """Saturation of an arbitrary (possibly dependent) set of columns."""
    if basis.ncols() == 0:
        return basis
    red, rk = basis.transpose().rref()
    indep = submatrix(red, range(rk), range(red.ncols())).transpose()
    return saturate_columns(indep, p)


def left_kernel(a: Mat, p: int) -> Mat:
    """Rows spanning the saturated lattice {y : y·a = 0}."""
    return kernel_lattice(a.transpose(), p).transpose()


def image_lattice(m: Mat, p: int) -> Mat:
    """A basis (columns) of the O-span of the columns of m."""
    if m.ncols() == 0 or is_zero(m):
        return Mat(m.nrows(), 0)
    d = denominator_lcm(m)
    z = d * m
    ints = flint.fmpz_mat(z.ncols(), z.nrows(), [int(x.p) for x in z.transpose().entries()])
    h = ints.hnf()
    rows = []
    for i in range(h.nrows()):
        row = [h[i, j] for j in range(h.ncols())]
        if any(x != 0 for x in row):
            rows.append(row)
    # scaling by d (a unit times a p-power) changes the O-span; undo it exactly
    out = Mat(len(rows), m.nrows(), [flint.fmpq(int(x)) for row in rows for x in row]).transpose()
    return q(Fraction(1, d)) * out


@dataclass(frozen=True)
class LatticeBasis:
    """A saturated O-basis (columns) with an O-integral left inverse."""

    basis: Mat
    rows: tuple
    inv: Mat
    p: int

    @classmethod
    def of(cls, basis: Mat, p: int) -> "LatticeBasis":
        k = basis.ncols()
        if k == 0:
            return cls(basis, (), Mat(0, 0), p)
        rows = pivots_mod_p(basis.transpose(), p)
        if len(rows) < k:
            raise ArithmeticError_("basis is not saturated")
        inv = submatrix(basis, rows, range(k)).inv()
        return cls(basis, tuple(rows), inv, p)

    @property
    def rank(self) -> int:
        return self.basis.ncols()

    def coords(self, v: Mat) -> Mat:
        """Coordinates of vectors v (columns) assumed to lie in the K-span."""
        if self.rank == 0:
            return Mat(0, v.ncols())
        return self.inv * submatrix(v, self.rows, range(v.ncols()))

    def contains(self, v: Mat) -> bool:
        c = self.coords(v)
        return self.basis * c == v and is_integral_matrix(c, self.p)


def o_left_inverse(m: Mat, p: int) -> Mat:
    """O-integral r with r·m = I for an O-split injection m."""
    k = m.ncols()
    if k == 0:
        return Mat(0, m.nrows())
    rows = pivots_mod_p(m.transpose(), p)
    if len(rows) < k:
        raise ArithmeticError_("map is not an O-split injection")
    inv = submatrix(m, rows, range(k)).inv()
    out = Mat(k, m.nrows())
    for t, i in enumerate(rows):
        for j in range(k):
            x = inv[j, t]
            if x:
                out[j, i] = x
    return out


def o_right_inverse(m: Mat, p: int) -> Mat:
    """O-integral t with m·t = I for an O-split surjection m."""
    return o_left_inverse(m.transpose(), p).transpose()


def lattice_contains(big: Mat, small: Mat, p: int) -> bool:
    """Is the O-span of the columns of small inside the O-span of big?"""
    if small.ncols() == 0:
        return True
    if big.ncols() == 0:
        return is_zero(small)
    h = image_lattice(big, p)
    if h.ncols() == 0:
        return is_zero(small)
    red, rk = h.transpose().rref()
    e = red.entries()
    n = red.ncols()
    rows = []
    j = 0
    for i in range(rk):
        while e[i * n + j] == 0:
            j += 1
        rows.append(j)
        j += 1
    c = submatrix(h, rows, range(h.ncols())).solve(submatrix(small, rows, range(small.ncols())))
    return is_integral_matrix(c, p) and h * c == small


def same_lattice(a: Mat, b: Mat, p: int) -> bool:
    return lattice_contains(a, b, p) and lattice_contains(b, a, p)
