"""The standard instance suite: group algebras with a subgroup and test lattices."""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import Algebra, cyclic_group_algebra, symmetric_group_algebra
from .bimodules import Bimodule, induction_bimodule, subgroup_algebra, subgroup_generated
from .lattices import Lattice, sign_lattice, trivial_lattice


@dataclass
class Instance:
    name: str
    A: Algebra
    B: Algebra
    M: Bimodule
    incl: object
    lattices: dict[str, Lattice] = field(default_factory=dict)
    pairs: list[tuple[str, str]] = field(default_factory=list)

    def rescaled(self, lam, mu) -> "Instance":
        """Same instance with forms λ·s and μ·t."""
        A2 = self.A.rescaled(lam)
        B2 = self.B.rescaled(mu)
        M2 = induction_bimodule(A2, B2, self.incl)
        lats = {k: v.over(A2) for k, v in self.lattices.items()}
        return Instance(f"{self.name}[{lam},{mu}]", A2, B2, M2, self.incl, lats, list(self.pairs))


def sign_values(A: Algebra) -> list[int]:
    """Sign character of a symmetric group algebra, read off from element orders (S_3 only)."""
    g = A.group
    return [-1 if g.element_order(x) == 2 else 1 for x in range(g.order)]


def cyclic_over_trivial(n: int, p: int) -> Instance:
    A = cyclic_group_algebra(n, p)
    B, incl = subgroup_algebra(A, [A.group.identity])
    M = induction_bimodule(A, B, incl)
    T = trivial_lattice(A)
    return Instance(f"C{n}>1,p={p}", A, B, M, incl, {"triv": T}, [("triv", "triv")])


def s3_over_c3(p: int = 3) -> Instance:
    A = symmetric_group_algebra(3, p)
    g = next(x for x in range(6) if A.group.element_order(x) == 3)
    B, incl = subgroup_algebra(A, subgroup_generated(A, [g]))
    M = induction_bimodule(A, B, incl)
    T = trivial_lattice(A)
    S = sign_lattice(A, sign_values(A))
    return Instance(f"S3>C3,p={p}", A, B, M, incl, {"triv": T, "sign": S},
                    [("triv", "triv"), ("triv", "sign"), ("sign", "triv"), ("sign", "sign")])


def s3_over_c2(p: int = 2) -> Instance:
    A = symmetric_group_algebra(3, p)
    g = next(x for x in range(6) if A.group.element_order(x) == 2)
    B, incl = subgroup_algebra(A, subgroup_generated(A, [g]))
    M = induction_bimodule(A, B, incl)
    T = trivial_lattice(A)
    S = sign_lattice(A, sign_values(A))
    return Instance(f"S3>C2,p={p}", A, B, M, incl, {"triv": T, "sign": S},
                    [("triv", "triv"), ("triv", "sign"), ("sign", "triv"), ("sign", "sign")])


def standard_suite() -> list[Instance]:
    return [cyclic_over_trivial(2, 2), cyclic_over_trivial(3, 3), s3_over_c3(3)]
