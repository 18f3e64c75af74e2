"""Command line: validate instance files, run tasks, check the matrix oracle.

Exit status: 0 when every check passes, 1 when a mathematical identity
fails, 2 for input or hypothesis errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__, arith
from .algebra import (Algebra, AlgebraError, Group, group_algebra, matrix_algebra, validate_algebra,
                      validate_form)
from .arith import Mat, frac
from .bimodules import (Bimodule, BimoduleError, adjunction_data, hochschild_tate, induction_bimodule,
                        subgroup_algebra, subgroup_generated, triangle_identities)
from .duality import PairingError
from .lattices import (Lattice, LatticeError, TateGroup, regular_lattice, tate_ext,
                       trivial_lattice, validate_lattice)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2

TASKS = ("tate-ext", "hh", "pairing-table", "verify-thm1", "verify-thm2", "verify-identities",
         "verify-matrix-oracle")


class InputError(ValueError):
    pass


# ---------------------------------------------------------------- parsing


def _scalar(x, where: str) -> Fraction:
    if isinstance(x, float) or isinstance(x, bool):
        raise InputError(f"{where}: scalars must be integers or strings, got {x!r}")
    try:
        return frac(x)
    except (ValueError, TypeError, ZeroDivisionError):
        raise InputError(f"{where}: not an exact scalar: {x!r}") from None


def _matrix(rows, n: int, where: str) -> Mat:
    if not isinstance(rows, list) or len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
        raise InputError(f"{where}: expected a {n}x{n} matrix")
    return arith.matrix([[_scalar(x, where) for x in r] for r in rows], n)


@dataclass
class InstanceFile:
    prime: int
    algebras: dict[str, Algebra] = field(default_factory=dict)
    lattices: dict[str, Lattice] = field(default_factory=dict)
    bimodules: dict[str, Bimodule] = field(default_factory=dict)
    tasks: list[dict] = field(default_factory=list)


def _parse_group(spec, where: str) -> Group:
    if isinstance(spec, dict):
        from .algebra import cyclic_table, symmetric_group_table
        if "cyclic" in spec:
            return Group(cyclic_table(int(spec["cyclic"])), f"C{spec['cyclic']}")
        if "symmetric" in spec:
            return Group(symmetric_group_table(int(spec["symmetric"]))[0], f"S{spec['symmetric']}")
        raise InputError(f"{where}: group must be a Cayley table, {{'cyclic': n}} or {{'symmetric': n}}")
    try:
        return Group(spec, where)
    except (AlgebraError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _parse_algebra(name: str, spec: dict, p: int, forms: dict) -> Algebra:
    where = f"algebras.{name}"
    kinds = [k for k in ("structure_constants", "group", "matrix") if k in spec]
    if len(kinds) != 1:
        raise InputError(f"{where}: give exactly one of structure_constants, group, matrix")
    kind = kinds[0]
    try:
        if kind == "group":
            A = group_algebra(_parse_group(spec["group"], where), p, name)
        elif kind == "matrix":
            A = matrix_algebra(int(spec["matrix"]), p)
            A.name = name
        else:
            consts = spec["structure_constants"]
            n = len(consts)
            c = [[[_scalar(x, where) for x in row] for row in plane] for plane in consts]
            if any(len(plane) != n or any(len(r) != n for r in plane) for plane in c):
                raise InputError(f"{where}: structure constants must be n x n x n")
            if "unit" not in spec:
                raise InputError(f"{where}: structure-constant algebras need a unit")
            form = spec.get("form", forms.get(name))
            if form is None:
                raise InputError(f"{where}: no symmetrising form given")
            unit = [_scalar(x, where) for x in spec["unit"]]
            form = [_scalar(x, where) for x in form]
            A = Algebra.from_structure_constants(p, c, unit, form, name)
        if name in forms and kind != "structure_constants":
            A = A.with_form([_scalar(x, f"forms.{name}") for x in forms[name]], name)
    except AlgebraError as exc:
        raise InputError(f"{where}: {exc}") from None
    problems = validate_algebra(A) + validate_form(A)
    if problems:
        raise InputError(f"{where}: {problems[0]}")
    return A


def _parse_lattice(name: str, spec: dict, algebras: dict) -> Lattice:
    where = f"lattices.{name}"
    A = algebras.get(spec.get("algebra"))
    if A is None:
        raise InputError(f"{where}: unknown algebra {spec.get('algebra')!r}")
    kind = spec.get("kind")
    if kind == "trivial":
        U = trivial_lattice(A)
    elif kind == "regular":
        U = regular_lattice(A)
    elif kind is None:
        rank = spec.get("rank")
        acts = spec.get("actions")
        if not isinstance(rank, int) or rank < 1 or not isinstance(acts, list) or len(acts) != A.n:
            raise InputError(f"{where}: need rank and one action matrix per basis element ({A.n})")
        U = Lattice(A, rank, [_matrix(m, rank, f"{where}.actions[{i}]") for i, m in enumerate(acts)], name=name)
    else:
        raise InputError(f"{where}: unknown lattice kind {kind!r}")
    U.name = name
    problems = validate_lattice(U)
    if problems:
        raise InputError(f"{where}: {problems[0]}")
    return U


def _parse_bimodule(name: str, spec: dict, algebras: dict) -> Bimodule:
    where = f"bimodules.{name}"
    if "induction" in spec:
        ind = spec["induction"]
        A = algebras.get(ind.get("group"))
        if A is None or A.group is None:
            raise InputError(f"{where}: induction needs a group algebra, got {ind.get('group')!r}")
        gens = ind.get("subgroup", [])
        if any(not isinstance(g, int) or not 0 <= g < A.n for g in gens):
            raise InputError(f"{where}: subgroup generators must be element indices")
        B, incl = subgroup_algebra(A, subgroup_generated(A, gens))
        bname = ind.get("name", f"{name}.right")
        B.name = bname
        algebras[bname] = B
        M = induction_bimodule(A, B, incl)
        M.name = name
    else:
        A = algebras.get(spec.get("left"))
        B = algebras.get(spec.get("right"))
        if A is None or B is None:
            raise InputError(f"{where}: explicit bimodules need known left and right algebras")
        r = spec.get("rank")
        la, ra = spec.get("left_actions"), spec.get("right_actions")
        if not isinstance(r, int) or not isinstance(la, list) or not isinstance(ra, list) \
                or len(la) != A.n or len(ra) != B.n:
            raise InputError(f"{where}: need rank, left_actions ({A.n}) and right_actions ({B.n})")
        M = Bimodule(A, B, r, [_matrix(m, r, f"{where}.left_actions[{i}]") for i, m in enumerate(la)],
                     [_matrix(m, r, f"{where}.right_actions[{i}]") for i, m in enumerate(ra)], name)
    problems = M.validate()
    if problems:
        raise InputError(f"{where}: {problems[0]}")
    if not M.is_perfect():
        raise InputError(f"{where}: bimodule is not projective on both sides")
    return M


def parse_instance(data: dict) -> InstanceFile:
    if not isinstance(data, dict):
        raise InputError("instance file must be a JSON object")
    p = data.get("prime")
    try:
        arith.check_prime(p)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    inst = InstanceFile(p)
    forms = data.get("forms", {})
    for name, spec in data.get("algebras", {}).items():
        inst.algebras[name] = _parse_algebra(name, spec, p, forms)
    for name, spec in data.get("bimodules", {}).items():
        inst.bimodules[name] = _parse_bimodule(name, spec, inst.algebras)
    for name, spec in data.get("lattices", {}).items():
        inst.lattices[name] = _parse_lattice(name, spec, inst.algebras)
    tasks = data.get("tasks", [])
    if not isinstance(tasks, list):
        raise InputError("tasks must be a list")
    for i, t in enumerate(tasks):
        if not isinstance(t, dict) or t.get("task") not in TASKS:
            raise InputError(f"tasks[{i}]: unknown task {t.get('task') if isinstance(t, dict) else t!r}")
        t.setdefault("id", f"t{i}")
    inst.tasks = tasks
    return inst


def parse_and_validate(path: str) -> InstanceFile:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_instance(data)


# ---------------------------------------------------------------- tasks


def _get(table: dict, key, what: str, tid: str):
    if key not in table:
        raise InputError(f"task {tid}: unknown {what} {key!r}")
    return table[key]


def _degrees(task: dict) -> list[int]:
    d = task.get("degrees", [task.get("degree", 0)])
    if not isinstance(d, list) or any(not isinstance(x, int) for x in d):
        raise InputError(f"task {task['id']}: degrees must be integers")
    return d


def _rows_passed(rows) -> bool:
    return all(r.get("passed", True) for r in rows)


def task_tate_ext(inst: InstanceFile, task: dict, rng) -> dict:
    U = _get(inst.lattices, task.get("U"), "lattice", task["id"])
    V = _get(inst.lattices, task.get("V"), "lattice", task["id"])
    return {"results": [{"degree": n, "group": tate_ext(U, V, n).describe()} for n in _degrees(task)]}


def task_hh(inst: InstanceFile, task: dict, rng) -> dict:
    A = _get(inst.algebras, task.get("algebra"), "algebra", task["id"])
    return {"results": [{"degree": n, "group": hochschild_tate(A, n).describe()} for n in _degrees(task)]}


def _value_table(X: TateGroup, Y: TateGroup, pair) -> list[list[str]]:
    return [[str(v) for v in row] for row in _pairing_matrix(X, Y, pair)]


def _pairing_matrix(X, Y, pair):
    from .duality import pairing_matrix
    return pairing_matrix(X, Y, pair)


def task_pairing_table(inst: InstanceFile, task: dict, rng) -> dict:
    from .duality import check_nondegenerate, hh_pairing, tate_pairing
    out = []
    for n in _degrees(task):
        if "algebra" in task:
            A = _get(inst.algebras, task["algebra"], "algebra", task["id"])
            X, Y = hochschild_tate(A, n), hochschild_tate(A, -n)
            pair = lambda a, b, A=A: hh_pairing(a, b, A)
        else:
            U = _get(inst.lattices, task.get("U"), "lattice", task["id"])
            V = _get(inst.lattices, task.get("V"), "lattice", task["id"])
            X, Y = tate_ext(U, V, n), tate_ext(V, U, -n)
            pair = tate_pairing
        out.append({"degree": n, "left": X.describe(), "right": Y.describe(),
                    "values": _value_table(X, Y, pair), "passed": check_nondegenerate(X, Y, pair)})
    return {"results": out}


def _rescalings(task: dict, p: int) -> list[tuple[Fraction, Fraction]]:
    pairs = task.get("rescale", [["1", "1"]])
    out = []
    for pr in pairs:
        lam, mu = _scalar(pr[0], "rescale"), _scalar(pr[1], "rescale")
        if arith.valuation(lam, p) != 0 or arith.valuation(mu, p) != 0:
            raise InputError(f"task {task['id']}: rescaling factors must be units in Z_({p})")
        out.append((lam, mu))
    return out


def _rebase(M: Bimodule, lam, mu) -> tuple[Bimodule, dict]:
    A2, B2 = M.left_alg.rescaled(lam), M.right_alg.rescaled(mu)
    M2 = Bimodule(A2, B2, M.rank, M.left, M.right, M.name)
    return M2, {"A": A2, "B": B2}


def task_verify_thm1(inst: InstanceFile, task: dict, rng) -> dict:
    from .duality import check_theorem1
    M = _get(inst.bimodules, task.get("bimodule"), "bimodule", task["id"])
    U = _get(inst.lattices, task.get("U"), "lattice", task["id"])
    V = _get(inst.lattices, task.get("V"), "lattice", task["id"])
    trials = int(task.get("trials", 20))
    rows = []
    for lam, mu in _rescalings(task, inst.prime):
        M2, alg = _rebase(M, lam, mu)
        U2, V2 = U.over(alg["A"]), V.over(alg["A"])
        label = f"{M.name}[{arith.fstr(lam)},{arith.fstr(mu)}]"
        for n in _degrees(task):
            rows += [r.to_dict() for r in check_theorem1(M2, U2, V2, n, trials, 0, instance=label, rng=rng)]
    return {"results": rows}


def task_verify_thm2(inst: InstanceFile, task: dict, rng) -> dict:
    from .duality import check_theorem2
    M = _get(inst.bimodules, task.get("bimodule"), "bimodule", task["id"])
    trials = int(task.get("trials", 5))
    rows = []
    for lam, mu in _rescalings(task, inst.prime):
        M2, _ = _rebase(M, lam, mu)
        label = f"{M.name}[{arith.fstr(lam)},{arith.fstr(mu)}]"
        for n in _degrees(task):
            rows += [r.to_dict() for r in check_theorem2(M2, n, trials, 0, instance=label, rng=rng)]
    return {"results": rows}


def task_verify_identities(inst: InstanceFile, task: dict, rng) -> dict:
    from .duality import (check_adjointness_associativity, check_nondegenerate, check_symmetry,
                          check_well_defined, witness_nonzero_product)
    rows = []
    names = task.get("lattices", [])
    lats = [_get(inst.lattices, x, "lattice", task["id"]) for x in names]
    degrees = _degrees(task) if ("degrees" in task or "degree" in task) else [-1, 0, 1]
    for U in lats:
        for V in lats:
            if U.algebra is not V.algebra:
                continue
            label = f"{U.name},{V.name}"
            for n in degrees:
                G = tate_ext(U, V, n)
                D = tate_ext(V, U, -n)
                a, b = G.random_element(rng), D.random_element(rng)
                rows.append(check_symmetry(a, b, label).to_dict())
                rows.append(check_well_defined(a, b, rng, label).to_dict())
                rows.append({"check": "nondegenerate", "instance": label, "degree": n,
                             "passed": check_nondegenerate(G, D)})
                for g in G.gen_elements():
                    w = witness_nonzero_product(g, G)
                    rows.append({"check": "nonzero product witness", "instance": label, "degree": n,
                                 "pairing": str(w.pairing), "passed": w.ok})
                for W in lats:
                    if W.algebra is not U.algebra:
                        continue
                    m = 1
                    al = tate_ext(U, V, m).random_element(rng)
                    be = TateGroup(V.tower(), 0, W.tower(), n).random_element(rng)
                    ga = TateGroup(W.tower(), 0, U.tower(), -m - n).random_element(rng)
                    rows += [r.to_dict() for r in check_adjointness_associativity(al, be, ga, f"{label},{W.name}")]
    for name in task.get("bimodules", []):
        M = _get(inst.bimodules, name, "bimodule", task["id"])
        d = adjunction_data(M)
        tri = triangle_identities(d)
        rows.append({"check": "triangle identities", "instance": name, "passed": not tri, "detail": ", ".join(tri)})
        rows.append({"check": "pi_M", "instance": name, "value": [arith.fstr(x) for x in d.pi_M], "passed": True})
    return {"results": rows}


def task_verify_matrix_oracle(inst: InstanceFile | None, task: dict, rng) -> dict:
    from .oracle_matrix import generic_comparison, run_oracle_suite
    d, e = task.get("dims", [2, 2])
    lam, mu = (_scalar(x, "scalars") for x in task.get("scalars", ["1", "1"]))
    if lam == 0 or mu == 0:
        raise InputError("matrix oracle scalars must be nonzero")
    seed = rng.randrange(2 ** 31)
    rows = [r.to_dict() for r in run_oracle_suite(int(d), int(e), lam, mu, seed)]
    p = task.get("prime") or oracle_prime(int(d), int(e), lam, mu)
    rows += [r.to_dict() for r in generic_comparison(int(d), int(e), int(p), lam, mu, seed)]
    return {"results": rows}


def oracle_prime(d: int, e: int, lam, mu) -> int:
    """Smallest prime >= 5 not dividing d·e for which λ, μ are units."""
    q = 5
    while (d * e) % q == 0 or arith.valuation(lam, q) != 0 or arith.valuation(mu, q) != 0:
        q += 2
        while any(q % k == 0 for k in range(3, int(q ** 0.5) + 1, 2)):
            q += 2
    return q


RUNNERS = {
    "tate-ext": task_tate_ext,
    "hh": task_hh,
    "pairing-table": task_pairing_table,
    "verify-thm1": task_verify_thm1,
    "verify-thm2": task_verify_thm2,
    "verify-identities": task_verify_identities,
    "verify-matrix-oracle": task_verify_matrix_oracle,
}


def run_task(task: dict, inst: InstanceFile, seed: int) -> dict:
    rng = random.Random(f"{seed}:{task['id']}")
    t0 = time.perf_counter()
    try:
        body = RUNNERS[task["task"]](inst, task, rng)
        status = "pass" if _rows_passed(body["results"]) else "fail"
    except (LatticeError, AlgebraError, BimoduleError, PairingError) as exc:
        # hypothesis failures and depth-cap hits are task-level diagnostics
        body, status = {"results": [], "error": f"{type(exc).__name__}: {exc}"}, "error"
    out = {"id": task["id"], "task": task["task"], "status": status}
    out.update(body)
    out["elapsed"] = f"{time.perf_counter() - t0:.3f}"
    return out


def run_instance(inst: InstanceFile, seed: int) -> dict:
    results = [run_task(t, inst, seed) for t in inst.tasks]
    results.sort(key=lambda r: r["id"])
    return {"tool": "tate-transfer", "version": __version__, "seed": seed, "prime": inst.prime, "tasks": results}


def exit_status(report: dict) -> int:
    statuses = {t["status"] for t in report["tasks"]}
    if "error" in statuses:
        return EXIT_INPUT
    if "fail" in statuses:
        return EXIT_VIOLATION
    return EXIT_OK


# ---------------------------------------------------------------- output


def _text_row(row: dict) -> str:
    mark = "ok" if row.get("passed", True) else "FAIL"
    rest = "  ".join(f"{k}={v}" for k, v in row.items() if k != "passed")
    return f"  {mark:4} {rest}"


def emit_report(report: dict, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    lines = [f"tate-transfer {report['version']}  seed={report['seed']}  p={report['prime']}"]
    for t in report["tasks"]:
        lines.append(f"[{t['status']}] {t['id']} {t['task']} ({t['elapsed']}s)")
        if "error" in t:
            lines.append(f"  error: {t['error']}")
        for row in t["results"]:
            lines.append(_text_row(row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tate-transfer", description="Tate duality and transfer checks over Z_(p).")
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", help="parse and validate an instance file")
    v.add_argument("file")
    r = sub.add_parser("run", help="run the tasks of an instance file")
    r.add_argument("file")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--format", choices=("json", "text"), default="text")
    m = sub.add_parser("verify-matrix-oracle", help="closed-form matrix algebra checks")
    m.add_argument("--dims", nargs=2, type=int, required=True, metavar=("D", "E"))
    m.add_argument("--scalars", nargs=2, required=True, metavar=("LAMBDA", "MU"))
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--prime", type=int, default=None)
    m.add_argument("--format", choices=("json", "text"), default="text")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            inst = parse_and_validate(args.file)
            print(f"valid: p={inst.prime}, {len(inst.algebras)} algebras, {len(inst.lattices)} lattices, "
                  f"{len(inst.bimodules)} bimodules, {len(inst.tasks)} tasks")
            return EXIT_OK
        if args.command == "run":
            inst = parse_and_validate(args.file)
            report = run_instance(inst, args.seed)
        else:
            d, e = args.dims
            if d < 1 or e < 1:
                raise InputError("dimensions must be positive")
            lam, mu = (_scalar(x, "scalars") for x in args.scalars)
            if lam == 0 or mu == 0:
                raise InputError("matrix oracle scalars must be nonzero")
            p = args.prime if args.prime is not None else oracle_prime(d, e, lam, mu)
            arith.check_prime(p)
            if (d * e) % p == 0:
                raise InputError(f"prime {p} divides d*e = {d * e}; the generic comparison needs p to be coprime")
            task = {"id": "oracle", "task": "verify-matrix-oracle", "dims": [d, e], "scalars": args.scalars,
                    "prime": p}
            report = {"tool": "tate-transfer", "version": __version__, "seed": args.seed, "prime": p,
                      "tasks": [run_task(task, None, args.seed)]}
        try:
            sys.stdout.write(emit_report(report, args.format))
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
        return exit_status(report)
    except (InputError, LatticeError, AlgebraError, BimoduleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
