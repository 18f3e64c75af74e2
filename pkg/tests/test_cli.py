import json
from pathlib import Path

import pytest

from tate_transfer import cli

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, obj, name="inst.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def strip_timing(report):
    for t in report["tasks"]:
        t.pop("elapsed", None)
    return report


def no_floats(x):
    if isinstance(x, float):
        return False
    if isinstance(x, dict):
        return all(no_floats(v) for v in x.values())
    if isinstance(x, list):
        return all(no_floats(v) for v in x)
    return True


def test_validate_samples(capsys):
    assert run(capsys, "validate", SAMPLES / "c2_over_1.json")[0] == 0
    assert run(capsys, "validate", SAMPLES / "s3_over_c3.json")[0] == 0


def test_validate_rejects_composite_prime(capsys):
    code, _, err = run(capsys, "validate", SAMPLES / "bad_prime.json")
    assert code == 2 and "prime required" in err


def test_validate_names_nonassociative_triple(capsys):
    code, _, err = run(capsys, "validate", SAMPLES / "nonassociative.json")
    assert code == 2 and "associativity fails at (1,1,1)" in err


def test_missing_file_and_bad_json(capsys, tmp_path):
    assert run(capsys, "validate", tmp_path / "nope.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    code, _, err = run(capsys, "validate", bad)
    assert code == 2 and "invalid JSON" in err


def test_run_requires_seed(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", str(SAMPLES / "c2_over_1.json")])
    assert exc.value.code == 2


def test_run_c2_json_deterministic(capsys):
    code, out, _ = run(capsys, "run", SAMPLES / "c2_over_1.json", "--seed", 11, "--format", "json")
    assert code == 0
    rep = json.loads(out)
    code2, out2, _ = run(capsys, "run", SAMPLES / "c2_over_1.json", "--seed", 11, "--format", "json")
    assert strip_timing(rep) == strip_timing(json.loads(out2))
    assert no_floats(rep)
    assert [t["id"] for t in rep["tasks"]] == sorted(t["id"] for t in rep["tasks"])
    ext = next(t for t in rep["tasks"] if t["task"] == "tate-ext")
    assert {r["degree"]: r["group"] for r in ext["results"]}[0] == "Z/2"
    assert {r["degree"]: r["group"] for r in ext["results"]}[1] == "0"
    assert list(rep) == ["tool", "version", "seed", "prime", "tasks"]


def test_run_text_format(capsys):
    code, out, _ = run(capsys, "run", SAMPLES / "matrix_oracle.json", "--seed", 1)
    assert code == 0 and "[pass] oracle verify-matrix-oracle" in out


def test_empty_task_list(capsys, tmp_path):
    path = write(tmp_path, {"prime": 2, "algebras": {"C2": {"group": [[0, 1], [1, 0]]}}, "tasks": []})
    code, out, _ = run(capsys, "run", path, "--seed", 0, "--format", "json")
    assert code == 0 and json.loads(out)["tasks"] == []


def test_unknown_task(capsys, tmp_path):
    path = write(tmp_path, {"prime": 2, "tasks": [{"task": "frobnicate"}]})
    code, _, err = run(capsys, "validate", path)
    assert code == 2 and "unknown task" in err


def test_violation_exit_code(capsys, tmp_path, monkeypatch):
    monkeypatch.setitem(cli.RUNNERS, "hh", lambda inst, task, rng: {"results": [{"passed": False}]})
    path = write(tmp_path, {"prime": 2, "algebras": {"C2": {"group": [[0, 1], [1, 0]]}},
                            "tasks": [{"id": "x", "task": "hh", "algebra": "C2"}]})
    code, out, _ = run(capsys, "run", path, "--seed", 0)
    assert code == 1 and "[fail] x hh" in out


def test_structure_constant_algebra_needs_form(capsys, tmp_path):
    path = write(tmp_path, {"prime": 3, "algebras": {"X": {"structure_constants": [[[1]]], "unit": [1]}}})
    code, _, err = run(capsys, "validate", path)
    assert code == 2 and "form" in err
    path = write(tmp_path, {"prime": 3, "algebras": {"X": {"structure_constants": [[[1]]], "unit": [1]}},
                            "forms": {"X": ["1"]}})
    assert run(capsys, "validate", path)[0] == 0


def test_bad_lattice_action(capsys, tmp_path):
    path = write(tmp_path, {"prime": 2, "algebras": {"C2": {"group": [[0, 1], [1, 0]]}},
                            "lattices": {"bad": {"algebra": "C2", "rank": 1, "actions": [[["1"]], [["2"]]]}}})
    code, _, err = run(capsys, "validate", path)
    assert code == 2 and "lattices.bad" in err


def test_float_scalars_rejected(capsys, tmp_path):
    path = write(tmp_path, {"prime": 2, "algebras": {"C2": {"group": [[0, 1], [1, 0]]}},
                            "lattices": {"x": {"algebra": "C2", "rank": 1, "actions": [[[1.0]], [[1]]]}}})
    code, _, err = run(capsys, "validate", path)
    assert code == 2 and "integers or strings" in err


def test_explicit_bimodule(capsys, tmp_path):
    # O[C2] as a bimodule over itself, given by its left and right regular actions
    reg = [[["1", "0"], ["0", "1"]], [["0", "1"], ["1", "0"]]]
    path = write(tmp_path, {
        "prime": 2,
        "algebras": {"C2": {"group": [[0, 1], [1, 0]]}},
        "bimodules": {"R": {"left": "C2", "right": "C2", "rank": 2, "left_actions": reg, "right_actions": reg}},
        "lattices": {"triv": {"algebra": "C2", "kind": "trivial"}},
        "tasks": [{"id": "t", "task": "verify-thm1", "bimodule": "R", "U": "triv", "V": "triv",
                   "degrees": [0, 1], "trials": 3}]})
    code, out, _ = run(capsys, "run", path, "--seed", 5, "--format", "json")
    assert code == 0
    assert all(r["passed"] for r in json.loads(out)["tasks"][0]["results"])


def test_non_unit_rescaling_rejected(capsys, tmp_path):
    path = write(tmp_path, {
        "prime": 2, "algebras": {"C2": {"group": [[0, 1], [1, 0]]}},
        "bimodules": {"M": {"induction": {"group": "C2", "subgroup": []}}},
        "lattices": {"triv": {"algebra": "C2", "kind": "trivial"}},
        "tasks": [{"id": "t", "task": "verify-thm1", "bimodule": "M", "U": "triv", "V": "triv",
                   "rescale": [["2", "1"]]}]})
    code, _, err = run(capsys, "run", path, "--seed", 0)
    assert code == 2 and "units" in err


def test_matrix_oracle_command(capsys):
    code, out, _ = run(capsys, "verify-matrix-oracle", "--dims", 2, 3, "--scalars", "2", "1/3", "--seed", 4,
                       "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["prime"] == 5 and no_floats(rep)
    code, _, err = run(capsys, "verify-matrix-oracle", "--dims", 2, 3, "--scalars", 0, 1, "--seed", 4)
    assert code == 2 and "nonzero" in err
    code, _, err = run(capsys, "verify-matrix-oracle", "--dims", 2, 3, "--scalars", 1, 1, "--seed", 4,
                       "--prime", 3)
    assert code == 2 and "divides" in err


def test_tower_depth_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("TATE_TOWER_DEPTH", "1")
    path = write(tmp_path, {"prime": 2, "algebras": {"C2": {"group": [[0, 1], [1, 0]]}},
                            "lattices": {"triv": {"algebra": "C2", "kind": "trivial"}},
                            "tasks": [{"id": "e", "task": "tate-ext", "U": "triv", "V": "triv", "degrees": [3]}]})
    code, out, _ = run(capsys, "run", path, "--seed", 0)
    assert code == 2 and "depth cap" in out
