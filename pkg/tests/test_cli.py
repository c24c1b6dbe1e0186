import json
from importlib import resources

import pytest

from pcfkit.cli import main

FIX = resources.files("pcfkit").joinpath("fixtures")


def fx(name: str) -> str:
    return str(FIX.joinpath(name))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    doc = json.loads(out)
    assert doc["schema"] == "tk/1"
    # keys are emitted sorted
    assert list(doc) == sorted(doc)
    return code, doc


def test_validate(capsys):
    code, doc = run(capsys, "validate", fx("z2_plus_i.json"))
    assert code == 0 and doc["valid"]


def test_validate_manifest(capsys):
    code, doc = run(capsys, "validate", fx("levy-pair.json"))
    assert code == 0 and doc["degree"] == 2 and len(doc["punctures"]) == 5


def test_corrupted_perm_is_domain_failure(capsys, tmp_path):
    d = json.loads(open(fx("basilica.json")).read())
    d["generators"][0]["perm"] = [1, 1]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    code, doc = run(capsys, "validate", str(p))
    assert code == 1 and "error" in doc


def test_unreadable_file_exits_two(capsys, tmp_path):
    code, doc = run(capsys, "orbifold", str(tmp_path / "missing.json"))
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, doc = run(capsys, "orbifold", str(bad))
    assert code == 2


def test_orbifold(capsys):
    code, doc = run(capsys, "orbifold", fx("z2_plus_i.json"))
    assert code == 0
    assert doc["signature"] == [2, 2, 2, "inf"] and doc["chi"] == "-1/2"


def test_pullback_curve(capsys):
    code, doc = run(capsys, "pull-back-curve", fx("z2_plus_i.json"), "x1x2")
    assert code == 0 and doc["degree_sum"] == 2


def test_bad_word_exits_two(capsys):
    code, _ = run(capsys, "pull-back-curve", fx("z2_plus_i.json"), "x1y")
    assert code == 2


def test_matrix_and_indent(capsys):
    code = main(["--json-indent", "2", "matrix", fx("levy-pair.json"), "--curves", fx("levy-pair.curves.json")])
    out = capsys.readouterr().out
    assert code == 0 and out.startswith("{\n  ")
    doc = json.loads(out)
    assert doc["entries"] == [["1"]] and doc["lambda"] == {"hi": "1", "lo": "1"}


def test_obstruction(capsys):
    code, doc = run(capsys, "obstruction", fx("levy-pair.json"))
    assert code == 0 and doc["result"] == "Found" and doc["verdict"] == "Obstruction"
    code, doc = run(capsys, "obstruction", fx("z2_plus_i.json"), "--max-iter", "10")
    assert doc["result"] == "NoneFoundWithinBudget"
    code, doc = run(capsys, "obstruction", fx("z2_plus_i.json"), "--max-classes", "0")
    assert doc["result"] == "Exceeded"


def test_decompose_and_combine_files(capsys, tmp_path):
    out = tmp_path / "manifest.json"
    code, doc = run(
        capsys, "decompose", fx("levy-pair.json"), fx("levy-pair.curves.json"), "--out", str(out)
    )
    # without a tree the curves are named g1, g2, ...
    assert code == 0 and set(doc["manifest"]["pieces"]) == {"root", "g1"}
    rec = tmp_path / "rec.json"
    code, doc = run(capsys, "combine", str(out), "--out", str(rec))
    assert code == 0 and doc["recursion"]["degree"] == 2
    code, doc = run(capsys, "orbifold", str(rec))
    assert code == 0 and doc["hyperbolic"]


def test_decompose_with_tree(capsys):
    code, doc = run(
        capsys, "decompose", fx("nested-levy.json"), fx("nested-levy.curves.json"), fx("nested-levy.tree.json")
    )
    assert code == 0 and set(doc["manifest"]["pieces"]) == {"root", "g", "h"}


def test_combine_bad_pairing_is_domain_failure(capsys, tmp_path):
    d = json.loads(open(fx("levy-pair.json")).read())
    d["pairing"] = []
    p = tmp_path / "m.json"
    p.write_text(json.dumps(d))
    code, _ = run(capsys, "combine", str(p))
    assert code == 1


def test_iterate_spider(capsys, tmp_path):
    csv_path = tmp_path / "run.csv"
    code, doc = run(capsys, "iterate", "--angle", "1/6", "--csv", str(csv_path))
    assert code == 0 and doc["status"] == "Converged"
    assert abs(complex(*doc["c"]) - 1j) < 1e-6
    assert csv_path.read_text().startswith("iteration,")


def test_iterate_mating_needs_flag(capsys):
    code, _ = run(capsys, "iterate", "--manifest", fx("mating_basilica.json"))
    assert code == 1
    code, doc = run(capsys, "iterate", "--manifest", fx("mating_basilica.json"), "--mating", "1/3,1/3")
    assert code == 0 and doc["status"] == "Degenerate" and doc["shrinking"]


def test_iterate_zero_steps(capsys):
    code, doc = run(capsys, "iterate", "--angle", "1/6", "--steps", "0")
    assert doc["status"] == "Indeterminate"


@pytest.mark.parametrize("argv", [[], ["nonsense"], ["orbifold"]])
def test_usage_errors_exit_two(argv, capsys):
    assert main(argv) == 2
