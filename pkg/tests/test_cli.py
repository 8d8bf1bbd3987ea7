import json
from pathlib import Path

import pytest

from setasp.cli import main

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


GOLDEN_RUNS = [
    ("p1.solve.txt", ["solve", "p1.lp", "--min-int", "1", "--max-int", "2", "--show-sigma"]),
    ("p2.solve.txt", ["solve", "p2.lp", "--mode", "both", "--max-int", "3"]),
    ("p3.solve.txt", ["solve", "p3.lp", "--max-int", "6"]),
    ("p4.solve.txt", ["solve", "p4.lp", "--mode", "both", "--max-int", "3"]),
    ("count0.solve.txt", ["solve", "count0.lp", "--mode", "both", "--max-int", "3"]),
]


@pytest.mark.parametrize("golden,argv", GOLDEN_RUNS)
def test_documented_runs_match_their_golden_output(capsys, golden, argv):
    argv = [str(PROGRAMS / a) if a.endswith(".lp") else a for a in argv]
    code, out, err = run(capsys, *argv)
    assert code == 0
    assert out == (PROGRAMS / "expected" / golden).read_text()


def test_output_is_deterministic(capsys):
    argv = ["solve", str(PROGRAMS / "p1.lp"), "--min-int", "1", "--max-int", "2", "--show-sigma"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_sigma_witness_lines(capsys):
    code, out, _ = run(
        capsys,
        "solve",
        str(PROGRAMS / "p1.lp"),
        "--min-int",
        "1",
        "--max-int",
        "2",
        "--show-sigma",
    )
    assert code == 0
    assert "sigma({X : r(X)}) = {1; 2}" in out
    assert "sigma({X : q(X)}) = {1}" in out


def test_json_mode_tags_sets(capsys):
    code, out, _ = run(
        capsys,
        "solve",
        str(PROGRAMS / "p1.lp"),
        "--min-int",
        "1",
        "--max-int",
        "2",
        "--json",
    )
    assert code == 0
    payload = json.loads(out)
    (model,) = payload["equilibrium"]["models"]
    atoms = model["atoms"]
    p_atom = next(a for a in atoms if a["pred"] == "p")
    assert p_atom["args"] == [{"set": [[1]]}]


def test_ground_command_prints_instances(capsys):
    code, out, _ = run(capsys, "ground", str(PROGRAMS / "p3.lp"), "--max-int", "5")
    assert code == 0
    assert "q(5) :- sum{X : p(X)} = 5." in out


def test_cross_check_on_file(capsys):
    code, out, _ = run(capsys, "cross-check", str(PROGRAMS / "p4.lp"), "--max-int", "3")
    assert code == 0
    assert "AGREE" in out


def test_cross_check_trials_json(capsys):
    code, out, _ = run(capsys, "cross-check", "--trials", "20", "--seed", "7", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["trials"] == 20
    assert payload["agreements"] == 20
    assert payload["disagreements"] == []


def test_transform_command(capsys):
    code, out, _ = run(capsys, "transform", str(PROGRAMS / "p2.lp"), "--position", "0")
    assert code == 0
    assert "exists V0 (V0 = count{X : p(X)}, V0 >= 1)" in out


def test_check_props_single_suite(capsys):
    code, out, _ = run(capsys, "check-props", "--suite", "collapse", "--trials", "30")
    assert code == 0
    assert "PASS" in out


def test_parse_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.lp"
    bad.write_text("p(a")
    code, out, err = run(capsys, "solve", str(bad))
    assert code == 2
    assert "error:" in err


def test_missing_file_exits_2(capsys):
    code, out, err = run(capsys, "solve", "no-such-file.lp")
    assert code == 2


def test_gz_mode_rejects_non_gz_theory(capsys):
    code, out, err = run(
        capsys, "solve", str(PROGRAMS / "p1.lp"), "--mode", "gz", "--min-int", "1", "--max-int", "2"
    )
    assert code == 2
    assert "set name" in err
