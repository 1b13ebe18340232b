import json
import subprocess
import sys

import pytest

from patterned_rmt import __version__
from patterned_rmt.cli import main, resolve


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_pattern_check(capsys):
    out = run_json(capsys, "pattern-check", "--pattern", "lower-triangular", "--size", "4",
                   "--samples", "10000")
    entry = out["patterns"][0]
    assert entry["active_cells"] == 10
    assert abs(entry["area"]["value"] - 0.5) <= 3 * entry["area"]["stderr"]
    assert out["config"]["command"] == "pattern-check"


def test_paths(capsys):
    out = run_json(capsys, "paths", "--word", "aAaA", "--colors", "3", "--dump")
    assert out["shapes"] == 2
    assert out["shape_paths"] == ["1,2,1,3,1", "1,2,3,2,1"]
    assert out["constraint_paths"] == 12
    assert out["star_balance"] == {"a": [2, 2]}


def test_theory_mc_and_grid(capsys):
    out = run_json(capsys, "theory", "--pattern", "lower-triangular", "--word", "aAaA",
                   "--samples", "5000")
    assert out["value"] == pytest.approx(2 / 3) and out["method"] == "mc"
    out = run_json(capsys, "theory", "--pattern", "full", "--word", "aA", "--grid", "8")
    assert out["value"] == pytest.approx(0.875) and out["method"] == "grid"


def test_theory_per_letter_patterns(capsys):
    out = run_json(capsys, "theory", "--pattern", "lower-triangular", "--pattern", "full",
                   "--word", "aAbB", "--samples", "4096")
    assert out["value"] == pytest.approx(0.5)


def test_simulate_odd_word(capsys):
    out = run_json(capsys, "simulate", "--word", "aAa", "--pattern", "three-discs",
                   "--size", "200", "--trials", "10")
    assert abs(out["value"]) <= 3 * out["stderr"]
    assert out["samples"] == 10


def test_oracle(capsys):
    out = run_json(capsys, "oracle", "--pattern", "full", "--word", "aA", "--size", "5",
                   "--dist", "rademacher")
    assert out["value"] == pytest.approx(1.0) and out["method"] == "oracle"


def test_compare_reports_z(capsys):
    out = run_json(capsys, "compare", "--pattern", "lower-triangular", "--word", "aAaA",
                   "--size", "300", "--trials", "10", "--samples", "10000", "--seed", "7")
    assert out["theory"]["value"] == pytest.approx(2 / 3)
    spread = (out["theory"]["stderr"] ** 2 + out["empirical"]["stderr"] ** 2) ** 0.5
    assert out["z"] == pytest.approx(out["difference"] / spread)


def test_spectrum_writes_csv(capsys, tmp_path):
    target = tmp_path / "eig.csv"
    out = run_json(capsys, "spectrum", "--pattern", "three-discs", "--size", "50",
                   "--out", str(target))
    rows = target.read_text().splitlines()
    assert rows[0] == "re,im" and len(rows) == 51
    assert out["eigenvalues"] == 50


def test_freeness_csv(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"factors": [
        {"group": 1, "pattern": "lower-triangular", "word": "aA", "center": 0.5},
        {"group": 2, "pattern": "full", "word": "bB", "center": 1.0}]}))
    code, out, err = run(capsys, "freeness", "--spec", str(spec), "--sizes", "20,40",
                         "--trials", "3")
    assert code == 0, err
    lines = out.splitlines()
    assert lines[0].startswith("# ")
    assert json.loads(lines[0][2:])["config"]["sizes"] == [20, 40]
    assert lines[1] == "N,estimate,stderr"
    assert [l.split(",")[0] for l in lines[2:]] == ["20", "40"]


def test_identical_config_gives_identical_bytes(tmp_path, capsys):
    target = tmp_path / "run.json"
    argv = ["simulate", "--pattern", "three-discs", "--word", "aAaA", "--size", "30",
            "--trials", "5", "--seed", "4", "--out", str(target)]
    assert main(argv) == 0
    first = target.read_bytes()
    assert main(argv) == 0
    assert target.read_bytes() == first


def test_config_file_merges_under_flags(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "trials": 8, "word-cap": 10}))
    monkeypatch.setenv("PATTERNED_RMT_THREADS", "2")
    config = resolve(["simulate", "--config", str(cfg), "--trials", "3"])
    assert (config["seed"], config["trials"], config["word_cap"], config["threads"]) == (5, 3, 10, 2)
    assert config["dist"] == "gaussian-real" and config["format"] == "json"


def test_threads_do_not_change_output(capsys):
    argv = ["theory", "--pattern", "three-discs", "--word", "aAaA", "--samples", "20000"]
    one = run_json(capsys, *argv, "--threads", "1")
    three = run_json(capsys, *argv, "--threads", "3")
    assert one["value"] == three["value"] and one["stderr"] == three["stderr"]


@pytest.mark.parametrize("argv, code", [
    (["theory", "--pattern", "full", "--word", "a1"], 1),
    (["theory", "--pattern", "nowhere", "--word", "aA"], 1),
    (["simulate", "--pattern", "full", "--word", "aA"], 1),
    (["theory", "--bogus"], 1),
    (["theory", "--pattern", "full", "--word", "aA" * 7], 2),
    (["oracle", "--pattern", "full", "--word", "aAaAaA", "--size", "30"], 2),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"colour": 1}')
    assert run(capsys, "paths", "--word", "aA", "--config", str(cfg))[0] == 1


def test_numerical_failure_exit_code(capsys, monkeypatch, tmp_path):
    import numpy as np
    from patterned_rmt import cli

    monkeypatch.setattr(cli, "spectrum", lambda *a, **k: np.array([np.nan]))
    assert run(capsys, "spectrum", "--pattern", "full", "--size", "3",
               "--out", str(tmp_path / "x.csv"))[0] == 3


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "patterned_rmt", "--version"],
                          capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout.strip() == __version__
