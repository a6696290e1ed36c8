import json
from pathlib import Path

import pytest

from martkit.cli import main

REFERENCE_VALUES = ["1/2", "-1/5", "3/10", "4/5", "9/10", "3/2", "3/5",
                 "-1/10", "2/5", "9/10", "13/10", "-1/5", "1/2", "7/10"]


def write_json(path: Path, doc) -> str:
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def walk_scenario(**overrides):
    doc = {
        "name": "walk",
        "mode": "exact",
        "seed": 1,
        "model": {"kind": "fair_walk", "horizon": 2},
        "checks": [
            {"name": "is_martingale", "op": "classify", "assert": "martingale"},
        ],
    }
    doc.update(overrides)
    return doc


def test_passing_scenario_exits_zero(tmp_path, capsys):
    src = write_json(tmp_path / "s.json", walk_scenario())
    code = main(["run", src, "--out-dir", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 0
    assert "[PASS] is_martingale" in out
    assert "walk: 1/1 checks passed" in out


def test_failed_assertion_exits_one_with_a_witness(tmp_path, capsys):
    doc = walk_scenario(model={"kind": "biased_walk", "p_up": "3/4", "horizon": 2})
    src = write_json(tmp_path / "s.json", doc)
    code = main(["run", src, "--out-dir", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 1
    assert "[FAIL] is_martingale" in out


def test_malformed_json_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x",', encoding="utf-8")
    code = main(["run", str(bad), "--out-dir", str(tmp_path / "out")])
    err = capsys.readouterr().err
    assert code == 2
    assert "bad.json:1:" in err


def test_exact_mode_rejects_monte_carlo_ops(tmp_path, capsys):
    doc = walk_scenario(checks=[{"name": "mc", "op": "mc_stats", "trials": 10}])
    src = write_json(tmp_path / "s.json", doc)
    code = main(["run", src, "--out-dir", str(tmp_path / "out")])
    err = capsys.readouterr().err
    assert code == 2
    assert "exact mode rejects Monte Carlo checks" in err


def test_unknown_op_exits_two(tmp_path, capsys):
    doc = walk_scenario(checks=[{"name": "x", "op": "no_such_op"}])
    src = write_json(tmp_path / "s.json", doc)
    assert main(["run", src, "--out-dir", str(tmp_path / "out")]) == 2


def test_duplicate_check_names_exit_two(tmp_path):
    doc = walk_scenario()
    doc["checks"] = doc["checks"] * 2
    src = write_json(tmp_path / "s.json", doc)
    assert main(["run", src, "--out-dir", str(tmp_path / "out")]) == 2


def test_bad_check_name_exits_two(tmp_path):
    doc = walk_scenario()
    doc["checks"][0]["name"] = "has space"
    src = write_json(tmp_path / "s.json", doc)
    assert main(["run", src, "--out-dir", str(tmp_path / "out")]) == 2


def test_unknown_subcommand_exits_two(capsys):
    assert main(["frobnicate"]) == 2


def test_missing_subcommand_exits_two(capsys):
    assert main([]) == 2


def test_run_writes_deterministic_csv(tmp_path):
    src = write_json(tmp_path / "s.json", walk_scenario())
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["run", src, "--out-dir", str(out1)]) == 0
    assert main(["run", src, "--out-dir", str(out2)]) == 0
    names = sorted(p.name for p in out1.glob("*.csv"))
    assert names == ["walk__is_martingale.csv", "walk__summary.csv"]
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    summary = (out1 / "walk__summary.csv").read_text()
    assert summary.splitlines()[0] == "check,op,holds,detail"
    assert "\r" not in summary


def test_crossings_reproduces_the_reference_table(tmp_path, capsys):
    src = write_json(tmp_path / "fig.json", {"mode": "exact", "values": REFERENCE_VALUES})
    code = main(["crossings", "--band", "0,1", "--path", src])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "atom,n,sigma,tau"
    rows = [tuple(l.split(",")) for l in lines[1:-1]]
    assert [(r[2], r[3]) for r in rows] == [
        ("0", "1"), ("5", "7"), ("10", "11"), ("13", "13"), ("13", "13")
    ]
    assert lines[-1] == "upcrossings_before,2"


def test_crossings_band_must_parse(tmp_path, capsys):
    src = write_json(tmp_path / "fig.json", {"mode": "exact", "values": REFERENCE_VALUES})
    assert main(["crossings", "--band", "zero|one", "--path", src]) == 2


def test_bc_meets_its_match_threshold(capsys):
    code = main(["bc", "--model", "independent", "--prob", "0.5", "--horizon", "40",
                 "--trials", "400", "--seed", "5", "--min-match", "0.9"])
    out = capsys.readouterr().out
    assert code == 0
    assert "match_fraction = " in out
    assert "p_horizon_mean = " in out


def test_bc_fails_when_the_threshold_is_unreachable(capsys):
    # constant coins always fire in the tail while a huge cut predicts
    # settling, so agreement collapses to zero
    code = main(["bc", "--model", "independent", "--prob", "0.5",
                 "--horizon", "40", "--trials", "200", "--seed", "5",
                 "--cut", "1000", "--min-match", "0.99"])
    assert code == 1


def test_converge_prints_diagnostic_rows(capsys):
    code = main(["converge", "--model", "fair_walk", "--horizon", "4",
                 "--cutoff", "4", "--bands=-1/2,1/2", "--l1-bound", "2"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "bounded_fraction,,1"
    assert lines[1] == "unbounded_measure,,0"
    assert any(line.startswith("violations a=-1/2 b=1/2,") for line in lines)
    assert any(line.startswith("chain_bound a=-1/2 b=1/2,") and line.endswith(",true")
               for line in lines)


def test_ui_prints_both_curves(capsys):
    code = main(["ui", "--family", "shrinking_spike", "--horizon", "4",
                 "--deltas", "1/4,1/16", "--cs", "0,2,4"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "l1_bound,,1"
    assert "analyst,1/4,1/2" in lines
    assert "analyst,1/16,1/4" in lines
    assert "probabilist,0,1" in lines
    assert "probabilist,4,1/4" in lines


def test_check_requires_exact_scenarios(tmp_path, capsys):
    doc = walk_scenario(mode="float")
    src = write_json(tmp_path / "s.json", doc)
    assert main(["check", src, "--out-dir", str(tmp_path / "out")]) == 2
