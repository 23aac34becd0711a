import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from qdh.cli import ScenarioError, main, parse_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def scenario_file(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_verify_passes(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--scenario", str(SCENARIOS / "fiveparty_verify.json"), "--out", str(tmp_path))
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == "report-v1"
    hiding = next(c for c in report["result"]["checks"] if c["name"] == "hiding")
    assert hiding["passed"] and hiding["max_trace_distance"] <= 1e-12
    names = {c["name"] for c in report["result"]["checks"]}
    assert {"burn", "upb_orthogonality", "upb_unextendible", "reveal_instrument", "burn_instrument"} <= names
    assert (tmp_path / "report.json").read_text() == out


def test_verify_corrupted_fixture_fails(capsys):
    code, out, _ = run(capsys, "verify", "--scenario", str(SCENARIOS / "corrupted_verify.json"))
    assert code == 1
    assert "hiding" in json.loads(out)["result"]["failed"]


def test_theta_zero_is_usage_error(capsys):
    code, out, err = run(capsys, "verify", "--scenario", str(SCENARIOS / "fiveparty_verify.json"), "--theta", "0")
    assert code == 2 and out == ""
    assert "collides with the computational basis" in err


def test_unknown_field_rejected(capsys, tmp_path):
    path = scenario_file(tmp_path, {"scheme": {"name": "fiveparty-v1"}, "colour": 1})
    code, _, err = run(capsys, "verify", "--scenario", path)
    assert code == 2 and "colour" in err
    path = scenario_file(tmp_path, {"scheme": {"name": "fiveparty-v1", "size": 3}})
    code, _, err = run(capsys, "verify", "--scenario", path)
    assert code == 2 and "scheme" in err and "size" in err


def test_json_error_reports_position(tmp_path):
    with pytest.raises(ScenarioError, match="line 2 column"):
        parse_scenario('{"scheme":\n  {"name": }}')


def test_missing_seed_is_usage_error(capsys, tmp_path):
    path = scenario_file(tmp_path, {"scheme": {"name": "fiveparty-v1"}, "stage": "reveal", "trials": 10})
    code, _, err = run(capsys, "simulate", "--scenario", path)
    assert code == 2 and "seed" in err
    code, _, _ = run(capsys, "simulate", "--scenario", path, "--seed", "5")
    assert code == 0


def test_bad_arguments_exit_2(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["verify"]) == 2
    capsys.readouterr()


def test_seed_range(capsys, tmp_path):
    path = scenario_file(tmp_path, {"scheme": {"name": "fiveparty-v1"}, "rng_seed": -1})
    code, _, err = run(capsys, "verify", "--scenario", path)
    assert code == 2 and "rng_seed" in err


def test_simulate_reveal(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", str(SCENARIOS / "fiveparty_reveal.json"))
    res = json.loads(out)["result"]
    assert code == 0 and res["decode_accuracy"] == 1.0 and res["trials"] == 10000
    for row in res["sender_outcomes"]:
        assert abs(row["frequency"] - 0.5) <= 0.015


def test_simulate_burn(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", str(SCENARIOS / "fiveparty_burn.json"))
    res = json.loads(out)["result"]
    assert code == 0 and abs(res["decode_accuracy"] - 0.5) <= 0.015
    assert [r["outcome"] for r in res["sender_outcomes"]] == ["+", "-"]


def test_simulate_blocks(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", str(SCENARIOS / "fiveparty_blocks.json"))
    res = json.loads(out)["result"]
    assert res["n_blocks"] == 8 and res["all_blocks_correct_fraction"] == 1.0


def test_overrides(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", str(SCENARIOS / "fiveparty_reveal.json"),
                       "--trials", "50", "--blocks", "2", "--seed", "3", "--theta", "0.4")
    doc = json.loads(out)
    assert doc["scenario"]["trials"] == 50 and doc["scenario"]["rng_seed"] == 3
    assert doc["scenario"]["scheme"]["theta"] == 0.4 and doc["result"]["n_blocks"] == 2


def test_attack_global_hide(capsys):
    code, out, _ = run(capsys, "attack", "--scenario", str(SCENARIOS / "attack_global_hide.json"))
    res = json.loads(out)["result"]
    assert code == 0
    assert res["exact"]["mutual_info_bits"] <= 1e-10
    assert abs(res["helstrom"] - 0.5) <= 1e-10
    assert "sampled" in res


def test_attack_local_bell_writes_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "attack", "--scenario", str(SCENARIOS / "attack_local_bell.json"), "--out", str(tmp_path))
    res = json.loads(out)["result"]
    assert code == 0
    delta = res["optimizer"]["delta"]
    rows = list(csv.DictReader((tmp_path / "bell_amplification.csv").open()))
    assert len(rows) == 20
    for row in rows:
        assert math.isclose(float(row["amplified_delta"]), delta ** int(row["n"]), rel_tol=1e-12, abs_tol=1e-15)
    assert (tmp_path / "bell_attack.json").exists()


def test_attack_authorized_reveal(capsys):
    code, out, _ = run(capsys, "attack", "--scenario", str(SCENARIOS / "attack_authorized_reveal.json"))
    res = json.loads(out)["result"]
    assert abs(res["exact"]["mutual_info_bits"] - 1) <= 1e-10
    assert res["sampled"]["channel"]["matrix"] == [[1.0, 0.0], [0.0, 1.0]]


def test_attack_unknown_kind(capsys, tmp_path):
    path = scenario_file(tmp_path, {"scheme": {"name": "fiveparty-v1"}, "attack": {"kind": "x"}, "rng_seed": 1})
    code, _, err = run(capsys, "attack", "--scenario", path)
    assert code == 2 and "attack.kind" in err


def test_reports_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        subprocess.run([sys.executable, "-m", "qdh.cli", "simulate", "--scenario",
                        str(SCENARIOS / "fiveparty_reveal.json"), "--trials", "300", "--out", str(d)], check=True,
                       capture_output=True)
        outs.append((d / "reveal_report.json").read_bytes())
    assert outs[0] == outs[1]
