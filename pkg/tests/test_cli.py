import json

import pytest

from ckdvlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 else None), out.err


def test_srindex_surd(capsys):
    code, doc, _ = run(capsys, "srindex", "--r", "4")
    assert code == 0
    assert doc["result"]["rho"] == "3*sqrt(5)" and doc["result"]["s_r"] == "1/2"


def test_srindex_jarnik(capsys):
    code, doc, _ = run(capsys, "srindex", "--jarnik", "5/2")
    assert code == 0 and abs(float(doc["result"]["s_r"]) - 0.75) < 0.05


def test_srindex_out_of_range(capsys):
    code, _, err = run(capsys, "srindex", "--r", "1/8")
    assert code == 3 and "1/4" in err


def test_classify_open_threshold(capsys):
    code, doc, _ = run(capsys, "classify", "--preset", "majda-biello", "--a2", "2", "--space", "2")
    rec = doc["result"]["records"][0]
    assert code == 0 and rec["s_star"] == "1/2" and rec["kind"] == "Open"


def test_classify_from_file(capsys, tmp_path):
    f = tmp_path / "sys.txt"
    f.write_text("[dispersion]\na1 = 1\na2 = 2  # ratio 2\n[B]\n0 0\n0 0\n[C]\n0 -1\n0 0\n[D]\n0 0\n-1 -1\n")
    code, doc, _ = run(capsys, "classify", "--file", str(f), "--space", "2")
    assert code == 0 and doc["result"]["records"][0]["s_star"] == "1/2"


def test_sharpness_negative_values(capsys):
    code, doc, _ = run(capsys, "sharpness", "--case", "div2-a", "--s", "-1/2", "--b", "1/2")
    assert code == 0 and doc["result"]["fails"] is False


def test_sharpness_list(capsys):
    code, doc, _ = run(capsys, "sharpness", "--list")
    assert code == 0 and "lin-fail-hi" in json.dumps(doc)


def test_dioph_sqrt2(capsys):
    code, doc, _ = run(capsys, "dioph", "--x", "sqrt(2)", "--depth", "4", "--mu")
    assert code == 0
    assert doc["result"]["terms"] == [1, 2, 2, 2, 2]


def test_resonance_with_csv(capsys, tmp_path):
    code, doc, _ = run(capsys, "--out", str(tmp_path), "resonance", "--r", "1/8", "--K", "10",
                       "--delta", "1/2", "--csv-limit", "5")
    assert code == 0 and doc["result"]["significance"]["pass"] is True
    assert (tmp_path / "result.json").exists()
    csvs = list(tmp_path.glob("*.csv"))
    assert csvs and csvs[0].read_text().startswith("k1,k2,k3,H,ratio")


def test_simulate_run_writes_ledger(capsys, tmp_path):
    code, doc, _ = run(capsys, "--out", str(tmp_path), "simulate", "--preset", "majda-biello",
                       "--T", "0.1", "--N", "32", "--dt", "1e-3")
    assert code == 0
    assert (tmp_path / "ledger.csv").exists()


def test_config_defaults_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "majda-biello", "a2": 2, "space": [2]}))
    code, doc, _ = run(capsys, "--config", str(cfg), "classify")
    assert code == 0 and doc["result"]["records"][0]["s_star"] == "1/2"
    code, doc, _ = run(capsys, "--config", str(cfg), "classify", "--a2", "4")
    assert doc["result"]["records"][0]["s_star"] == "1"


@pytest.mark.parametrize("argv,code", [
    (["classify", "--preset", "nope"], 3),
    (["srindex", "--r", "banana"], 2),
    (["frobnicate"], 2),
])
def test_exit_codes(capsys, argv, code):
    assert main(argv) == code
