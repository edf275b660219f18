import csv
import json

import pytest

from qchan.cli import main, manifest_hash, resolve_seed


def run_json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_coeff_depolarizing_closed_forms(capsys):
    out = run_json(capsys, ["coeff", "--n", "depol:d=2,p=0.5", "--m", "depol:d=2,p=0.25",
                            "--which", "both", "--restarts", "0"])
    exact = {c["coefficient"]: c["value"] for c in out["closed_forms"] if c["kind"] == "exact-closed-form"}
    assert exact["contraction"] == pytest.approx(4 / 9)
    assert exact["expansion"] == pytest.approx(0.25926, abs=1e-5)
    assert out["numerical"] == []


def test_coeff_reciprocal_depolarizing(capsys):
    out = run_json(capsys, ["coeff", "--n", "depol:d=2,p=0.25", "--m", "depol:d=2,p=0.5",
                            "--which", "expansion", "--restarts", "0"])
    assert out["closed_forms"][0]["value"] == pytest.approx(9 / 4)


def test_coeff_amplitude_damping_expansion(capsys):
    out = run_json(capsys, ["coeff", "--n", "amp:gamma=0.5", "--m", "amp:gamma=0.25",
                            "--which", "expansion", "--restarts", "4", "--max-iters", "400",
                            "--seed", "7"])
    conj = out["closed_forms"][0]
    assert conj["kind"] == "conjectured-closed-form"
    assert conj["value"] == pytest.approx(1 / 3)
    num = out["numerical"][0]
    assert num["kind"] == "numerical" and len(num["meta"]["restart_values"]) == 4


def test_coeff_against_identity_reports_nogo(capsys):
    out = run_json(capsys, ["coeff", "--n", "amp:gamma=0.3", "--m", "id:d=2",
                            "--which", "expansion", "--restarts", "3", "--max-iters", "400"])
    ratios = out["nogo"]["ratios"]
    assert ratios[-1] < 1e-3
    assert out["numerical"][0]["value"] < 0.5


def test_coeff_dephasing_bound(capsys):
    out = run_json(capsys, ["coeff", "--n", "deph:p=0.5", "--m", "deph:p=0.4",
                            "--which", "expansion", "--eps", "0.25", "--restarts", "0"])
    assert out["closed_forms"][0]["lo"] == pytest.approx(0.2)


def test_coeff_dephasing_assumption_failure(capsys):
    code = main(["coeff", "--n", "deph:p=0.5", "--m", "deph:p=0.4", "--which", "expansion",
                 "--eps", "0.5", "--restarts", "0"])
    assert code == 3
    assert "assumption failed" in capsys.readouterr().err


def test_coeff_bad_spec(capsys):
    assert main(["coeff", "--n", "nonsense:x=1", "--restarts", "0"]) == 2
    assert "error" in capsys.readouterr().err


def test_coeff_output_file_and_manifest(tmp_path):
    out = tmp_path / "c.json"
    argv = ["coeff", "--n", "depol:d=2,p=0.5", "--restarts", "0", "--out", str(out)]
    assert main(argv) == 0
    report = json.loads(out.read_text())
    side = json.loads((tmp_path / "c.json.manifest.json").read_text())
    assert side["manifest_hash"] == report["manifest_hash"]
    assert "wall_clock" in side and len(side["output_sha256"]) == 64
    assert main(argv) == 0
    assert json.loads(out.read_text()) == report


def test_region_grid_rows(tmp_path):
    out = tmp_path / "region.csv"
    assert main(["region", "--grid", "50", "--p", "0.6,0.75,0.9", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2500 * 3
    assert (tmp_path / "region.csv.manifest.json").exists()


def test_region_example_point(capsys):
    assert main(["region", "--points", "0.75,0.2,0.81", "--ensembles", "20"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert rows[0]["degradable"] == "false"
    assert rows[0]["proven_less_noisy"] == "true"
    assert float(rows[0]["p_min"]) == pytest.approx(0.68066, abs=1e-4)
    assert float(rows[0]["holevo_margin_min"]) >= -1e-9


def test_region_explicit_gammas_contains_example(capsys):
    assert main(["region", "--gammas", "0.2,0.81", "--p", "0.75"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    hit = [r for r in rows if r["gamma1"] == "0.2" and r["gamma2"] == "0.81"]
    assert hit and hit[0]["proven_less_noisy"] == "true"


def test_region_fig2(tmp_path):
    out = tmp_path / "fig2.csv"
    assert main(["region", "--fig", "2", "--grid", "40", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1600
    assert set(rows[0]) == {"gamma1", "gamma2", "conjectured"}


def test_region_json(capsys):
    out = run_json(capsys, ["region", "--grid", "3", "--p", "0.75", "--format", "json"])
    assert len(out["rows"]) == 9
    assert out["metadata"]["p_min"].startswith("conditional")


def test_region_bad_list(capsys):
    assert main(["region", "--grid", "3", "--p", "0.7,abc"]) == 2


def test_verify_dpi(capsys):
    assert main(["verify", "--suite", "dpi", "--trials", "50", "--seed", "1"]) == 0
    text = capsys.readouterr().out
    assert "[PASS] dpi/relative-entropy" in text


def test_verify_integral(capsys):
    assert main(["verify", "--suite", "integral", "--trials", "10"]) == 0


def test_nogo_command(capsys):
    out = run_json(capsys, ["nogo", "--channel", "depol:d=2,p=0.5"])
    assert out["ratios"][-1] < 1e-3
    out = run_json(capsys, ["nogo", "--channel", "id:d=2", "--eps", "0.1,0.01"])
    assert out["purity_preserving"] and out["eta_check"] == 1.0


def test_bkm_command(capsys, tmp_path):
    out = run_json(capsys, ["bkm", "--w", "0,0,0", "--y", "1,0,0"])
    assert out["closed_form"] == pytest.approx(4)
    assert out["spectral"] == pytest.approx(4)
    state = tmp_path / "s.json"
    x = tmp_path / "x.json"
    state.write_text(json.dumps([[[0.5, 0], [0, 0], [0, 0], [0.5, 0]]]))
    x.write_text(json.dumps([[[0, 0], [1, 0], [1, 0], [0, 0]]]))
    out = run_json(capsys, ["bkm", "--state", str(state), "--x", str(x)])
    assert out["spectral"] == pytest.approx(4)
    assert main(["bkm", "--w", "0,0,0"]) == 2


def test_bkm_infinite_is_string(capsys):
    out = run_json(capsys, ["bkm", "--w", "0,0,1", "--y", "1,0,0"])
    assert out["closed_form"] == "inf"


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv("QCHAN_SEED", raising=False)
    assert resolve_seed(None) == 0
    monkeypatch.setenv("QCHAN_SEED", "17")
    assert resolve_seed(None) == 17
    assert resolve_seed(3) == 3


def test_manifest_hash_is_stable():
    a = manifest_hash(["qchan", "coeff"], 1, {"x": 1})
    assert a == manifest_hash(["qchan", "coeff"], 1, {"x": 1})
    assert a != manifest_hash(["qchan", "coeff"], 2, {"x": 1})
