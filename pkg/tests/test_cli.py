import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from hm2rbm import cli


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return path


def full_model(v, seed=0):
    rng = np.random.default_rng(seed)
    inter = []
    for s in range(1, 1 << v):
        inter.append({"set": [i for i in range(v) if s >> i & 1],
                      "weight": float(rng.uniform(-3, 3))})
    return {"v": v, "interactions": inter}


def test_bounds_rows(capsys):
    code, out, _ = run(capsys, "bounds", 6)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    got = {int(r["v"]): r for r in rows if r["k"] == r["v"]}
    for v, (u, prev, low) in {4: (6, 7, 3), 5: (12, 15, 5), 6: (21, 31, 9)}.items():
        r = got[v]
        assert (int(r["u_bound"]), int(r["prev_bound"]), int(r["param_lower_bound"])) == (u, prev, low)


def test_bounds_v2_and_out_file(capsys, tmp_path):
    out_path = tmp_path / "t.csv"
    code, _, _ = run(capsys, "bounds", 2, "--out", out_path)
    assert code == 0
    rows = list(csv.DictReader(out_path.open()))
    assert len(rows) == 1
    assert (rows[0]["u_bound"], rows[0]["prev_bound"], rows[0]["param_lower_bound"]) == ("1", "1", "1")


def test_bounds_bad_range(capsys):
    code, _, err = run(capsys, "bounds", 1)
    assert code == 2 and "v_max" in err
    assert run(capsys, "bounds", 41)[0] == 2


def test_synthesize_and_verify(capsys, tmp_path):
    model = write_json(tmp_path / "m.json", full_model(3))
    rbm = tmp_path / "r.json"
    code, out, _ = run(capsys, "synthesize", model, "--out", rbm)
    assert code == 0
    report = json.loads(out)
    assert report["h"] == 3 and report["residual_max"] <= 1e-6
    assert len(report["omega_used"]) == 3
    assert len(json.loads(rbm.read_text())["hidden"]) == 3
    code, out, _ = run(capsys, "verify", model, rbm)
    res = json.loads(out)
    assert code == 0
    assert res["kl"] <= 1e-12 and res["tv"] <= 1e-6 and res["residual_max"] <= 1e-6


def test_synthesize_v4_has_six_units(capsys, tmp_path):
    model = write_json(tmp_path / "m.json", full_model(4, seed=1))
    code, out, _ = run(capsys, "synthesize", model)
    assert code == 0
    assert len(json.loads(out)["hidden"]) == 6


def test_linear_model_zero_units(capsys, tmp_path):
    model = write_json(tmp_path / "m.json", {"v": 2, "interactions": [
        {"set": [0], "weight": 1.0}, {"set": [1], "weight": -2.0}]})
    code, out, _ = run(capsys, "synthesize", model)
    doc = json.loads(out)
    assert code == 0 and doc["hidden"] == [] and doc["visible_bias"] == [1.0, -2.0]


def test_verify_uniform_and_shuffled(capsys, tmp_path):
    model = write_json(tmp_path / "m.json", {"v": 2, "interactions": []})
    rbm = write_json(tmp_path / "r.json", {"v": 2, "visible_bias": [0, 0], "hidden": []})
    code, out, _ = run(capsys, "verify", model, rbm)
    assert code == 0 and json.loads(out)["kl"] == 0.0

    model = write_json(tmp_path / "m3.json", full_model(3, seed=3))
    r1 = tmp_path / "r1.json"
    run(capsys, "synthesize", model, "--out", r1)
    doc = json.loads(r1.read_text())
    doc["hidden"] = doc["hidden"][::-1]
    r2 = write_json(tmp_path / "r2.json", doc)
    kl1 = json.loads(run(capsys, "verify", model, r1)[1])["kl"]
    kl2 = json.loads(run(capsys, "verify", model, r2)[1])["kl"]
    assert kl1 == kl2


def test_verify_v_mismatch(capsys, tmp_path):
    model = write_json(tmp_path / "m.json", {"v": 2, "interactions": []})
    rbm = write_json(tmp_path / "r.json", {"v": 1, "visible_bias": [0], "hidden": []})
    code, _, err = run(capsys, "verify", model, rbm)
    assert code == 2 and "v=" in err


def test_bad_model_files(capsys, tmp_path):
    bad = [
        {"v": 2, "interactions": [{"set": [2], "weight": 1}]},
        {"v": 2, "interactions": [{"set": [0, 0], "weight": 1}]},
        {"v": 2, "interactions": [{"set": [0], "weight": "x"}]},
        {"v": 2},
    ]
    for doc in bad:
        p = write_json(tmp_path / "bad.json", doc)
        assert run(capsys, "synthesize", p)[0] == 2
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert run(capsys, "synthesize", p)[0] == 2
    assert run(capsys, "synthesize", tmp_path / "missing.json")[0] == 2


def test_synthesis_failures_exit_3(capsys, tmp_path):
    model = write_json(tmp_path / "m.json", full_model(3))
    code, _, err = run(capsys, "synthesize", model, "--omega", 10)
    assert code == 3 and "omega" in err
    code, _, err = run(capsys, "synthesize", model, "--tol", 1e-300)
    assert code == 3 and "omega=" in err


def test_duplicates_summed_and_roundtrip(tmp_path):
    doc = {"v": 3, "interactions": [{"set": [1, 0], "weight": 0.25},
                                    {"set": [0, 1], "weight": 0.5},
                                    {"set": [2], "weight": 0.1}]}
    spec = cli.model_from_json(doc)
    assert spec.interactions == ((3, 0.75), (4, 0.1))
    text = cli.dumps(cli.model_to_json(spec))
    again = cli.dumps(cli.model_to_json(cli.model_from_json(json.loads(text))))
    assert text == again
    assert '"interactions"' in text and text.index('"interactions"') < text.index('"v"')
    assert "0.10000000000000001" in text  # %.17g


def test_rbm_roundtrip(capsys, tmp_path):
    model = write_json(tmp_path / "m.json", full_model(3))
    rbm = tmp_path / "r.json"
    run(capsys, "synthesize", model, "--out", rbm)
    text = rbm.read_text()
    params = cli.load_rbm(rbm)
    assert cli.dumps(cli.rbm_to_json(params)) == text


def test_bad_rbm_files(capsys, tmp_path):
    model = write_json(tmp_path / "m.json", {"v": 2, "interactions": []})
    for doc in [{"v": 2, "visible_bias": [0], "hidden": []},
                {"v": 2, "visible_bias": [0, 0], "hidden": [{"w": [1], "c": 0}]},
                {"v": 2, "visible_bias": [0, 0]}]:
        rbm = write_json(tmp_path / "r.json", doc)
        assert run(capsys, "verify", model, rbm)[0] == 2


def test_region_bsize2_all_feasible(capsys):
    code, out, _ = run(capsys, "region", 2, 10000)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 10000
    assert all(r["feasible"] == "1" for r in rows)


def test_region_bsize4_quadrants(capsys):
    _, out, _ = run(capsys, "region", 4, 5000)
    quads = set()
    for r in csv.DictReader(io.StringIO(out)):
        quads.add((float(r["K_B"]) > 0, float(r["K_Bp"]) > 0))
    assert len(quads) == 4


def test_region_bsize1_inequality(capsys):
    _, out, _ = run(capsys, "region", 1, 5000)
    for r in csv.DictReader(io.StringIO(out)):
        kb, kbp = float(r["K_B"]), float(r["K_Bp"])
        assert kbp >= max(0.0, -kb) - 1e-9


def test_region_deterministic_and_range(capsys):
    a = run(capsys, "region", 3, 100, "--seed", 7)[1]
    b = run(capsys, "region", 3, 100, "--seed", 7)[1]
    c = run(capsys, "region", 3, 100)[1]
    assert a == b and a != c
    assert run(capsys, "region", 7, 10)[0] == 2


@pytest.mark.parametrize("v,j,size", [(4, 2, 3), (3, 3, 1), (6, 5, 3)])
def test_cover(capsys, v, j, size):
    code, out, _ = run(capsys, "cover", v, j)
    doc = json.loads(out)
    assert code == 0
    assert doc["size"] == size == len(doc["tuples"])
    assert doc["bound"] >= doc["size"]


def test_cover_range(capsys):
    assert run(capsys, "cover", 15, 3)[0] == 2
    assert run(capsys, "cover", 4, 1)[0] == 2


def test_usage_errors(capsys):
    assert run(capsys, "nope")[0] == 2
    assert run(capsys)[0] == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "hm2rbm", "cover", "4", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["size"] == 3
