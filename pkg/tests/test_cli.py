from __future__ import annotations

import io
import json

from k3cusp import curvestruct as csm
from k3cusp.cli import main
from k3cusp.model import build_named_model, model_from_json, model_to_json


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def test_verify():
    code, text = run(["verify"])
    assert code == 0
    assert text.rstrip().endswith("93 = 81 + 12; 31; 17 = 14 + 3")


def test_classify_degenerate_pair(tmp_path):
    p = tmp_path / "degenerate_pair.json"
    p.write_text(csm.to_json(csm.degenerate_pair()), encoding="utf-8")
    code, text = run(["classify", str(p)])
    assert code == 0 and text.strip() == "very-degenerate, type d2, |Γ| = 2"


def test_classify_model(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(model_to_json(build_named_model("Y_R(-2)")), encoding="utf-8")
    code, text = run(["classify", str(p)])
    assert code == 0 and "cusp model: survivor 0, cones 2" in text


def test_classify_malformed(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"d_type": "d2",\n "vertices": [}', encoding="utf-8")
    code, _ = run(["classify", str(p)])
    assert code != 0
    assert "line 2" in capsys.readouterr().err


def test_flop(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text(model_to_json(build_named_model("Y_VD(-6)")), encoding="utf-8")
    code, _ = run(["flop", str(p), "--component", "1", "--vertex", "nope"])
    assert code != 0 and "schema error" in capsys.readouterr().err
    out = tmp_path / "o.json"
    code, _ = run(["flop", str(p), "--component", "1", "--vertex", "v1", "--out", str(out)])
    assert code == 0
    m = model_from_json(out.read_text(encoding="utf-8"))
    assert m.sizes() == (20, 1, 3)


def test_lattice():
    code, text = run(["lattice", "--spec", "U", "--roots-height", "2", "--ref", "1,1"])
    assert code == 0 and "signature (1, 1)" in text and "roots up to height 2: 1" in text
    code, text = run(["lattice", "--spec", "M2d(1)"])
    assert "rank 19" in text and "signature (1, 18)" in text


def test_census_json(tmp_path):
    p = tmp_path / "fan.json"
    code, _ = run(["census", "--json", str(p)])
    assert code == 0
    assert len(json.loads(p.read_text(encoding="utf-8"))["cones"]) == 31


def test_falsify_depth_zero():
    code, text = run(["falsify", "--depth", "0"])
    assert code == 0 and "0 candidates" in text
