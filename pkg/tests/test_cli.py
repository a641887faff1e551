import json
import math
from pathlib import Path

import pytest

from ncmult.cli import main, split_report

FX = Path(__file__).resolve().parents[1] / "fixtures"


def fx(kind, name):
    return f"@{FX / kind / name}.json"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body(out):
    return json.loads(split_report(out)[1])


def test_mult_norm_fixture(capsys):
    code, out, _ = run(capsys, "mult-norm", "--model", fx("models", "diag21"), "--operator", fx("operators", "diag21"), "--p", "4", "--q", "2")
    assert code == 0
    rep = body(out)
    assert rep["exact_norm"] == pytest.approx(17**0.25, abs=1e-9)
    assert rep["replay"]["seed"] == 42


def test_mult_norm_increasing_and_endomorphic(capsys):
    code, out, _ = run(capsys, "mult-norm", "--model", fx("models", "two_factor"), "--operator", fx("operators", "two_factor_identity"), "--p", "1", "--q", "2", "--trials", "50")
    assert code == 0 and body(out)["exact_norm"] == 4.0
    code, out, _ = run(capsys, "mult-norm", "--model", fx("models", "diag21"), "--operator", fx("operators", "diag21"), "--p", "2", "--q", "2", "--trials", "50")
    assert code == 0 and body(out)["exact_norm"] == pytest.approx(2.0)
    code, out, _ = run(capsys, "mult-norm", "--model", fx("models", "interval"), "--operator", fx("operators", "interval_w"), "--p", "1", "--q", "2", "--trials", "10")
    assert code == 0 and body(out)["bounded"] == "no"


def test_mult_norm_orlicz_modes(capsys):
    base = ["mult-norm", "--model", fx("models", "diag21"), "--operator", fx("operators", "diag21"), "--trials", "50", "--grid", "log:1e-2:1e2:8"]
    t2, t4 = fx("orlicz", "t2"), fx("orlicz", "t4")
    code, out, _ = run(capsys, *base, "--phi1", t4, "--phi2", t2, "--phi3", t4)
    assert code == 0 and body(out)["bounded"] == "yes"
    code, out, _ = run(capsys, *base, "--phi1", t2, "--phi2", t2, "--phi3", t2)
    assert code == 2 and body(out)["bounded"] == "undetermined"
    code, out, _ = run(capsys, *base, "--psi", fx("orlicz", "psi_t2"), "--phi2", t2)
    assert code == 0 and body(out)["scenario"] == "orlicz_composition"
    code, _, err = run(capsys, *base, "--psi", t2)
    assert code == 1 and "--phi2" in err


def test_compact_exit_codes(capsys):
    w = fx("operators", "diag_1_half")
    code, out, _ = run(capsys, "compact", "--model", fx("models", "geometric_tail"), "--operator", w)
    assert code == 0 and body(out)["compact_verdict"] == "certified"
    code, out, _ = run(capsys, "compact", "--model", fx("models", "constant_tail"), "--operator", w)
    assert code == 0 and body(out)["compact_verdict"] == "refuted"
    code, out, _ = run(capsys, "compact", "--model", fx("models", "ratio_one_tail"), "--operator", fx("operators", "ratio_one"), "--p", "1", "--q", "2")
    assert code == 0 and body(out)["compact_verdict"] == "refuted"
    code, out, _ = run(
        capsys, "compact", "--model", fx("models", "geometric_tail"), "--operator", w,
        "--phi1", fx("orlicz", "t4"), "--phi2", fx("orlicz", "t2"), "--phi3", fx("orlicz", "threshold1"),
    )
    assert code == 2 and body(out)["compact_verdict"] == "not_applicable"
    code, out, _ = run(capsys, "compact", "--model", fx("models", "geometric_tail"), "--operator", w, "--eps", "0.4,0.2", "--format", "csv")
    assert code == 0 and "compact_verdict,certified" in out
    code, _, err = run(capsys, "compact", "--model", fx("models", "geometric_tail"), "--operator", w, "--eps", "a,b")
    assert code == 1 and "--eps" in err


def test_counterexample_table(capsys):
    code, out, _ = run(capsys, "counterexample", "e1", "--p", "1", "--q", "2", "--N", "20", "--format", "csv")
    assert code == 0
    last = out.strip().splitlines()[-1].split(",")
    assert float(last[2]) == pytest.approx(2**-10.5, rel=1e-12) and float(last[3]) == pytest.approx(1.0)
    code, _, err = run(capsys, "counterexample", "e1", "--p", "2", "--q", "1")
    assert code == 1 and "invalid parameters" in err


def test_svf_norm_dual(capsys):
    m, x = fx("models", "diag21"), fx("operators", "diag21")
    code, out, _ = run(capsys, "svf", "--model", m, "--operator", x)
    assert code == 0 and [p["value"] for p in body(out)["pieces"]] == pytest.approx([2.0, 1.0])
    code, out, _ = run(capsys, "norm", "--model", m, "--operator", x, "--p", "4")
    assert body(out)["value"] == pytest.approx(17**0.25)
    code, out, _ = run(capsys, "norm", "--model", m, "--operator", x, "--phi", fx("orlicz", "threshold1"))
    assert body(out)["value"] == pytest.approx(2.0)
    code, out, _ = run(capsys, "dual-norm", "--model", m, "--operator", x, "--phi", fx("orlicz", "t2"))
    assert code == 0 and body(out)["value"] == pytest.approx(math.sqrt(5), rel=1e-8)
    code, out, _ = run(capsys, "svf", "--model", fx("models", "mixed"), "--operator", fx("operators", "mixed"), "--format", "text")
    assert code == 0 and "pieces:" in out


def test_input_errors_exit_1(capsys, tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text('{"factors": [\n {"dim": 2 "weight": 1}]}')
    code, _, err = run(capsys, "svf", "--model", f"@{bad}", "--operator", "{}")
    assert code == 1 and f"{bad}:2:" in err
    code, _, err = run(capsys, "svf", "--model", '{"factors": [{"dim": 2, "weight": 0}]}', "--operator", "{}")
    assert code == 1 and "factors[0].weight" in err
    code, _, err = run(capsys, "svf", "--model", fx("models", "diag21"), "--operator", '{"blocks": [[[1]]]}')
    assert code == 1
    with pytest.raises(SystemExit) as exc:
        main(["norm", "--p", "2"])
    assert exc.value.code == 1
    code, _, err = run(capsys, "verify", "--suite", "bogus")
    assert code == 1


def test_out_file(capsys, tmp_path):
    dest = tmp_path / "r.json"
    code, out, _ = run(capsys, "counterexample", "e1", "--N", "3", "--out", str(dest))
    assert code == 0 and out == ""
    header, text = split_report(dest.read_text())
    assert header["command"] == "counterexample" and "timestamp" in header
    assert json.loads(text)["p"] == 1.0


def test_verify_subset_is_deterministic(capsys):
    code, a, _ = run(capsys, "verify", "--suite", "e1,compactness,nonatomic", "--seed", "7")
    assert code == 0
    code, b, _ = run(capsys, "verify", "--suite", "e1,compactness,nonatomic", "--seed", "7")
    assert split_report(a)[1] == split_report(b)[1]
    assert body(a)["summary"]["failures"] == 0
    code, out, _ = run(capsys, "verify", "--suite", "e1", "--format", "text")
    assert out.startswith("PASS e1")
