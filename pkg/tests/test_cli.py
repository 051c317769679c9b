import json
import os

import pytest

from freereg.cli import build_parser, identity_audit, main
from freereg.parser import parse_poly


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_derive_leibniz(capsys):
    code, out, _ = run(capsys, "derive", "x1*x2*x1", "--j", "1")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["diff_text"] == "1⊗x2*x1 + x1*x2⊗1"
    assert res["number_op_text"] == "3*x1*x2*x1"
    assert [p["text"] for p in res["homogeneous_parts"]] == ["0", "0", "0", "x1*x2*x1"]


def test_derive_constant_and_bad_index(capsys):
    code, out, _ = run(capsys, "derive", "3", "--j", "1")
    assert code == 0 and json.loads(out)["result"]["diff_text"] == "0"
    code, _, err = run(capsys, "derive", "x1*x2", "--j", "3", "--n", "2")
    assert code == 2 and "--j 3" in err
    code, _, err = run(capsys, "derive", "x1 x2", "--j", "1")
    assert code == 2 and "byte offset 3" in err


def test_check_passes(capsys, tmp_path):
    code, out, _ = run(capsys, "check", "x1*x2+x2*x1", "--out", str(tmp_path / "a.json"))
    assert code == 0
    assert "hochschild_defect == 0 (exact)" in out and "FAIL" not in out
    assert json.loads((tmp_path / "a.json").read_text())["result"]["all_passed"]


def test_check_absent_variable(capsys):
    code, out, _ = run(capsys, "check", "x2*x3")
    assert code == 0
    line = next(l for l in out.splitlines() if "d_1" in l)
    assert "x1 absent" in line and line.endswith("pass")


def test_check_parse_error(capsys):
    assert run(capsys, "check", "x1 +")[0] == 2


def test_identity_audit_rows():
    rows = identity_audit(parse_poly("x1^2 + i*x2 - i*x2", 3))
    assert all(r["passed"] for r in rows)
    assert len(rows) == 4 + 3


def test_simulate_outputs_and_determinism(capsys, tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"r{k}"
        code, _, _ = run(capsys, "simulate", "x1", "--N", "60", "--trials", "2", "--seed", "7",
                         "--out-dir", str(d), "--reference", "semicircle", "--figure", "--bins", "10")
        assert code == 0
        outs.append({f: (d / f).read_bytes() for f in sorted(os.listdir(d))})
    assert sorted(outs[0]) == ["histogram.csv", "measure.csv", "metadata.json", "spectrum.png"]
    assert outs[0] == outs[1]
    meta = json.loads(outs[0]["metadata.json"])
    assert meta["schema_version"] == 1 and meta["seed"] == 7 and meta["N"] == 60
    assert outs[0]["measure.csv"].startswith(b"# schema_version=1\nvalue,weight\n")
    assert len(outs[0]["measure.csv"].splitlines()) == 2 + 120


def test_simulate_rejects_non_self_adjoint(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", "x1*x2", "--out-dir", str(tmp_path))
    assert code == 2 and "self-adjoint" in err


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "2", "--k", "3", "--N", "8", "--trials", "1")
    rows = json.loads(out)["result"]["rows"]
    assert code == 0 and [r["exact"]["re"] for r in rows] == ["2/1", "4/1", "8/1"]
    assert max(r["gap"] for r in rows) < 1e-12
    assert run(capsys, "moments", "x1", "--k", "0")[0] == 2
    assert run(capsys, "moments", "x1+x2+x3", "--k", "12", "--budget", "100", "--N", "4")[0] == 3


def test_moments_csv(capsys, tmp_path):
    f = tmp_path / "m.csv"
    code, _, _ = run(capsys, "moments", "x1", "--k", "4", "--N", "50", "--format", "csv", "--out", str(f))
    lines = f.read_text().splitlines()
    assert code == 0 and lines[0] == "# schema_version=1" and len(lines) == 6
    assert [l.split(",")[1] for l in lines[2:]] == ["0/1", "1/1", "0/1", "2/1"]


def test_decay_atoms_entropy_json(capsys):
    code, out, _ = run(capsys, "decay", "x1", "--N", "200", "--trials", "2")
    rep = json.loads(out)
    assert code == 0 and rep["schema_version"] == 1 and len(rep["result"]["eps"]) == 8
    code, out, _ = run(capsys, "atoms", "x1", "--control", "bernoulli", "--N", "40", "--trials", "1")
    res = json.loads(out)["result"]
    assert code == 0 and res["atom_suspected"] and res["max_mass"] == 0.5
    code, out, _ = run(capsys, "entropy", "x1", "--N", "100", "--trials", "1")
    res = json.loads(out)["result"]
    assert code == 0 and res["chi"] == pytest.approx(res["log_energy"] + res["constant"])


def test_decay_sparse_mass_exit_code(capsys):
    code, _, err = run(capsys, "decay", "x1", "--t", "10", "--N", "20", "--trials", "1")
    assert code == 3 and "--N" in err


@pytest.mark.parametrize("cmd", [
    ["moments", "x1*x2+x2*x1", "--k", "3", "--N", "30", "--trials", "2", "--seed", "5"],
    ["decay", "x1^2", "--N", "80", "--trials", "2", "--seed", "5", "--format", "csv"],
    ["atoms", "x1*x2+x2*x1", "--N", "40", "--trials", "2", "--seed", "5"],
    ["entropy", "x1", "--N", "40", "--trials", "2", "--seed", "5"],
])
def test_reruns_are_byte_identical(capsys, tmp_path, cmd):
    blobs = []
    for k in range(2):
        f = tmp_path / f"o{k}"
        assert main(cmd + ["--out", str(f)]) == 0
        blobs.append(f.read_bytes())
    assert blobs[0] == blobs[1]


def test_threads_env_does_not_change_output(capsys, tmp_path, monkeypatch):
    cmd = ["entropy", "x1", "--N", "40", "--trials", "3", "--seed", "2"]
    main(cmd + ["--out", str(tmp_path / "a")])
    monkeypatch.setenv("FREEREG_THREADS", "3")
    main(cmd + ["--out", str(tmp_path / "b")])
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    monkeypatch.setenv("FREEREG_THREADS", "many")
    assert main(cmd) == 2


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["simulate", "x1", "--N", "0"]) == 2
    assert main(["decay", "x1", "--eps-ratio", "1.5"]) == 2
    assert main(["--help"]) == 0
    help_text = build_parser().format_help()
    for sub in ("derive", "check", "simulate", "moments", "entropy", "decay", "atoms"):
        assert sub in help_text
