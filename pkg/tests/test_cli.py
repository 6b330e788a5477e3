import json
import subprocess
import sys

import pytest

from tubeops.cli import EXIT_USAGE, main

BERGMAN = ["--p1", "2", "--p2", "2", "--q1", "2", "--q2", "2", "--c1", "2", "--c2", "2"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "argv, code",
    [
        (["classify", *BERGMAN], 0),
        (["classify", *BERGMAN, "--c1", "2.3"], 1),
        (["classify", *BERGMAN, "--q1", "inf"], 2),
        (["classify", *BERGMAN, "--alpha1", "-2", "--formal"], 3),
        (["classify", *BERGMAN, "--alpha1", "-2"], EXIT_USAGE),
        (["classify", *BERGMAN, "--p1", "0.5"], EXIT_USAGE),
        (["classify", *BERGMAN, "--c1", "abc"], EXIT_USAGE),
        (["classify", *BERGMAN, "--c1", "nan"], EXIT_USAGE),
        (["classify", "--p1", "2"], EXIT_USAGE),
        (["classify", *BERGMAN, "--operator", "X"], EXIT_USAGE),
        (["classify", *BERGMAN, "--operator", "S"], 0),
        (["classify", "--p1", "inf", "--p2", "inf", "--q1", "inf", "--q2", "inf", "--a1", "1", "--a2", "1", "--c1", "3", "--c2", "3"], 0),
        (["classify", "--p1", "2", "--p2", "3", "--q1", "2", "--q2", "2", "--c1", "2", "--c2", "2"], 2),
        (["classify", "--operator", "projection"], 0),
        (["classify", "--operator", "projection", "--q1", "inf", "--q2", "inf"], 1),
        (["classify", "--operator", "projection", "--p1", "1", "--p2", "1", "--q1", "inf", "--q2", "inf"], 3),
        (["classify", "--operator", "berezin"], 0),
        (["classify", "--operator", "tc", "--p1", "1", "--p2", "1", "--q1", "inf", "--q2", "inf", "--c1", "0", "--c2", "0"], 0),
        (["classify", "--operator", "tc", "--p1", "1", "--p2", "1", "--q1", "1", "--q2", "1", "--c1", "2", "--c2", "2"], 1),
        (["classify", "--operator", "tc", "--gamma1", "-1"], EXIT_USAGE),
        (["frobnicate"], EXIT_USAGE),
        ([], EXIT_USAGE),
    ],
)
def test_exit_code_matrix(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_classify_json_output(capsys):
    code, out, _ = run(capsys, "classify", *BERGMAN)
    assert json.loads(out) == {"status": "bounded", "theorem": "6.1", "lambda": [0.0, 0.0], "failed": [], "critical_c": [2.0, 2.0]}


def test_classify_outside_coverage_json(capsys):
    _, out, _ = run(capsys, "classify", *BERGMAN, "--q1", "inf")
    assert json.loads(out)["status"] == "outside_coverage"


def test_classify_human_output(capsys):
    _, out, _ = run(capsys, "classify", "--operator", "projection", "--format", "human")
    assert "theorem: 7.4 (via 6.1)" in out
    assert "c1_critical" in out


def test_classify_csv_output(capsys):
    _, out, _ = run(capsys, "classify", *BERGMAN, "--c1", "2.3", "--format", "csv")
    header, row = out.strip().split("\n")
    assert header == "status,theorem,lambda1,lambda2,failed,critical_c1,critical_c2"
    assert row.startswith("unbounded,6.1,") and "c1_critical" in row


def test_malformed_flag_message(capsys):
    code, _, err = run(capsys, "classify", *BERGMAN, "--alpha1", "-2")
    assert code == EXIT_USAGE and "--formal" in err


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"p1": 3, "p2": 3, "q1": "inf", "q2": "inf", "c1": 2, "c2": 2, "a1": 1, "a2": 1}))
    _, out, _ = run(capsys, "classify", "--config", str(cfg))
    assert json.loads(out)["theorem"] == "6.5"
    _, out, _ = run(capsys, "classify", "--config", str(cfg), "--q1", "3", "--q2", "3")
    assert json.loads(out)["theorem"] == "6.1"


def test_config_file_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "classify", "--config", str(bad))[0] == EXIT_USAGE
    bad.write_text(json.dumps({"frobnicate": 1}))
    assert run(capsys, "classify", "--config", str(bad))[0] == EXIT_USAGE
    assert run(capsys, "classify", "--config", str(tmp_path / "missing.json"))[0] == EXIT_USAGE


def test_output_file(capsys, tmp_path):
    target = tmp_path / "verdict.json"
    code, out, _ = run(capsys, "classify", *BERGMAN, "--output", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["status"] == "bounded"


def test_verify_identity_pinned_case(capsys):
    code, out, _ = run(capsys, "verify-identity", "--r", "2", "--s", "2", "--t", "0", "--z", "1j", "--u", "2j")
    data = json.loads(out)
    assert code == 0
    assert data["rhs"][0] == pytest.approx(5.585053606381854)
    assert data["rel_err"] < 1e-2


def test_verify_identity_divergent(capsys):
    code, out, _ = run(capsys, "verify-identity", "--t", "-1")
    assert code == 1 and json.loads(out)["divergent"]


def test_verify_identity_second(capsys):
    code, out, _ = run(capsys, "verify-identity", "--identity", "second", "--s", "4", "--t", "0")
    assert code == 0 and json.loads(out)["spread"] < 2e-2
    code, out, _ = run(capsys, "verify-identity", "--identity", "second", "--s", "2", "--t", "0")
    assert code == 1 and json.loads(out)["divergent"]


def test_verify_identity_point_dimension_checked(capsys):
    assert run(capsys, "verify-identity", "--z", "1j,2j")[0] == EXIT_USAGE
    assert run(capsys, "verify-identity", "--z", "-1j")[0] == EXIT_USAGE


def test_certificate_bergman(capsys):
    code, out, _ = run(capsys, "certificate", *BERGMAN)
    data = json.loads(out)
    assert code == 0
    assert data["r"] == pytest.approx([-0.25, -0.25]) and data["s"] == pytest.approx([-0.25, -0.25])
    assert data["gamma"] == pytest.approx([0.5, 0.5]) and data["delta"] == pytest.approx([0.5, 0.5])


def test_certificate_human_and_verify(capsys):
    code, out, _ = run(capsys, "certificate", *BERGMAN, "--verify", "--samples", "4", "--format", "human")
    assert code == 0
    assert "gamma: (0.5, 0.5)" in out and "first: spread" in out


def test_certificate_infeasible(capsys):
    code, out, _ = run(capsys, "certificate", *BERGMAN, "--c1", "2.5")
    assert code == 1 and json.loads(out)["feasible"] is False


def test_certificate_infinite_target(capsys):
    code, out, _ = run(capsys, "certificate", "--q1", "inf", "--q2", "inf", "--a1", "1", "--a2", "1", "--c1", "2", "--c2", "2")
    assert code == 0 and json.loads(out)["kind"] == "infinite_target"


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", *BERGMAN, "--c1", "2.3", "--format", "csv", "--scales", "1,2,4")
    lines = out.strip().split("\n")
    assert code == 0
    assert lines[0] == "scale,ratio,slope"
    assert len(lines) == 4
    assert float(lines[-1].split(",")[2]) == pytest.approx(0.3)


def test_sweep_bad_scales(capsys):
    assert run(capsys, "sweep", *BERGMAN, "--scales", "1")[0] == EXIT_USAGE


def test_apply_matches_closed_form(capsys):
    code, out, _ = run(capsys, "apply", *BERGMAN, "--z", "0.5+1j", "--w", "2j")
    data = json.loads(out)
    assert code == 0 and data["rel_err"] < 2e-2


def test_apply_rejects_special_operator(capsys):
    assert run(capsys, "apply", *BERGMAN, "--operator", "projection")[0] == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", *BERGMAN, "--format", "human"],
        ["certificate", *BERGMAN],
        ["sweep", *BERGMAN, "--c1", "2.3", "--method", "quadrature", "--scales", "1,4"],
        ["apply", *BERGMAN, "--z", "0.5+1j", "--w", "2j", "--seed", "3"],
        ["verify-identity", "--identity", "second", "--seed", "5"],
    ],
)
def test_byte_identical_across_processes(argv):
    cmd = [sys.executable, "-m", "tubeops.cli", *argv]
    first = subprocess.run(cmd, capture_output=True, check=False)
    second = subprocess.run(cmd, capture_output=True, check=False)
    assert first.returncode == second.returncode
    assert first.stdout == second.stdout and first.stdout


def test_selftest_quick_subset(monkeypatch, capsys):
    from tubeops import acceptance, cli

    monkeypatch.setattr(cli, "run_all", lambda quick, echo=None: [acceptance.criterion_3(quick), acceptance.criterion_10(quick)])
    code, out, _ = run(capsys, "selftest", "--quick")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    assert [c["number"] for c in data["criteria"]] == [3, 10]
