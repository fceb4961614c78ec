import json

import pytest

from orthoheun.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_gaussian_moment(capsys):
    code, out = run(capsys, "moments", "--weight", "gj", "--A", "1", "--B", "0", "--t", "0", "--k", "0")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert doc["result"]["value"].startswith("1.772453850905516027298167483341145182797549456122387128213807789852911284591")
    assert doc["header"]["digits"] == 60


def test_output_is_deterministic(capsys):
    argv = ("recurrence", "--weight", "df", "--alpha", "1", "--t", "1", "--n", "6", "--format", "csv")
    _, a = run(capsys, *argv)
    _, b = run(capsys, *argv)
    assert a == b
    lines = a.splitlines()
    assert lines[0].startswith("# {") and lines[1] == "# passed: true"
    assert lines[2] == "n,beta_n,beta_scaled" and len(lines) == 9


def test_digits_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("ORTHOHEUN_DIGITS", "70")
    _, out = run(capsys, "moments", "--weight", "spg", "--alpha", "1", "--t", "1/10", "--k", "2", "--no-check")
    assert json.loads(out)["header"]["digits"] == 70


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"weight": "jc", "alpha": "1", "a": "1/2", "N": 2, "digits": 55}))
    code, out = run(capsys, "moments", "--config", str(cfg), "--digits", "65", "--no-check")
    doc = json.loads(out)
    assert code == 0
    assert doc["header"]["digits"] == 65 and len(doc["result"]["entries"]) == 5


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    code, out = run(capsys, "moments", "--config", str(cfg))
    assert code == 2 and "colour" in json.loads(out)["error"]["message"]


def test_structured_error_for_bad_domain(capsys):
    code, out = run(capsys, "moments", "--weight", "jc", "--alpha", "1", "--a", "2", "--k", "0")
    doc = json.loads(out)
    assert code == 2 and doc["error"]["type"] == "DomainError" and not doc["passed"]


def test_ode_residual_exit_codes(capsys):
    code, out = run(capsys, "ode-residual", "--family", "spg", "--n", "4", "--alpha", "1", "--t", "1/2")
    assert code == 0
    code, out = run(capsys, "ode-residual", "--family", "spg", "--n", "4", "--alpha", "1", "--t", "1/2", "--variant", "multiplied")
    assert code == 1 and not json.loads(out)["passed"]


def test_isomono_check_exit_codes(capsys):
    assert run(capsys, "isomono-check", "--family", "jc", "--n", "3", "--alpha", "1", "--t", "5/2")[0] == 0
    assert run(capsys, "isomono-check", "--family", "gj", "--n", "3", "--t", "3/2", "--scale", "-1")[0] == 1


def test_heun_limit(capsys):
    code, out = run(capsys, "heun-limit", "--family", "df", "--n", "8", "--alpha", "1", "--t", "1")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["degrees"]["sigma"] == 1


def test_painleve_certify(capsys, tmp_path):
    path = tmp_path / "cert.json"
    code, _ = run(capsys, "painleve-certify", "--family", "spg", "--n", "3", "--alpha", "1", "--window", "1:3/2",
                  "--tol", "1e-10", "--ic", "0.5,0.1", "--out", str(path))
    doc = json.loads(path.read_text())
    assert code == 0 and doc["result"]["verdict"] == "pass"


def test_asymptotics_and_factorization(capsys):
    code, out = run(capsys, "asymptotics", "--regime", "smallS", "--alpha", "1", "--t", "1", "--s", "1/100", "--compare")
    doc = json.loads(out)
    assert code == 0 and any(not c["agrees"] for c in doc["result"]["comparison"])
    code, out = run(capsys, "factorization", "--alpha", "1", "--s", "1/5", "--t", "3/10", "--n", "2", "--format", "csv")
    assert code == 0 and out.splitlines()[2] == "n,even_error,odd_error"


def test_errata_listing(capsys):
    code, out = run(capsys, "errata", "--format", "csv")
    assert code == 0 and "spg-ode-factor,dropped" in out


def test_parser_rejects_missing_command(capsys):
    with pytest.raises(SystemExit):
        main([])
