import hashlib
import json

import pytest

from mblab.cli import build_config, main, read_config, svg_loglog, UsageError


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def test_unknown_key_is_usage_error(tmp_path, capsys):
    assert run(tmp_path, "growth", "--set", "bogus=1") == 2
    assert "bogus" in capsys.readouterr().err


def test_bad_value_and_bad_command(tmp_path):
    assert run(tmp_path, "resonance", "--set", "N=abc") == 2
    assert main(["frobnicate"]) == 2


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nN = 512\nbetas = -3\n")
    pairs = read_config(cfg) + [("K", "5")]
    c, echo = build_config("resonance", pairs)
    assert c["N"] == 512.0 and c["betas"] == [-3.0] and c["K"] == 5.0
    assert echo["N"] == "512"
    bad = tmp_path / "b.cfg"
    bad.write_text("no equals sign\n")
    with pytest.raises(UsageError):
        read_config(bad)


def test_lemmas_deterministic_and_manifest(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["lemmas", "--seed", "42", "--set", "n_samples=8", "--out", str(a)]) == 0
    assert main(["lemmas", "--seed", "42", "--set", "n_samples=8", "--out", str(b)]) == 0
    assert (a / "lemmas.csv").read_bytes() == (b / "lemmas.csv").read_bytes()
    m = json.loads((a / "manifest.json").read_text())
    assert m["status"] == 0 and m["config"]["seed"] == "42"
    for name, digest in m["files"].items():
        assert hashlib.sha256((a / name).read_bytes()).hexdigest() == digest
    emitted = {p.name for p in a.iterdir() if p.name != "manifest.json"}
    assert emitted == set(m["files"])


def test_growth_threshold_case_and_svg(tmp_path):
    assert run(tmp_path, "growth", "--set", "construction=beta-positive", "--set", "s=0.5") == 0
    fit = json.loads((tmp_path / "growth_fit.json").read_text())["fits"][0]
    assert fit["pass"] and abs(fit["slope"]) < 0.1
    csv_text = (tmp_path / "growth.csv").read_text()
    # the plot is a pure function of the CSV
    assert (tmp_path / "growth.svg").read_text() == svg_loglog(
        csv_text, "N", "windowed_norm", "s", {"0.5": fit["predicted_exponent"]}, "beta-positive t=0.05")


def test_growth_failure_exit_status(tmp_path, capsys):
    # an impossible tolerance turns the fit into a numeric failure
    assert run(tmp_path, "growth", "--set", "s=0.3", "--set", "tolerance=0", "--set", "ladder=8..12") == 1
    assert "growth beta-positive" in capsys.readouterr().err
    assert json.loads((tmp_path / "manifest.json").read_text())["status"] == 1


def test_report_reproduces_thresholds(tmp_path, monkeypatch):
    monkeypatch.setenv("MBLAB_OUT", str(tmp_path))
    assert main(["growth", "--set", "construction=beta-zero", "--set", "s=0,0.75", "--set", "ladder=8..12"]) == 0
    assert main(["growth", "--set", "construction=general-alpha", "--set", "s=-0.5,0", "--set", "ladder=8..12"]) == 0
    assert main(["report"]) == 0
    (rep,) = tmp_path.glob("report-*")
    lines = (rep / "thresholds.csv").read_text().splitlines()
    assert lines[0].startswith("construction,alpha,beta,t,s_values,slopes,measured_s_star")
    rows = {l.split(",")[0]: l.split(",") for l in lines[1:]}
    assert abs(float(rows["beta-zero"][6]) - 0.75) <= 0.05
    assert abs(float(rows["general-alpha"][6]) - 0.0) <= 0.05


@pytest.mark.parametrize("cmd", ["resonance", "solve", "crosscheck"])
def test_other_commands_pass(tmp_path, cmd):
    assert run(tmp_path, cmd) == 0
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["files"] and m["status"] == 0


def test_solve_guard_is_usage_error(tmp_path):
    assert run(tmp_path, "solve", "--set", "dt=0.3") == 2
