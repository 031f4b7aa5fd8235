import json
import os
import subprocess
import sys

import pytest

from semiflow.cli import emit_report, main, report_document
from semiflow.config import SUITE_NAMES, ConfigError, load_config, parse_config
from semiflow.report import VerificationReport

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
FULL = os.path.join(FIXTURES, "full.yaml")

MINIMAL = """
suites:
  - name: semigroup-law
    spec: {variant: exponential, generator: {kind: dephasing}}
    tol: 1.0e-10
"""

TWO = """
suites:
  - name: gks-form
    spec: {variant: exponential, generator: {kind: random-lindblad, d: 2, kraus_terms: 2}}
    tol: 0
  - name: semigroup-law
    spec: {variant: exponential, generator: {kind: dephasing}}
    tol: 1.0e-10
"""


def write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_json(tmp_path, *args, name="out.json"):
    out = tmp_path / name
    code = main([*args, "--format", "json", "--out", str(out)])
    return code, json.loads(out.read_text())


def test_minimal_config(tmp_path):
    code, doc = run_json(tmp_path, "--config", write(tmp_path, MINIMAL))
    assert code == 0
    assert doc["version"] == "1"
    [report] = doc["reports"]
    assert report["suite"] == "semigroup-law" and report["pass"]
    assert report["metadata"]["seed"] == 42


def test_unknown_suite_is_named():
    with pytest.raises(ConfigError, match="no-such-suite"):
        parse_config(MINIMAL.replace("semigroup-law", "no-such-suite"))


@pytest.mark.parametrize("text, fragment", [
    ("suites: []", "nonempty"),
    ("suites:\n  - name: gks-form\n    spec: {variant: exponential, generator: {kind: dephasing}}\n    colour: red",
     "colour"),
    ("suites:\n  - name: gks-form\n    spec: {variant: wavy}", "wavy"),
    ("suites:\n  - name: gks-form\n    spec: {variant: exponential, generator: {kind: dephasing}}\n    tol: -1",
     "non-negative"),
    ("suites: [\n", "1:"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["--config", write(tmp_path, "suites: [")]) == 2
    assert "semiflow:" in capsys.readouterr().err
    assert main(["--config", str(tmp_path / "missing.yaml")]) == 2


def test_full_fixture_runs_every_suite_in_order(tmp_path):
    cfg = load_config(FULL)
    assert [s.name for s in cfg.suites] == list(SUITE_NAMES)
    code, doc = run_json(tmp_path, "--config", FULL, "--parallel", "3")
    assert [r["suite"] for r in doc["reports"]] == list(SUITE_NAMES)
    failing = [r["suite"] for r in doc["reports"] if not r["pass"]]
    assert failing == [] and code == 0


def test_zero_tolerance_fails_only_that_suite(tmp_path):
    code, doc = run_json(tmp_path, "--config", write(tmp_path, TWO))
    assert code == 1
    assert [r["pass"] for r in doc["reports"]] == [False, True]


def test_override(tmp_path):
    code, doc = run_json(tmp_path, "--config", write(tmp_path, TWO), "--override", "gks-form.tol=1e-11")
    assert code == 0 and all(r["pass"] for r in doc["reports"])
    code, _ = run_json(tmp_path, "--config", write(tmp_path, MINIMAL), "--override", "0.tol=0")
    assert code == 1
    assert main(["--config", write(tmp_path, MINIMAL), "--override", "nothing.tol=1"]) == 2


def test_seed_precedence(tmp_path, monkeypatch):
    cfg = write(tmp_path, "seed: 7\n" + MINIMAL)
    _, doc = run_json(tmp_path, "--config", cfg)
    assert doc["reports"][0]["metadata"]["seed"] == 7
    monkeypatch.setenv("SEMIFLOW_SEED", "11")
    _, doc = run_json(tmp_path, "--config", cfg)
    assert doc["reports"][0]["metadata"]["seed"] == 11
    _, doc = run_json(tmp_path, "--config", cfg, "--seed", "5")
    assert doc["reports"][0]["metadata"]["seed"] == 5


def test_seed_changes_random_specs(tmp_path):
    cfg = write(tmp_path, TWO)
    _, a = run_json(tmp_path, "--config", cfg, "--seed", "1", name="a.json")
    _, b = run_json(tmp_path, "--config", cfg, "--seed", "2", name="b.json")
    assert a["reports"][0]["residuals"] != b["reports"][0]["residuals"]


def test_determinism_across_parallelism(tmp_path):
    cfg = write(tmp_path, TWO)
    main(["--config", cfg, "--format", "json", "--out", str(tmp_path / "p1.json"), "--parallel", "1"])
    main(["--config", cfg, "--format", "json", "--out", str(tmp_path / "p2.json"), "--parallel", "2"])
    assert (tmp_path / "p1.json").read_bytes() == (tmp_path / "p2.json").read_bytes()


def test_timings_flag(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    _, doc = run_json(tmp_path, "--config", cfg)
    assert "wall_time" not in doc["reports"][0]["metadata"]
    _, doc = run_json(tmp_path, "--config", cfg, "--timings")
    assert doc["reports"][0]["metadata"]["wall_time"] >= 0


def test_empty_document_and_round_trip(tmp_path, capsys):
    assert report_document([]) == {"version": "1", "reports": []}
    rep = VerificationReport("demo")
    rep.add("residual", 1e-3, 1e-2)
    rep.metadata["lam"] = complex(2, 1)
    out = tmp_path / "r.json"
    emit_report([rep], "json", str(out))
    doc = json.loads(out.read_text())
    assert doc["reports"][0]["residuals"] == {"residual": 1e-3}
    assert doc["reports"][0]["metadata"]["lam"] == [2.0, 1.0]
    emit_report([rep], "text")
    assert "PASS  demo" in capsys.readouterr().out


def test_text_format_and_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "semiflow.cli", "--config", write(tmp_path, TWO)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 1
    assert "FAIL  gks-form" in proc.stdout and "PASS  semigroup-law" in proc.stdout
    assert "1/2 suites passed" in proc.stdout
