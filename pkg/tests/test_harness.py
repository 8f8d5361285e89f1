import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qrtkit import channels as ch
from qrtkit.errors import ConfigError, IoError, ParseError
from qrtkit.harness import SuiteConfig, run_suite
from qrtkit.harness.cli import main
from qrtkit.harness.io import emit_csv, load_channel, load_json, save_channel
from qrtkit.harness.suites import Record, classical_chernoff, continuity_kappa, np_lp_oracle


@pytest.fixture
def files(tmp_path):
    chan = tmp_path / "ch.json"
    save_channel(ch.hadamard_channel(), chan)
    theory = tmp_path / "theory.json"
    theory.write_text(json.dumps({"theory": "coherence"}))
    therm = tmp_path / "therm.json"
    therm.write_text(json.dumps({"theory": "athermality", "energies_A": [0, 1], "beta": 1.0}))
    return tmp_path, chan, theory, therm


def test_record_slack_and_status():
    r = Record("s", "c", "i", 1.0, 0.9999, 2e-4)
    assert r.passed and r.slack == pytest.approx(-1e-4)
    assert not Record("s", "c", "i", 1.0, 0.99, 2e-4).passed
    assert not Record("s", "c", "i", np.nan, np.nan, 1.0, "error").passed


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        SuiteConfig(suites=["bogus"])
    with pytest.raises(ConfigError):
        SuiteConfig(seeds=3)
    with pytest.raises(ConfigError):
        SuiteConfig.from_dict({"nope": 1})
    bad = tmp_path / "bad.json"
    bad.write_text('{"suites": [\n  "axioms",\n}')
    with pytest.raises(ConfigError, match="line 3"):
        SuiteConfig.from_file(bad)
    with pytest.raises(IoError):
        SuiteConfig.from_file(tmp_path / "missing.json")


def test_io_round_trip(files):
    tmp, chan, _, _ = files
    assert_allclose(load_channel(chan).choi, ch.hadamard_channel().choi)
    (tmp / "broken.json").write_text("{\n  1: 2}")
    with pytest.raises(ParseError, match=":2:"):
        load_json(tmp / "broken.json")
    emit_csv([{"a": 1.5, "b": "x"}], tmp / "o.csv", ["a", "b"])
    assert (tmp / "o.csv").read_text() == "a,b\n1.5,x\n"


def test_oracles():
    assert np_lp_oracle([0.5, 0.5], [0.5, 0.5], 0.1) == pytest.approx(0.9)
    # symmetric pair: optimum at α = ½
    assert classical_chernoff([0.9, 0.1], [0.1, 0.9]) == pytest.approx(-np.log2(0.6), abs=1e-9)
    assert classical_chernoff([0.5, 0.5], [0.5, 0.5]) == pytest.approx(0.0, abs=1e-12)


def test_kappa(coherence, athermality):
    assert continuity_kappa(coherence) == pytest.approx(3.0)
    assert continuity_kappa(athermality) >= 3.0


def test_run_suite_writes_reports(tmp_path):
    cfg = SuiteConfig(suites=["ogawa_nagaoka"], seeds=[0, 1], out_dir=str(tmp_path))
    rep = run_suite(cfg)
    assert rep.passed and len(rep.records) == 18
    lines = (tmp_path / "report.jsonl").read_text().splitlines()
    assert len(lines) == 19 and "summary" in json.loads(lines[-1])
    assert (tmp_path / "report.csv").read_text().startswith("suite,check,instance")


def test_cli_run_and_exit_codes(files, capsys):
    tmp, chan, theory, therm = files
    cfg = tmp / "cfg.json"
    cfg.write_text(json.dumps({"suites": ["ogawa_nagaoka"], "seeds": [0], "out_dir": str(tmp / "out")}))
    assert main(["run", "--config", str(cfg)]) == 0
    assert main(["run", "--config", str(tmp / "missing.json")]) == 2
    cfg.write_text("{")
    assert main(["run", "--config", str(cfg)]) == 2


def test_cli_compute(files):
    tmp, chan, theory, _ = files
    out = tmp / "res.json"
    assert main(["compute", "--measure", "LRF", "--channel", str(chan), "--theory", str(theory),
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["status"] == "exact"
    assert main(["compute", "--measure", "LRF", "--channel", str(tmp / "nope.json"),
                 "--theory", str(theory)]) == 2


def test_cli_stein(files):
    tmp, _, _, therm = files
    chan = tmp / "amp.json"
    save_channel(ch.random_channel(2, 2, 2, seed=3), chan)
    out = tmp / "stein.csv"
    assert main(["stein", "--channel", str(chan), "--theory", str(therm), "--nmax", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,epsilon,phi_id,beta,exponent,inner_relent,gap" and len(lines) == 3
    for line in lines[1:]:
        [float(x) for x in line.split(",")]


def test_cli_validate_theory(files):
    tmp, _, theory, _ = files
    assert main(["validate-theory", "--theory", str(theory), "--samples", "2"]) == 0
    (tmp / "bad.json").write_text('{"theory": "nope"}')
    assert main(["validate-theory", "--theory", str(tmp / "bad.json")]) == 2
