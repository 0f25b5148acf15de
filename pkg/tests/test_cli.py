"""Command-line commands, output files and exit codes."""
import hashlib
import json

import numpy as np
import pytest

from debtstress.cli import EXIT_COMPUTATION, EXIT_USAGE, EXIT_VALIDATION, main
from debtstress.disaster import Mode
from debtstress.econometrics import predict_path, synthetic_panel
from debtstress.ingest import load_coefficients, load_manifest_calibration, parse_table, read_table

from conftest import REPLICATION

CONF = REPLICATION / "configs"


def run_json(capsys, *argv):
    assert main([*argv, "--format", "json"]) == 0
    return json.loads(capsys.readouterr().out)


def test_baseline(capsys):
    rep = run_json(capsys, "baseline", "--config", str(CONF / "baseline.yaml"))
    assert rep["summary"]["crossing_below_60"] == 2024
    assert rep["summary"]["d_2040"] < 0.55
    assert rep["meta"]["manifest_digest"] and "version" in rep["meta"]
    dec = rep["tables"]["decomposition"]
    for r in dec:
        parts = r["interest"] + r["inflation"] + r["growth"] + r["primary_balance"] + r["other_flows"]
        assert parts == pytest.approx(r["delta_d"], abs=1e-14)


def test_empty_manifest_is_usage_error(tmp_path, capsys):
    (tmp_path / "m.yaml").write_text("files: {}\n")
    assert main(["baseline", "--manifest", str(tmp_path / "m.yaml")]) == EXIT_USAGE
    assert main(["nonsense"]) == EXIT_USAGE


def test_bad_config_is_validation_error(tmp_path, capsys):
    (tmp_path / "c.yaml").write_text("mode: sideways\n")
    assert main(["scenario", "--config", str(tmp_path / "c.yaml")]) == EXIT_VALIDATION
    assert main(["scenario", "--mode", "one_off", "--appendix-four-channel"]) == EXIT_VALIDATION
    assert main(["baseline", "--manifest", str(tmp_path / "missing.yaml")]) == EXIT_VALIDATION


def test_zero_variance_panel_is_computation_error(tmp_path, capsys):
    p = synthetic_panel(n_countries=10, n_years=12, seed=0).assign(gdp_growth=2.0)
    from debtstress.ingest import write_table
    write_table(tmp_path / "panel.csv", p, {c: "index" for c in p.columns} | {"country": "text", "year": "year"})
    (tmp_path / "m.yaml").write_text("files:\n  panel: panel.csv\n")
    assert main(["estimate", "--manifest", str(tmp_path / "m.yaml")]) == EXIT_COMPUTATION


def test_scenario_modes(capsys):
    one = run_json(capsys, "scenario", "--config", str(CONF / "one_off.yaml"))
    lp = run_json(capsys, "scenario", "--config", str(CONF / "lp.yaml"))
    qr = run_json(capsys, "scenario", "--config", str(CONF / "qr.yaml"))
    assert one["meta"]["config"]["mode"] == "one_off"
    # the econometric paths peak in annual change in 2027, about 4 and 5 points of GDP
    assert lp["summary"]["largest_increase_year"] == 2027
    assert lp["summary"]["largest_annual_increase"] == pytest.approx(0.04, abs=0.01)
    assert qr["summary"]["largest_increase_year"] == 2027
    assert qr["summary"]["largest_annual_increase"] == pytest.approx(0.05, abs=0.01)
    bands = [r for r in lp["tables"]["shocks"]]
    assert all(r["lower"] <= r["deviation"] <= r["upper"] for r in bands)


@pytest.mark.xfail(strict=True, reason="shipped one-off profile gives about +4 pp in 2026, "
                                       "the full +8 pp only arrives a year later")
def test_one_off_first_year_jump(capsys):
    rep = run_json(capsys, "scenario", "--config", str(CONF / "one_off.yaml"))
    first = [r for r in rep["tables"]["paths"] if r["year"] == 2026][0]
    assert first["delta"] == pytest.approx(0.08, abs=0.01)


def test_per_period_seed_override(capsys):
    a = run_json(capsys, "scenario", "--config", str(CONF / "per_period.yaml"), "--seed", "4")
    b = run_json(capsys, "scenario", "--config", str(CONF / "per_period.yaml"), "--seed", "4")
    assert a == b and a["meta"]["seed"] == 4


def test_four_channel_note(capsys):
    rep = run_json(capsys, "scenario", "--config", str(CONF / "lp.yaml"), "--appendix-four-channel")
    assert any("should be interpreted with caution" in n for n in rep["notes"])
    assert rep["meta"]["config"]["channels"] == ["growth", "inflation", "interest", "primary_balance"]


def _digests(path):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(path.iterdir())}


def test_fan_files_repeatable(tmp_path, capsys):
    args = ["fan", "--config", str(CONF / "fan.yaml"), "--iterations", "2000"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert _digests(tmp_path / "a") == _digests(tmp_path / "b")
    plot = read_table(tmp_path / "a" / "fan_plot.csv")
    assert list(plot.frame.columns) == ["year", "level", "value"]
    assert plot.meta["seed"] == "20250101"
    ex = read_table(tmp_path / "a" / "fan_exceedance.csv").frame
    assert ex["above_0.6"].between(0, 1).all()


def test_fan_flags(capsys):
    rep = run_json(capsys, "fan", "--iterations", "500", "--seed", "9", "--percentiles", "5,95")
    assert rep["meta"]["config"]["percentiles"] == [5.0, 95.0]
    assert set(rep["summary"]) == {"p5_2030", "p95_2030"}
    assert main(["fan", "--percentiles", "0,50"]) == EXIT_USAGE


def test_estimate_output_feeds_predictions(tmp_path, capsys, calibration):
    out = tmp_path / "coef.csv"
    assert main(["estimate", "--manifest", str(REPLICATION / "manifest.yaml"),
                 "--config", str(CONF / "estimate.yaml"), "--coefficients-out", str(out)]) == 0
    sets = load_coefficients(out)
    assert sorted(s.horizon for s in sets) == [0, 1, 2]
    # estimated growth sets stand in for the shipped ones in a growth-only prediction
    spec = calibration.spec.evolve(mode=Mode.local_projection, channels=frozenset({"growth"}))
    p = predict_path(sets, spec, calibration.anchor)
    assert len(p.values["growth"]) == spec.horizon_length


def test_counterfactual(capsys):
    same = run_json(capsys, "counterfactual", "--config", str(CONF / "lp.yaml"),
                    "--config", str(CONF / "lp.yaml"))
    assert same["summary"]["peak_reduction"] == 0 and same["summary"]["stabilization_gain_years"] == 0
    assert main(["counterfactual", "--config", str(CONF / "lp.yaml")]) == EXIT_USAGE
    rep = run_json(capsys, "counterfactual", "--config", str(CONF / "counterfactual_a.yaml"),
                   "--config", str(CONF / "counterfactual_b.yaml"), "--appendix-four-channel")
    assert rep["notes"]


def test_csv_stdout(capsys):
    assert main(["baseline", "--format", "csv"]) == 0
    t = parse_table(capsys.readouterr().out)
    assert t.meta["table"] == "path" and t.units["d"] == "fraction"


def test_text_output(capsys):
    assert main(["baseline"]) == 0
    out = capsys.readouterr().out
    assert "crossing_below_60: 2024" in out
