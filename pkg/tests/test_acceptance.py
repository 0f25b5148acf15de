"""Acceptance suite: one check per criterion, each at its stated tolerance.

Run under pytest (a summary line per criterion is printed at the end of the
session) or directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from debtstress.core import contributions, debt_step, first_crossing_below, project_path
from debtstress.disaster import Channel, Mode, build_shock_vectors
from debtstress.econometrics import (DEFAULT_TRUTH, exhaustive_qr, lp_estimate, quantreg,
                                     residual_orthogonality, select, synthetic_panel)
from debtstress.ingest import (backtest, default_manifest, load_all_coefficients, load_history,
                               load_manifest_calibration, load_projections)
from debtstress.report import counterfactual_report, load_config, run_scenario
from debtstress.stochastic import ShockDistribution, estimate_distribution, simulate_fan

from conftest import ACCEPTANCE_LINES, REPLICATION

CONF = REPLICATION / "configs"
CRITERIA = {}


def criterion(number, title):
    def register(fn):
        CRITERIA[number] = (title, fn)
        return fn
    return register


def _shipped():
    m = default_manifest()
    proj, _ = load_projections(m)
    hist, observed = load_history(m)
    return m, proj, hist, observed, observed[proj.years[0] - 1]


@criterion(1, "baseline replication")
def baseline():
    t0 = time.perf_counter()
    m, proj, hist, observed, d0 = _shipped()
    path = project_path(d0, proj)
    years = list(observed.years) + list(path.years)
    crossing = first_crossing_below(years, np.r_[observed.d, path.d], 0.60)
    elapsed = time.perf_counter() - t0
    d30, d31 = path[2030], path[2031]
    ok = crossing == 2024 and 0.54 <= d30 <= 0.57 and abs(d31 - 0.554) <= 0.01 and elapsed < 0.1
    return ok, f"crossing {crossing}, 2030 {d30:.4f}, 2031 {d31:.4f} (0.554 +-0.010), {elapsed:.3f}s"


@criterion(2, "scenario endpoints")
def endpoints():
    m, proj, _, _, d0 = _shipped()
    cal = load_manifest_calibration(m)
    targets = {Mode.one_off: (0.717, 0.010), Mode.per_period: (0.732, 0.015),
               Mode.local_projection: (0.674, 0.015), Mode.quantile_regression: (0.672, 0.015)}
    ok, parts = True, []
    for mode, (target, tol) in targets.items():
        c = type(cal)(cal.spec.evolve(mode=mode), cal.distribution, cal.anchor, cal.anchor_event,
                      cal.raw, cal.tables)
        d31 = run_scenario(m, c, proj, d0)[1][2031]
        ok &= abs(d31 - target) <= tol
        parts.append(f"{mode.value} {d31:.4f} ({target}+-{tol})")
    return ok, ", ".join(parts)


@criterion(3, "shock-vector fidelity")
def shock_vectors():
    cal = load_manifest_calibration(default_manifest())
    vec = build_shock_vectors(cal.distribution, cal.spec)
    g, pb = vec[Channel.growth].as_percent(), vec[Channel.primary_balance].as_percent()
    ok = (g == (-3.0, -12.5, -5.2, -2.2, -1.2, -0.2)) and (pb == (-2.5, -0.9, 0.1, 0.8, 0.1, 0.3))
    return ok, f"growth {g}, pb {pb}"


@criterion(4, "decomposition additivity")
def additivity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20250101)
    n = 10_000
    d = rng.uniform(0.0, 2.0, n)
    g, pi, i = rng.uniform(-0.15, 0.2, n), rng.uniform(-0.05, 0.2, n), rng.uniform(0.0, 0.12, n)
    pb, of = rng.uniform(-0.1, 0.06, n), rng.uniform(-0.05, 0.08, n)
    parts = contributions(d, g, pi, i, pb, of)
    total = sum(parts)
    delta = np.array([debt_step(*a) for a in zip(d, g, pi, i, pb, of)]) - d
    # relative to the magnitude of the summed terms: a bare |delta| denominator is
    # unbounded when the drivers cancel to a near-zero change
    scale = np.maximum(np.abs(delta), sum(np.abs(p) for p in parts))
    rel = float(np.max(np.abs(total - delta) / scale))
    raw = float(np.max(np.abs(total - delta) / np.maximum(np.abs(delta), 1e-300)))
    elapsed = time.perf_counter() - t0
    return rel <= 1e-12 and elapsed < 1.0, \
        f"max rel err {rel:.2e} (vs |delta d| alone {raw:.1e}), {elapsed:.3f}s"


@criterion(5, "fan-chart properties")
def fan_properties():
    m, proj, hist, _, d0 = _shipped()
    zero = simulate_fan(d0, proj, ShockDistribution.zero(), n=1000, seed=1)
    base = project_path(d0, proj).d
    collapses = all(np.array_equal(row, base) for row in zero.bands)
    dist = estimate_distribution(hist, 2015, 2024)
    t0 = time.perf_counter()
    fan = simulate_fan(d0, proj, dist, n=10_000, seed=20250101)
    elapsed = time.perf_counter() - t0
    again = simulate_fan(d0, proj, dist, n=10_000, seed=20250101)
    monotone = bool(np.all(np.diff(fan.bands, axis=0) >= 0))
    same = fan.to_json() == again.to_json()
    ok = collapses and monotone and same and elapsed < 1.0 and len(proj.years) == 7
    return ok, (f"zero-sigma exact {collapses}, monotone {monotone}, identical {same}, "
                f"10k x {len(proj.years)} years in {elapsed:.3f}s")


@criterion(6, "fan endpoints")
def fan_endpoints():
    m, proj, hist, _, d0 = _shipped()
    cfg = load_config(CONF / "fan.yaml")
    w = cfg["history_window"]
    fan = simulate_fan(d0, proj, estimate_distribution(hist, w[0], w[1]), n=cfg["iterations"],
                       seed=cfg["seed"])
    p10, p90 = fan.at(2030, 10), fan.at(2030, 90)
    ok = abs(p10 - 0.50) <= 0.02 and abs(p90 - 0.70) <= 0.02
    return ok, f"2030 p10 {p10:.4f} (0.50+-0.02), p90 {p90:.4f} (0.70+-0.02)"


@criterion(7, "LP estimator oracle")
def lp_oracle():
    panel = synthetic_panel(n_countries=150, n_years=30, seed=2)
    cs = lp_estimate(panel, "gdp_growth", 0)
    z = max(abs(cs.coefficients[k] - v) / cs.standard_errors[k] for k, v in DEFAULT_TRUTH.items())
    orth = float(np.max(np.abs(residual_orthogonality(panel, cs))))
    return z <= 2.0 and orth <= 1e-8, f"max |error|/SE {z:.2f}, orthogonality {orth:.1e}"


@criterion(8, "QR solver oracle")
def qr_oracle():
    rng = np.random.default_rng(7)
    worst, coverage_ok, cases = 0.0, True, 0
    for k in range(400):
        n = int(rng.integers(4, 13))
        x = rng.normal(size=n) * 5
        y = rng.normal(size=n) * 5
        if k % 3 == 1:
            x, y = np.round(x), np.round(y)          # ties and exact fits
        X = np.column_stack([np.ones(n), x])
        if np.linalg.matrix_rank(X) < 2:
            continue
        for tau in (0.5, 0.95):
            fit = quantreg(X, y, tau)
            _, best = exhaustive_qr(X, y, tau)
            worst = max(worst, (fit.loss - best) / max(best, 1e-300))
            r = y - X @ fit.beta
            tol = 1e-9 * (1 + np.max(np.abs(y)))
            below, on = np.sum(r < -tol), np.sum(np.abs(r) <= tol)
            coverage_ok &= below <= n * tau + 1e-9 <= below + on + 1e-9
            cases += 1
    return worst <= 1e-6 and coverage_ok, \
        f"{cases} fits, worst relative loss gap {worst:.1e}, coverage {coverage_ok}"


@criterion(9, "counterfactual direction")
def counterfactual_direction():
    rep = counterfactual_report(default_manifest(), load_config(CONF / "counterfactual_a.yaml"),
                                load_config(CONF / "counterfactual_b.yaml"))
    s = rep.summary
    gain = s["stabilization_gain_years"]
    ok = 0.02 <= s["peak_reduction"] <= 0.05 and gain is not None and gain >= 1
    return ok, (f"peak reduction {100 * s['peak_reduction']:.2f} pp ([2, 5]), stabilization "
                f"{s['stabilization_a']} -> {s['stabilization_b']} (gain {gain}, need >= 1)")


@criterion(10, "backtest")
def backtest_sfa():
    _, _, hist, observed, _ = _shipped()
    rows = {r.year: r for r in backtest(hist, observed)}
    s20, s24 = rows[2020].implied_sfa, rows[2024].implied_sfa
    ok = abs(s20 - 0.026) <= 0.003 and abs(s24 + 0.012) <= 0.003
    return ok, f"implied SFA 2020 {100 * s20:+.2f} pp, 2024 {100 * s24:+.2f} pp"


# (table, outcome, horizon, term, estimate, se) as published in the coefficient tables
CELLS = [
    ("A.1", "gdp_growth", 0, "shock", 6.160, 1.886),
    ("A.1", "gdp_growth", 1, "shock", 8.101, 2.201),
    ("A.1", "gdp_growth", 2, "onset_ndcapacity", -0.788, 4.649),
    ("A.1", "gdp_growth", 0, "lagged_outcome", 0.299, 0.027),
    ("A.1", "gdp_growth", 1, "constant", -5.445, 2.968),
    ("A.2", "primary_balance", 0, "shock", 13.566, 4.163),
    ("A.2", "primary_balance", 1, "shock", 35.889, 5.211),
    ("A.2", "primary_balance", 2, "shock", 34.052, 4.661),
    ("A.2", "primary_balance", 0, "lagged_outcome", 0.985, 0.183),
    ("A.2", "primary_balance", 2, "lagged_extrand1995", -1.871, 10.530),
    ("A.2", "primary_balance", 1, "onset_ae", -2.744, 1.413),
    ("A.3", "effective_interest_lc", 2, "shock", 35.566, 28.851),
    ("A.3", "effective_interest_lc", 1, "onset_damage", 2.839, 1.325),
    ("A.3", "effective_interest_lc", 2, "onset_ndextra", 8.585, 7.207),
    ("A.3", "effective_interest_lc", 0, "onset_fb", 0.381, 0.150),
    ("A.4", "gdp_deflator", 0, "shock", -13.764, 11.370),
    ("A.4", "gdp_deflator", 0, "onset_ndextra", 30.607, 30.274),
    ("A.4", "gdp_deflator", 2, "constant", 15.802, 9.806),
    ("A.4", "gdp_deflator", 1, "lagged_outcome", 0.437, 0.050),
    ("A.5", "gdp_growth", 2, "lagged_extrand1995", 9.040, 5.082),
    ("A.6", "primary_balance", 1, "onset_ndcapacity", -2.943, 4.116),
    ("A.7", "effective_interest_lc", 0, "lagged_extrand1995", 5.932, 4.935),
    ("A.8", "gdp_deflator", 2, "onset_ndextra", -22.103, 13.425),
]
# (table, outcome, horizon, prediction SE, observations, R^2, countries)
FOOTERS = [
    ("A.1", "gdp_growth", 0, 0.7268, 4321, 0.199, 172),
    ("A.2", "primary_balance", 0, 1.260, 4390, None, 170),
    ("A.2", "primary_balance", 2, 1.843, 4054, None, 170),
    ("A.3", "effective_interest_lc", 2, 1.8689, 1983, None, 118),
    ("A.4", "gdp_deflator", 1, 2.436, 4177, None, 170),
    ("A.5", "gdp_growth", 1, 0.865, 4151, 0.132, 172),
    ("A.7", "effective_interest_lc", 0, 1.179, 2216, None, 118),
    ("A.8", "gdp_deflator", 2, 2.830, 4006, None, 170),
]


@criterion(11, "coefficient transcription")
def transcription():
    sets = load_all_coefficients(default_manifest())
    bad, checked = [], 0
    for table, outcome, h, term, est, se in CELLS:
        (cs,) = select(sets, model_kind="LP", table=table, outcome=outcome, horizon=h)
        checked += 2
        if cs.coefficients.get(term) != est or cs.standard_errors.get(term) != se:
            bad.append(f"{table} {outcome} h{h} {term}")
    for table, outcome, h, pse, nobs, r2, ncty in FOOTERS:
        (cs,) = select(sets, model_kind="LP", table=table, outcome=outcome, horizon=h)
        checked += 3 + (r2 is not None)
        if cs.prediction_se != pse or cs.n_obs != nobs or cs.n_countries != ncty or \
                (r2 is not None and cs.r_squared != r2):
            bad.append(f"{table} {outcome} h{h} footer")
    tables = sorted({cs.table for cs in sets if cs.model_kind == "LP"})
    ok = not bad and checked >= 20 and tables == [f"A.{k}" for k in range(1, 9)]
    return ok, f"{checked} cells checked across {len(tables)} tables, mismatches {bad or 'none'}"


def _run(number):
    title, fn = CRITERIA[number]
    ok, detail = fn()
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    return ok, line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, line = _run(number)
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [_run(k) for k in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
