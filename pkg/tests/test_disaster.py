"""Shock vectors, percentile rule and the scenario modes."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from debtstress.core import MacroAssumptions, project_path
from debtstress.disaster import (Channel, DisasterRecord, EmpiricalDistribution, Mode,
                                 ScenarioSpec, ShockVector, apply_scenario, build_shock_vectors,
                                 deltas, per_period_draws, percentile)

G, PB = Channel.growth, Channel.primary_balance


def test_percentile_hand_values():
    x = np.arange(1.0, 11.0)
    assert percentile(x, 0.25) == pytest.approx(2.75)     # rank 2.75
    assert percentile(x, 0.5) == pytest.approx(5.5)
    assert percentile(x, 0.05) == 1.0                       # rank 0.55 clamps to the minimum
    assert percentile(x, 0.95) == 10.0
    assert percentile([3.0], 0.3) == 3.0


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=60), st.floats(0.01, 0.99))
def test_percentile_matches_weibull_plotting_position(xs, p):
    # numpy's "weibull" method uses the same (n+1)p rank
    expected = np.percentile(np.asarray(xs), 100 * p, method="weibull")
    assert percentile(xs, p) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_percentile_rejects_bad_input():
    with pytest.raises(ValueError):
        percentile([], 0.5)
    with pytest.raises(ValueError):
        percentile([1.0], 1.0)


def _dist():
    # 19 events: horizon 0 growth impacts -0.19..-0.01, pb twice as large
    base = -np.arange(1, 20) / 100.0
    return EmpiricalDistribution({(G, 0): base, (G, 1): base / 2, (PB, 0): 2 * base, (PB, 1): base})


def test_shock_vectors_take_adverse_percentile():
    spec = ScenarioSpec(percentile=0.05)
    vec = build_shock_vectors(_dist(), spec)
    # rank (19+1)*0.05 = 1 -> smallest value, which is the adverse tail for growth and pb
    assert vec[G].deviations == pytest.approx((-0.19, -0.095))
    assert vec[PB].deviations == pytest.approx((-0.38, -0.19))


def test_upper_orientation_uses_other_tail():
    d = EmpiricalDistribution({(Channel.interest, 0): np.arange(1, 20) / 100.0})
    spec = ScenarioSpec(channels={Channel.interest})
    assert build_shock_vectors(d, spec)[Channel.interest].deviations == pytest.approx((0.19,))


def test_missing_channel_raises():
    d = EmpiricalDistribution({(G, 0): [-0.01, -0.02]})
    with pytest.raises(KeyError):
        build_shock_vectors(d, ScenarioSpec())


def test_econometric_mode_needs_coefficients():
    with pytest.raises(ValueError):
        build_shock_vectors(_dist(), ScenarioSpec(mode=Mode.local_projection))


def test_spec_validation():
    for bad in ({"percentile": 0.0}, {"adaptive_capacity": 1.5}, {"seed": -1},
                {"per_period_draw": "sometimes"}, {"decay": 1.0}):
        with pytest.raises(ValueError):
            ScenarioSpec(**bad)
    with pytest.raises(ValueError):
        DisasterRecord(2020, "earthquake", -0.1)
    assert DisasterRecord(2000, "Extreme temperature", 0.01).kind.value == "extreme-temperature"


def _flat(years=range(2025, 2032)):
    n = len(years)
    return MacroAssumptions.from_rows(years, g=[0.02] * n, pi=[0.02] * n, i=[0.03] * n,
                                      pb=[0.0] * n, of=[0.0] * n)


def test_one_off_adds_vector_once_from_start_year():
    base = _flat()
    spec = ScenarioSpec(shock_start_year=2026)
    vectors = {G: ShockVector(G, (-0.03, -0.01)), PB: ShockVector(PB, (-0.02,))}
    shocked, path = apply_scenario(base, 0.6, spec, vectors)
    assert shocked.g.tolist() == pytest.approx([0.02, -0.01, 0.01, 0.02, 0.02, 0.02, 0.02])
    assert shocked.pb.tolist() == pytest.approx([0.0, -0.02, 0, 0, 0, 0, 0])
    # hand recursion for the first two years
    d25 = 0.6 * 1.03 / (1.02 * 1.02)
    d26 = d25 * 1.03 / (0.99 * 1.02) + 0.02
    assert path[2025] == pytest.approx(d25) and path[2026] == pytest.approx(d26)


def test_vectors_truncate_at_window_end():
    base = _flat(range(2025, 2028))
    spec = ScenarioSpec(shock_start_year=2027)
    shocked, _ = apply_scenario(base, 0.6, spec, {G: ShockVector(G, (-0.01, -0.5)),
                                                  PB: ShockVector(PB, (0.0,))})
    assert shocked.g[-1] == pytest.approx(0.01)


def test_start_year_outside_window():
    with pytest.raises(ValueError):
        apply_scenario(_flat(), 0.6, ScenarioSpec(shock_start_year=2040),
                       {G: ShockVector(G, (0.0,)), PB: ShockVector(PB, (0.0,))})


def test_zero_shock_equals_baseline(projections):
    spec = ScenarioSpec()
    zero = {G: ShockVector(G, (0.0,) * 6), PB: ShockVector(PB, (0.0,) * 6)}
    _, path = apply_scenario(projections, 0.58, spec, zero)
    base = project_path(0.58, projections)
    assert np.array_equal(path.d, base.d)
    assert all(v == 0 for v in deltas(path, base).values())


def test_per_period_is_seed_deterministic(projections):
    spec = ScenarioSpec(mode=Mode.per_period, n_paths=500, seed=7)
    d = _dist()
    vec = build_shock_vectors(d, spec)
    p1 = apply_scenario(projections, 0.58, spec, vec, d)[1]
    p2 = apply_scenario(projections, 0.58, spec, vec, d)[1]
    p3 = apply_scenario(projections, 0.58, spec.evolve(seed=8), vec, d)[1]
    assert np.array_equal(p1.d, p2.d)
    assert not np.array_equal(p1.d, p3.d)


def test_per_period_keeps_events_paired():
    spec = ScenarioSpec(mode=Mode.per_period, n_paths=200, seed=3)
    d = _dist()
    draws = per_period_draws(spec, d, 5)
    # pb impact is exactly twice the growth impact for every event
    assert np.allclose(draws[PB], 2 * draws[G])


def test_full_profile_overlaps_add_up():
    spec = ScenarioSpec(mode=Mode.per_period, n_paths=50, seed=3, per_period_draw="full_profile")
    d = EmpiricalDistribution({(G, 0): [-0.02], (G, 1): [-0.01], (PB, 0): [0.0], (PB, 1): [0.0]})
    draws = per_period_draws(spec, d, 4)
    assert draws[G][:, 0] == pytest.approx(-0.02)
    assert draws[G][:, 1:] == pytest.approx(-0.03)


def test_shipped_anchor_profile(calibration):
    """The shipped impact table returns the anchor-event profile at the 5th percentile."""
    vec = build_shock_vectors(calibration.distribution, calibration.spec)
    assert vec[G].as_percent() == (-3.0, -12.5, -5.2, -2.2, -1.2, -0.2)
    assert vec[PB].as_percent() == (-2.5, -0.9, 0.1, 0.8, 0.1, 0.3)
