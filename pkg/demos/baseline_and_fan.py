"""Baseline debt path, what drives it, and how wide the uncertainty is.

    python demos/baseline_and_fan.py
"""
import numpy as np

from debtstress.core import decompose, first_crossing_below, project_path
from debtstress.ingest import default_manifest, load_history, load_projections
from debtstress.stochastic import estimate_distribution, simulate_fan

manifest = default_manifest()
hist, observed = load_history(manifest)
proj, filled = load_projections(manifest)
d0 = observed[proj.years[0] - 1]

path = project_path(d0, proj)
years = list(observed.years) + list(path.years)
print("debt below 60% of GDP from", first_crossing_below(years, np.r_[observed.d, path.d]))
for p in filled:
    print(f"  {p.column} {p.year} filled with {p.value:.4f} ({p.rule})")

print("\nyear   debt  interest inflation  growth     pb     of")
for r in decompose(d0, proj):
    print(f"{r.year} {r.d_prev + r.delta_d:6.3f} {r.interest_contrib:8.4f} {r.inflation_contrib:9.4f}"
          f" {r.growth_contrib:7.4f} {r.pb_contrib:6.3f} {r.of_contrib:6.3f}")

# joint normal shocks with the 2015-2024 covariance
dist = estimate_distribution(hist, 2015, 2024)
print("\ncorrelations g, i, pi, pb:")
sd = np.sqrt(np.diag(dist.sigma))
print(np.round(dist.sigma / np.outer(sd, sd), 2))

fan = simulate_fan(d0, proj, dist, n=10_000, seed=20250101)
print("\nyear    p10    p50    p90")
for k, y in enumerate(fan.years):
    print(y, *(f"{fan.band(lv)[k]:.3f}" for lv in (10, 50, 90)))

# which driver contributes most of the spread?  shut each one off in turn
for v in ("g", "i", "pi", "pb"):
    f = simulate_fan(d0, proj, dist.holding_fixed(v), n=10_000, seed=20250101, keep_paths=False)
    print(f"{v:>2} fixed: 2030 p10-p90 width {f.at(2030, 90) - f.at(2030, 10):.3f}")
