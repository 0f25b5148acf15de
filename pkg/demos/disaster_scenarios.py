"""A 2025 earthquake under the four scenario modes, and what fiscal space buys.

    python demos/disaster_scenarios.py
"""
from debtstress.core import project_path
from debtstress.disaster import Mode
from debtstress.ingest import default_manifest, load_history, load_manifest_calibration, load_projections
from debtstress.report import counterfactual_report, load_config, run_scenario

manifest = default_manifest()
cal = load_manifest_calibration(manifest)
proj, _ = load_projections(manifest)
_, observed = load_history(manifest)
d0 = observed[2024]
base = project_path(d0, proj)

print("year  baseline " + " ".join(f"{m.value[:12]:>12}" for m in Mode))
runs = {}
for mode in Mode:
    c = type(cal)(cal.spec.evolve(mode=mode), cal.distribution, cal.anchor, cal.anchor_event,
                  cal.raw, cal.tables)
    runs[mode] = run_scenario(manifest, c, proj, d0)[1]
for y in base.years:
    print(y, f"{base[y]:9.3f}", " ".join(f"{runs[m][y]:12.3f}" for m in Mode))

# local-projection shocks with their 95% prediction bands
c = type(cal)(cal.spec.evolve(mode=Mode.local_projection), cal.distribution, cal.anchor,
              cal.anchor_event, cal.raw, cal.tables)
pred = run_scenario(manifest, c, proj, d0)[3]
for ch, v in pred.values.items():
    print(f"\n{ch} (pp):", " ".join(f"{x:+.2f} [{lo:+.2f},{hi:+.2f}]"
                                   for x, lo, hi in zip(v, pred.lower[ch], pred.upper[ch])))

# a fiscal surplus before the disaster, no adaptive-capacity term
rep = counterfactual_report(manifest, load_config("replication/configs/counterfactual_a.yaml"),
                            load_config("replication/configs/counterfactual_b.yaml"))
print("\n", rep.summary)
