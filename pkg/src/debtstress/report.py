"""Assembling results into reports: text tables for the terminal, JSON and
tabular files for replication archives.

Every report records the manifest digest, the resolved configuration and the
seed, so a result file says exactly how it was produced.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from . import __version__
from .core import (MacroAssumptions, amplification_terms, decompose, first_crossing_below,
                   project_path, stabilization_year)
from .disaster import Channel, Mode, apply_scenario, build_shock_vectors, deltas
from .econometrics import counterfactual, lp_estimate, predict_path, qr_estimate
from .ingest import (Calibration, DatasetManifest, calibration_from_dict, coefficients_frame, format_table,
                     load_all_coefficients, load_history, load_panel, load_projections,
                     write_coefficients, write_table)
from .stochastic import band_summary, estimate_distribution, simulate_fan

MAASTRICHT = 0.60
FOUR_CHANNELS = frozenset(Channel)
FOUR_CHANNEL_NOTE = ("Four-channel results add inflation and effective-interest responses whose "
                     "coefficients are imprecisely estimated; they should be interpreted with caution.")


@dataclass
class Report:
    command: str
    meta: dict
    tables: dict = field(default_factory=dict)      # name -> DataFrame
    summary: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)   # file name -> text

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "meta": self.meta,
            "summary": self.summary,
            "notes": self.notes,
            "tables": {k: json.loads(v.to_json(orient="records", double_precision=15))
                       for k, v in self.tables.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, default=_json_default)

    def render_text(self) -> str:
        lines = [f"== {self.command} ==",
                 f"manifest digest: {self.meta.get('manifest_digest', '')[:16]}  seed: {self.meta.get('seed')}"]
        for k, v in self.summary.items():
            lines.append(f"{k}: {_fmt(v)}")
        for name, frame in self.tables.items():
            lines.append("")
            lines.append(f"-- {name} --")
            lines.append(frame.to_string(index=False, float_format=lambda x: f"{x:.4f}"))
        for n in self.notes:
            lines.append("")
            lines.append(f"NOTE: {n}")
        return "\n".join(lines) + "\n"

    def render_csv(self, name: str | None = None) -> str:
        """One table (the first by default) in the tabular file format."""
        name = name or next(iter(self.tables))
        frame = self.tables[name]
        units = {c: _unit_of(c, frame[c]) for c in frame.columns}
        return format_table(frame, units, {"command": self.command, "table": name,
                                           "seed": self.meta.get("seed"),
                                           "manifest_digest": self.meta.get("manifest_digest")})

    def write(self, out_dir) -> list:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / f"{self.command}.json"]
        written[0].write_text(self.to_json(), encoding="utf-8")
        header = {"command": self.command, "seed": self.meta.get("seed"),
                  "manifest_digest": self.meta.get("manifest_digest")}
        for name, frame in self.tables.items():
            units = {c: _unit_of(c, frame[c]) for c in frame.columns}
            written.append(write_table(out / f"{self.command}_{name}.csv", frame, units, header))
        for fname, text in self.artifacts.items():
            p = out / fname
            p.write_text(text, encoding="utf-8")
            written.append(p)
        return written


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (set, frozenset, tuple)):
        return sorted(o) if isinstance(o, (set, frozenset)) else list(o)
    if hasattr(o, "value"):
        return o.value
    return str(o)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def _unit_of(col, series):
    if col in ("year",):
        return "year"
    if col in ("iteration", "horizon", "n_obs", "n_countries"):
        return "count"
    if series.dtype == object:
        return "text"
    if col in ("level",):
        return "index"
    return "fraction"


# ------------------------------------------------------------------------------- config

def load_config(path) -> dict:
    if path is None:
        return {}
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: configuration must be a mapping")
    return doc


def resolve(manifest: DatasetManifest, config: dict, *, mode=None, seed=None,
            four_channel=False) -> tuple:
    """Calibration file overlaid with a run configuration and command-line overrides."""
    manifest.require("calibration")
    doc = yaml.safe_load(manifest.one("calibration").path.read_text(encoding="utf-8")) or {}
    merged = dict(doc)
    merged.update({k: v for k, v in config.items() if k not in ("end_year", "label")})
    if mode is not None:
        merged["mode"] = mode
    if seed is not None:
        merged["seed"] = seed
    if four_channel:
        merged["channels"] = sorted(c.value for c in FOUR_CHANNELS)
    cal = calibration_from_dict(merged)
    if FOUR_CHANNELS <= cal.spec.channels and cal.spec.mode in (Mode.one_off, Mode.per_period):
        raise ValueError("the four-channel scenario needs an econometric mode "
                         "(local_projection or quantile_regression)")
    resolved = {k: v for k, v in merged.items() if k != "impacts"}
    resolved["mode"] = cal.spec.mode.value
    resolved["channels"] = sorted(c.value for c in cal.spec.channels)
    return cal, resolved


def _meta(manifest, config, seed, **extra) -> dict:
    m = {"manifest_digest": manifest.digest(), "config": config, "seed": seed,
         "version": __version__}
    m.update(extra)
    return m


def _path_frame(path, label="d"):
    return pd.DataFrame({"year": list(path.years), label: path.d})


def _decomposition_frame(d0, a: MacroAssumptions):
    rows = [{"year": r.year, "d_prev": r.d_prev, "interest": r.interest_contrib,
             "inflation": r.inflation_contrib, "growth": r.growth_contrib,
             "primary_balance": r.pb_contrib, "other_flows": r.of_contrib, "delta_d": r.delta_d}
            for r in decompose(d0, a)]
    f = pd.DataFrame(rows)
    f["amplification"] = amplification_terms(a)
    return f


def _baseline_inputs(manifest, end_year=None):
    history, observed = load_history(manifest)
    proj, provenance = load_projections(manifest)
    if end_year is not None:
        if end_year < proj.years[-1]:
            proj = proj.subset(proj.years[0], end_year)
        else:
            proj = proj.extend_to(end_year)
    d0 = observed[proj.years[0] - 1]
    return history, observed, proj, provenance, d0


# ----------------------------------------------------------------------------- commands

def baseline_report(manifest: DatasetManifest, end_year: int | None = None, config=None) -> Report:
    config = dict(config or {})
    end_year = end_year or config.get("end_year")
    history, observed, proj, provenance, d0 = _baseline_inputs(manifest, end_year)
    path = project_path(d0, proj)
    years = list(observed.years) + list(path.years)
    d_all = np.r_[observed.d, path.d]
    crossing = first_crossing_below(years, d_all, MAASTRICHT)
    rep = Report("baseline", _meta(manifest, config, None, end_year=proj.years[-1]))
    rep.tables["path"] = pd.DataFrame({"year": years, "d": d_all,
                                       "source": ["history"] * len(observed.years)
                                       + ["projection"] * len(path.years)})
    rep.tables["decomposition"] = _decomposition_frame(d0, proj)
    rep.summary = {"d0": d0, "crossing_below_60": crossing,
                   f"d_{path.years[-1]}": path.d[-1]}
    if provenance:
        rep.tables["provenance"] = pd.DataFrame([p.__dict__ for p in provenance])
    return rep


def run_scenario(manifest: DatasetManifest, cal: Calibration, proj: MacroAssumptions, d0: float):
    spec = cal.spec
    coeffs = event = None
    if spec.mode in (Mode.local_projection, Mode.quantile_regression):
        kind = "LP" if spec.mode is Mode.local_projection else "QR"
        coeffs = cal.coefficients_for(load_all_coefficients(manifest), kind)
        event = cal.anchor
    predicted = None
    if coeffs is not None:
        predicted = predict_path(coeffs, spec, event)
        vectors = predicted.to_shock_vectors()
    else:
        vectors = build_shock_vectors(cal.distribution, spec)
    shocked, path = apply_scenario(proj, d0, spec, vectors, cal.distribution)
    return shocked, path, vectors, predicted


def scenario_report(manifest, config=None, *, mode=None, seed=None, four_channel=False) -> Report:
    config = dict(config or {})
    cal, resolved = resolve(manifest, config, mode=mode, seed=seed, four_channel=four_channel)
    _, _, proj, _, d0 = _baseline_inputs(manifest, config.get("end_year"))
    base = project_path(d0, proj)
    shocked, path, vectors, predicted = run_scenario(manifest, cal, proj, d0)
    rep = Report("scenario", _meta(manifest, resolved, cal.spec.seed))
    dl = deltas(path, base)
    rep.tables["paths"] = pd.DataFrame({"year": list(base.years), "baseline": base.d,
                                        "scenario": path.d, "delta": [dl[y] for y in base.years]})
    shock_rows = []
    for ch, v in sorted(vectors.items(), key=lambda kv: kv[0].value):
        for h, x in enumerate(v.deviations):
            row = {"channel": ch.value, "horizon": h, "deviation": x}
            if predicted is not None and predicted.lower is not None:
                row["lower"] = predicted.lower[ch.value][h] / 100.0
                row["upper"] = predicted.upper[ch.value][h] / 100.0
            shock_rows.append(row)
    rep.tables["shocks"] = pd.DataFrame(shock_rows)
    rep.tables["decomposition"] = _decomposition_frame(d0, shocked)
    changes = np.diff(np.r_[d0, path.d])
    k = int(np.argmax(changes))
    rep.summary = {"mode": cal.spec.mode.value, f"d_{path.years[-1]}": path.d[-1],
                   f"baseline_{base.years[-1]}": base.d[-1],
                   "largest_annual_increase": float(changes[k]),
                   "largest_increase_year": int(path.years[k])}
    if four_channel:
        rep.notes.append(FOUR_CHANNEL_NOTE)
    return rep


def counterfactual_report(manifest, config_a=None, config_b=None, *, mode=None,
                          four_channel=False) -> Report:
    config_a, config_b = dict(config_a or {}), dict(config_b or {})
    cal_a, res_a = resolve(manifest, config_a, mode=mode, four_channel=four_channel)
    cal_b, res_b = resolve(manifest, config_b, mode=mode, four_channel=four_channel)
    if cal_a.spec.mode not in (Mode.local_projection, Mode.quantile_regression):
        raise ValueError("counterfactuals compare econometric scenarios; set mode to "
                         "local_projection or quantile_regression")
    end = max(config_a.get("end_year", 2040), config_b.get("end_year", 2040))
    _, _, proj, _, d0 = _baseline_inputs(manifest, end)
    kind = "LP" if cal_a.spec.mode is Mode.local_projection else "QR"
    coeffs = cal_a.coefficients_for(load_all_coefficients(manifest), kind)
    cf = counterfactual(cal_a.spec, cal_b.spec, coeffs, cal_a.anchor)
    _, pa = apply_scenario(proj, d0, cal_a.spec, cf.a.to_shock_vectors())
    _, pb = apply_scenario(proj, d0, cal_b.spec, cf.b.to_shock_vectors())
    start = cal_a.spec.shock_start_year
    sa = stabilization_year(pa.years, pa.d, start + 1)
    sb = stabilization_year(pb.years, pb.d, start + 1)
    rep = Report("counterfactual", _meta(manifest, {"a": res_a, "b": res_b}, cal_a.spec.seed))
    rep.tables["paths"] = pd.DataFrame({"year": list(pa.years), "a": pa.d, "b": pb.d,
                                        "difference": pb.d - pa.d})
    rep.tables["shock_difference"] = pd.DataFrame(
        [{"channel": ch, "horizon": h, "difference": x / 100.0}
         for ch, v in sorted(cf.difference.items()) for h, x in enumerate(v)])
    rep.summary = {"peak_a": float(pa.d.max()), "peak_b": float(pb.d.max()),
                   "peak_reduction": float(pa.d.max() - pb.d.max()),
                   "stabilization_a": sa, "stabilization_b": sb,
                   "stabilization_gain_years": (sa - sb) if sa is not None and sb is not None else None}
    if four_channel:
        rep.notes.append(FOUR_CHANNEL_NOTE)
    return rep


def fan_report(manifest, config=None, *, n=None, seed=None, levels=None, thresholds=(MAASTRICHT,),
               workers=1, paths_dump=False) -> Report:
    config = dict(config or {})
    n = int(n if n is not None else config.get("iterations", 10_000))
    seed = int(seed if seed is not None else config.get("seed", 0))
    levels = tuple(levels if levels is not None else config.get("percentiles", (10, 25, 50, 75, 90)))
    history, observed, proj, _, d0 = _baseline_inputs(manifest, config.get("end_year"))
    window = config.get("history_window", [2015, 2024])
    dist = estimate_distribution(history, window[0], window[1])
    fixed = config.get("hold_fixed", [])
    if fixed:
        dist = dist.holding_fixed(*fixed)
    fan = simulate_fan(d0, proj, dist, n, seed, levels, workers=workers,
                       rho=float(config.get("ar1", 0.0)))
    resolved = {"iterations": n, "seed": seed, "percentiles": list(fan.levels),
                "history_window": list(window), "hold_fixed": list(fixed),
                "ar1": float(config.get("ar1", 0.0))}
    rep = Report("fan", _meta(manifest, resolved, seed, generator=fan.to_dict()["generator"]))
    bands = pd.DataFrame({"year": list(fan.years)})
    for lv, row in zip(fan.levels, fan.bands):
        bands[f"p{lv:g}"] = row
    bands["baseline"] = project_path(d0, proj).d
    rep.tables["bands"] = bands
    exceed = band_summary(fan, thresholds)
    ex = pd.DataFrame({"year": list(fan.years)})
    for thr, probs in exceed.items():
        ex[f"above_{thr:g}"] = [probs[y] for y in fan.years]
    rep.tables["exceedance"] = ex
    rep.tables["plot"] = pd.DataFrame(fan.plot_rows(), columns=["year", "level", "value"])
    rep.artifacts["fan.json"] = fan.to_json()
    if paths_dump:
        from .stochastic import paths_table
        rep.tables["paths"] = paths_table(fan)
    year = int(config.get("summary_year", 2030))
    if year not in fan.years:
        year = fan.years[-1]
    rep.summary = {f"p{lv:g}_{year}": fan.at(year, lv) for lv in fan.levels}
    return rep


def estimate_report(manifest, model_kind: str, outcome: str, horizons=(0, 1, 2), tau=0.95,
                    cluster=False) -> Report:
    panel = load_panel(manifest)
    sets = []
    for h in horizons:
        if model_kind.upper() == "LP":
            sets.append(lp_estimate(panel, outcome, h, cluster=cluster, table="estimated"))
        else:
            sets.append(qr_estimate(panel, outcome, tau, h, table="estimated"))
    rep = Report("estimate", _meta(manifest, {"model": model_kind.upper(), "outcome": outcome,
                                              "horizons": list(horizons), "tau": tau,
                                              "cluster": cluster}, None))
    rep.tables["coefficients"] = coefficients_frame(sets)
    rep.summary = {"n_obs": ", ".join(str(s.n_obs) for s in sets)}
    rep.coefficient_sets = sets
    return rep


def write_estimates(rep: Report, path) -> Path:
    return write_coefficients(path, rep.coefficient_sets,
                              meta={"content": "estimated by debtstress estimate",
                                    "manifest_digest": rep.meta["manifest_digest"]})
