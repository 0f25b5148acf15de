"""Reading and writing the toolkit's data files.

Tables are comma-separated text with ``# key: value`` metadata lines on top,
a header row, then a units row declaring the unit of every column, then data.
Rates and ratios declared ``percent``/``percent_gdp`` are divided by 100 on
load so everything downstream works in fractions.  Decimal commas are
rejected outright rather than guessed at.

A manifest (YAML) names the file for each role and may pin column names and
units::

    source: IMF WEO, Eurostat
    files:
      history: {path: history.csv, units: {g: percent}}
      projections: projections.csv
      coefficients: [coefficients_lp.csv, coefficients_qr.csv]
"""
from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from .core import SERIES, DebtPath, MacroAssumptions, _step
from .disaster import Channel, DisasterRecord, EmpiricalDistribution, ScenarioSpec
from .econometrics.coefficients import OUTCOMES, CoefficientSet

log = logging.getLogger(__name__)

UNITS = {"year", "percent", "percent_gdp", "fraction", "text", "count", "index", "binary"}
SCALE = {"percent": 0.01, "percent_gdp": 0.01, "fraction": 1.0}
ROLES = ("history", "projections", "disasters", "panel", "coefficients", "calibration")
HISTORY_COLUMNS = ("year",) + SERIES + ("d",)
PROJECTION_COLUMNS = ("year",) + SERIES
HISTORY_WINDOW = (2015, 2024)

_COMMA_DECIMAL = re.compile(r"^[+-]?\d+,\d+$")


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class UnitMismatchError(DataError):
    pass


class MissingYearError(DataError):
    def __init__(self, years, role):
        self.years = tuple(years)
        super().__init__(f"{role}: missing year(s) {', '.join(map(str, self.years))}")


class ExtraColumnWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Table:
    frame: pd.DataFrame
    units: dict
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Provenance:
    year: int
    column: str
    value: float
    rule: str


# ----------------------------------------------------------------------------- tables

def _parse_number(text: str, where: str) -> float:
    s = text.strip()
    if s == "" or s == "--":
        return math.nan
    if _COMMA_DECIMAL.match(s):
        raise DataError(f"{where}: '{s}' uses a decimal comma; only '.' is accepted as decimal separator")
    try:
        return float(s)
    except ValueError:
        raise DataError(f"{where}: '{s}' is not a number") from None


def parse_table(text: str, name: str = "<table>") -> Table:
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        if line.strip():
            body.append(line)
    if len(body) < 2:
        raise DataError(f"{name}: needs a header row and a units row")
    if ";" in body[0] and "," not in body[0]:
        raise DataError(f"{name}: semicolon-delimited file; decimal commas are not supported, "
                        "convert to comma-separated values with '.' decimals")
    rows = list(csv.reader(body))
    header = [h.strip() for h in rows[0]]
    units_row = [u.strip() for u in rows[1]]
    if len(set(header)) != len(header):
        raise DataError(f"{name}: duplicate column names")
    if len(units_row) != len(header):
        raise DataError(f"{name}: units row has {len(units_row)} entries for {len(header)} columns")
    bad = [u for u in units_row if u not in UNITS]
    if bad:
        raise DataError(f"{name}: the second row must declare units, unknown unit(s) {bad}")
    units = dict(zip(header, units_row))
    cols = {h: [] for h in header}
    for k, row in enumerate(rows[2:], start=3):
        if len(row) != len(header):
            hint = " (decimal commas?)" if len(row) > len(header) else ""
            raise DataError(f"{name} line {k}: {len(row)} fields, expected {len(header)}{hint}")
        for h, cell in zip(header, row):
            if units[h] == "text":
                cols[h].append(cell.strip())
            else:
                cols[h].append(_parse_number(cell, f"{name} line {k}, column {h}"))
    frame = pd.DataFrame(cols, columns=header)
    for h in header:
        if units[h] in ("year", "count"):
            v = frame[h].to_numpy(float)
            if np.all(np.isfinite(v)) and np.all(v == np.round(v)):
                frame[h] = v.astype(np.int64)
    return Table(frame, units, meta)


def read_table(path) -> Table:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    return parse_table(path.read_text(encoding="utf-8"), name=str(path))


def _cell(v, unit) -> str:
    if unit == "text":
        return "" if v is None else str(v)
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if unit in ("year", "count") and float(v) == int(v):
        return str(int(v))
    return repr(float(v))


def format_table(frame: pd.DataFrame, units: dict, meta: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = list(frame.columns)
    w.writerow(cols)
    w.writerow([units[c] for c in cols])
    for row in frame.itertuples(index=False):
        w.writerow([_cell(v, units[c]) for v, c in zip(row, cols)])
    return buf.getvalue()


def write_table(path, frame: pd.DataFrame, units: dict, meta: dict | None = None) -> Path:
    path = Path(path)
    path.write_text(format_table(frame, units, meta), encoding="utf-8")
    return path


# --------------------------------------------------------------------------- manifest

@dataclass(frozen=True)
class FileSpec:
    path: Path
    columns: dict = field(default_factory=dict)   # file column -> canonical name
    units: dict = field(default_factory=dict)     # canonical name -> declared unit
    source: str = ""


@dataclass(frozen=True)
class DatasetManifest:
    files: dict
    source: str = ""
    origin: Path | None = None

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(path)
        doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        return cls.from_dict(doc, base=path.parent, origin=path)

    @classmethod
    def from_dict(cls, doc: dict, base=".", origin=None) -> "DatasetManifest":
        if not isinstance(doc, dict) or not doc.get("files"):
            raise DataError("manifest lists no files")
        base = Path(base)
        files = {}
        for role, entry in doc["files"].items():
            if role not in ROLES:
                raise DataError(f"manifest: unknown role {role!r}")
            entries = entry if isinstance(entry, list) else [entry]
            specs = []
            for e in entries:
                if isinstance(e, str):
                    e = {"path": e}
                specs.append(FileSpec(base / e["path"], dict(e.get("columns", {})),
                                      dict(e.get("units", {})), str(e.get("source", ""))))
            files[role] = specs
        return cls(files, str(doc.get("source", "")), Path(origin) if origin else None)

    def require(self, *roles):
        missing = [r for r in roles if r not in self.files]
        if missing:
            raise DataError(f"manifest lacks required role(s): {', '.join(missing)}")

    def one(self, role) -> FileSpec:
        self.require(role)
        specs = self.files[role]
        if len(specs) != 1:
            raise DataError(f"role {role} expects a single file")
        return specs[0]

    def digest(self) -> str:
        """SHA-256 over every referenced file's bytes, in role order."""
        h = hashlib.sha256()
        for role in sorted(self.files):
            for spec in self.files[role]:
                h.update(role.encode())
                h.update(spec.path.name.encode())
                h.update(spec.path.read_bytes())
        return h.hexdigest()


def default_manifest() -> DatasetManifest:
    return DatasetManifest.load(resources.files("debtstress") / "data" / "manifest.yaml")


def _load_role_table(spec: FileSpec, expected) -> Table:
    t = read_table(spec.path)
    frame = t.frame.rename(columns=spec.columns)
    units = {spec.columns.get(k, k): v for k, v in t.units.items()}
    for col, unit in spec.units.items():
        if col in units and units[col] != unit:
            raise UnitMismatchError(f"{spec.path.name}: column {col} declared {unit!r} in the manifest "
                                    f"but {units[col]!r} in the file")
    missing = [c for c in expected if c not in frame.columns]
    if missing:
        raise DataError(f"{spec.path.name}: missing column(s) {missing}")
    extra = [c for c in frame.columns if c not in expected]
    if extra:
        warnings.warn(f"{spec.path.name}: ignoring extra column(s) {extra}", ExtraColumnWarning,
                      stacklevel=3)
    return Table(frame, units, t.meta)


def _to_fraction(values, unit, column, name):
    if unit not in SCALE:
        raise UnitMismatchError(f"{name}: column {column} has unit {unit!r}, expected percent or fraction")
    return np.asarray(values, float) * SCALE[unit]


def _years(frame, name, role):
    years = frame["year"].to_numpy()
    if len(np.unique(years)) != len(years):
        raise DataError(f"{name}: duplicate years")
    order = np.argsort(years, kind="stable")
    frame = frame.iloc[order].reset_index(drop=True)
    years = frame["year"].to_numpy().astype(int)
    gaps = sorted(set(range(years[0], years[-1] + 1)) - set(years.tolist()))
    if gaps:
        raise MissingYearError(gaps, role)
    return frame, years


# ----------------------------------------------------------------------------- loaders

def load_history(manifest: DatasetManifest, window=HISTORY_WINDOW):
    """Historical drivers and observed debt.  Returns (MacroAssumptions, DebtPath)."""
    spec = manifest.one("history")
    t = _load_role_table(spec, HISTORY_COLUMNS)
    frame, years = _years(t.frame, spec.path.name, "history")
    need = [y for y in range(window[0], window[1] + 1) if y not in set(years.tolist())]
    if need:
        raise MissingYearError(need, "history")
    series = {}
    for c in SERIES + ("d",):
        vals = _to_fraction(frame[c], t.units[c], c, spec.path.name)
        if not np.all(np.isfinite(vals)):
            bad = years[~np.isfinite(vals)]
            raise DataError(f"{spec.path.name}: column {c} blank in year(s) {bad.tolist()}")
        series[c] = vals
    d = series.pop("d")
    return MacroAssumptions(years=tuple(years), **series), DebtPath(tuple(years), d)


def fill_other_flows(years, of, rule="average of previous years"):
    """Blank ``of`` cells become the mean of the previously available (non-filled) years."""
    of = np.array(of, float)
    filled = []
    observed = np.isfinite(of)
    for k in range(of.size):
        if observed[k]:
            continue
        prev = of[:k][observed[:k]]
        if prev.size == 0:
            raise DataError(f"other flows blank in {years[k]} with no earlier year to average")
        of[k] = prev.mean()
        filled.append(Provenance(int(years[k]), "of", float(of[k]), rule))
    return of, filled


def load_projections(manifest: DatasetManifest):
    """Projected drivers.  Returns (MacroAssumptions, provenance list)."""
    spec = manifest.one("projections")
    t = _load_role_table(spec, PROJECTION_COLUMNS)
    frame, years = _years(t.frame, spec.path.name, "projections")
    series = {c: _to_fraction(frame[c], t.units[c], c, spec.path.name) for c in SERIES}
    for c in ("g", "pi", "i", "pb"):
        if not np.all(np.isfinite(series[c])):
            bad = years[~np.isfinite(series[c])]
            raise DataError(f"{spec.path.name}: column {c} blank in year(s) {bad.tolist()}")
    series["of"], provenance = fill_other_flows(years, series["of"])
    for p in provenance:
        log.info("filled %s %d with %.6f (%s)", p.column, p.year, p.value, p.rule)
    return MacroAssumptions(years=tuple(years), **series), provenance


def load_disasters(manifest: DatasetManifest) -> list:
    spec = manifest.one("disasters")
    t = _load_role_table(spec, ("year", "kind", "location", "damage_gdp", "affected_pop"))
    f = t.frame
    dmg = _to_fraction(f["damage_gdp"], t.units["damage_gdp"], "damage_gdp", spec.path.name)
    pop = _to_fraction(f["affected_pop"], t.units["affected_pop"], "affected_pop", spec.path.name)
    loc = f["location"]
    return [DisasterRecord(int(y), k, float(dm), None if math.isnan(p) else float(p), str(lc))
            for y, k, dm, p, lc in zip(f["year"], f["kind"], dmg, pop, loc)]


PANEL_REQUIRED = ("country", "year", "lcompshock", "onset", "damage", "ae", "nd_capacity", "fb",
                  "extrand1995")


def load_panel(manifest: DatasetManifest) -> pd.DataFrame:
    """Country-year panel in the coefficient tables' percent units."""
    spec = manifest.one("panel")
    t = read_table(spec.path)
    frame = t.frame.rename(columns=spec.columns)
    units = {spec.columns.get(k, k): v for k, v in t.units.items()}
    missing = [c for c in PANEL_REQUIRED if c not in frame.columns]
    if missing:
        raise DataError(f"{spec.path.name}: missing column(s) {missing}")
    for c in OUTCOMES + ("damage", "fb"):
        if c in frame.columns and units[c] == "fraction":
            frame[c] = frame[c] * 100.0
    frame = frame.sort_values(["country", "year"], kind="stable").reset_index(drop=True)
    return frame


# -------------------------------------------------------------------------- coefficients

COEF_COLUMNS = ("table", "model", "outcome", "horizon", "term", "label", "estimate", "se",
                "prediction_se", "tau", "n_obs", "r_squared", "n_countries")
COEF_UNITS = dict(zip(COEF_COLUMNS, ("text", "text", "text", "count", "text", "text", "percent",
                                     "percent", "percent", "fraction", "count", "fraction", "count")))


def _opt(v, cast):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return None
    return cast(v)


def load_coefficients(path) -> list:
    """Coefficient sets from one file, grouped by (table, model, outcome, horizon)."""
    t = read_table(path)
    f = t.frame
    missing = [c for c in ("model", "outcome", "horizon", "term", "estimate", "se", "prediction_se")
               if c not in f.columns]
    if missing:
        raise DataError(f"{path}: missing column(s) {missing}")
    if "table" not in f.columns:
        f = f.assign(table="")
    out = []
    for (table, model, outcome, h), g in f.groupby(["table", "model", "outcome", "horizon"], sort=False):
        pse = g["prediction_se"].unique()
        if len(pse) != 1:
            raise DataError(f"{path}: several prediction SEs for {table} {outcome} h={h}")
        first = g.iloc[0]
        out.append(CoefficientSet(
            model_kind=model, outcome=outcome, horizon=int(h),
            coefficients=dict(zip(g["term"], g["estimate"].astype(float))),
            standard_errors=dict(zip(g["term"], g["se"].astype(float))),
            prediction_se=float(pse[0]),
            tau=_opt(first.get("tau"), float),
            n_obs=_opt(first.get("n_obs"), int),
            r_squared=_opt(first.get("r_squared"), float),
            n_countries=_opt(first.get("n_countries"), int),
            table=str(table),
            labels=dict(zip(g["term"], g["label"])) if "label" in g else {}))
    return out


def coefficients_frame(sets) -> pd.DataFrame:
    rows = []
    for cs in sets:
        for term, est in cs.coefficients.items():
            rows.append({"table": cs.table, "model": cs.model_kind, "outcome": cs.outcome,
                         "horizon": cs.horizon, "term": term, "label": cs.labels.get(term, term),
                         "estimate": est, "se": cs.standard_errors[term],
                         "prediction_se": cs.prediction_se,
                         "tau": math.nan if cs.tau is None else cs.tau,
                         "n_obs": math.nan if cs.n_obs is None else cs.n_obs,
                         "r_squared": math.nan if cs.r_squared is None else cs.r_squared,
                         "n_countries": math.nan if cs.n_countries is None else cs.n_countries})
    return pd.DataFrame(rows, columns=list(COEF_COLUMNS))


def write_coefficients(path, sets, meta=None) -> Path:
    return write_table(path, coefficients_frame(sets), COEF_UNITS, meta)


def load_all_coefficients(manifest: DatasetManifest) -> list:
    manifest.require("coefficients")
    out = []
    for spec in manifest.files["coefficients"]:
        out.extend(load_coefficients(spec.path))
    return out


# ---------------------------------------------------------------------------- calibration

@dataclass(frozen=True)
class Calibration:
    spec: ScenarioSpec
    distribution: EmpiricalDistribution
    anchor: DisasterRecord
    anchor_event: str
    raw: dict
    tables: dict = field(default_factory=dict)   # model kind -> coefficient table ids

    def coefficients_for(self, sets, model_kind: str) -> list:
        """The coefficient sets this calibration uses for `model_kind` (LP or QR)."""
        kind = model_kind.upper()
        wanted = self.tables.get(kind)
        chosen = [c for c in sets if c.model_kind == kind and (not wanted or c.table in wanted)]
        if not chosen:
            raise DataError(f"no {kind} coefficient sets match tables {wanted}")
        return chosen


def parse_impacts(text: str, units_scale=None) -> tuple:
    """Impact table: one row per (event, channel) with columns h0..hH.  Returns (samples, order)."""
    t = parse_table(text, "impacts")
    f = t.frame
    hcols = [c for c in f.columns if re.fullmatch(r"h\d+", c)]
    if not hcols or "event" not in f.columns or "channel" not in f.columns:
        raise DataError("impacts table needs columns event, channel, h0..hH")
    events = list(dict.fromkeys(f["event"]))
    samples = {}
    for ch, g in f.groupby("channel", sort=False):
        g = g.set_index("event").reindex(events)
        if g[hcols].isna().all(axis=1).any():
            raise DataError(f"impacts: channel {ch} lacks rows for some events")
        for c in hcols:
            vals = _to_fraction(g[c], t.units[c], c, "impacts")
            keep = np.isfinite(vals)
            if keep.any():
                samples[(Channel(ch), int(c[1:]))] = vals if keep.all() else vals[keep]
    return samples, events


def load_calibration(path) -> Calibration:
    path = Path(path)
    doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    return calibration_from_dict(doc)


SPEC_KEYS = ("percentile", "shock_start_year", "fb0", "adaptive_capacity", "seed", "n_paths",
             "per_period_draw", "lcompshock", "extrand1995", "advanced_economy", "decay",
             "horizon_length")


def calibration_from_dict(doc: dict, **overrides) -> Calibration:
    if "impacts" not in doc:
        raise DataError("calibration lacks an impacts table")
    samples, events = parse_impacts(doc["impacts"])
    orient = {Channel(k): v for k, v in (doc.get("orientation") or {}).items()}
    dist = EmpiricalDistribution(samples, orient)
    kw = {k: doc[k] for k in SPEC_KEYS if k in doc}
    if "channels" in doc:
        kw["channels"] = frozenset(doc["channels"])
    if "mode" in doc:
        kw["mode"] = doc["mode"]
    kw.update(overrides)
    spec = ScenarioSpec(**kw)
    a = doc.get("anchor", {})
    anchor = DisasterRecord(int(a.get("year", 2020)), a.get("kind", "earthquake"),
                            float(a.get("damage_gdp", 0.0)), a.get("affected_pop"),
                            str(a.get("location", "")))
    tables = {str(k).upper(): list(v) for k, v in (doc.get("coefficient_tables") or {}).items()}
    return Calibration(spec, dist, anchor, str(a.get("event", events[0])), doc, tables)


def load_manifest_calibration(manifest: DatasetManifest) -> Calibration:
    return load_calibration(manifest.one("calibration").path)


# ------------------------------------------------------------------------------ backtest

@dataclass(frozen=True)
class BacktestRow:
    year: int
    observed_change: float
    predicted_change: float   # flow identity with zero other flows
    implied_sfa: float
    reported_of: float

    @property
    def gap(self) -> float:
        return self.implied_sfa - self.reported_of


def backtest(history: MacroAssumptions, observed: DebtPath, flag_above: float = 0.01) -> list:
    """Observed change in debt against the flow identity without other flows.

    The residual is the implied stock-flow adjustment; rows with
    ``|implied_sfa| > flag_above`` are logged.
    """
    years = [y for y in history.years if y in observed.years and y - 1 in observed.years]
    out = []
    for y in years:
        k = history.index(y)
        d_prev = observed[y - 1]
        pred = float(_step(d_prev, history.g[k], history.pi[k], history.i[k], history.pb[k], 0.0)) - d_prev
        obs = observed[y] - d_prev
        row = BacktestRow(y, obs, pred, obs - pred, float(history.of[k]))
        if abs(row.implied_sfa) > flag_above:
            log.info("%d: implied stock-flow adjustment %.4f (file of %.4f)", y, row.implied_sfa, row.reported_of)
        out.append(row)
    return out
