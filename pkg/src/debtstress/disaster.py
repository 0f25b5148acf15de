"""Disaster shock vectors and the four scenario modes."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .core import DebtPath, MacroAssumptions, _step, project_path


class Channel(str, enum.Enum):
    growth = "growth"
    primary_balance = "primary_balance"
    inflation = "inflation"
    interest = "interest"

    @property
    def series(self) -> str:
        return _SERIES_OF[self]


_SERIES_OF = {Channel.growth: "g", Channel.primary_balance: "pb",
              Channel.inflation: "pi", Channel.interest: "i"}

# which tail is adverse for debt: lower growth/pb/inflation and higher interest raise d
DEFAULT_ORIENTATION = {Channel.growth: "lower", Channel.primary_balance: "lower",
                       Channel.inflation: "lower", Channel.interest: "upper"}


class Mode(str, enum.Enum):
    one_off = "one_off"
    per_period = "per_period"
    local_projection = "local_projection"
    quantile_regression = "quantile_regression"


class DisasterKind(str, enum.Enum):
    earthquake = "earthquake"
    storm = "storm"
    flood = "flood"
    drought = "drought"
    wildfire = "wildfire"
    extreme_temperature = "extreme-temperature"

    @classmethod
    def parse(cls, text: str) -> "DisasterKind":
        key = text.strip().lower().replace("_", "-").replace(" ", "-")
        return cls(key)


@dataclass(frozen=True)
class DisasterRecord:
    year: int
    kind: DisasterKind
    damage_gdp: float
    affected_pop: float | None = None
    location: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", DisasterKind.parse(str(getattr(self.kind, "value", self.kind))))
        if not (self.damage_gdp >= 0):
            raise ValueError(f"damage_gdp must be >= 0, got {self.damage_gdp}")
        if self.affected_pop is not None and not (0 <= self.affected_pop <= 1):
            raise ValueError(f"affected_pop must lie in [0, 1], got {self.affected_pop}")


@dataclass(frozen=True)
class ShockVector:
    channel: Channel
    deviations: tuple

    def __post_init__(self):
        object.__setattr__(self, "channel", Channel(self.channel))
        devs = tuple(float(x) for x in self.deviations)
        if not devs:
            raise ValueError("a shock vector needs at least horizon 0")
        if not all(math.isfinite(x) for x in devs):
            raise ValueError("shock deviations must be finite")
        object.__setattr__(self, "deviations", devs)

    @property
    def horizon(self) -> int:
        return len(self.deviations) - 1

    def as_percent(self) -> tuple:
        return tuple(round(100 * x, 10) for x in self.deviations)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Observed disaster impacts, fractions, keyed by (channel, horizon).

    Samples at the same position across keys belong to the same historical
    event, which lets per-period draws keep growth and fiscal impacts paired.
    """

    samples: Mapping
    orientation: Mapping = field(default_factory=lambda: dict(DEFAULT_ORIENTATION))

    def __post_init__(self):
        clean = {}
        for (ch, h), vals in self.samples.items():
            arr = np.asarray(vals, dtype=float)
            if arr.ndim != 1 or arr.size == 0:
                raise ValueError(f"no samples for {ch} at horizon {h}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite samples for {ch} at horizon {h}")
            arr.setflags(write=False)
            clean[(Channel(ch), int(h))] = arr
        object.__setattr__(self, "samples", clean)
        orient = dict(DEFAULT_ORIENTATION)
        orient.update({Channel(k): v for k, v in self.orientation.items()})
        for k, v in orient.items():
            if v not in ("lower", "upper"):
                raise ValueError(f"orientation for {k.value} must be 'lower' or 'upper'")
        object.__setattr__(self, "orientation", orient)

    @property
    def channels(self) -> set:
        return {ch for ch, _ in self.samples}

    def horizons(self, channel) -> list:
        channel = Channel(channel)
        return sorted(h for ch, h in self.samples if ch == channel)

    def get(self, channel, horizon: int) -> np.ndarray:
        try:
            return self.samples[(Channel(channel), int(horizon))]
        except KeyError:
            raise KeyError(f"no impact data for {Channel(channel).value} at horizon {horizon}") from None

    def adverse_level(self, channel, p: float) -> float:
        """Percentile level that corresponds to severity `p` on the adverse side."""
        return p if self.orientation[Channel(channel)] == "lower" else 1.0 - p


@dataclass(frozen=True)
class ScenarioSpec:
    mode: Mode = Mode.one_off
    percentile: float = 0.05
    shock_start_year: int = 2026
    channels: frozenset = frozenset({Channel.growth, Channel.primary_balance})
    fb0: float = -1.1                 # pre-disaster fiscal balance, percent of GDP
    adaptive_capacity: float = 0.438
    seed: int = 0
    # per-period knobs
    n_paths: int = 10_000
    per_period_draw: str = "single_year"   # or "full_profile"
    # econometric knobs, percent units as in the coefficient tables
    lcompshock: float | tuple = -0.08
    extrand1995: float = 0.0
    advanced_economy: float = 1.0
    decay: float = 0.5
    horizon_length: int = 6

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "channels", frozenset(Channel(c) for c in self.channels))
        if not 0 < self.percentile < 1:
            raise ValueError(f"percentile must lie in (0, 1), got {self.percentile}")
        if not 0 <= self.adaptive_capacity <= 1:
            raise ValueError(f"adaptive_capacity must lie in [0, 1], got {self.adaptive_capacity}")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")
        if self.per_period_draw not in ("single_year", "full_profile"):
            raise ValueError(f"unknown per_period_draw {self.per_period_draw!r}")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not 0 <= self.decay < 1:
            raise ValueError("decay must lie in [0, 1)")
        if isinstance(self.lcompshock, (list, tuple)):
            object.__setattr__(self, "lcompshock", tuple(float(x) for x in self.lcompshock))

    def evolve(self, **changes) -> "ScenarioSpec":
        return replace(self, **changes)


def percentile(samples: Sequence[float], p: float) -> float:
    """Exclusive-rank percentile with linear interpolation between closest ranks.

    The rank is ``(n + 1) * p`` on the sorted sample (1-based); ranks outside
    ``[1, n]`` clamp to the sample minimum or maximum.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("percentile of an empty sample")
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    rank = round((n + 1) * p, 12)
    if rank <= 1:
        return float(x[0])
    if rank >= n:
        return float(x[-1])
    lo = int(math.floor(rank))
    frac = rank - lo
    if frac == 0:
        return float(x[lo - 1])
    return float(x[lo - 1] + frac * (x[lo] - x[lo - 1]))


def build_shock_vectors(dist: EmpiricalDistribution | None, spec: ScenarioSpec,
                        coeffs=None, event: DisasterRecord | None = None) -> dict:
    """Shock vectors per channel for `spec`.

    one_off and per_period return the per-horizon adverse percentile of the
    empirical profile (per_period re-samples at run time, the vectors then serve
    as the reference profile).  The econometric modes delegate to
    :func:`debtstress.econometrics.predict_path`.
    """
    if spec.mode in (Mode.local_projection, Mode.quantile_regression):
        if coeffs is None or event is None:
            raise ValueError(f"{spec.mode.value} mode needs coefficient sets and a disaster event")
        from .econometrics import predict_path
        return predict_path(coeffs, spec, event).to_shock_vectors()
    if dist is None:
        raise ValueError(f"{spec.mode.value} mode needs an empirical distribution")
    missing = spec.channels - dist.channels
    if missing:
        raise KeyError(f"impact data missing for channels {sorted(c.value for c in missing)}")
    out = {}
    for ch in sorted(spec.channels, key=lambda c: c.value):
        level = dist.adverse_level(ch, spec.percentile)
        out[ch] = ShockVector(ch, tuple(percentile(dist.get(ch, h), level)
                                        for h in dist.horizons(ch)))
    return out


def _shocked_matrix(baseline: MacroAssumptions, start: int, vectors: Mapping) -> dict:
    series = {k: np.array(getattr(baseline, k)) for k in ("g", "pi", "i", "pb", "of")}
    for ch, vec in vectors.items():
        ch = Channel(ch)
        devs = np.asarray(vec.deviations)[: len(baseline) - start]
        series[ch.series][start:start + devs.size] += devs
    return series


def _start_index(baseline: MacroAssumptions, spec: ScenarioSpec) -> int:
    try:
        return baseline.index(spec.shock_start_year)
    except KeyError:
        raise ValueError(f"shock_start_year {spec.shock_start_year} outside projection window "
                         f"{baseline.years[0]}..{baseline.years[-1]}") from None


def apply_scenario(baseline: MacroAssumptions, d0: float, spec: ScenarioSpec,
                   vectors: Mapping, dist: EmpiricalDistribution | None = None):
    """Shock the baseline and project debt.  Returns (shocked assumptions, DebtPath).

    For one_off and the econometric modes the deviation sequence is added once
    with horizon 0 on ``spec.shock_start_year``.  per_period draws new impacts
    every year from `dist` (see :func:`per_period_paths`).
    """
    start = _start_index(baseline, spec)
    missing = spec.channels - {Channel(c) for c in vectors}
    if missing:
        raise KeyError(f"no shock vector for channels {sorted(c.value for c in missing)}")
    used = {Channel(c): v for c, v in vectors.items() if Channel(c) in spec.channels}
    if spec.mode is Mode.per_period:
        if dist is None:
            raise ValueError("per_period mode needs the empirical distribution")
        return _per_period(baseline, d0, spec, dist, start)
    shocked = MacroAssumptions(years=baseline.years, **_shocked_matrix(baseline, start, used))
    return shocked, project_path(d0, shocked)


def per_period_draws(spec: ScenarioSpec, dist: EmpiricalDistribution, n_years: int) -> dict:
    """Deviation draws for every path and affected year, per channel, shape (n_paths, n_years).

    Each affected year draws one historical event independently (the same event
    across channels).  With ``single_year`` only the event's horizon-0 impact
    lands in the draw year; with ``full_profile`` the whole impact profile is
    laid down from the draw year on and overlapping profiles add up.
    """
    chans = sorted(spec.channels, key=lambda c: c.value)
    n_events = {dist.get(ch, 0).size for ch in chans}
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    if len(n_events) == 1:
        idx = rng.integers(0, n_events.pop(), size=(spec.n_paths, n_years))
        picks = {ch: idx for ch in chans}
    else:
        picks = {ch: rng.integers(0, dist.get(ch, 0).size, size=(spec.n_paths, n_years))
                 for ch in chans}
    out = {}
    for ch in chans:
        if spec.per_period_draw == "single_year":
            out[ch] = dist.get(ch, 0)[picks[ch]]
            continue
        acc = np.zeros((spec.n_paths, n_years))
        for h in dist.horizons(ch):
            if h >= n_years:
                break
            acc[:, h:] += dist.get(ch, h)[picks[ch][:, : n_years - h]]
        out[ch] = acc
    return out


def per_period_paths(baseline: MacroAssumptions, d0: float, spec: ScenarioSpec,
                     dist: EmpiricalDistribution):
    """All simulated per-period paths: (draws per channel, debt matrix (n_paths, years))."""
    start = _start_index(baseline, spec)
    n_years = len(baseline) - start
    draws = per_period_draws(spec, dist, n_years)
    series = {k: np.broadcast_to(getattr(baseline, k), (spec.n_paths, len(baseline))).copy()
              for k in ("g", "pi", "i", "pb", "of")}
    for ch, dev in draws.items():
        series[ch.series][:, start:] += dev
    d = np.full(spec.n_paths, float(d0))
    out = np.empty((spec.n_paths, len(baseline)))
    for k in range(len(baseline)):
        d = _step(d, series["g"][:, k], series["pi"][:, k], series["i"][:, k],
                  series["pb"][:, k], series["of"][:, k])
        out[:, k] = d
    return draws, out


def _per_period(baseline, d0, spec, dist, start):
    draws, debt = per_period_paths(baseline, d0, spec, dist)
    # the scenario is the simulated path sitting at the adverse percentile of end-of-window debt
    order = np.argsort(debt[:, -1], kind="stable")
    pick = int(order[int(round((1.0 - spec.percentile) * (spec.n_paths - 1)))])
    vectors = {ch: ShockVector(ch, tuple(dev[pick])) for ch, dev in draws.items()}
    shocked = MacroAssumptions(years=baseline.years, **_shocked_matrix(baseline, start, vectors))
    return shocked, project_path(d0, shocked)


def deltas(shocked: DebtPath, base: DebtPath) -> dict:
    return {y: shocked[y] - base[y] for y in shocked.years if y in base.years}
