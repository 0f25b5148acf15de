"""Scenario predictions from fitted coefficient sets.

A prediction is the disaster's marginal effect on the outcome: the fitted
equation evaluated with the disaster switched on minus the same equation with
it switched off.  Constant, lagged outcome, lagged fiscal balance and lagged
extraND are identical in both and drop out, so only ``DISASTER_TERMS`` enter.
Everything here is in percent (percentage points for outcomes, percent of GDP
for damage and fiscal balance), as in the coefficient tables.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .coefficients import OUTCOME_OF_CHANNEL, CoefficientSet

Z95 = 1.959963984540054

# covariate ranges the coefficient tables were estimated over (loosely); outside -> warning
SUPPORT = {
    "damage": (0.0, 60.0),
    "fb": (-15.0, 15.0),
    "nd_capacity": (0.0, 1.0),
    "lcompshock": (-1.0, 1.0),
}


class SupportWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PredictedShockPath:
    """Per-channel deviations in percentage points, horizon 0 first."""

    model_kind: str
    values: dict
    lower: dict | None = None
    upper: dict | None = None
    covariates: dict | None = None

    def __post_init__(self):
        vals = {str(getattr(k, "value", k)): tuple(float(x) for x in v) for k, v in self.values.items()}
        object.__setattr__(self, "values", vals)
        for name in ("lower", "upper"):
            band = getattr(self, name)
            if band is None:
                continue
            band = {str(getattr(k, "value", k)): tuple(float(x) for x in v) for k, v in band.items()}
            object.__setattr__(self, name, band)
        if (self.lower is None) != (self.upper is None):
            raise ValueError("bands need both a lower and an upper edge")
        if self.lower is not None:
            for ch, v in vals.items():
                lo, hi = np.asarray(self.lower[ch]), np.asarray(self.upper[ch])
                if lo.shape != (len(v),) or hi.shape != (len(v),):
                    raise ValueError(f"band length mismatch for {ch}")
                if np.any(lo > np.asarray(v) + 1e-12) or np.any(hi < np.asarray(v) - 1e-12):
                    raise ValueError(f"bands do not bracket the point path for {ch}")

    @property
    def channels(self) -> list:
        return list(self.values)

    def to_shock_vectors(self) -> dict:
        from ..disaster import Channel, ShockVector

        return {Channel(ch): ShockVector(Channel(ch), tuple(x / 100.0 for x in v))
                for ch, v in self.values.items()}

    def difference(self, other: "PredictedShockPath") -> dict:
        if set(self.values) != set(other.values):
            raise ValueError("paths cover different channels")
        return {ch: tuple(a - b for a, b in zip(self.values[ch], other.values[ch]))
                for ch in self.values}


def _lcomp(spec, h):
    x = spec.lcompshock
    if isinstance(x, tuple):
        return x[h] if h < len(x) else x[-1]
    return float(x)


def covariates(spec, event, horizon: int) -> dict:
    """Scenario covariate values for one horizon, percent units."""
    return {
        "shock": _lcomp(spec, horizon),
        "onset": 1.0,
        "onset_damage": 100.0 * float(event.damage_gdp),
        "onset_ae": float(spec.advanced_economy),
        "onset_fb": float(spec.fb0),
        "onset_ndcapacity": float(spec.adaptive_capacity),
        "onset_ndextra": float(spec.extrand1995),
    }


def _check_support(spec, event):
    checks = {"damage": 100.0 * float(event.damage_gdp), "fb": float(spec.fb0),
              "nd_capacity": float(spec.adaptive_capacity)}
    lc = spec.lcompshock if isinstance(spec.lcompshock, tuple) else (spec.lcompshock,)
    for name, value in list(checks.items()) + [("lcompshock", v) for v in lc]:
        lo, hi = SUPPORT[name]
        if not lo <= value <= hi:
            warnings.warn(f"{name}={value} lies outside the estimation support [{lo}, {hi}]",
                          SupportWarning, stacklevel=3)


def marginal_effect(cs: CoefficientSet, cov: dict) -> float:
    return sum(cs.get(term) * value for term, value in cov.items())


def extend(values, decay: float, length: int) -> list:
    out = list(values)
    while len(out) < length:
        out.append(out[-1] * decay)
    return out


def predict_path(coeffs, spec, event) -> PredictedShockPath:
    """Predicted deviation path per requested channel.

    Horizons 0..2 come from the coefficient sets.  Later horizons shrink the
    horizon-2 value geometrically by ``spec.decay`` per year up to
    ``spec.horizon_length`` horizons.  LP paths carry +-1.96 prediction-SE bands
    (shrunk by the same decay past horizon 2); QR paths carry none.
    """
    kind = "QR" if spec.mode.value == "quantile_regression" else "LP"
    sets = [c for c in coeffs if c.model_kind == kind]
    if not sets:
        raise ValueError(f"no {kind} coefficient sets supplied")
    _check_support(spec, event)
    values, lower, upper = {}, {}, {}
    for ch in sorted(spec.channels, key=lambda c: c.value):
        outcome = OUTCOME_OF_CHANNEL[ch.value]
        by_h = {}
        for c in sets:
            if c.outcome == outcome:
                if c.horizon in by_h:
                    raise ValueError(f"duplicate {kind} coefficients for {outcome} h={c.horizon}")
                by_h[c.horizon] = c
        missing = [h for h in (0, 1, 2) if h not in by_h]
        if missing:
            raise KeyError(f"{kind} coefficients for {outcome} missing horizons {missing}")
        point = [marginal_effect(by_h[h], covariates(spec, event, h)) for h in (0, 1, 2)]
        half = [Z95 * by_h[h].prediction_se for h in (0, 1, 2)]
        n = max(spec.horizon_length, 3)
        point = extend(point, spec.decay, n)
        half = extend(half, spec.decay, n)
        values[ch.value] = point
        lower[ch.value] = [p - w for p, w in zip(point, half)]
        upper[ch.value] = [p + w for p, w in zip(point, half)]
    if kind == "QR":
        lower = upper = None
    cov = covariates(spec, event, 0)
    cov["lcompshock"] = spec.lcompshock
    return PredictedShockPath(kind, values, lower, upper, covariates=cov)


@dataclass(frozen=True)
class CounterfactualResult:
    a: PredictedShockPath
    b: PredictedShockPath
    difference: dict   # b - a per channel, percentage points


def counterfactual(spec_a, spec_b, coeffs, event) -> CounterfactualResult:
    if spec_a.mode != spec_b.mode or spec_a.channels != spec_b.channels:
        raise ValueError("counterfactual specs must share mode and channels")
    pa = predict_path(coeffs, spec_a, event)
    pb = predict_path(coeffs, spec_b, event)
    return CounterfactualResult(pa, pb, pb.difference(pa))
