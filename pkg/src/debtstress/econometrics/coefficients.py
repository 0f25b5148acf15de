"""Per-horizon coefficient sets for the local-projection and quantile models.

Values are kept in the tables' own units: outcomes in percentage points,
fiscal balance in percent of GDP, damage in percent of GDP.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

# canonical regressor keys, in table order
TERMS = (
    "shock",
    "onset",
    "onset_damage",
    "onset_ae",
    "lagged_outcome",
    "onset_fb",
    "lagged_fb",
    "onset_ndcapacity",
    "onset_ndextra",
    "lagged_extrand1995",
    "constant",
)

# terms that switch on with the disaster; the rest cancel against the no-disaster path
DISASTER_TERMS = ("shock", "onset", "onset_damage", "onset_ae", "onset_fb",
                  "onset_ndcapacity", "onset_ndextra")

OUTCOMES = ("gdp_growth", "primary_balance", "effective_interest_lc", "gdp_deflator")

CHANNEL_OF_OUTCOME = {
    "gdp_growth": "growth",
    "primary_balance": "primary_balance",
    "effective_interest_lc": "interest",
    "gdp_deflator": "inflation",
}
OUTCOME_OF_CHANNEL = {v: k for k, v in CHANNEL_OF_OUTCOME.items()}


@dataclass(frozen=True)
class CoefficientSet:
    model_kind: str
    outcome: str
    horizon: int
    coefficients: dict
    standard_errors: dict
    prediction_se: float
    tau: float | None = None
    n_obs: int | None = None
    r_squared: float | None = None
    n_countries: int | None = None
    table: str = ""
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = self.model_kind.upper()
        if kind not in ("LP", "QR"):
            raise ValueError(f"model_kind must be LP or QR, got {self.model_kind!r}")
        object.__setattr__(self, "model_kind", kind)
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")
        unknown = set(self.coefficients) - set(TERMS)
        if unknown:
            raise ValueError(f"unknown terms {sorted(unknown)}")
        if set(self.coefficients) != set(self.standard_errors):
            raise ValueError("coefficient and standard-error keys differ")
        if not (self.prediction_se > 0 and math.isfinite(self.prediction_se)):
            raise ValueError("prediction_se must be positive")
        if kind == "QR" and not (self.tau is not None and 0 < self.tau < 1):
            raise ValueError("QR coefficient sets need tau in (0, 1)")
        object.__setattr__(self, "coefficients", {k: float(v) for k, v in self.coefficients.items()})
        object.__setattr__(self, "standard_errors",
                           {k: float(v) for k, v in self.standard_errors.items()})

    @property
    def channel(self) -> str:
        return CHANNEL_OF_OUTCOME[self.outcome]

    def get(self, term: str) -> float:
        return self.coefficients.get(term, 0.0)


def select(sets, *, model_kind=None, table=None, outcome=None, horizon=None) -> list:
    out = []
    for cs in sets:
        if model_kind is not None and cs.model_kind != model_kind.upper():
            continue
        if table is not None and cs.table != table:
            continue
        if outcome is not None and cs.outcome != outcome:
            continue
        if horizon is not None and cs.horizon != horizon:
            continue
        out.append(cs)
    return out
