"""Synthetic country-year panels generated from known local-projection coefficients."""
from __future__ import annotations

import numpy as np
import pandas as pd

DEFAULT_TRUTH = {
    "shock": 6.0,
    "onset": 0.5,
    "onset_damage": -0.03,
    "onset_ae": 0.4,
    "lagged_outcome": -0.7,   # stationary: y[t] = 0.3 y[t-1] + ...
    "onset_fb": 0.07,
    "lagged_fb": 0.1,
    "onset_ndcapacity": -0.9,
    "lagged_extrand1995": 0.2,
}


def synthetic_panel(n_countries=150, n_years=30, truth=None, noise=0.1, outcome="gdp_growth",
                    seed=0, first_year=1990) -> pd.DataFrame:
    """Panel whose horizon-0 change ``y[t] - y[t-1]`` follows `truth` plus a country effect.

    Each country draws its own effect, AE flag, adaptive capacity and extraND
    adoption year; disasters arrive with probability 0.2 a year.
    """
    truth = dict(DEFAULT_TRUTH if truth is None else truth)
    rng = np.random.default_rng(seed)
    T = n_years
    frames = []
    for c in range(n_countries):
        fe = rng.normal()
        ae = float(c % 3 == 0)
        nd = rng.uniform()
        adopt = first_year + int(rng.integers(0, 2 * T))
        years = np.arange(first_year, first_year + T)
        shock = rng.normal(0.0, 0.1, T)
        onset = (rng.uniform(size=T) < 0.2).astype(float)
        damage = rng.exponential(3.0, T)
        fb = rng.normal(-1.0, 3.0, T)
        extra = (years >= adopt).astype(float)
        y = np.empty(T)
        y[0] = rng.normal()
        for t in range(1, T):
            x = {
                "shock": shock[t], "onset": onset[t], "onset_damage": onset[t] * damage[t],
                "onset_ae": onset[t] * ae, "lagged_outcome": y[t - 1], "onset_fb": onset[t] * fb[t],
                "lagged_fb": fb[t - 1], "onset_ndcapacity": onset[t] * nd,
                "onset_ndextra": onset[t] * extra[t], "lagged_extrand1995": extra[t - 1],
            }
            y[t] = y[t - 1] + fe + sum(b * x[k] for k, b in truth.items()) + rng.normal(0.0, noise)
        frames.append(pd.DataFrame({
            "country": f"C{c:03d}", "year": years, outcome: y, "lcompshock": shock,
            "onset": onset, "damage": damage, "ae": ae, "nd_capacity": nd, "fb": fb,
            "extrand1995": extra}))
    return pd.concat(frames, ignore_index=True)
