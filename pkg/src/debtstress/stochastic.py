"""Monte Carlo fan charts for the debt ratio.

Joint shocks to (g, i, pi, pb) are drawn from a multivariate normal whose
covariance is estimated on history.  Draws are centred on zero and added to
the baseline, so the fan is anchored on the central projection.

Random numbers come from Philox4x64 keyed by the seed.  Iteration ``k`` owns
the counter block ``[k*T, (k+1)*T)``, i.e. 4*T raw 64-bit words, which are
mapped to uniforms by ``((w >> 11) + 0.5) / 2**53`` and then to standard
normals by the inverse normal CDF.  Any split of the iterations into chunks
therefore reproduces the serial stream word for word.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .core import SERIES, MacroAssumptions, _step

VARIABLES = ("g", "i", "pi", "pb")
GENERATOR = "philox4x64-ndtri-v1"
DEFAULT_LEVELS = (10, 25, 50, 75, 90)


class FactorizationError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class ShockDistribution:
    """Historical means and covariance of (g, i, pi, pb), fractions."""

    mu: np.ndarray
    sigma: np.ndarray
    n_obs: int = 0
    years: tuple = ()

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        sigma = np.array(self.sigma, dtype=float)
        if mu.shape != (4,) or sigma.shape != (4, 4):
            raise ValueError("mu must be a 4-vector and sigma 4x4, order (g, i, pi, pb)")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise ValueError("non-finite distribution parameters")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-15):
            raise ValueError("sigma must be symmetric")
        mu.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def zero(cls) -> "ShockDistribution":
        return cls(np.zeros(4), np.zeros((4, 4)))

    def holding_fixed(self, *variables) -> "ShockDistribution":
        """Same distribution with the named variables not shocked."""
        s = np.array(self.sigma)
        for v in variables:
            k = VARIABLES.index(v)
            s[k, :] = 0.0
            s[:, k] = 0.0
        return ShockDistribution(self.mu, s, self.n_obs, self.years)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.mu).tobytes())
        h.update(np.ascontiguousarray(self.sigma).tobytes())
        return h.hexdigest()


def estimate_distribution(history: MacroAssumptions, first: int | None = None,
                          last: int | None = None) -> ShockDistribution:
    """Sample mean and covariance (denominator n-1) of the four drivers."""
    h = history
    if first is not None or last is not None:
        h = history.subset(first if first is not None else history.years[0],
                           last if last is not None else history.years[-1])
    X = np.column_stack([getattr(h, v) for v in VARIABLES])
    if X.shape[0] < 5:
        raise ValueError(f"need at least 5 annual observations, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite history")
    sigma = np.cov(X, rowvar=False, ddof=1)
    sigma = 0.5 * (sigma + sigma.T)
    return ShockDistribution(X.mean(axis=0), sigma, X.shape[0], h.years)


def repair_psd(sigma) -> np.ndarray:
    """Clip negative eigenvalues to zero and re-symmetrise."""
    s = 0.5 * (np.asarray(sigma, float) + np.asarray(sigma, float).T)
    w, V = np.linalg.eigh(s)
    if np.all(w >= 0):
        return s
    out = (V * np.clip(w, 0.0, None)) @ V.T
    return 0.5 * (out + out.T)


def factor(sigma) -> np.ndarray:
    """Lower factor L with L L' = sigma (Cholesky, or eigen factor when only semidefinite)."""
    s = repair_psd(sigma)
    if not np.any(s):
        return np.zeros_like(s)
    try:
        return np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(s)
        L = V * np.sqrt(np.clip(w, 0.0, None))
        if not np.allclose(L @ L.T, s, rtol=1e-8, atol=1e-14):
            raise FactorizationError("covariance could not be factorised after PSD repair")
        return L


def standard_normals(seed: int, start: int, stop: int, n_years: int) -> np.ndarray:
    """Normals for iterations [start, stop), shape (stop - start, n_years, 4)."""
    bg = np.random.Philox(key=int(seed))
    bg.advance(start * n_years)
    words = bg.random_raw((stop - start) * n_years * 4)
    u = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return ndtri(u).reshape(stop - start, n_years, 4)


def _simulate_chunk(d0, base, L, seed, start, stop, rho):
    T = base.shape[1]
    z = standard_normals(seed, start, stop, T)
    if rho:
        # stationary AR(1) in the standardised shocks, same marginal covariance
        for t in range(1, T):
            z[:, t] = rho * z[:, t - 1] + math.sqrt(1.0 - rho * rho) * z[:, t]
    dev = z @ L.T        # (n, T, 4) in VARIABLES order
    g = base[0] + dev[:, :, 0]
    i = base[2] + dev[:, :, 1]
    pi = base[1] + dev[:, :, 2]
    pb = base[3] + dev[:, :, 3]
    of = base[4]
    d = np.full(stop - start, float(d0))
    out = np.empty((stop - start, T))
    for t in range(T):
        d = _step(d, g[:, t], pi[:, t], i[:, t], pb[:, t], of[t])
        out[:, t] = d
    return out


def simulate_paths(d0: float, baseline: MacroAssumptions, dist: ShockDistribution, n: int,
                   seed: int, *, workers: int = 1, chunk_size: int = 2500,
                   rho: float = 0.0) -> np.ndarray:
    """Simulated debt ratios, shape (n, years)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if seed < 0:
        raise ValueError("seed must be unsigned")
    if not -1 < rho < 1:
        raise ValueError("rho must lie in (-1, 1)")
    base = np.vstack([getattr(baseline, k) for k in SERIES])   # g, pi, i, pb, of
    L = factor(dist.sigma)
    bounds = [(a, min(a + chunk_size, n)) for a in range(0, n, chunk_size)]
    if workers <= 1 or len(bounds) == 1:
        parts = [_simulate_chunk(d0, base, L, seed, a, b, rho) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda ab: _simulate_chunk(d0, base, L, seed, ab[0], ab[1], rho),
                                bounds))
    return np.vstack(parts)


@dataclass(frozen=True)
class FanChart:
    years: tuple
    levels: tuple
    bands: np.ndarray          # (len(levels), len(years))
    n_iterations: int
    seed: int
    metadata: dict = field(default_factory=dict)
    paths: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        b = np.array(self.bands, dtype=float)
        if b.shape != (len(self.levels), len(self.years)):
            raise ValueError("band matrix shape does not match levels x years")
        if np.any(np.diff(b, axis=0) < 0):
            raise ValueError("bands must be non-decreasing in the percentile level")
        b.setflags(write=False)
        object.__setattr__(self, "bands", b)
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))
        object.__setattr__(self, "levels", tuple(float(x) for x in self.levels))

    def band(self, level: float) -> np.ndarray:
        return self.bands[self.levels.index(float(level))]

    def at(self, year: int, level: float) -> float:
        return float(self.band(level)[self.years.index(int(year))])

    def to_dict(self) -> dict:
        return {
            "generator": GENERATOR,
            "seed": self.seed,
            "n_iterations": self.n_iterations,
            "years": list(self.years),
            "levels": list(self.levels),
            "bands": {repr(lv): [float(x) for x in row] for lv, row in zip(self.levels, self.bands)},
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "FanChart":
        obj = json.loads(text)
        levels = tuple(float(x) for x in obj["levels"])
        bands = np.array([obj["bands"][repr(lv)] for lv in levels])
        return cls(tuple(obj["years"]), levels, bands, int(obj["n_iterations"]), int(obj["seed"]),
                   obj.get("metadata", {}))

    def plot_rows(self):
        """(year, level, value) triples for plotting."""
        return [(y, lv, float(v)) for lv, row in zip(self.levels, self.bands)
                for y, v in zip(self.years, row)]


def calibration_digest(d0, baseline: MacroAssumptions, dist: ShockDistribution) -> str:
    h = hashlib.sha256(dist.digest().encode())
    h.update(np.float64(d0).tobytes())
    h.update(np.asarray(baseline.years, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(baseline.as_matrix()).tobytes())
    return h.hexdigest()


def simulate_fan(d0: float, baseline: MacroAssumptions, dist: ShockDistribution, n: int = 10_000,
                 seed: int = 0, levels=DEFAULT_LEVELS, *, workers: int = 1,
                 chunk_size: int = 2500, rho: float = 0.0, keep_paths: bool = True) -> FanChart:
    levels = tuple(sorted(float(x) for x in levels))
    if not levels or not all(0 < x < 100 for x in levels):
        raise ValueError("percentile levels must lie in (0, 100)")
    paths = simulate_paths(d0, baseline, dist, n, seed, workers=workers,
                           chunk_size=chunk_size, rho=rho)
    bands = np.percentile(paths, levels, axis=0)
    # np.percentile interpolation can break ties by a rounding ulp; enforce monotone bands
    bands = np.maximum.accumulate(bands, axis=0)
    meta = {"calibration_digest": calibration_digest(d0, baseline, dist), "rho": rho}
    return FanChart(baseline.years, levels, bands, n, seed, meta,
                    paths if keep_paths else None)


def band_summary(fan: FanChart, thresholds) -> dict:
    """Share of simulated paths strictly above each threshold, per year."""
    if fan.paths is None:
        raise ValueError("fan chart was built without keeping the simulated paths")
    out = {}
    for thr in thresholds:
        thr = float(thr)
        if not math.isfinite(thr):
            raise ValueError("thresholds must be finite")
        out[thr] = dict(zip(fan.years, (fan.paths > thr).mean(axis=0).tolist()))
    return out


def paths_table(fan: FanChart):
    """Long table, one row per (iteration, year), for external audits."""
    import pandas as pd

    if fan.paths is None:
        raise ValueError("fan chart was built without keeping the simulated paths")
    n, T = fan.paths.shape
    return pd.DataFrame({"iteration": np.repeat(np.arange(n), T),
                         "year": np.tile(np.asarray(fan.years), n),
                         "d": fan.paths.ravel()})
