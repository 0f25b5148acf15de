"""Panel local projections with country fixed effects, and pooled quantile regressions.

The panel is a DataFrame with one row per country-year and columns
``country, year, <outcome>, lcompshock, onset, damage, ae, nd_capacity, fb,
extrand1995``.  Leads and lags are taken by calendar year, so gaps in a
country's record drop the affected rows rather than shifting data.
"""
from __future__ import annotations

import numpy as np
import pandas as pd
import scipy.linalg

from .coefficients import OUTCOMES, CoefficientSet
from .qr import iid_standard_errors, quantreg

PANEL_COLUMNS = ("country", "year", "lcompshock", "onset", "damage", "ae",
                 "nd_capacity", "fb", "extrand1995")
BINARY_COLUMNS = ("onset", "ae", "extrand1995")


class RankDeficientError(ValueError):
    def __init__(self, columns):
        super().__init__(f"design matrix is rank deficient; collinear columns: {', '.join(columns)}")
        self.columns = tuple(columns)


class InsufficientDataError(ValueError):
    pass


def default_interaction(outcome: str) -> str:
    # the interest and deflator tables interact onset with extraND instead of NDcapacity
    return "ndextra" if outcome in ("effective_interest_lc", "gdp_deflator") else "ndcapacity"


def validate_panel(panel: pd.DataFrame, outcome: str) -> None:
    if outcome not in OUTCOMES:
        raise ValueError(f"unknown outcome {outcome!r}")
    missing = [c for c in PANEL_COLUMNS + (outcome,) if c not in panel.columns]
    if missing:
        raise KeyError(f"panel lacks columns {missing}")
    for c in BINARY_COLUMNS:
        vals = panel[c].dropna().unique()
        if not set(np.asarray(vals, float)) <= {0.0, 1.0}:
            raise ValueError(f"column {c} must be binary 0/1")
    if panel.duplicated(["country", "year"]).any():
        raise ValueError("duplicate country-year rows")


def _shifted(s: pd.DataFrame, col: str, k: int) -> np.ndarray:
    """Value of `col` at year + k for every row (NaN where that year is absent)."""
    idx = pd.MultiIndex.from_arrays([s.index.get_level_values(0),
                                     s.index.get_level_values(1) + k])
    return s[col].reindex(idx).to_numpy(dtype=float)


def design(panel: pd.DataFrame, outcome: str, horizon: int, interaction: str | None = None):
    """Dependent variable, regressor frame and country ids for one horizon."""
    validate_panel(panel, outcome)
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    interaction = interaction or default_interaction(outcome)
    s = panel.set_index(["country", "year"]).sort_index()
    y_lag = _shifted(s, outcome, -1)
    dep = _shifted(s, outcome, horizon) - y_lag
    onset = s["onset"].to_numpy(float)
    X = pd.DataFrame({
        "shock": _shifted(s, "lcompshock", horizon),
        "onset": onset,
        "onset_damage": onset * s["damage"].to_numpy(float),
        "onset_ae": onset * s["ae"].to_numpy(float),
        "lagged_outcome": y_lag,
        "onset_fb": onset * s["fb"].to_numpy(float),
        "lagged_fb": _shifted(s, "fb", -1),
    }, index=s.index)
    if interaction == "ndcapacity":
        X["onset_ndcapacity"] = onset * s["nd_capacity"].to_numpy(float)
    elif interaction == "ndextra":
        X["onset_ndextra"] = onset * s["extrand1995"].to_numpy(float)
    else:
        raise ValueError(f"interaction must be 'ndcapacity' or 'ndextra', got {interaction!r}")
    X["lagged_extrand1995"] = _shifted(s, "extrand1995", -1)
    ok = np.isfinite(dep) & np.all(np.isfinite(X.to_numpy()), axis=1)
    X = X[ok]
    return dep[ok], X, X.index.get_level_values(0).to_numpy()


def _demean(a: np.ndarray, groups: np.ndarray) -> np.ndarray:
    codes, _ = pd.factorize(groups)
    counts = np.bincount(codes)
    if a.ndim == 1:
        return a - (np.bincount(codes, weights=a) / counts)[codes]
    means = np.column_stack([np.bincount(codes, weights=a[:, j]) / counts
                             for j in range(a.shape[1])])
    return a - means[codes]


def _check_rank(Xd: np.ndarray, names) -> None:
    if Xd.shape[0] == 0:
        raise InsufficientDataError("no usable observations")
    _, R, piv = scipy.linalg.qr(Xd, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(Xd.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > max(tol, 1e-10 * diag[0])))
    if rank < Xd.shape[1]:
        raise RankDeficientError([names[j] for j in piv[rank:]])


def lp_estimate(panel: pd.DataFrame, outcome: str, horizon: int, *,
                interaction: str | None = None, cluster: bool = False,
                table: str = "") -> CoefficientSet:
    """Fixed-effects (within) least squares of ``y[t+h] - y[t-1]`` on the disaster regressors.

    Standard errors are conventional unless ``cluster=True`` (country clusters).
    ``prediction_se`` is the root mean squared residual.  The reported constant is
    the average fixed effect, ``mean(y) - mean(X) @ beta``.
    """
    if horizon not in (0, 1, 2):
        raise ValueError("local projections are estimated for horizons 0, 1, 2")
    y, Xf, groups = design(panel, outcome, horizon, interaction)
    names = list(Xf.columns)
    X = Xf.to_numpy(float)
    n, k = X.shape
    n_groups = len(np.unique(groups))
    dof = n - n_groups - k
    if dof <= 0:
        raise InsufficientDataError(f"{n} observations, {n_groups} countries, {k} regressors")
    yd, Xd = _demean(y, groups), _demean(X, groups)
    if not np.any(np.abs(yd) > 1e-12 * (1.0 + np.max(np.abs(y)))):
        raise InsufficientDataError(f"{outcome} has no within-country variation at horizon {horizon}")
    _check_rank(Xd, names)
    beta, *_ = np.linalg.lstsq(Xd, yd, rcond=None)
    resid = yd - Xd @ beta
    rss = float(resid @ resid)
    XtX_inv = np.linalg.inv(Xd.T @ Xd)
    if cluster:
        meat = np.zeros((k, k))
        for gid in np.unique(groups):
            m = groups == gid
            sg = Xd[m].T @ resid[m]
            meat += np.outer(sg, sg)
        g = n_groups
        cov = XtX_inv @ meat @ XtX_inv * (g / (g - 1)) * ((n - 1) / (n - k))
    else:
        cov = rss / dof * XtX_inv
    se = np.sqrt(np.diag(cov))
    xbar = X.mean(axis=0)
    const = float(y.mean() - xbar @ beta)
    tss = float(yd @ yd)
    coefs = dict(zip(names, beta.tolist()))
    ses = dict(zip(names, se.tolist()))
    coefs["constant"] = const
    ses["constant"] = float(np.sqrt(xbar @ cov @ xbar + rss / dof / n))
    return CoefficientSet(
        model_kind="LP", outcome=outcome, horizon=horizon, coefficients=coefs,
        standard_errors=ses, prediction_se=float(np.sqrt(rss / n)), n_obs=n,
        r_squared=(1.0 - rss / tss) if tss > 0 else 0.0, n_countries=n_groups, table=table)


def residual_orthogonality(panel, cs: CoefficientSet, interaction: str | None = None) -> np.ndarray:
    """X_demeaned' e / (|X_demeaned| |e|) for a fitted LP set; ~0 at the least-squares optimum."""
    y, Xf, groups = design(panel, cs.outcome, cs.horizon, interaction)
    names = list(Xf.columns)
    Xd = _demean(Xf.to_numpy(float), groups)
    yd = _demean(y, groups)
    beta = np.array([cs.coefficients[c] for c in names])
    e = yd - Xd @ beta
    return (Xd.T @ e) / (np.linalg.norm(Xd, axis=0) * np.linalg.norm(e))


def qr_estimate(panel: pd.DataFrame, outcome: str, tau: float, horizon: int = 0, *,
                interaction: str | None = None, table: str = "") -> CoefficientSet:
    """Pooled linear quantile regression of ``y[t+h] - y[t-1]`` with an intercept."""
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    y, Xf, groups = design(panel, outcome, horizon, interaction)
    names = list(Xf.columns) + ["constant"]
    X = np.column_stack([Xf.to_numpy(float), np.ones(len(y))])
    if len(y) < 5 * X.shape[1]:
        raise InsufficientDataError(f"{len(y)} observations for {X.shape[1]} regressors")
    try:
        _check_rank(X, names)
    except RankDeficientError as exc:
        from .qr import DegenerateDesignError
        raise DegenerateDesignError(str(exc)) from exc
    fit = quantreg(X, y, tau)
    resid = y - X @ fit.beta
    se = iid_standard_errors(X, resid, tau)
    return CoefficientSet(
        model_kind="QR", outcome=outcome, horizon=horizon,
        coefficients=dict(zip(names, fit.beta.tolist())),
        standard_errors=dict(zip(names, se.tolist())),
        prediction_se=float(np.sqrt(np.mean(resid ** 2))) or 1e-12, tau=tau,
        n_obs=len(y), r_squared=None, n_countries=len(np.unique(groups)), table=table)
