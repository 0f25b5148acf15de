"""Linear quantile regression.

Two stages.  Iteratively reweighted least squares on a smoothed check loss
(``|r| ~ r^2 / (2a) + a/2`` with ``a = max(|r_prev|, eps)``, eps shrunk
geometrically) lands close to the optimum.  The answer is then snapped to a
basic solution, one interpolating ``p`` observations, and simplex pivots with
an exact line search move between vertices until the subgradient optimality
condition holds.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class QRConvergenceError(RuntimeError):
    def __init__(self, message, loss):
        super().__init__(f"{message} (final loss {loss:.6g})")
        self.loss = loss


class DegenerateDesignError(ValueError):
    pass


@dataclass(frozen=True)
class QRFit:
    beta: np.ndarray
    loss: float
    iterations: int
    pivots: int
    basis: tuple


def pinball_loss(residuals, tau: float) -> float:
    r = np.asarray(residuals, dtype=float)
    return float(np.sum(np.where(r >= 0, tau * r, (tau - 1.0) * r)))


def _irls(X, y, tau, beta, eps, iters):
    lin = (2.0 * tau - 1.0) * X.sum(axis=0)
    for _ in range(iters):
        r = y - X @ beta
        w = 1.0 / np.maximum(np.abs(r), eps)
        XtW = X.T * w
        try:
            new = np.linalg.solve(XtW @ X, XtW @ y + lin)
        except np.linalg.LinAlgError:
            # weights spanning too many magnitudes; the simplex phase finishes from here
            break
        if not np.all(np.isfinite(new)):
            break
        done = np.max(np.abs(new - beta)) <= 1e-12 * (1.0 + np.max(np.abs(beta)))
        beta = new
        if done:
            break
    return beta


def _initial_basis(X, y, beta):
    n, p = X.shape
    order = np.argsort(np.abs(y - X @ beta), kind="stable")
    basis = []
    for j in order:
        trial = basis + [int(j)]
        if np.linalg.matrix_rank(X[trial]) == len(trial):
            basis = trial
            if len(basis) == p:
                break
    if len(basis) < p:
        raise DegenerateDesignError("could not find a non-singular basis")
    return basis


def _psi(r, tau, zero_tol):
    return np.where(r > zero_tol, tau, np.where(r < -zero_tol, tau - 1.0, np.nan))


def _simplex(X, y, tau, basis, max_pivots, zero_tol):
    n, p = X.shape
    basis = list(basis)
    for pivot in range(max_pivots + 1):
        XB = X[basis]
        beta = np.linalg.solve(XB, y[basis])
        r = y - X @ beta
        r[basis] = 0.0
        inb = np.zeros(n, bool)
        inb[basis] = True
        psi = _psi(r, tau, zero_tol)
        # non-basis observations sitting exactly on the fit: count them on whichever side helps
        psi[~inb & np.isnan(psi)] = tau
        g = -(X[~inb] * psi[~inb, None]).sum(axis=0)
        v = np.linalg.solve(XB.T, g)
        if np.all((v >= tau - 1.0 - 1e-9) & (v <= tau + 1e-9)):
            return beta, tuple(basis), pivot
        if pivot == max_pivots:
            break
        viol = np.maximum(v - tau, (tau - 1.0) - v)
        move = None
        for k in np.argsort(-viol, kind="stable"):
            if viol[k] <= 1e-9:
                break
            k = int(k)
            # leaving row k: r_k turns positive when v_k > tau, negative otherwise
            s = -1.0 if v[k] > tau else 1.0
            d = np.linalg.solve(XB, np.eye(p)[k]) * s
            a = X @ d
            a[basis] = 0.0
            a[basis[k]] = s
            psi0 = psi.copy()
            psi0[basis] = 0.0
            psi0[basis[k]] = tau - 1.0 if s > 0 else tau
            nz = ~inb & (np.abs(r) <= zero_tol)
            psi0[nz] = np.where(a[nz] < 0, tau, tau - 1.0)
            slope = -np.sum(a * psi0)
            if slope < -1e-12:
                move = (k, a, slope, nz)
                break
        if move is None:
            # degenerate vertex with no descending edge: optimal
            return beta, tuple(basis), pivot
        k, a, slope, nz = move
        cand = np.nonzero(~inb & ~nz & (a != 0))[0]
        t = r[cand] / a[cand]
        keep = t > 0
        cand, t = cand[keep], t[keep]
        order = np.argsort(t, kind="stable")
        cum = slope + np.cumsum(np.abs(a[cand[order]]))
        hit = int(np.argmax(cum >= 0)) if np.any(cum >= 0) else len(order) - 1
        basis[k] = int(cand[order[hit]])
    raise QRConvergenceError(f"no optimal vertex after {max_pivots} pivots",
                             pinball_loss(y - X @ beta, tau))


def quantreg(X, y, tau: float, *, irls_rounds: int = 8, irls_iter: int = 50,
             max_pivots: int = 10_000) -> QRFit:
    """Minimise ``sum rho_tau(y - X beta)``; `X` already holds any intercept column."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("X must be (n, p) with n == len(y)")
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite data")
    n, p = X.shape
    if n < p or np.linalg.matrix_rank(X) < p:
        raise DegenerateDesignError(f"design of shape {X.shape} is rank deficient")
    scale = float(np.median(np.abs(y - np.median(y))))
    scale = max(scale, 1e-6 * float(np.std(y))) or float(np.std(y)) or 1.0
    beta = np.linalg.lstsq(X, y, rcond=None)[0]
    eps = 0.1 * scale
    for _ in range(irls_rounds):
        beta = _irls(X, y, tau, beta, eps, irls_iter)
        eps *= 0.1
    basis = _initial_basis(X, y, beta)
    zero_tol = 1e-11 * max(scale, float(np.max(np.abs(y))))
    beta, basis, pivots = _simplex(X, y, tau, basis, max_pivots, zero_tol)
    return QRFit(beta=beta, loss=pinball_loss(y - X @ beta, tau),
                 iterations=irls_rounds * irls_iter, pivots=pivots, basis=basis)


def exhaustive_qr(X, y, tau):
    """Brute force over every basic solution; small problems only."""
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    n, p = X.shape
    best = (np.inf, None)
    for combo in itertools.combinations(range(n), p):
        XB = X[list(combo)]
        if np.linalg.matrix_rank(XB) < p:
            continue
        b = np.linalg.solve(XB, y[list(combo)])
        loss = pinball_loss(y - X @ b, tau)
        if loss < best[0]:
            best = (loss, b)
    return best[1], best[0]


def iid_standard_errors(X, residuals, tau: float) -> np.ndarray:
    """Koenker-Bassett iid covariance with a Hall-Sheather sparsity estimate."""
    from scipy.stats import norm

    X = np.asarray(X, float)
    r = np.sort(np.asarray(residuals, float))
    n, _ = X.shape
    z = norm.ppf(tau)
    a = norm.ppf(0.975)
    h = n ** (-1 / 3) * a ** (2 / 3) * ((1.5 * norm.pdf(z) ** 2) / (2 * z * z + 1)) ** (1 / 3)
    lo, hi = max(tau - h, 1.0 / n), min(tau + h, 1 - 1.0 / n)
    sparsity = (np.quantile(r, hi) - np.quantile(r, lo)) / (hi - lo)
    cov = tau * (1 - tau) * sparsity ** 2 * np.linalg.inv(X.T @ X)
    return np.sqrt(np.clip(np.diag(cov), 0, None))
