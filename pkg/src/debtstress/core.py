"""Debt accounting recursion, driver decomposition and the linearised diagnostic.

All rates and ratios are fractions (0.03 == 3%).  Percent only appears at the
file and report boundaries.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SERIES = ("g", "pi", "i", "pb", "of")


class DegenerateEconomyError(ValueError):
    """(1+g)(1+pi) <= 0, the nominal growth factor is not positive."""


class ProjectionError(ValueError):
    def __init__(self, year: int, cause: Exception):
        super().__init__(f"year {year}: {cause}")
        self.year = year
        self.cause = cause


class NegativeDebtWarning(UserWarning):
    pass


def _check_finite(**values):
    for name, v in values.items():
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite input for {name}: {v!r}")


def _growth_factor(g, pi):
    return (1.0 + g) * (1.0 + pi)


def _step(d_prev, g, pi, i, pb, of):
    # closed form, shared by the scalar and the vectorised paths so both agree bit for bit
    return d_prev * (1.0 + i) / ((1.0 + g) * (1.0 + pi)) - pb + of


@dataclass(frozen=True)
class MacroAssumptions:
    """Year-indexed baseline series, all fractions."""

    years: tuple
    g: np.ndarray
    pi: np.ndarray
    i: np.ndarray
    pb: np.ndarray
    of: np.ndarray

    def __post_init__(self):
        years = tuple(int(y) for y in self.years)
        object.__setattr__(self, "years", years)
        n = len(years)
        if n == 0:
            raise ValueError("assumptions need at least one year")
        if any(b - a != 1 for a, b in zip(years, years[1:])):
            raise ValueError(f"years must be strictly consecutive, got {years}")
        for name in SERIES:
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"series {name} has length {arr.size}, expected {n}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"series {name} has non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        bad = np.nonzero(_growth_factor(self.g, self.pi) <= 0)[0]
        if bad.size:
            raise DegenerateEconomyError(
                f"(1+g)(1+pi) <= 0 in year {years[bad[0]]}")

    def __len__(self):
        return len(self.years)

    @classmethod
    def from_rows(cls, years, **series):
        return cls(years=tuple(years), **{k: np.asarray(series[k], float) for k in SERIES})

    def replace(self, **series) -> "MacroAssumptions":
        kw = {k: getattr(self, k) for k in SERIES}
        kw.update(series)
        return MacroAssumptions(years=self.years, **kw)

    def index(self, year: int) -> int:
        try:
            return self.years.index(int(year))
        except ValueError:
            raise KeyError(f"year {year} not in {self.years[0]}..{self.years[-1]}") from None

    def subset(self, first: int, last: int) -> "MacroAssumptions":
        a, b = self.index(first), self.index(last) + 1
        return MacroAssumptions(years=self.years[a:b],
                                **{k: getattr(self, k)[a:b] for k in SERIES})

    def extend_to(self, last_year: int) -> "MacroAssumptions":
        """Hold the final year's assumptions constant out to `last_year`."""
        extra = int(last_year) - self.years[-1]
        if extra <= 0:
            return self
        years = self.years + tuple(range(self.years[-1] + 1, int(last_year) + 1))
        return MacroAssumptions(
            years=years,
            **{k: np.r_[getattr(self, k), np.repeat(getattr(self, k)[-1], extra)] for k in SERIES})

    def as_matrix(self) -> np.ndarray:
        return np.column_stack([getattr(self, k) for k in SERIES])


@dataclass(frozen=True)
class DebtPath:
    years: tuple
    d: np.ndarray
    negative_debt: bool = field(default=False)

    def __post_init__(self):
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))
        d = np.array(self.d, dtype=float)
        if d.shape != (len(self.years),):
            raise ValueError("debt path length does not match years")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    def __getitem__(self, year: int) -> float:
        return float(self.d[self.years.index(int(year))])

    def as_dict(self) -> dict:
        return dict(zip(self.years, self.d.tolist()))


@dataclass(frozen=True)
class YearContribution:
    year: int
    d_prev: float
    interest_contrib: float
    inflation_contrib: float
    growth_contrib: float
    pb_contrib: float
    of_contrib: float
    delta_d: float

    @property
    def total(self) -> float:
        return (self.interest_contrib + self.inflation_contrib + self.growth_contrib
                + self.pb_contrib + self.of_contrib)


@dataclass(frozen=True)
class Decomposition:
    records: tuple

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def year(self, year: int) -> YearContribution:
        for r in self.records:
            if r.year == year:
                return r
        raise KeyError(year)


def debt_step(d_prev: float, g: float, pi: float, i: float, pb: float, of: float) -> float:
    """One year of the debt-ratio recursion.

    Returns ``d_prev * (1+i) / ((1+g)(1+pi)) - pb + of``, which is the same as
    ``d_prev + (i - (1+g)pi)/((1+g)(1+pi)) d_prev - g/((1+g)(1+pi)) d_prev - pb + of``.
    """
    _check_finite(d_prev=d_prev, g=g, pi=pi, i=i, pb=pb, of=of)
    if _growth_factor(g, pi) <= 0:
        raise DegenerateEconomyError(f"(1+g)(1+pi) <= 0 for g={g}, pi={pi}")
    return float(_step(d_prev, g, pi, i, pb, of))


def debt_step_expanded(d_prev, g, pi, i, pb, of) -> float:
    """Same recursion written as separate interest, inflation and growth terms."""
    gf = _growth_factor(g, pi)
    return d_prev + (i - (1 + g) * pi) / gf * d_prev - g / gf * d_prev - pb + of


def project_path(d0: float, assumptions: MacroAssumptions) -> DebtPath:
    if not math.isfinite(d0) or d0 < 0:
        raise ValueError(f"initial debt ratio must be finite and >= 0, got {d0}")
    a = assumptions
    out = np.empty(len(a))
    d = d0
    for k, year in enumerate(a.years):
        try:
            d = debt_step(d, a.g[k], a.pi[k], a.i[k], a.pb[k], a.of[k])
        except ValueError as exc:
            raise ProjectionError(year, exc) from exc
        out[k] = d
    negative = bool(np.any(out < 0))
    if negative:
        warnings.warn("projected debt ratio turns negative", NegativeDebtWarning, stacklevel=2)
    return DebtPath(years=a.years, d=out, negative_debt=negative)


def contributions(d_prev, g, pi, i, pb, of):
    """Per-driver contributions for a single year (vectorises over numpy arrays).

    The g*pi cross term sits in the inflation contribution.
    """
    gf = _growth_factor(g, pi)
    interest = i / gf * d_prev
    inflation = -pi * (1 + g) / gf * d_prev
    growth = -g / gf * d_prev
    return interest, inflation, growth, -pb, of


def decompose(d0: float, assumptions: MacroAssumptions) -> Decomposition:
    path = project_path(d0, assumptions)
    a = assumptions
    prev = np.r_[d0, path.d[:-1]]
    recs = []
    for k, year in enumerate(a.years):
        ic, pc, gc, pbc, ofc = contributions(prev[k], a.g[k], a.pi[k], a.i[k], a.pb[k], a.of[k])
        recs.append(YearContribution(year, float(prev[k]), float(ic), float(pc), float(gc),
                                     float(pbc), float(ofc), float(path.d[k] - prev[k])))
    return Decomposition(tuple(recs))


def amplification(i: float, pi: float, g: float) -> float:
    """Interest-growth differential (i - pi - g)."""
    _check_finite(i=i, pi=pi, g=g)
    return i - pi - g


def approx_step(d_prev: float, g: float, pi: float, i: float, pb: float, of: float) -> float:
    """Linearised change in the debt ratio, diagnostic only (never used to project)."""
    _check_finite(d_prev=d_prev, g=g, pi=pi, i=i, pb=pb, of=of)
    return (i - pi - g) * d_prev - pb + of


def amplification_terms(assumptions: MacroAssumptions) -> np.ndarray:
    return assumptions.i - assumptions.pi - assumptions.g


def first_crossing_below(years: Sequence[int], d: Sequence[float], threshold: float = 0.60):
    """First year the ratio drops below `threshold` having been at or above it the year before."""
    for k in range(1, len(d)):
        if d[k] < threshold <= d[k - 1]:
            return int(years[k])
    return None


def stabilization_year(years: Sequence[int], d: Sequence[float], start_year: int):
    """First year at or after `start_year` with non-increasing debt."""
    for k in range(1, len(d)):
        if years[k] >= start_year and d[k] <= d[k - 1]:
            return int(years[k])
    return None
