"""Discretized rescaled paths and the rate functional along them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _io
from .model import PotentialParams

DEFAULT_N = 2048
TOL_ZERO = 1e-9


def uniform_grid(n: int = DEFAULT_N) -> np.ndarray:
    return np.linspace(0.0, 1.0, n + 1)


@dataclass(frozen=True)
class SampledPath:
    """Values of a path f: [0, 1] -> R on a strictly increasing grid.

    The piecewise-linear interpolant of (grid, values) is the H1 function the
    rate functional is evaluated on.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("grid and values must be 1-d arrays of equal length >= 2")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
            raise ValueError("path contains non-finite entries")
        if grid[0] != 0.0 or grid[-1] != 1.0:
            raise ValueError("grid must run from 0 to 1")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        if values[0] != 0.0:
            raise ValueError("admissible paths start at the origin")

    @classmethod
    def from_function(cls, fn: Callable, n: int = DEFAULT_N) -> "SampledPath":
        grid = uniform_grid(n)
        return cls(grid, np.asarray(fn(grid), dtype=float))

    @property
    def n(self) -> int:
        return self.grid.size - 1

    def __neg__(self) -> "SampledPath":
        return SampledPath(self.grid, -self.values)

    def __call__(self, s):
        return np.interp(s, self.grid, self.values)

    def to_csv(self, path=None, comment: str | None = None) -> str:
        text = _io.csv_text(["t", "f"], zip(self.grid.tolist(), self.values.tolist()), comment)
        if path is not None:
            _io.atomic_write_text(path, text)
        return text

    @classmethod
    def from_csv(cls, path) -> "SampledPath":
        header, rows = _io.read_csv(path)
        data = np.array(rows, dtype=float)
        return cls(data[:, 0], data[:, 1])


@dataclass(frozen=True)
class RateCurve:
    grid: np.ndarray
    K_values: np.ndarray

    @property
    def final(self) -> float:
        return float(self.K_values[-1])


def _abs_pow(x: np.ndarray, p: float) -> np.ndarray:
    if p == 0.0:
        return np.ones_like(x)
    return np.abs(x) ** p


def interval_contributions(m_beta: float, p: float, grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Per-interval rate contributions: trapezoid on m*beta*|f|**p minus half the squared secant slope."""
    dt = np.diff(grid)
    slope = np.diff(values) / dt
    pot = _abs_pow(values, p)
    return m_beta * 0.5 * (pot[:-1] + pot[1:]) * dt - 0.5 * slope * slope * dt


def rate_functional(params: PotentialParams, f: SampledPath) -> RateCurve:
    """Cumulative K(f, t) at every grid time."""
    contrib = interval_contributions(params.m_beta, params.p, f.grid, f.values)
    return RateCurve(f.grid, np.concatenate([[0.0], np.cumsum(contrib)]))


def extinction_time(curve: RateCurve, tol_zero: float = TOL_ZERO) -> float:
    """First time K(f, .) goes negative, at grid resolution; ``inf`` if it never does.

    The crossing lies between the last grid time with K >= -tol_zero and the
    first one below; the former is reported, which keeps the result in [0, 1).
    """
    below = np.flatnonzero(curve.K_values < -tol_zero)
    if below.size == 0:
        return float("inf")
    return float(curve.grid[below[0] - 1])


def presence_rate(curve: RateCurve, t: float) -> float:
    """min over grid times s <= t of K(f, s); never positive because K(f, 0) = 0."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0,1], got {t}")
    mask = curve.grid <= t + 1e-12
    return float(min(0.0, curve.K_values[mask].min()))
