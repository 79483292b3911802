"""Characteristic times and parameter scans.

* ``t_max_saddle`` / ``x_max_snapshot``: peak of the saddle forerunner.
* ``classify_crossings``: all times where the pole and saddle densities are
  equal; the last one, ``t_p``, starts the post-exponential (power-law) regime.
* ``dit_first_minimum_time``: first diffraction-in-time minimum,
  ``Omega(t) t = 3 pi / 2``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .asymptotics import _dit_coefficients, density_saddle, psi_interference
from .errors import ConvergenceError, DomainError, NoMinimum, Undefined
from .model import SourceParams, complex_time, make_params, norm_factor, psi_normalized

GEOMETRIC_STEP = 1.05
LOG_R_TOL = 1e-10


def t_max_saddle(p: SourceParams, x: float) -> float:
    """Time of the saddle-density maximum at fixed ``x`` (linear in ``x``)."""
    if not x > 0:
        raise DomainError("x must be positive")
    ct = complex_time(p, x)
    r2, i2 = ct.tau_R**2, ct.tau_I**2
    return math.sqrt((r2 - i2 + 2.0 * math.sqrt(r2 * r2 + i2 * i2 + r2 * i2)) / 3.0)


def x_max_snapshot(p: SourceParams, t: float) -> float:
    """Position of the saddle-density maximum at fixed ``t``: ``2 t sqrt(v0^2 + 1)``."""
    if not t > 0:
        raise DomainError("t must be positive")
    return 2.0 * t * math.sqrt(p.v0**2 + 1.0)


def log_ratio_R(p: SourceParams, x, t):
    """``log(|psi_0|^2 / |psi_S|^2)`` ignoring the pole's step function."""
    return np.asarray(-4.0 * p.v0 * np.asarray(t) - 2.0 * np.asarray(x) - np.log(density_saddle(p, x, t)))[()]


def ratio_R(p: SourceParams, x, t):
    """``R = |psi_0 / psi_S|^2``; zero before the pole enters."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if (x <= 0).any():
        raise DomainError("x must be positive")
    on = x <= 2.0 * (1.0 - p.v0) * t
    return np.asarray(np.where(on, np.exp(log_ratio_R(p, x, t)), 0.0))[()]


class Scenario(str, enum.Enum):
    NO_CROSSING = "NoCrossing"
    SINGLE_CROSSING = "SingleCrossing"
    DOUBLE_CROSSING = "DoubleCrossing"


@dataclass(frozen=True)
class TimeScales:
    t_c: float
    t_max_saddle: float
    bl_time: float
    crossings: tuple[float, ...]
    scenario: Scenario
    t_p: Optional[float]


def crossing_horizon(p: SourceParams, x: float) -> float:
    """Search horizon ``max(100/(4 v0), 100 |tau|)`` for R = 1 crossings."""
    return max(100.0 / (4.0 * p.v0), 100.0 * complex_time(p, x).modulus)


def _bisect(f, lo: float, hi: float, flo: float) -> float:
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or abs(fm) <= 0.01 * LOG_R_TOL or hi - lo <= 4e-16 * hi:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify_crossings(p: SourceParams, x: float, t_cap: Optional[float] = None) -> TimeScales:
    """Find every solution of ``R(t) = 1`` on ``(t_c, t_cap]``.

    A geometric scan (step 1.05) over ``log R`` brackets sign changes, each is
    refined by bisection. Raises DomainError for ``v0`` in ``{0, 1}`` where the
    problem is degenerate.
    """
    if not 0.0 < p.v0 < 1.0:
        raise DomainError("crossing analysis needs 0 < v0 < 1")
    if not x > 0:
        raise DomainError("x must be positive")
    t_c = float(p.t_c(x))
    if t_cap is None:
        t_cap = crossing_horizon(p, x)

    def f(t):
        return float(log_ratio_R(p, x, t))

    n = int(math.ceil(math.log(t_cap / t_c) / math.log(GEOMETRIC_STEP))) + 1
    grid = t_c * GEOMETRIC_STEP ** np.arange(n + 1)
    grid[-1] = max(grid[-1], t_cap)
    grid = grid[grid <= t_cap * GEOMETRIC_STEP]
    vals = log_ratio_R(p, x, grid)
    roots = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0 and i > 0:
            roots.append(float(grid[i]))
        elif a * b < 0:
            roots.append(_bisect(f, float(grid[i]), float(grid[i + 1]), float(a)))
    # past the horizon log R must keep falling, otherwise crossings may be missed
    h = 1e-6 * t_cap
    if f(t_cap + h) - f(t_cap - h) >= 0:
        raise ConvergenceError(f"log R is not decreasing at the horizon t={t_cap:.4g}")
    crossings = tuple(roots)
    if not crossings:
        scenario = Scenario.NO_CROSSING
    elif len(crossings) == 1:
        scenario = Scenario.SINGLE_CROSSING
    else:
        scenario = Scenario.DOUBLE_CROSSING
    return TimeScales(
        t_c=t_c,
        t_max_saddle=t_max_saddle(p, x),
        bl_time=complex_time(p, x).modulus,
        crossings=crossings,
        scenario=scenario,
        t_p=crossings[-1] if crossings else None,
    )


@dataclass(frozen=True)
class TpRow:
    v0: float
    x: float
    scales: TimeScales

    @property
    def t_p(self) -> Optional[float]:
        return self.scales.t_p


def _tp_cell(args):
    v0, x = args
    return TpRow(v0, x, classify_crossings(make_params(v0), x))


def t_p_scan(
    v0_grid: Iterable[float],
    x_grid: Iterable[float],
    executor: Optional[Executor] = None,
) -> list[TpRow]:
    """Time scales on the ``v0 x x`` grid, sorted by ``(v0, x)``.

    Cells without a crossing keep ``t_p = None``.
    """
    cells = [(float(v), float(x)) for v in v0_grid for x in x_grid]
    if not cells:
        raise DomainError("scan grids must be nonempty")
    rows = list(executor.map(_tp_cell, cells)) if executor else [_tp_cell(c) for c in cells]
    return sorted(rows, key=lambda r: (r.v0, r.x))


def density_at_tp(p: SourceParams, x: float) -> float:
    """``|psi_N(x, t_p)|^2``; Undefined when there is no crossing."""
    t_p = classify_crossings(p, x).t_p
    if t_p is None:
        raise Undefined(f"no R = 1 crossing at v0={p.v0}, x={x}")
    return float(abs(psi_normalized(p, x, t_p)) ** 2)


def dit_minimum_times(p: SourceParams, x: float, phase: float) -> tuple[float, float]:
    """Both roots of ``Omega(t) t = phase``, i.e. ``(1-v0^2) t^2 - (v0 x + phase) t + x^2/4 = 0``."""
    v0 = p.v0
    a = 1.0 - v0 * v0
    b = -(v0 * x + phase)
    c = x * x / 4.0
    disc = b * b - 4.0 * a * c
    if disc < 0 or a == 0:
        raise NoMinimum(f"Omega t = {phase:.6g} has no real solution at v0={v0}, x={x}")
    q = -0.5 * (b - math.sqrt(disc))  # b < 0: no cancellation
    return tuple(sorted((c / q, q / a)))


def dit_minimum_time(p: SourceParams, x: float, n: int = 0) -> float:
    """Smallest admissible (``t > t_c``) root of ``Omega t = 3 pi/2 + 2 pi n``."""
    if not 0.0 <= p.v0 < 1.0:
        raise DomainError("DIT minima need 0 <= v0 < 1")
    if not x > 0:
        raise DomainError("x must be positive")
    t_c = float(p.t_c(x))
    roots = [r for r in dit_minimum_times(p, x, 1.5 * math.pi + 2.0 * math.pi * n) if r > t_c]
    if not roots:
        raise NoMinimum(f"no DIT minimum after t_c={t_c:.4g} at v0={p.v0}, x={x}")
    return roots[0]


def dit_first_minimum_time(p: SourceParams, x: float) -> float:
    return dit_minimum_time(p, x, 0)


def omega_t(p: SourceParams, x: float, t: float) -> float:
    _, omega, *_ = _dit_coefficients(p.v0, x / (2.0 * t))
    return omega * t


@dataclass(frozen=True)
class DITScanPoint:
    v0: float
    x: float
    t_min1: Optional[float]
    amplitude: Optional[float]

    @property
    def present(self) -> bool:
        return self.t_min1 is not None


def _dit_cell(args):
    v0, x = args
    p = make_params(v0)
    try:
        t1 = dit_first_minimum_time(p, x)
    except NoMinimum:
        return DITScanPoint(v0, x, None, None)
    amp = abs(float(psi_interference(p, x, t1))) / norm_factor(p)
    return DITScanPoint(v0, x, t1, amp)


def dit_amplitude_map(
    v0_grid: Sequence[float],
    x_grid: Sequence[float],
    executor: Optional[Executor] = None,
) -> list[DITScanPoint]:
    """Normalized ``|psi_Int|`` at the first DIT minimum over a ``v0 x x`` grid."""
    cells = [(float(v), float(x)) for v in v0_grid for x in x_grid]
    if not cells:
        raise DomainError("scan grids must be nonempty")
    if any(v <= 0 for v, _ in cells):
        raise DomainError("normalization needs v0 > 0")
    points = list(executor.map(_dit_cell, cells)) if executor else [_dit_cell(c) for c in cells]
    return sorted(points, key=lambda q: (q.v0, q.x))
