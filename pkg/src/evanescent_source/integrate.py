"""Vectorized adaptive Gauss-Legendre panel quadrature."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ConvergenceError

_LOW = np.polynomial.legendre.leggauss(15)
_HIGH = np.polynomial.legendre.leggauss(25)


def _panel_sums(f, a: np.ndarray, b: np.ndarray, rule) -> np.ndarray:
    nodes, weights = rule
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    t = mid[:, None] + half[:, None] * nodes[None, :]
    vals = f(t.ravel()).reshape(t.shape)
    return half * (vals @ weights)


def integrate_panels(
    f: Callable[[np.ndarray], np.ndarray],
    edges,
    rtol: float = 1e-10,
    atol: float = 0.0,
    max_rounds: int = 40,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[edges[0], edges[-1]]`` starting from the given panels.

    Each panel is evaluated with 15- and 25-point Gauss-Legendre rules; panels
    whose disagreement exceeds their share of the budget are bisected. ``f``
    must accept a 1-D array and return real values of the same shape.

    Returns ``(integral, error_estimate)``.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    done_val = 0.0
    done_err = 0.0
    for _ in range(max_rounds):
        hi = _panel_sums(f, a, b, _HIGH)
        lo = _panel_sums(f, a, b, _LOW)
        err = np.abs(hi - lo)
        total = done_val + hi.sum()
        budget = max(rtol * abs(total), atol)
        if done_err + err.sum() <= budget:
            return float(total), float(done_err + err.sum())
        share = budget * (b - a) / (edges[-1] - edges[0])
        ok = err <= 0.5 * share
        done_val += hi[ok].sum()
        done_err += err[ok].sum()
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a[~ok], mid[~ok]]), np.concatenate([mid[~ok], b[~ok]])
    raise ConvergenceError(
        f"panel quadrature did not converge: error {done_err + err.sum():.3e} > budget {budget:.3e}"
    )
