"""Point source with evanescent, decaying carrier: exact solution and flux.

Dimensionless units: lengths in ``L = 1/Im k0``, times in ``2 m L**2 / hbar``.
The source is ``psi(0, t) = Theta(t) exp(-i omega0 t)`` with
``k0 = -v0 + i`` and ``omega0 = k0**2 = (v0**2 - 1) - 2 i v0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError
from .integrate import integrate_panels
from .special import scaled_faddeeva, scaled_faddeeva_derivative


@dataclass(frozen=True)
class SourceParams:
    """The single knob ``v0`` (0 <= v0 <= 1) and everything derived from it."""

    v0: float

    def __post_init__(self):
        if not (0.0 <= self.v0 <= 1.0):
            raise DomainError(f"v0 must lie in [0, 1], got {self.v0!r}")

    @property
    def k0(self) -> complex:
        return complex(-self.v0, 1.0)

    @property
    def omega0(self) -> complex:
        return complex(self.v0**2 - 1.0, -2.0 * self.v0)

    @property
    def lifetime(self) -> float:
        """Density lifetime ``1/(2 v0)``; infinite for the non-decaying source."""
        return math.inf if self.v0 == 0 else 1.0 / (2.0 * self.v0)

    @property
    def critical_speed(self) -> float:
        """``2 (1 - v0)``: the pole enters at ``t_c = x / critical_speed``."""
        return 2.0 * (1.0 - self.v0)

    def t_c(self, x):
        """Critical time ``x / (2 (1 - v0))``; ``inf`` at ``v0 = 1``."""
        if self.v0 >= 1.0:
            return np.full_like(np.asarray(x, dtype=float), np.inf)[()]
        return np.asarray(x, dtype=float)[()] / self.critical_speed


def make_params(v0: float) -> SourceParams:
    return SourceParams(float(v0))


@dataclass(frozen=True)
class DimensionalScale:
    """SI scale: ``L`` in m, ``m`` in kg, ``hbar`` in J s."""

    L: float
    m: float
    hbar: float = 1.054571817e-34

    def __post_init__(self):
        for name in ("L", "m", "hbar"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    @property
    def time_unit(self) -> float:
        """Seconds per dimensionless time unit."""
        return 2.0 * self.m * self.L**2 / self.hbar

    @classmethod
    def from_k0_imag(cls, k0_imag: float, m: float, hbar: float = 1.054571817e-34):
        """Scale with the convention ``L = 1 / Im k0`` (``k0_imag`` in 1/m)."""
        if not k0_imag > 0:
            raise DomainError("Im k0 must be positive")
        return cls(1.0 / k0_imag, m, hbar)


def to_dimensionless(scale: DimensionalScale, x_si, t_si):
    return np.asarray(x_si)[()] / scale.L, np.asarray(t_si)[()] / scale.time_unit


def to_dimensional(scale: DimensionalScale, x, t):
    return np.asarray(x)[()] * scale.L, np.asarray(t)[()] * scale.time_unit


@dataclass(frozen=True)
class ComplexTime:
    """``tau = -x / (2 k0)``; ``modulus`` generalizes the Buttiker-Landauer time."""

    tau: complex
    tau_R: float
    tau_I: float
    modulus: float


def complex_time(p: SourceParams, x: float) -> ComplexTime:
    if x < 0:
        raise DomainError("x must be non-negative")
    denom = 2.0 * (p.v0**2 + 1.0)
    tau_R = x * p.v0 / denom
    tau_I = x / denom
    return ComplexTime(
        tau=complex(tau_R, tau_I),
        tau_R=tau_R,
        tau_I=tau_I,
        modulus=x / (2.0 * math.sqrt(p.v0**2 + 1.0)),
    )


@dataclass(frozen=True)
class SaddleVariables:
    k_s: float
    u_plus: complex
    u_minus: complex


def _u_pair(k0: complex, x, t):
    ks = x / (2.0 * t)
    pref = np.sqrt(t / 2.0) * (1 + 1j)
    return ks, pref * (k0 - ks), pref * (-k0 - ks)


def saddle_variables(p: SourceParams, x: float, t: float) -> SaddleVariables:
    """``u_(+/-) = +/- sqrt(t/2) (1+i) k0 (1 +/- tau/t)`` at the saddle ``k_s = x/(2t)``."""
    _check_xt(x, t)
    ks, up, um = _u_pair(p.k0, float(x), float(t))
    return SaddleVariables(float(ks), complex(up), complex(um))


def _check_xt(x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.isnan(x).any() or np.isnan(t).any():
        raise DomainError("x and t must not be NaN")
    if (x < 0).any():
        raise DomainError("x must be non-negative (emission into x >= 0 only)")
    if (t <= 0).any():
        raise DomainError("t must be positive")
    return x, t


def _terms(p: SourceParams, x, t):
    x, t = _check_xt(x, t)
    x, t = np.broadcast_arrays(x, t)
    ks, up, um = _u_pair(p.k0, x, t)
    phase = 1j * ks * ks * t
    return x, t, ks, up, um, phase


def psi_exact(p: SourceParams, x, t):
    """Exact wave function ``exp(i k_s^2 t)/2 [w(-u_-) + w(-u_+)]``.

    ``t = 0`` is handled by the switch-on convention: 1 at ``x = 0``, 0 elsewhere.
    """
    xa = np.asarray(x, dtype=float)
    ta = np.asarray(t, dtype=float)
    if (ta == 0).any():
        xa, ta = np.broadcast_arrays(xa, ta)
        out = np.where(xa == 0, 1.0 + 0j, 0j)
        live = ta != 0
        if live.any():
            out[live] = psi_exact(p, xa[live], ta[live])
        return out[()]
    x, t, ks, up, um, phase = _terms(p, xa, ta)
    val = 0.5 * (scaled_faddeeva(-um, phase) + scaled_faddeeva(-up, phase))
    return np.asarray(val)[()]


def psi_dx(p: SourceParams, x, t):
    """Analytic ``d psi / dx`` (chain rule through ``u_(+/-)`` and the Gaussian phase)."""
    x, t, ks, up, um, phase = _terms(p, x, t)
    psi = 0.5 * (scaled_faddeeva(-um, phase) + scaled_faddeeva(-up, phase))
    dw = scaled_faddeeva_derivative(-um, phase) + scaled_faddeeva_derivative(-up, phase)
    # du/dx = -(1+i) / (2 sqrt(2t)) for both u's
    val = 1j * ks * psi + (1 + 1j) / (4.0 * np.sqrt(2.0 * t)) * dw
    return np.asarray(val)[()]


def flux(p: SourceParams, x, t):
    """Probability current ``J = 2 Im[conj(psi) dpsi/dx]``."""
    psi = psi_exact(p, x, t)
    return np.asarray(2.0 * np.imag(np.conj(psi) * psi_dx(p, x, t)))[()]


def _origin_flux(p: SourceParams, t: np.ndarray) -> np.ndarray:
    return flux(p, np.zeros_like(t), t)


def emitted_probability(p: SourceParams, T: float, rtol: float = 1e-10) -> float:
    """``int_0^T J(0, t) dt``; the ``t**-1/2`` singularity at 0 is removed by ``t = s**2``."""
    if T <= 0:
        return 0.0
    head = min(T, 1.0)
    s_edges = np.linspace(0.0, math.sqrt(head), 9)
    first, _ = integrate_panels(
        lambda s: 2.0 * s * _origin_flux(p, np.maximum(s * s, 1e-300)),
        s_edges,
        rtol=rtol,
        atol=1e-16,
    )
    if T <= head:
        return first
    n = max(2, int(math.ceil((T - head) / 1.0)))
    rest, _ = integrate_panels(
        lambda t: _origin_flux(p, t), np.linspace(head, T, n + 1), rtol=rtol, atol=1e-16
    )
    return first + rest


def _tail_bound(p: SourceParams, T: float) -> float:
    """Bound on ``int_T^inf |J(0,t)| dt``.

    ``|J| <= 2 |psi| |psi_x|`` with ``|psi(0,t)| = exp(-2 v0 t)`` and
    ``psi_x = i k0 psi + s(t)``, where the saddle part ``s`` decays like
    ``t**-1.5``; its amplitude is read off at ``T``.
    """
    v0 = p.v0
    dx = complex(psi_dx(p, 0.0, T))
    pole_dx = 1j * p.k0 * np.exp(-1j * p.omega0 * T)
    c = abs(dx - pole_dx) * T**1.5
    pole_part = 2 * abs(p.k0) * math.exp(-4 * v0 * T) / (4 * v0)
    saddle_part = 2 * c * math.exp(-2 * v0 * T) * T**-1.5 / (2 * v0)
    return pole_part + saddle_part


def _norm_factor(v0: float, rtol: float) -> float:
    p = SourceParams(v0)
    T = 8.0
    while _tail_bound(p, T) > 1e-14:
        T *= 1.5
        if T > 1e7:
            raise ConvergenceError(f"flux tail does not decay fast enough for v0={v0}")
    value = emitted_probability(p, T, rtol=0.1 * rtol)
    tail = _tail_bound(p, T)
    if tail > rtol * abs(value):
        raise ConvergenceError(f"tail {tail:.2e} exceeds budget at v0={v0}")
    if value <= 0:
        raise ConvergenceError(f"emitted probability is not positive ({value}) at v0={v0}")
    return value


_norm_cache = lru_cache(maxsize=256)(_norm_factor)


def norm_factor(p: SourceParams, rtol: float = 1e-10) -> float:
    """Total emitted probability ``N = int_0^inf J(0, t) dt``.

    Undefined for the non-decaying source (``v0 = 0``), which emits forever.
    Results are cached per ``(v0, rtol)``.
    """
    if p.v0 == 0:
        raise DomainError("normalization is not defined for v0 = 0")
    return _norm_cache(p.v0, rtol)


def psi_normalized(p: SourceParams, x, t):
    """``psi / sqrt(N)``: one emitted particle in total."""
    return psi_exact(p, x, t) / math.sqrt(norm_factor(p))
