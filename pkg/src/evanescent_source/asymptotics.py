"""Saddle and pole contributions, their interference, and small-v0 expansions.

Far from ``t ~ |tau|`` the exact wave splits into a saddle term (power-law
forerunner) and a pole term (the source's exponential decay, entering at
``t_c = x / (2 (1 - v0))``). Step functions use closed support: the pole is
present for ``t >= t_c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RangeError
from .model import SourceParams, _check_xt, complex_time

SQRT_2PI = math.sqrt(2.0 * math.pi)


def _tau(p: SourceParams, x):
    return -np.asarray(x, dtype=float) / (2.0 * p.k0)


def psi_saddle(p: SourceParams, x, t):
    """``-sqrt(2t/pi) exp(i k_s^2 t) / ((i-1) k0) * tau / (t^2 - tau^2)``."""
    x, t = _check_xt(x, t)
    tau = _tau(p, x)
    ks = x / (2.0 * t)
    val = (
        -np.sqrt(2.0 * t / np.pi)
        * np.exp(1j * ks * ks * t)
        / ((1j - 1.0) * p.k0)
        * tau
        / (t * t - tau * tau)
    )
    return np.asarray(val)[()]


def density_saddle(p: SourceParams, x, t):
    """``|psi_S|^2 = t |tau|^2 / (pi |k0|^2 [t^4 + |tau|^4 - 2 t^2 Re tau^2])``."""
    x, t = _check_xt(x, t)
    tau = _tau(p, x)
    mod2 = np.abs(tau) ** 2
    denom = t**4 + mod2 * mod2 - 2.0 * t * t * np.real(tau * tau)
    return np.asarray(t * mod2 / (np.pi * abs(p.k0) ** 2 * denom))[()]


def pole_support(p: SourceParams, x, t):
    """True where the pole has been crossed: ``k_s <= 1 - v0`` (equivalently ``t >= t_c``)."""
    x, t = _check_xt(x, t)
    return np.asarray(x <= 2.0 * (1.0 - p.v0) * t)[()]


def psi_pole(p: SourceParams, x, t):
    """``exp(-i(v0^2-1)t - i v0 x) exp(-2 v0 t - x)`` for ``t >= t_c``, else 0.

    Propagates leftwards (phase gradient ``-v0``); identically zero at ``v0 = 1``.
    """
    x, t = _check_xt(x, t)
    v0 = p.v0
    val = np.exp(-1j * (v0 * v0 - 1.0) * t - 1j * v0 * x - 2.0 * v0 * t - x)
    on = np.asarray(pole_support(p, x, t))
    return np.asarray(np.where(on, val, 0j))[()]


def density_pole(p: SourceParams, x, t):
    return np.asarray(np.abs(psi_pole(p, x, t)) ** 2)[()]


def u_moduli(p: SourceParams, x, t):
    """``|u_(+/-)|`` from ``|u_(+/-)|^2 = t |k0|^2 +/- v0 x + x^2 / (4t)``.

    Both large means the pole/saddle split is trustworthy. At ``x = 0`` both
    equal ``|k0| sqrt(t)``.
    """
    x, t = _check_xt(x, t)
    base = t * abs(p.k0) ** 2 + x * x / (4.0 * t)
    shift = p.v0 * x
    return np.asarray(np.sqrt(base + shift))[()], np.asarray(np.sqrt(base - shift))[()]


@dataclass(frozen=True)
class WaveDecomposition:
    psi_saddle: complex
    psi_pole: complex
    psi_approx: complex
    u_abs_plus: float
    u_abs_minus: float


def decompose(p: SourceParams, x: float, t: float) -> WaveDecomposition:
    s = complex(psi_saddle(p, x, t))
    o = complex(psi_pole(p, x, t))
    up, um = u_moduli(p, x, t)
    return WaveDecomposition(s, o, s + o, float(up), float(um))


@dataclass(frozen=True)
class DITParameters:
    Gamma: float
    Omega: float
    F_plus: float
    F_minus: float
    Delta: float
    theta: float


def _dit_coefficients(v0: float, ks):
    Gamma = 2.0 * (v0 + ks)
    Omega = 1.0 + ks * ks - v0 * v0 - 2.0 * ks * v0
    F_plus = 1.0 - v0 * (2.0 + v0) + ks * ks
    F_minus = -1.0 - v0 * (2.0 - v0) - ks * ks
    Delta = v0**4 - 2.0 * v0 * v0 * (ks * ks - 1.0) + (ks * ks + 1.0) ** 2
    return Gamma, Omega, F_plus, F_minus, Delta


def dit_parameters(p: SourceParams, x: float, t: float) -> DITParameters:
    _check_xt(x, t)
    ks = x / (2.0 * t)
    Gamma, Omega, F_plus, F_minus, Delta = _dit_coefficients(p.v0, ks)
    tau_I = complex_time(p, x).tau_I
    theta = t / tau_I if tau_I > 0 else math.inf
    return DITParameters(Gamma, Omega, F_plus, F_minus, Delta, theta)


def psi_interference(p: SourceParams, x, t):
    """Closed-form pole/saddle interference term.

    ``x / (t^1.5 Delta) / sqrt(2 pi) * exp(-Gamma t) (F+ cos(Omega t) + F- sin(Omega t))``
    on the pole support. This is *not* the cross term of ``|psi_0 + psi_S|^2``
    (see :func:`cross_term`). It equals :func:`interference_unconjugated` at
    ``v0 = 0`` and differs from it by ``4 v0 C (cos(Omega t) + sin(Omega t))``
    otherwise, with ``C`` the prefactor in front of the bracket.
    """
    x, t = _check_xt(x, t)
    ks = x / (2.0 * t)
    Gamma, Omega, F_plus, F_minus, Delta = _dit_coefficients(p.v0, ks)
    val = (
        x
        / (t**1.5 * Delta)
        / SQRT_2PI
        * np.exp(-Gamma * t)
        * (F_plus * np.cos(Omega * t) + F_minus * np.sin(Omega * t))
    )
    on = np.asarray(pole_support(p, x, t))
    return np.asarray(np.where(on, val, 0.0))[()]


def interference_envelope(p: SourceParams, x, t):
    """Modulus of the oscillation in :func:`psi_interference`: ``sqrt(F+^2 + F-^2)`` in place of the bracket."""
    x, t = _check_xt(x, t)
    ks = x / (2.0 * t)
    Gamma, _, F_plus, F_minus, Delta = _dit_coefficients(p.v0, ks)
    val = x / (t**1.5 * Delta) / SQRT_2PI * np.exp(-Gamma * t) * np.hypot(F_plus, F_minus)
    on = np.asarray(pole_support(p, x, t))
    return np.asarray(np.where(on, val, 0.0))[()]


def cross_term(p: SourceParams, x, t):
    """``|psi_0 + psi_S|^2 - |psi_0|^2 - |psi_S|^2 = 2 Re[psi_0 conj(psi_S)]``."""
    return np.asarray(2.0 * np.real(psi_pole(p, x, t) * np.conj(psi_saddle(p, x, t))))[()]


def interference_unconjugated(p: SourceParams, x, t):
    """``2 Re[psi_0 psi_S]`` with no conjugate, the form whose phase rate is ``Omega``."""
    return np.asarray(2.0 * np.real(psi_pole(p, x, t) * psi_saddle(p, x, t)))[()]


def dit_small_v0(p: SourceParams, x: float, t: float) -> tuple[float, float, float]:
    """Leading small-``v0``, large-``theta`` forms of the DIT exponent, frequency and amplitude.

    Returns ``(exponent, omega_approx, amplitude)`` with
    ``exponent = -x (1 + v0 theta)``, ``omega_approx = 1 - v0 (v0 + v0/theta)`` and
    ``amplitude = exp(-Gamma t) / (sqrt(2 pi x) theta^1.5) [1 + 2 v0 (1 - 9 v0 / 8)]``,
    where ``theta = t / tau_I``. Only valid for ``theta >= 3`` and ``v0 <= 0.3``.
    """
    _check_xt(x, t)
    if x <= 0:
        raise DomainError("x must be positive")
    v0 = p.v0
    theta = t / complex_time(p, x).tau_I
    if theta < 3.0 or v0 > 0.3:
        raise RangeError(f"small-v0 expansion needs theta >= 3 and v0 <= 0.3 (theta={theta:.3g}, v0={v0})")
    exponent = -x * (1.0 + v0 * theta)
    omega_approx = 1.0 - v0 * (v0 + v0 / theta)
    gamma_t = 2.0 * v0 * t + x
    amplitude = (
        math.exp(-gamma_t) / (math.sqrt(2.0 * math.pi * x) * theta**1.5) * (1.0 + 2.0 * v0 * (1.0 - 9.0 * v0 / 8.0))
    )
    return exponent, omega_approx, amplitude
