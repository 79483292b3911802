"""Two reference solvers that share no code with the Faddeeva path.

* :func:`evolve_cn` integrates ``i psi_t = -psi_xx`` on a grid with the source
  value imposed at ``x = 0`` (Crank-Nicolson, LAPACK tridiagonal solves).
* :func:`psi_quadrature` integrates the spectral representation along the
  steepest-descent line through the saddle ``k_s = x / (2t)`` and adds the pole
  residue once the line has swept past ``k0``.

Absorbing layer
---------------
The sudden switch-on radiates a tail ``|psi|^2 ~ 4t / (pi x^2)`` that reaches
any finite box immediately, so a hard wall reflects it back into the
observation window. By default the grid therefore ends in an exterior
complex-scaling layer: nodes beyond ``absorber_start`` are rotated into the
complex plane, ``z = x1 + exp(i angle) (x - x1)``, where outgoing waves decay
without reflection. Setting ``absorber_start=None`` gives the plain zero
Dirichlet box.

Start-up
--------
The boundary value jumps from 0 to 1 at ``t = 0``. Crank-Nicolson does not
damp the stiff lattice modes this excites, which costs an order of accuracy.
The first ``startup_steps`` steps use backward Euler instead (Rannacher
smoothing), which restores second-order convergence.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.linalg.lapack import zgttrf, zgttrs

from .errors import ConvergenceError, DomainError, PoleProximity, QuiescenceViolated
from .model import SourceParams

QUIESCENCE_TOL = 1e-10
POLE_EPS = 1e-3
GAUSS_CUTOFF = -math.log(1e-16)
STEEPEST = complex(math.cos(math.pi / 4), -math.sin(math.pi / 4))


@dataclass(frozen=True)
class GridSpec:
    """Crank-Nicolson grid.

    ``x_obs`` bounds the stored window and ``store_dt`` the stored time step;
    ``startup_steps`` backward-Euler steps start the run. A closed box
    (``absorber_start=None``) can never pass the quiescence check, because the
    switch-on tail reaches the wall at once; turn ``check_quiescence`` off
    when a reflecting box is wanted on purpose (e.g. for probability balance).
    """

    dx: float = 5e-3
    dt: float = 2.5e-4
    x_domain: float = 60.0
    t_final: float = 10.0
    x_obs: float = 5.0
    store_dt: float = 0.05
    absorber_start: Optional[float] = 20.0
    absorber_angle: float = 0.5
    startup_steps: int = 4
    check_quiescence: bool = True

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0 and self.t_final > 0 and self.store_dt > 0):
            raise DomainError("dx, dt, t_final and store_dt must be positive")
        if not self.x_domain > self.x_obs + 5 * self.dx:
            raise DomainError("x_domain must exceed x_obs by at least 5 dx")
        if self.absorber_start is not None:
            if not self.x_obs <= self.absorber_start < self.x_domain:
                raise DomainError("absorber must start between x_obs and x_domain")
            if not 0 < self.absorber_angle < math.pi / 2:
                raise DomainError("absorber angle must lie in (0, pi/2)")
        if self.startup_steps < 0:
            raise DomainError("startup_steps must be non-negative")

    @property
    def n_cells(self) -> int:
        return int(round(self.x_domain / self.dx))

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def refined(self, factor: int) -> "GridSpec":
        """Same run with ``dx`` and ``dt`` multiplied by ``factor`` (``> 1`` coarsens)."""
        return GridSpec(
            dx=self.dx * factor,
            dt=self.dt * factor,
            x_domain=self.x_domain,
            t_final=self.t_final,
            x_obs=self.x_obs,
            store_dt=self.store_dt,
            absorber_start=self.absorber_start,
            absorber_angle=self.absorber_angle,
            startup_steps=self.startup_steps,
            check_quiescence=self.check_quiescence,
        )


@dataclass(frozen=True)
class GridField:
    """Stored snapshots: ``values[i, j]`` is psi at ``times[i]``, ``positions[j]``.

    Row 0 is the initial state (``t = 0``, the source value 1 at ``x = 0``).
    ``mass[i]`` is ``dx * sum |psi_j|^2`` over the interior nodes of the
    physical part of the grid (up to the absorber, or the whole box).
    ``emitted[i]`` accumulates the discrete boundary current
    ``2 Im[conj(b) psi_1] / dx`` with the time levels averaged the way the
    scheme averages them. In a closed box Crank-Nicolson conserves
    ``mass - emitted`` to round-off; backward-Euler start-up steps dissipate a
    little on top.
    """

    times: np.ndarray
    positions: np.ndarray
    values: np.ndarray
    mass: np.ndarray
    emitted: np.ndarray

    def to_rows(self):
        """``(t, x, Re psi, Im psi)`` rows sorted by ``(t, x)``."""
        for i, t in enumerate(self.times):
            for j, x in enumerate(self.positions):
                v = self.values[i, j]
                yield float(t), float(x), float(v.real), float(v.imag)


def _laplacian(nodes: np.ndarray):
    """Three-point second derivative on (possibly complex) non-uniform nodes."""
    hm = nodes[1:-1] - nodes[:-2]
    hp = nodes[2:] - nodes[1:-1]
    lower = 2.0 / (hm * (hm + hp))
    upper = 2.0 / (hp * (hm + hp))
    return lower, -lower - upper, upper


def evolve_cn(p: SourceParams, g: GridSpec) -> GridField:
    """Crank-Nicolson solution of the switched-on source problem.

    The boundary value ``exp(-i omega0 t)`` enters trapezoidally in time.
    Raises QuiescenceViolated if ``|psi|`` five cells before the far wall
    exceeds 1e-10 at any step (unless ``g.check_quiescence`` is off).
    """
    m = g.n_cells
    q = g.dx * np.arange(m + 1)
    nodes = q.astype(complex)
    if g.absorber_start is not None:
        outer = q > g.absorber_start
        nodes[outer] = g.absorber_start + np.exp(1j * g.absorber_angle) * (q[outer] - g.absorber_start)
    lower, diag, upper = _laplacian(nodes)
    physical_end = m if g.absorber_start is None else int(math.floor(g.absorber_start / g.dx + 1e-9))
    n_obs = int(math.floor(g.x_obs / g.dx + 1e-9))
    watch = m - 5 - 1  # interior index of node m - 5

    def factor(a):
        return zgttrf(-a * lower[1:], 1.0 - a * diag, -a * upper[:-1])

    def mass_of(interior):
        return g.dx * float(np.sum(np.abs(interior[: physical_end - 1]) ** 2))

    omega0 = p.omega0
    psi = np.zeros(m - 1, dtype=complex)
    b_prev = 1.0 + 0j
    times = [0.0]
    rows = [np.concatenate(([b_prev], psi[:n_obs]))]
    masses = [mass_of(psi)]
    emitted = 0.0
    emitted_log = [0.0]
    a_be, a_cn = 1j * g.dt, 0.5j * g.dt
    lu_be = factor(a_be) if g.startup_steps else None
    lu_cn = factor(a_cn)
    store_every = max(1, int(round(g.store_dt / g.dt)))
    for n in range(1, g.n_steps + 1):
        t = n * g.dt
        b = np.exp(-1j * omega0 * t)
        if n <= g.startup_steps:
            rhs = psi.copy()
            rhs[0] += a_be * lower[0] * b
            dl, d, du, du2, ipiv, _ = lu_be
        else:
            rhs = psi + a_cn * diag * psi
            rhs[1:] += a_cn * lower[1:] * psi[:-1]
            rhs[:-1] += a_cn * upper[:-1] * psi[1:]
            rhs[0] += a_cn * lower[0] * (b + b_prev)
            dl, d, du, du2, ipiv, _ = lu_cn
        first_old = psi[0]
        psi, info = zgttrs(dl, d, du, du2, ipiv, rhs)
        if info != 0:
            raise ConvergenceError(f"tridiagonal solve failed (info={info}) at step {n}")
        if n <= g.startup_steps:
            emitted += g.dt * 2.0 * (np.conj(b) * psi[0]).imag / g.dx
        else:
            emitted += g.dt * 0.5 * (np.conj(b + b_prev) * (psi[0] + first_old)).imag / g.dx
        if g.check_quiescence and abs(psi[watch]) >= QUIESCENCE_TOL:
            raise QuiescenceViolated(
                f"|psi| = {abs(psi[watch]):.3g} near the far boundary at t = {t:.4g}; enlarge the domain"
            )
        b_prev = b
        if n % store_every == 0:
            times.append(t)
            rows.append(np.concatenate(([b], psi[:n_obs])))
            masses.append(mass_of(psi))
            emitted_log.append(emitted)
    return GridField(
        times=np.array(times),
        positions=q[: n_obs + 1].copy(),
        values=np.array(rows),
        mass=np.array(masses),
        emitted=np.array(emitted_log),
    )


@dataclass(frozen=True)
class SelfConvergence:
    ratio: float
    order: float


def self_convergence(p: SourceParams, g: GridSpec, t_min: float = 0.5) -> SelfConvergence:
    """Richardson check from runs at ``h``, ``2h`` and ``4h`` (``h = (dx, dt)``).

    ``ratio = |u_4h - u_2h| / |u_2h - u_h|`` on the shared nodes with
    ``t >= t_min``; second order gives 4. Raises ConvergenceError when the
    ratio is off by more than 50%.
    """
    fields = [evolve_cn(p, g.refined(f)) for f in (1, 2, 4)]
    coarse = fields[2]
    keep_t = coarse.times >= t_min - 1e-12

    def sample(field, f):
        stride = 4 // f
        cols = np.arange(0, len(coarse.positions)) * stride
        rows = np.searchsorted(field.times, coarse.times[keep_t] - 1e-9)
        return field.values[np.ix_(rows, cols)]

    u1, u2, u4 = sample(fields[0], 1), sample(fields[1], 2), sample(fields[2], 4)
    ratio = float(np.linalg.norm(u4 - u2) / np.linalg.norm(u2 - u1))
    order = math.log2(ratio)
    if abs(ratio - 4.0) > 2.0:
        raise ConvergenceError(f"Richardson ratio {ratio:.3g} (order {order:.3g}) is not close to 4")
    return SelfConvergence(ratio, order)


def _gauss_half_width(t: float) -> float:
    return math.sqrt(GAUSS_CUTOFF / t)


def psi_quadrature(p: SourceParams, x: float, t: float, tol: float = 1e-12) -> complex:
    """Direct contour integral of the spectral representation.

    ``psi = (i / 2 pi) int [1/(k - k0) + 1/(k + k0)] exp(i k x - i k^2 t) dk``
    taken along ``k = k_s + exp(-i pi/4) s``, where the exponent becomes
    ``i k_s^2 t - t s^2``. The residue ``exp(i k0 x - i omega0 t)`` is added
    once the line has passed the pole (``t >= t_c``).

    Raises PoleProximity when either pole lies within 1e-3 of the line.
    """
    if not (x >= 0 and t > 0) or math.isnan(x) or math.isnan(t):
        raise DomainError("psi_quadrature needs x >= 0 and t > 0")
    k0 = p.k0
    ks = x / (2.0 * t)
    # signed distance of a pole from the line: Im[(pole - k_s) conj(direction)]
    d_plus = ((k0 - ks) * STEEPEST.conjugate()).imag
    d_minus = ((-k0 - ks) * STEEPEST.conjugate()).imag
    if min(abs(d_plus), abs(d_minus)) < POLE_EPS:
        raise PoleProximity(f"integration line passes within {POLE_EPS} of a pole at x={x}, t={t}")
    s_plus = ((k0 - ks) * STEEPEST.conjugate()).real
    s_minus = ((-k0 - ks) * STEEPEST.conjugate()).real
    half = _gauss_half_width(t)
    tol = max(tol, 1e-13)  # quadpack refuses anything near machine epsilon

    def f(s):
        k = ks + STEEPEST * s
        return math.exp(-t * s * s) * (1.0 / (k - k0) + 1.0 / (k + k0))

    breaks = sorted(s for s in (s_plus, s_minus) if -half < s < half)
    with warnings.catch_warnings():
        # quadpack's roundoff warnings are superseded by the explicit error check below
        warnings.simplefilter("ignore")
        value, err = quad(
            f, -half, half, points=breaks or None, limit=400, epsabs=0.0, epsrel=tol, complex_func=True
        )
    scale = math.sqrt(math.pi / t) * 2.0 / (abs(k0) + ks + 1.0)
    if not math.isfinite(value.real + value.imag) or abs(err) > max(1e3 * tol * abs(value), 1e-14 * scale):
        raise ConvergenceError(f"contour quadrature did not converge at x={x}, t={t} (err {err:.2e})")
    psi = 1j / (2.0 * math.pi) * STEEPEST * np.exp(1j * ks * ks * t) * value
    # the pole at k0 sits on the far side of the line once d_plus > 0
    if d_plus > 0:
        psi += np.exp(1j * k0 * x - 1j * p.omega0 * t)
    return complex(psi)
