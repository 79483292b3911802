import math

import numpy as np
import pytest

from evanescent_source.errors import DomainError, PoleProximity, QuiescenceViolated
from evanescent_source.model import make_params, psi_exact
from evanescent_source.oracles import GridSpec, evolve_cn, psi_quadrature, self_convergence

# frozen from the exact solution; the quadrature must reproduce it
PSI_V0_0_X1_T1 = 0.18607722774444713 + 0.47038153064906574j


@pytest.fixture(scope="module")
def short_run():
    return evolve_cn(make_params(0.0), GridSpec(t_final=5.0))


def test_grid_field_boundary_and_initial_rows(short_run):
    p = make_params(0.0)
    assert np.all(short_run.values[:, 0] == np.exp(-1j * p.omega0 * short_run.times))
    assert short_run.values[0, 0] == 1 and np.all(short_run.values[0, 1:] == 0)
    assert short_run.times[0] == 0 and short_run.times[-1] == pytest.approx(5.0)


def test_cn_matches_exact_trace_at_x1(short_run):
    j = int(round(1.0 / (short_run.positions[1] - short_run.positions[0])))
    keep = short_run.times >= 0.5
    cn = short_run.values[keep, j]
    exact = psi_exact(make_params(0.0), 1.0, short_run.times[keep])
    assert np.linalg.norm(cn - exact) / np.linalg.norm(exact) < 1e-3


def test_grid_field_rows_export(short_run):
    rows = list(short_run.to_rows())
    assert len(rows) == short_run.values.size
    assert rows[0] == (0.0, 0.0, 1.0, 0.0)
    assert rows == sorted(rows, key=lambda r: (r[0], r[1]))


def test_closed_box_fails_quiescence():
    with pytest.raises(QuiescenceViolated):
        evolve_cn(make_params(0.1), GridSpec(dx=1e-2, dt=1e-3, x_domain=15, t_final=1.0, absorber_start=None))


def test_discrete_probability_balance_in_closed_box():
    g = GridSpec(dx=1e-2, dt=5e-4, x_domain=20, t_final=2.0, absorber_start=None, check_quiescence=False, startup_steps=0)
    field = evolve_cn(make_params(0.3), g)
    assert np.max(np.abs(field.mass - field.emitted)) < 1e-11


def test_start_up_steps_only_dissipate():
    g = GridSpec(dx=1e-2, dt=5e-4, x_domain=20, t_final=1.0, absorber_start=None, check_quiescence=False)
    field = evolve_cn(make_params(0.3), g)
    gap = field.emitted - field.mass
    assert np.all(gap >= -1e-12) and np.allclose(gap[1:], gap[-1], atol=1e-11)


@pytest.mark.parametrize(
    "kwargs",
    [dict(dx=0.0), dict(dt=-1.0), dict(x_domain=5.0), dict(absorber_start=1.0), dict(absorber_angle=2.0), dict(startup_steps=-1)],
)
def test_grid_spec_validation(kwargs):
    with pytest.raises(DomainError):
        GridSpec(**kwargs)


@pytest.mark.slow
def test_self_convergence_order():
    g = GridSpec(dx=2.5e-3, dt=1.25e-4, t_final=1.5)
    result = self_convergence(make_params(0.1), g)
    assert 1.7 <= result.order <= 2.3


def test_quadrature_boundary_identity():
    p = make_params(0.4)
    assert abs(psi_quadrature(p, 0.0, 1.0) - np.exp(-1j * p.omega0)) < 1e-13


def test_quadrature_pinned_value():
    assert abs(psi_quadrature(make_params(0.0), 1.0, 1.0) - PSI_V0_0_X1_T1) < 1e-12


def test_quadrature_without_residue_before_pole():
    # before t_c the line has not passed k0; the result is the bare integral
    p = make_params(0.3)
    x, t = 2.0, 1.0
    assert t < x / (2 * (1 - p.v0))
    assert abs(psi_quadrature(p, x, t) - psi_exact(p, x, t)) < 1e-10 * abs(psi_exact(p, x, t))


def test_quadrature_agrees_with_exact_at_random_points():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 100:
        v0, x, t = rng.uniform(0, 1), rng.uniform(0.1, 10), rng.uniform(0.05, 50)
        p = make_params(v0)
        if abs(t - p.t_c(x)) < 0.01:
            continue
        try:
            q = psi_quadrature(p, x, t)
        except PoleProximity:
            continue
        assert abs(q - psi_exact(p, x, t)) <= 1e-8 * abs(q)
        checked += 1


def test_residue_switch_is_continuous():
    p = make_params(0.3)
    x = 2.0
    t_c = float(p.t_c(x))
    for dt in (5e-3, 1e-2):
        jump_q = psi_quadrature(p, x, t_c + dt) - psi_quadrature(p, x, t_c - dt)
        jump_e = psi_exact(p, x, t_c + dt) - psi_exact(p, x, t_c - dt)
        assert abs(jump_q - jump_e) < 1e-6


def test_pole_proximity():
    p = make_params(0.3)
    with pytest.raises(PoleProximity):
        psi_quadrature(p, 2.0, float(p.t_c(2.0)))


@pytest.mark.parametrize("x,t", [(-1.0, 1.0), (1.0, 0.0), (math.nan, 1.0)])
def test_quadrature_domain(x, t):
    with pytest.raises(DomainError):
        psi_quadrature(make_params(0.2), x, t)
