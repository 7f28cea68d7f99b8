#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for `abers.abe_substeps`: Burgers substep, Crank-Nicolson relaxation, tridiagonal solvers, spectral flow."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from abers.abe_core import GridSpec, Field, KernelSpec, PhysicalParams, DomainError, StabilityError, \
    SingularSystemError, DomainTooSmallError, cfl_max_dt, discrete_lp_norm
from abers.abe_substeps import TridiagonalSystem, RelaxationSymbol, eo_flux, burgers_substep, thomas_solve, \
    solve_tridiagonal, cn_system, cn_relaxation_substep, spectral_relaxation_exact, _cn_banded_matrix, \
    _wavenumbers, STATIC_CACHE_SIZE
from abers.static_vars import clear_statics


def _interior_field(grid, rng, width=60):
    """Random data vanishing outside the middle `width` cells."""
    values = np.zeros(grid.n_cells)
    start = (grid.n_cells - width) // 2
    values[start:start + width] = rng.uniform(-1., 1., width)
    return Field(grid, values)


def test_eo_flux_examples():
    assert eo_flux(0., 0.) == 0.
    assert eo_flux(1., 1.) == -0.5
    assert eo_flux(-1., 2.) == -2.5


def test_eo_flux_consistency():
    a = np.linspace(-10., 10., 2001)
    np.testing.assert_allclose(eo_flux(a, a) + a * np.abs(a) / 2., 0., atol=1e-13)


def test_burgers_substep_hand_example():
    grid = GridSpec(0., 3., 3)
    out = burgers_substep(Field(grid, [0., 1., 0.]), PhysicalParams(100., 0.02), 0.1)
    np.testing.assert_allclose(out.values, [0.051, 0.948, 0.001], rtol=0., atol=1e-15)


def test_burgers_substep_keeps_constants_in_the_interior(grid, params):
    out = burgers_substep(Field(grid, np.full(grid.n_cells, 0.7)), params, 0.05)
    assert out.values[1:-1] == pytest.approx(0.7, abs=1e-14)


def test_burgers_substep_conserves_mass(grid, params, gaussian):
    out = burgers_substep(gaussian, params, 0.05)
    assert out.mass() == pytest.approx(gaussian.mass(), abs=1e-14)


def test_burgers_substep_rejects_cfl_violation(grid, params, gaussian):
    dt = cfl_max_dt(params, grid, gaussian.max_abs())
    burgers_substep(gaussian, params, dt)
    with pytest.raises(StabilityError):
        burgers_substep(gaussian, params, 1.01 * dt)
    with pytest.raises(DomainError):
        burgers_substep(gaussian, params, 0.)


@settings(max_examples=40, deadline=None)
@given(values=arrays(np.float64, 40, elements=st.floats(-3., 3.)),
       gamma=st.floats(1., 1e3),
       fraction=st.floats(0.05, 1.))
def test_burgers_substep_is_linf_stable(values, gamma, fraction):
    grid = GridSpec(0., 4., 40)
    values[0] = values[-1] = 0.
    values[1] = 1.5 if abs(values[1]) < 1. else values[1]  # max|u| >= 1: the bound implies monotonicity
    u = Field(grid, values)
    params = PhysicalParams(gamma, 0.)
    dt = fraction * cfl_max_dt(params, grid, u.max_abs())
    assert burgers_substep(u, params, dt).max_abs() <= u.max_abs() * (1. + 1e-14)


def test_substeps_commute_with_whole_cell_shifts(grid, params):
    rng = np.random.default_rng(7)
    u = _interior_field(grid, rng)
    shifted = Field(grid, np.roll(u.values, 5))
    np.testing.assert_allclose(np.roll(burgers_substep(u, params, 0.05).values, 5),
                               burgers_substep(shifted, params, 0.05).values, rtol=0., atol=1e-15)
    np.testing.assert_allclose(np.roll(cn_relaxation_substep(u, params, 0.05).values, 5),
                               cn_relaxation_substep(shifted, params, 0.05).values, rtol=0., atol=1e-13)


def test_tridiagonal_system_validates_bands():
    with pytest.raises(DomainError):
        TridiagonalSystem(np.ones(2), np.ones(2), np.ones(1), np.ones(2))


def test_thomas_examples():
    rhs = np.array([1., 2., 3.])
    identity = TridiagonalSystem(np.zeros(2), np.ones(3), np.zeros(2), rhs)
    np.testing.assert_array_equal(thomas_solve(identity), rhs)
    two = TridiagonalSystem([1.], [2., 2.], [1.], [3., 3.])
    np.testing.assert_allclose(thomas_solve(two), [1., 1.], rtol=0., atol=1e-15)
    one = TridiagonalSystem([], [4.], [], [2.])
    np.testing.assert_array_equal(thomas_solve(one), [0.5])


def test_thomas_rejects_zero_pivot():
    with pytest.raises(SingularSystemError):
        thomas_solve(TridiagonalSystem([1.], [0., 1.], [1.], [1., 1.]))
    with pytest.raises(SingularSystemError):
        thomas_solve(TridiagonalSystem([1.], [1., 1.], [1.], [1., 1.]))  # pivot 1 - 1 = 0 in row 1


def _random_dominant(rng, n):
    lower = rng.uniform(-1., 1., n - 1)
    upper = rng.uniform(-1., 1., n - 1)
    diag = 2.5 + rng.uniform(0., 1., n)
    diag *= rng.choice([-1., 1.], n)
    return TridiagonalSystem(lower, diag, upper, rng.uniform(-1., 1., n))


def test_thomas_matches_dense_elimination():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        sys = _random_dominant(rng, int(rng.integers(1, 101)))
        x = thomas_solve(sys)
        expected = np.linalg.solve(sys.to_dense(), sys.rhs)
        np.testing.assert_allclose(x, expected, rtol=0., atol=1e-12)
        a = sys.to_dense()
        residual = np.max(np.abs(a @ x - sys.rhs))
        assert residual <= 1e-10 * np.max(np.sum(np.abs(a), axis=1)) * np.max(np.abs(x))


def test_solve_tridiagonal_backends_agree():
    rng = np.random.default_rng(5)
    sys = _random_dominant(rng, 50)
    np.testing.assert_allclose(solve_tridiagonal(sys, "banded"), solve_tridiagonal(sys, "thomas"), atol=1e-13)
    with pytest.raises(DomainError):
        solve_tridiagonal(sys, "lu")


def test_cn_system_bands():
    sys = cn_system(np.array([0., 1., 0.]), dx=0.1, dt=0.05, c_nu=0.02)
    s, r = 5., 0.02 * 0.05 / (2. * 0.01)
    np.testing.assert_allclose(sys.lower, [-s - r] * 2)
    np.testing.assert_allclose(sys.diag, [1. + 2. * r] * 3)
    np.testing.assert_allclose(sys.upper, [s - r] * 2)
    np.testing.assert_allclose(sys.rhs, [s + r, 1. - 2. * r, -s + r])


def test_cn_step_solves_the_scheme(grid, params, gaussian):
    dt, dx, c_nu = 0.05, grid.dx, params.c_nu
    half = np.concatenate([[0.], gaussian.values, [0.]])
    new = np.concatenate([[0.], cn_relaxation_substep(gaussian, params, dt).values, [0.]])
    increment = new - half
    lhs = increment[1:-1] / dt + (increment[2:] - increment[:-2]) / (2. * dx * dt)
    second = lambda v: v[:-2] - 2. * v[1:-1] + v[2:]
    rhs = c_nu / 2. * (second(new) + second(half)) / dx ** 2
    np.testing.assert_allclose(lhs, rhs, rtol=0., atol=1e-11)


def test_cn_literal_denominator_changes_the_scheme(params, gaussian):
    centered = cn_relaxation_substep(gaussian, params, 0.05)
    literal = cn_relaxation_substep(gaussian, params, 0.05, literal_denominator=True)
    assert discrete_lp_norm(centered.with_values(centered.values - literal.values), 2.) > 1e-6


def test_cn_keeps_constants_in_the_interior(grid, params):
    out = cn_relaxation_substep(Field(grid, np.full(grid.n_cells, 2.)), params, 0.05).values
    # zero ghosts: the boundary perturbation decays like exp(-x) away from the edges
    assert out[300:500] == pytest.approx(2., abs=1e-12)


def test_cn_conserves_mass(params, gaussian):
    out = cn_relaxation_substep(gaussian, params, 0.05)
    assert out.mass() == pytest.approx(gaussian.mass(), abs=1e-12)


def test_cn_backends_agree(params, gaussian):
    banded = cn_relaxation_substep(gaussian, params, 0.05, method="banded")
    thomas = cn_relaxation_substep(gaussian, params, 0.05, method="thomas")
    np.testing.assert_allclose(banded.values, thomas.values, rtol=0., atol=1e-13)


def test_cn_rejects_tabulated_kernel(grid, gaussian):
    z = np.linspace(0., 40., 40001)
    params = PhysicalParams(100., 0.02, KernelSpec.tabulated(z, np.exp(-z)))
    with pytest.raises(DomainError):
        cn_relaxation_substep(gaussian, params, 0.05)


def test_cn_matrix_cache():
    clear_statics(_cn_banded_matrix)
    a = _cn_banded_matrix(10, 0.1, 0.05, 0.02, False)
    assert _cn_banded_matrix(10, 0.1, 0.05, 0.02, False) is a
    assert _cn_banded_matrix(10, 0.1, 0.025, 0.02, False) is not a
    assert len(_cn_banded_matrix.statics.cache) == 2
    clear_statics(_cn_banded_matrix)
    assert len(_cn_banded_matrix.statics.cache) == 0


def test_static_caches_stay_bounded():
    clear_statics(_cn_banded_matrix)
    clear_statics(_wavenumbers)
    for k in range(3 * STATIC_CACHE_SIZE):
        dt = 0.001 * (k + 1)
        ab = _cn_banded_matrix(10, 0.1, dt, 0.02, False)
        np.testing.assert_array_equal(ab, cn_system(np.zeros(10), 0.1, dt, 0.02).banded())
        _wavenumbers(10 + k, 0.1)
        assert len(_cn_banded_matrix.statics.cache) <= STATIC_CACHE_SIZE
        assert len(_wavenumbers.statics.cache) <= STATIC_CACHE_SIZE
    assert _cn_banded_matrix(10, 0.1, dt, 0.02, False) is ab


def test_relaxation_symbol():
    xi = np.linspace(-50., 50., 1001)
    params = PhysicalParams.normalized()
    for t in (0., 0.1, 1., 10.):
        symbol = RelaxationSymbol.evaluate(xi, params, t)
        assert np.all(np.abs(symbol.value) <= 1. + 1e-15)
        np.testing.assert_allclose(symbol.value, np.exp(-t * xi ** 2 / (1. + 1j * xi)), rtol=1e-12)
    assert RelaxationSymbol.evaluate(0., params, 5.).value[0] == 1.


def test_relaxation_symbol_of_tabulated_kernel():
    z = np.linspace(0., 40., 40001)
    params = PhysicalParams(1., 1., KernelSpec.tabulated(z, np.exp(-z)))
    xi = np.linspace(-5., 5., 41)
    tabulated = RelaxationSymbol.evaluate(xi, params, 1.).value
    exact = RelaxationSymbol.evaluate(xi, PhysicalParams.normalized(), 1.).value
    np.testing.assert_allclose(tabulated, exact, rtol=0., atol=1e-5)


def test_spectral_flow_basics(params, gaussian):
    assert spectral_relaxation_exact(gaussian, params, 0.) == gaussian
    out = spectral_relaxation_exact(gaussian, params, 5.)
    assert np.mean(out.values) == pytest.approx(np.mean(gaussian.values), rel=1e-13)
    assert discrete_lp_norm(out, 2.) <= discrete_lp_norm(gaussian, 2.)
    with pytest.raises(DomainError):
        spectral_relaxation_exact(gaussian, params, -1.)


def test_spectral_flow_odd_grid(params):
    grid = GridSpec(-40., 40., 801)
    u = Field.from_function(grid, lambda x: np.exp(-0.5 * x ** 2))
    out = spectral_relaxation_exact(u, params, 2.)
    assert out.mass() == pytest.approx(u.mass(), rel=1e-13)


def test_spectral_flow_rejects_complex_residue(monkeypatch, params, gaussian):
    def lopsided(xi, params, t, symbol="continuous", dx=None):
        return RelaxationSymbol(xi, np.full(xi.shape, 1j))  # turns a real field into an imaginary one

    monkeypatch.setattr(RelaxationSymbol, "evaluate", staticmethod(lopsided))
    with pytest.raises(DomainTooSmallError):
        spectral_relaxation_exact(gaussian, params, 1.)


def test_cn_is_second_order_against_the_centered_flow():
    grid = GridSpec.from_dx(-30., 30., 0.02)
    params = PhysicalParams.numerical_section()
    u0 = Field.from_function(grid, lambda x: np.exp(-0.5 * x ** 2))
    T = 1.
    exact = spectral_relaxation_exact(u0, params, T, symbol="centered")
    errors = []
    for n in (4, 8, 16, 32):
        u = u0
        for _ in range(n):
            u = cn_relaxation_substep(u, params, T / n)
        errors.append(discrete_lp_norm(u.with_values(u.values - exact.values), 2.))
    orders = [math.log2(errors[k] / errors[k + 1]) for k in range(3)]
    assert min(orders) >= 1.9


def test_cn_agrees_with_the_continuous_flow(params, gaussian):
    exact = spectral_relaxation_exact(gaussian, params, 1.)
    u = gaussian
    for _ in range(20):
        u = cn_relaxation_substep(u, params, 0.05)
    assert discrete_lp_norm(u.with_values(u.values - exact.values), 2.) < 1e-3 * discrete_lp_norm(gaussian, 2.)
