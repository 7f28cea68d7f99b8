#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for `abers.abe_core`: grids, fields, norms, kernel and rectangle convolution."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from abers.abe_core import GridSpec, Field, KernelSpec, PhysicalParams, DomainError, KernelValidationError, \
    discrete_lp_norm, kernel_eval, kernel_moments, effective_viscosity, cfl_number, cfl_max_dt, \
    rectangle_convolution, discrete_kernel_mass

# millesimal values: no subnormal underflow in the p-th powers
finite_values = st.integers(-10 ** 6, 10 ** 6).map(lambda i: i / 1e3)


def _exponential_table(dz=1e-3, z_max=40.):
    z = np.linspace(0., z_max, int(round(z_max / dz)) + 1)
    return KernelSpec.tabulated(z, np.exp(-z))


def test_grid_nodes_are_cell_centers():
    grid = GridSpec(0., 1., 4)
    assert grid.dx == 0.25
    np.testing.assert_allclose(grid.nodes(), [0.125, 0.375, 0.625, 0.875])


@pytest.mark.parametrize("x_min, x_max, n_cells", [(1., 0., 10), (0., 0., 10), (0., 1., 2), (0., 1., 3.5)])
def test_grid_rejects_invalid(x_min, x_max, n_cells):
    with pytest.raises(DomainError):
        GridSpec(x_min, x_max, n_cells)


def test_grid_from_dx():
    grid = GridSpec.from_dx(-40., 40., 0.1)
    assert grid.n_cells == 800
    with pytest.raises(DomainError):
        GridSpec.from_dx(0., 1., 0.3)


def test_field_validates_and_is_immutable(grid):
    with pytest.raises(DomainError):
        Field(grid, np.zeros(grid.n_cells - 1))
    values = np.zeros(grid.n_cells)
    values[3] = np.nan
    with pytest.raises(DomainError):
        Field(grid, values)
    f = Field.zeros(grid)
    with pytest.raises(ValueError):
        f.values[0] = 1.


def test_field_value_semantics(grid):
    source = np.ones(grid.n_cells)
    f = Field(grid, source)
    source[0] = 5.
    assert f.values[0] == 1.
    assert f == Field(grid, np.ones(grid.n_cells))
    assert f != Field.zeros(grid)
    assert f.digest() == Field(grid, np.ones(grid.n_cells)).digest()
    assert f.digest() != Field.zeros(grid).digest()


def test_lp_norm_examples():
    assert discrete_lp_norm(Field.zeros(GridSpec(0., 1., 10)), 2.) == 0.
    assert discrete_lp_norm(Field(GridSpec(0., 1., 10), np.ones(10)), 1.) == pytest.approx(1.0, abs=1e-15)
    assert discrete_lp_norm(Field(GridSpec(0., 0.75, 3), [2., 0., 0.]), 2.) == pytest.approx(1.0, abs=1e-15)
    assert discrete_lp_norm(Field(GridSpec(0., 0.75, 3), [2., -3., 0.]), math.inf) == 3.


@pytest.mark.parametrize("p", [0.5, 0., -1., float("nan")])
def test_lp_norm_rejects_p_below_one(p):
    with pytest.raises(DomainError):
        discrete_lp_norm(Field.zeros(GridSpec(0., 1., 10)), p)


@settings(max_examples=50, deadline=None)
@given(values=arrays(np.float64, 16, elements=finite_values),
       c=finite_values,
       p=st.sampled_from([1., 1.5, 2., 3., math.inf]))
def test_lp_norm_is_homogeneous(values, c, p):
    grid = GridSpec(0., 1.6, 16)
    f = Field(grid, values)
    expected = abs(c) * discrete_lp_norm(f, p)
    assert discrete_lp_norm(Field(grid, c * values), p) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_kernel_eval_examples():
    k = KernelSpec.exponential()
    assert kernel_eval(k, -0.5) == 0.
    assert kernel_eval(k, 0.) == 0.
    assert kernel_eval(k, 1.) == pytest.approx(0.3678794, abs=1e-7)
    np.testing.assert_array_equal(kernel_eval(k, np.array([-1., 0., 2.])), [0., 0., math.exp(-2.)])


def test_exponential_moments_and_viscosity():
    assert kernel_moments(KernelSpec.exponential()) == (1., 1., 2.)
    assert effective_viscosity(PhysicalParams.normalized()) == 2.
    assert effective_viscosity(PhysicalParams.numerical_section()) == pytest.approx(0.03, abs=1e-15)


def test_tabulated_exponential_moments():
    m0, m1, m2 = kernel_moments(_exponential_table())
    assert m0 == pytest.approx(1., abs=1e-6)
    assert m1 == pytest.approx(1., abs=1e-6)
    assert m2 == pytest.approx(2., abs=1e-6)


def test_tabulated_kernel_validation():
    z = np.linspace(0., 40., 40001)
    with pytest.raises(KernelValidationError):
        KernelSpec.tabulated(z, 2. * np.exp(-z))  # mass 2
    with pytest.raises(KernelValidationError):
        KernelSpec.tabulated(z, -np.exp(-z))
    with pytest.raises(KernelValidationError):
        KernelSpec.tabulated(z[::-1], np.exp(-z))
    with pytest.raises(KernelValidationError):
        KernelSpec.tabulated(z, np.full(z.size, np.inf))


def test_kernel_equality():
    assert KernelSpec.exponential() == KernelSpec.exponential()
    assert _exponential_table() == _exponential_table()
    assert _exponential_table() != KernelSpec.exponential()
    assert PhysicalParams(100., 0.02) == PhysicalParams.numerical_section()


@pytest.mark.parametrize("gamma, dx, u_max, expected", [
    (100., 0.1, 1., 1. / 12.),
    (100., 0.1, 0., 0.5),
    (1., 1., 1., 1. / 3.),
])
def test_cfl_max_dt_examples(gamma, dx, u_max, expected):
    params = PhysicalParams(gamma, 0.02)
    grid = GridSpec.from_dx(0., 100. * dx, dx)
    dt = cfl_max_dt(params, grid, u_max)
    assert dt == pytest.approx(expected, rel=1e-14)
    assert cfl_number(params, grid, u_max, dt) == pytest.approx(1., rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(gamma=st.floats(0.1, 1e4), dx=st.floats(1e-3, 1.), u_max=st.floats(0., 100.))
def test_cfl_max_dt_saturates_the_bound(gamma, dx, u_max):
    params = PhysicalParams(gamma, 0.)
    grid = GridSpec(0., 10. * dx, 10)
    dt = cfl_max_dt(params, grid, u_max)
    assert cfl_number(params, grid, u_max, dt) == pytest.approx(1., rel=1e-12)


def test_convolution_of_zero_is_zero(grid):
    assert rectangle_convolution(KernelSpec.exponential(), Field.zeros(grid)) == Field.zeros(grid)


@pytest.mark.parametrize("kernel", [KernelSpec.exponential(), _exponential_table()], ids=["exponential", "tabulated"])
def test_convolution_of_spike(kernel):
    grid = GridSpec.from_dx(0., 20., 0.1)
    j0 = 50
    spike = np.zeros(grid.n_cells)
    spike[j0] = 1.
    out = rectangle_convolution(kernel, Field(grid, spike)).values
    j = np.arange(grid.n_cells)
    expected = np.where(j > j0, 0.1 * np.exp(-(j - j0) * 0.1), 0.)
    tol = 1e-14 if kernel.is_exponential else 1e-10
    np.testing.assert_allclose(out, expected, rtol=0., atol=tol)


def test_convolution_of_constant_far_from_the_boundary(grid):
    out = rectangle_convolution(KernelSpec.exponential(), Field(grid, np.ones(grid.n_cells))).values
    a = math.exp(-0.1)
    # one-sided rule: sum_{m >= 1} dx exp(-m dx)
    assert out[grid.n_cells // 2:] == pytest.approx(0.1 * a / (1. - a), abs=1e-12)
    assert 0.1 * a / (1. - a) == pytest.approx(0.9508, abs=1e-4)


@settings(max_examples=30, deadline=None)
@given(f=arrays(np.float64, 32, elements=finite_values),
       g=arrays(np.float64, 32, elements=finite_values),
       a=st.floats(-10., 10.), b=st.floats(-10., 10.))
def test_convolution_is_linear(f, g, a, b):
    grid = GridSpec(0., 3.2, 32)
    k = KernelSpec.exponential()
    combined = rectangle_convolution(k, Field(grid, a * f + b * g)).values
    separate = a * rectangle_convolution(k, Field(grid, f)).values + b * rectangle_convolution(k, Field(grid, g)).values
    scale = 1. + np.max(np.abs(a * f)) + np.max(np.abs(b * g))
    np.testing.assert_allclose(combined, separate, rtol=0., atol=1e-12 * scale)


@settings(max_examples=30, deadline=None)
@given(f=arrays(np.float64, 32, elements=st.floats(0., 1e3)))
def test_convolution_preserves_nonnegativity(f):
    grid = GridSpec(0., 3.2, 32)
    assert np.all(rectangle_convolution(KernelSpec.exponential(), Field(grid, f)).values >= 0.)


def test_convolution_mass_defect_is_first_order():
    k = KernelSpec.exponential()
    defects = []
    for dx in (0.1, 0.05, 0.025):
        grid = GridSpec.from_dx(-40., 80., dx)
        f = Field.from_function(grid, lambda x: np.exp(-0.5 * x ** 2))
        defects.append(abs(rectangle_convolution(k, f).mass() - f.mass()))
    assert defects[0] / defects[1] == pytest.approx(2., abs=0.1)
    assert defects[1] / defects[2] == pytest.approx(2., abs=0.1)


def test_discrete_kernel_mass():
    a = math.exp(-0.1)
    assert discrete_kernel_mass(KernelSpec.exponential(), 0.1) == pytest.approx(0.1 * a / (1. - a), rel=1e-15)
    assert discrete_kernel_mass(_exponential_table(), 0.1) == pytest.approx(0.1 * a / (1. - a), abs=1e-10)
