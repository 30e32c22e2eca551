import math

import numpy as np
import pytest

from nlac.grid import Field, GridError, make_grid
from nlac.kernel import default_spec, multiplier, symbol_table
from nlac.ops import (apply_laplacian, apply_nonlocal, consistency_residual,
                      nonlocal_energy, project)


@pytest.fixture(scope="module")
def setup():
    g = make_grid(2, 32)
    spec = default_spec(2)
    table = symbol_table(spec, 0.25, g)
    return g, spec, table


def test_nonlocal_annihilates_constants(setup):
    g, _, table = setup
    out = apply_nonlocal(Field(g, np.full(g.shape, 5.0)), table)
    assert np.max(np.abs(out.values)) < 1e-12


def test_nonlocal_single_mode(setup):
    g, spec, table = setup
    x, _ = g.coordinates()
    out = apply_nonlocal(Field(g, np.cos(x)), table)
    m = multiplier(spec, 0.25, 1.0)
    assert np.max(np.abs(out.values - m * np.cos(x))) < 1e-10


def test_nonlocal_oblique_mode():
    g2 = make_grid(2, 16)
    spec = default_spec(2)
    table = symbol_table(spec, 0.5, g2)
    x, y = g2.coordinates()
    u = np.cos(2 * x + y)
    out = apply_nonlocal(Field(g2, u), table)
    m = multiplier(spec, 0.5, math.sqrt(5.0))
    assert np.max(np.abs(out.values - m * u)) < 1e-9


def test_nonlocal_linearity(setup):
    g, _, table = setup
    rng = np.random.default_rng(0)
    u, v = rng.standard_normal(g.shape), rng.standard_normal(g.shape)
    lhs = apply_nonlocal(Field(g, 2.0 * u - 3.0 * v), table).values
    rhs = 2.0 * apply_nonlocal(Field(g, u), table).values \
        - 3.0 * apply_nonlocal(Field(g, v), table).values
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_nonlocal_self_adjoint_nonnegative(setup):
    g, _, table = setup
    rng = np.random.default_rng(1)
    for _ in range(5):
        u = rng.standard_normal(g.shape)
        v = rng.standard_normal(g.shape)
        lu = apply_nonlocal(Field(g, u), table).values
        lv = apply_nonlocal(Field(g, v), table).values
        a = np.sum(lu * v)
        b = np.sum(u * lv)
        assert a == pytest.approx(b, rel=1e-10)
        assert np.sum(lu * u) >= -1e-10 * np.sum(u * u)


def test_laplacian_modes(setup):
    g, _, _ = setup
    x, y = g.coordinates()
    out = apply_laplacian(Field(g, np.cos(x)))
    assert np.max(np.abs(out.values + np.cos(x))) < 1e-10
    out = apply_laplacian(Field(g, np.full(g.shape, 2.0)))
    assert np.max(np.abs(out.values)) < 1e-12
    u = np.sin(2 * x + y)
    out = apply_laplacian(Field(g, u))
    assert np.max(np.abs(out.values + 5.0 * u)) < 1e-9


def test_energy_values(setup):
    g, spec, table = setup
    assert nonlocal_energy(Field(g, np.full(g.shape, 3.0)), table) == pytest.approx(0.0, abs=1e-12)
    x, _ = g.coordinates()
    e = nonlocal_energy(Field(g, np.cos(x)), table)
    m = multiplier(spec, 0.25, 1.0)
    assert e == pytest.approx(math.pi ** 2 * m, rel=1e-12)


def test_energy_dirichlet_limit():
    # E_eta -> (1/2)||grad u||^2 for band-limited u at small eta
    g = make_grid(2, 32)
    spec = default_spec(2)
    table = symbol_table(spec, 1e-3, g)
    rng = np.random.default_rng(2)
    coeffs = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    u = Field(g, np.real(np.fft.ifftn(np.where(g.k_squared() <= 16, coeffs, 0))))
    dirichlet = 0.5 * (2 * math.pi) ** -2 * np.sum(g.k_squared() * np.abs(u.coeffs) ** 2)
    assert nonlocal_energy(u, table) == pytest.approx(dirichlet, rel=0.02)


def test_residual_values(setup):
    g, spec, table = setup
    assert consistency_residual(Field(g, np.full(g.shape, 1.0)), table) == pytest.approx(0.0, abs=1e-12)
    x, _ = g.coordinates()
    r = consistency_residual(Field(g, np.cos(x)), table)
    m = multiplier(spec, 0.25, 1.0)
    assert r == pytest.approx(abs(m - 1.0) * math.pi * math.sqrt(2), rel=1e-10)


def test_residual_decreases_with_eta(setup):
    g, spec, _ = setup
    rng = np.random.default_rng(3)
    coeffs = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    u = Field(g, np.real(np.fft.ifftn(np.where(g.k_squared() <= 64, coeffs, 0))))
    res = [consistency_residual(u, symbol_table(spec, eta, g))
           for eta in (0.5, 0.25, 0.125, 0.0625)]
    assert all(a > b for a, b in zip(res, res[1:]))


def test_project(setup):
    g, _, table = setup
    x, _ = g.coordinates()
    assert np.max(np.abs(project(Field(g, np.cos(3 * x)), 2).values)) < 1e-12
    u = Field(g, np.cos(3 * x) + np.sin(x))
    p = project(u, 15)
    assert np.max(np.abs(p.values - u.values)) < 1e-12
    once = project(u, 2)
    twice = project(once, 2)
    assert np.array_equal(once.values, twice.values)
    with pytest.raises(GridError):
        project(u, 17)


def test_project_commutes_with_nonlocal(setup):
    g, _, table = setup
    rng = np.random.default_rng(4)
    u = Field(g, rng.standard_normal(g.shape))
    a = apply_nonlocal(project(u, 5), table).values
    b = project(apply_nonlocal(u, table), 5).values
    assert np.array_equal(a, b)


def test_grid_mismatch(setup):
    _, _, table = setup
    other = Field(make_grid(2, 16), np.zeros((16, 16)))
    with pytest.raises(GridError):
        apply_nonlocal(other, table)
