import math

import numpy as np
import pytest

from nlac.grid import Field, l2_norm, make_grid, sobolev_norm
from nlac.kernel import default_spec, multiplier, symbol_table
from nlac.ops import nonlocal_energy
from nlac.potential import quartic_potential
from nlac.solver import SolverConfig
from nlac.geometry import InterfaceSpec, approximate_solution
from nlac.verify import (VerifyError, band_limited_field, compare_nonlocal_local,
                         consistency_study, ehrling_check, fit_rate,
                         mcf_convergence, minimal_ehrling_constant,
                         spectral_floor)


@pytest.fixture(scope="module")
def quartic():
    return quartic_potential()


@pytest.fixture(scope="module")
def spec2():
    return default_spec(2)


def test_fit_rate_exact_quadratic():
    report = fit_rate([(1.0, 1.0), (2.0, 4.0), (4.0, 16.0)])
    assert report.slope == pytest.approx(2.0)
    assert report.r_squared == pytest.approx(1.0)


def test_fit_rate_noisy_slope_one():
    rng = np.random.default_rng(0)
    params = np.logspace(-3, 0, 12)
    errors = 3.0 * params * np.exp(0.01 * rng.standard_normal(12))
    report = fit_rate(list(zip(params, errors)))
    assert report.slope == pytest.approx(1.0, abs=0.02)
    assert report.r_squared > 0.999


def test_fit_rate_rejects():
    with pytest.raises(VerifyError):
        fit_rate([(1.0, 1.0), (2.0, 2.0)])
    with pytest.raises(VerifyError):
        fit_rate([(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)])


def test_band_limited_field(spec2):
    g = make_grid(2, 32)
    rng = np.random.default_rng(1)
    u = band_limited_field(g, 8, rng)
    ksq = g.k_squared()
    assert np.max(np.abs(u.coeffs[ksq > 64])) < 1e-9 * np.max(np.abs(u.coeffs))
    assert u.sup_norm() == pytest.approx(1.0)


def test_consistency_single_mode_closed_form(spec2):
    # residual over H^3 norm for one pure mode has an exact expression
    g = make_grid(2, 16)
    x, y = g.coordinates()
    u = Field(g, np.cos(2 * x + y))
    eta = 0.25
    table = symbol_table(spec2, eta, g)
    from nlac.ops import consistency_residual
    got = consistency_residual(u, table) / sobolev_norm(u, 3)
    m = multiplier(spec2, eta, math.sqrt(5.0))
    # the (2pi)^{-1} reflects the L2-vs-Bessel normalization mismatch
    assert got == pytest.approx(abs(m - 5.0) * 6.0 ** -1.5 / (2 * math.pi), rel=1e-9)


def test_consistency_study_shape(spec2):
    g = make_grid(2, 32)
    rng = np.random.default_rng(2)
    fields = [band_limited_field(g, 8, rng) for _ in range(3)]
    report = consistency_study(spec2, g, [0.5, 0.25, 0.125, 0.0625], fields)
    assert len(report.pairs) == 4
    assert report.pairs[0][0] < report.pairs[-1][0]
    errs = [e for _, e in report.pairs]
    assert all(a < b for a, b in zip(errs, errs[1:]))
    assert "max_k" in report.extras and "k_stability" in report.extras


def test_consistency_study_rejects(spec2):
    g = make_grid(2, 16)
    with pytest.raises(VerifyError):
        consistency_study(spec2, g, [0.5, 0.25], [])
    const = [Field(g, np.ones(g.shape))]
    with pytest.raises(VerifyError):
        consistency_study(spec2, g, [0.5, 0.25, 0.125, 0.0625], const)


def test_ehrling_constant_field_closed_form(spec2):
    # constant u: energy term drops, minimal C = (2pi)^{-d}/R^2
    g = make_grid(2, 16)
    table = symbol_table(spec2, 0.5, g)
    u = Field(g, np.full(g.shape, 3.0))
    for r_value in (1.0, 2.0):
        c = minimal_ehrling_constant(u, table, r_value)
        assert c == pytest.approx((2 * math.pi) ** -2 / r_value ** 2, rel=1e-10)


def test_ehrling_single_mode_closed_form(spec2):
    g = make_grid(2, 16)
    eta, r_value = 0.5, 2.0
    table = symbol_table(spec2, eta, g)
    x, _ = g.coordinates()
    u = Field(g, np.cos(x))
    m = multiplier(spec2, eta, 1.0)
    # two modes of size 2pi^2: lhs = 2 pi^2, rhs terms from the definitions
    lhs = l2_norm(u) ** 2
    rhs = (0.5 * (2 * math.pi) ** -2 * 2 * m * (2 * math.pi ** 2) ** 2 / r_value ** 2
           + r_value ** 2 * 0.5 * 2 * (2 * math.pi ** 2) ** 2)
    assert minimal_ehrling_constant(u, table, r_value) == pytest.approx(lhs / rhs, rel=1e-10)


def test_ehrling_check_no_violations(spec2):
    g = make_grid(2, 32)
    report = ehrling_check(spec2, g, [1.0, 2.0], trials=10, seed=5)
    assert report.violations == 0
    assert report.fitted_c > 0
    assert set(report.per_r) == {1.0, 2.0}


def test_spectral_floor_constants(quartic):
    g = make_grid(2, 32)
    eps = 0.2
    ones = Field(g, np.ones(g.shape))
    est = spectral_floor(ones, eps, quartic, tol=1e-9)
    assert est.converged
    assert est.value == pytest.approx(2.0 / eps ** 2, rel=1e-6)
    zeros = Field(g, np.zeros(g.shape))
    est = spectral_floor(zeros, eps, quartic, tol=1e-9)
    assert est.converged
    assert est.value == pytest.approx(-1.0 / eps ** 2, rel=1e-6)


def test_spectral_floor_interface(quartic):
    g = make_grid(2, 64)
    spec = InterfaceSpec(radius0=1.0, delta0=0.8)
    u = approximate_solution(g, spec, 1.0, 0.1, quartic)
    est = spectral_floor(u, 0.1, quartic, tol=1e-6)
    assert est.converged
    # bottom of the spectrum stays order one, far above the naive -1/eps^2
    assert -2.0 < est.value < 1.0


def test_compare_nonlocal_local_small(quartic, spec2):
    g = make_grid(2, 64)
    spec = InterfaceSpec(radius0=1.0, delta0=0.8)
    initial = approximate_solution(g, spec, 1.0, 0.1, quartic)
    base = SolverConfig(grid=g, epsilon=0.1, dt=1e-3, t_end=0.02,
                        potential=quartic, diagnostic_stride=5)
    etas = [1e-4, 5e-5, 2.5e-5, 1.25e-5]
    report = compare_nonlocal_local(base, spec2, initial, etas)
    errs = dict(report.pairs)
    assert all(e > 0 for e in errs.values())
    # larger eta, larger gap
    assert errs[1e-4] > errs[1.25e-5]


def test_compare_requires_local_base(quartic, spec2):
    g = make_grid(2, 32)
    table = symbol_table(spec2, 0.1, g)
    base = SolverConfig(grid=g, epsilon=0.2, dt=1e-3, t_end=0.01,
                        potential=quartic, table=table)
    with pytest.raises(VerifyError):
        compare_nonlocal_local(base, spec2, Field(g, np.zeros(g.shape)), [1, 2, 3, 4])


def test_mcf_convergence_guards(quartic, spec2):
    g = make_grid(2, 64)
    spec = InterfaceSpec(radius0=1.0)
    with pytest.raises(VerifyError):
        mcf_convergence(spec, [0.01], "zero", g, quartic)  # unresolved
    with pytest.raises(VerifyError):
        mcf_convergence(spec, [0.3], "zero", g, quartic, t_end=0.4)  # past 0.6 collapse
    with pytest.raises(VerifyError):
        mcf_convergence(spec, [0.3], "bogus", g, quartic)


def test_mcf_convergence_single_local(quartic):
    g = make_grid(2, 128)
    spec = InterfaceSpec(radius0=1.0, delta0=0.8)
    report = mcf_convergence(spec, [0.08], "zero", g, quartic, t_end=0.1,
                             dts=[1e-4], diagnostic_stride=200)
    assert report.radius_errors[0.08] < 0.06
    assert report.field_errors[0.08] > 0.0
    assert report.field_rate is None
    times = [t for t, _, _ in report.radius_curves[0.08]]
    assert times[0] == 0.0 and times[-1] == pytest.approx(0.1)
