import math

import numpy as np
import pytest

from nlac.geometry import (GeometryError, InterfaceSpec, approximate_solution,
                           extract_radius, mcf_radius, signed_distance)
from nlac.grid import Field, make_grid
from nlac.potential import quartic_potential


@pytest.fixture(scope="module")
def quartic():
    return quartic_potential()


def test_interface_defaults():
    spec = InterfaceSpec(radius0=1.0)
    assert spec.delta0 == pytest.approx(0.6)
    spec = InterfaceSpec(radius0=2.5)
    assert spec.delta0 == pytest.approx(0.45 * (math.pi - 2.5))


def test_interface_rejects_bad_tube():
    with pytest.raises(GeometryError):
        InterfaceSpec(radius0=1.0, delta0=1.2)  # tube reaches the boundary
    with pytest.raises(GeometryError):
        InterfaceSpec(radius0=3.5)
    with pytest.raises(GeometryError):
        InterfaceSpec(radius0=1.0, delta0=-0.1)


def test_signed_distance():
    spec = InterfaceSpec(radius0=1.0)
    assert signed_distance(np.zeros(2), spec, 0.8) == pytest.approx(-0.8)
    assert signed_distance(np.array([0.8, 0.0]), spec, 0.8) == pytest.approx(0.0, abs=1e-14)
    on_edge = np.array([0.8 + spec.delta0, 0.0])
    assert signed_distance(on_edge, spec, 0.8) == pytest.approx(spec.delta0)
    # periodic image: a point past 2pi-1 lies close to the centered circle
    assert signed_distance(np.array([2 * math.pi - 0.8, 0.0]), spec, 0.8) == pytest.approx(0.0, abs=1e-12)


def test_approximate_solution_values(quartic):
    g = make_grid(2, 128)
    spec = InterfaceSpec(radius0=1.0)
    eps = 0.05
    u = approximate_solution(g, spec, 1.0, eps, quartic)
    assert np.max(np.abs(u.values)) <= 1.0
    coords = np.stack(g.coordinates(), axis=-1)
    r = signed_distance(coords, spec, 1.0)
    outside = np.abs(r) >= 2.0 * spec.delta0
    assert np.array_equal(u.values[outside], np.sign(r)[outside])
    # pure profile inside the unblended core
    core = np.abs(r) <= spec.delta0
    assert np.max(np.abs(u.values[core] - np.tanh(r[core] / (eps * math.sqrt(2))))) < 1e-12


def test_approximate_solution_blend_tail(quartic):
    g = make_grid(2, 256)
    spec = InterfaceSpec(radius0=1.0)
    eps = 0.05
    u = approximate_solution(g, spec, 1.0, eps, quartic)
    coords = np.stack(g.coordinates(), axis=-1)
    r = signed_distance(coords, spec, 1.0)
    band = (np.abs(r) >= spec.delta0) & (np.abs(r) <= 2.0 * spec.delta0)
    dev = np.abs(u.values[band] - np.tanh(r[band] / (eps * math.sqrt(2))))
    assert np.max(dev) <= 4.0 * math.exp(-math.sqrt(2) * spec.delta0 / eps)


def test_approximate_solution_epsilon_guard(quartic):
    g = make_grid(2, 64)
    spec = InterfaceSpec(radius0=1.0)
    with pytest.raises(GeometryError):
        approximate_solution(g, spec, 1.0, 0.2, quartic)


def test_mcf_radius():
    spec = InterfaceSpec(radius0=1.0)
    assert mcf_radius(spec, 0.0, 2) == 1.0
    assert mcf_radius(spec, 0.25, 2) == pytest.approx(math.sqrt(0.5))
    with pytest.raises(GeometryError):
        mcf_radius(spec, 0.5, 2)
    # 3d sphere shrinks twice as fast
    assert mcf_radius(spec, 0.1, 3) == pytest.approx(math.sqrt(1 - 0.4))


def test_mcf_radius_ode_residual():
    spec = InterfaceSpec(radius0=1.0)
    h = 1e-6
    for dim in (2, 3):
        for t in (0.05, 0.1, 0.2):
            rp = (mcf_radius(spec, t + h, dim) - mcf_radius(spec, t - h, dim)) / (2 * h)
            assert abs(rp + (dim - 1) / mcf_radius(spec, t, dim)) < 1e-6


@pytest.mark.parametrize("radius0", [0.5, 0.8, 1.2])
@pytest.mark.parametrize("eps", [0.03, 0.05])
def test_extract_radius_round_trip(radius0, eps, quartic):
    g = make_grid(2, 128)
    # explicit delta0 keeps the blend wide enough for eps = 0.05 at every radius
    spec = InterfaceSpec(radius0=radius0, delta0=0.45)
    u = approximate_solution(g, spec, radius0, eps, quartic)
    assert abs(extract_radius(u, spec) - radius0) <= g.spacing


def test_extract_radius_sign_agnostic(quartic):
    g = make_grid(2, 128)
    spec = InterfaceSpec(radius0=0.8)
    u = approximate_solution(g, spec, 0.8, 0.05, quartic)
    flipped = Field(g, -u.values)
    assert extract_radius(flipped, spec) == pytest.approx(extract_radius(u, spec))


def test_extract_radius_no_interface(quartic):
    g = make_grid(2, 64)
    spec = InterfaceSpec(radius0=0.8)
    with pytest.raises(GeometryError, match="ray"):
        extract_radius(Field(g, np.ones(g.shape)), spec)


def test_extract_radius_3d(quartic):
    g = make_grid(3, 64)
    spec = InterfaceSpec(radius0=0.8)
    u = approximate_solution(g, spec, 0.8, 0.06, quartic)
    assert abs(extract_radius(u, spec) - 0.8) <= g.spacing
