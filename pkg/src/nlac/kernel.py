"""Singular interaction kernels and the Fourier multiplier of the nonlocal operator.

The kernel is J_eta(x) = rho_eta(|x|)/|x|^2 with rho_eta(r) = eta^{-d} rho1(r/eta)
and rho1(r) = C |r|^beta * bump(r), a compactly supported mollifier normalized so
that its radial (d-1)-moment equals 2/C_d.  The multiplier of the operator
u -> (J*1) u - J*u is

    m_eta(k) = integral of J_eta(x) (1 - cos(k.x)) dx,

computed as a one-dimensional radial quadrature; the angular average of
cos(k.x) over the sphere of radius r is J0(|k| r) in 2D and sinc(|k| r) in 3D.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad
from scipy.special import j0

from .grid import TorusGrid


class KernelError(ValueError):
    pass


class QuadratureError(RuntimeError):
    """Raised when the radial quadrature cannot reach the requested tolerance."""


#: |S^{d-1}| and the directional second moment C_d = int_{S^{d-1}} sigma_1^2.
SPHERE_AREA = {2: 2.0 * math.pi, 3: 4.0 * math.pi}
MOMENT_CONSTANT = {2: math.pi, 3: 4.0 * math.pi / 3.0}

DEFAULT_BETA = {2: 1.5, 3: 0.5}
DEFAULT_BUMP_RADIUS = math.pi / 2.0

_QUAD_RTOL = 1e-9


@dataclass(frozen=True)
class MollifierSpec:
    """Parameters of the mollifier family; normalization is computed, not user-set."""

    dim: int
    beta: float
    bump_radius: float = DEFAULT_BUMP_RADIUS
    bump_scale: float = 1.0
    normalization: float | None = None

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise KernelError(f"dim must be 2 or 3, got {self.dim}")
        lo, hi = 3.0 - self.dim, 2.0
        if not (lo < self.beta < hi):
            raise KernelError(
                f"beta must lie in ({lo}, {hi}) for dim {self.dim}, got {self.beta}"
            )
        if not (0.0 < self.bump_radius < math.pi):
            raise KernelError(f"bump_radius must lie in (0, pi), got {self.bump_radius}")
        if self.bump_scale <= 0.0:
            raise KernelError("bump_scale must be positive")

    @property
    def is_normalized(self) -> bool:
        return self.normalization is not None


def default_spec(dim: int) -> MollifierSpec:
    return normalize(MollifierSpec(dim=dim, beta=DEFAULT_BETA[dim]))


def bump(u, r0: float):
    """Smooth symmetric bump exp(-1/(1-(u/r0)^2)) supported on (-r0, r0)."""
    u = np.asarray(u, dtype=np.float64)
    s2 = (u / r0) ** 2
    out = np.zeros_like(s2)
    inside = s2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s2[inside]))
    return out


def rho1(spec: MollifierSpec, u):
    if not spec.is_normalized:
        raise KernelError("spec must be normalized first")
    u = np.asarray(u, dtype=np.float64)
    return spec.normalization * np.abs(u) ** spec.beta * spec.bump_scale * bump(u, spec.bump_radius)


def normalize(spec: MollifierSpec) -> MollifierSpec:
    """Fix the constant so that int_0^inf rho1(u) u^{d-1} du = 2/C_d."""
    r0, beta, d = spec.bump_radius, spec.beta, spec.dim
    moment, err = quad(
        lambda u: u ** (beta + d - 1) * spec.bump_scale * float(bump(u, r0)),
        0.0, r0, epsabs=0.0, epsrel=1e-12, limit=200,
    )
    if moment <= 0.0 or err > 1e-10 * moment:
        raise QuadratureError(f"moment quadrature failed: value {moment}, error {err}")
    target = 2.0 / MOMENT_CONSTANT[d]
    return replace(spec, normalization=target / moment)


def _one_minus_kernel_shape(dim: int, z: float) -> float:
    """1 - (angular average of cos(k.x)), i.e. 1-J0(z) (2D) or 1-sinc(z) (3D).

    Series branch below z=0.1 avoids cancellation for small arguments.
    """
    if dim == 2:
        if z < 0.1:
            z2 = z * z
            return z2 / 4.0 * (1.0 - z2 / 16.0 * (1.0 - z2 / 36.0 * (1.0 - z2 / 64.0)))
        return 1.0 - j0(z)
    if z < 0.1:
        z2 = z * z
        return z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0 * (1.0 - z2 / 72.0)))
    return 1.0 - math.sin(z) / z


def multiplier(spec: MollifierSpec, eta: float, k_abs: float) -> float:
    """Multiplier m_eta at radial frequency k_abs, by adaptive radial quadrature.

    m = int_0^{eta r0} rho_eta(r) r^{d-3} |S^{d-1}| (1 - avg cos)(k_abs r) dr;
    the 1-cos factor cancels the r^{-2} singularity of the kernel.
    """
    if not spec.is_normalized:
        raise KernelError("spec must be normalized first")
    if eta <= 0.0:
        raise KernelError(f"eta must be positive, got {eta}")
    if k_abs < 0.0:
        raise KernelError(f"k_abs must be nonnegative, got {k_abs}")
    if k_abs == 0.0:
        return 0.0
    d = spec.dim
    area = SPHERE_AREA[d]
    r_max = eta * spec.bump_radius
    scale = eta ** (-d)

    def integrand(r: float) -> float:
        rho = scale * float(rho1(spec, r / eta))
        return rho * r ** (d - 3) * area * _one_minus_kernel_shape(d, k_abs * r)

    # Break at the first oscillation scale when k r_max is large.
    if k_abs * r_max > 8.0:
        val, err = quad(integrand, 0.0, r_max, epsabs=0.0, epsrel=_QUAD_RTOL / 10,
                        limit=max(200, int(k_abs * r_max)))
    else:
        val, err = quad(integrand, 0.0, r_max, epsabs=0.0, epsrel=_QUAD_RTOL / 10, limit=200)
    if val < 0.0 or (val > 0.0 and err > _QUAD_RTOL * val):
        raise QuadratureError(
            f"multiplier quadrature at eta={eta}, k={k_abs}: value {val}, "
            f"achieved tolerance {err / val if val else math.inf:.3e}"
        )
    return val


@dataclass(frozen=True)
class SymbolTable:
    """Fourier multiplier of the nonlocal operator tabulated on a grid's lattice."""

    grid: TorusGrid
    eta: float
    values: np.ndarray
    radii: np.ndarray
    radial_values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)
        self.radii.setflags(write=False)
        self.radial_values.setflags(write=False)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("k_abs,m_eta\n")
            for r, m in zip(self.radii, self.radial_values):
                fh.write(f"{r:.17g},{m:.17g}\n")


def _radial_batch(args):
    spec, eta, radii = args
    return [multiplier(spec, eta, float(r)) for r in radii]


def symbol_table(spec: MollifierSpec, eta: float, grid: TorusGrid, workers: int = 1) -> SymbolTable:
    """Evaluate m_eta at every distinct lattice radius and broadcast to the grid."""
    if grid.dim != spec.dim:
        raise KernelError(f"grid dim {grid.dim} does not match spec dim {spec.dim}")
    ksq = grid.k_squared()
    ksq_int = np.rint(ksq).astype(np.int64)
    unique_sq, inverse = np.unique(ksq_int, return_inverse=True)
    radii = np.sqrt(unique_sq.astype(np.float64))
    if workers > 1 and len(radii) > 64:
        chunks = np.array_split(radii, workers * 4)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_radial_batch, [(spec, eta, c) for c in chunks]))
        radial_values = np.array([m for part in parts for m in part])
    else:
        radial_values = np.array([multiplier(spec, eta, float(r)) for r in radii])
    if radial_values[0] != 0.0 or np.any(radial_values[1:] <= 0.0):
        raise KernelError("symbol table violates positivity: m(0)=0 and m(k)>0 for k != 0")
    values = radial_values[inverse].reshape(grid.shape)
    return SymbolTable(grid=grid, eta=eta, values=values, radii=radii,
                       radial_values=radial_values)


def kernel_mass(spec: MollifierSpec) -> float:
    """Total mass of J_1, i.e. its Fourier transform at zero."""
    d = spec.dim
    area = SPHERE_AREA[d]
    val, err = quad(lambda u: float(rho1(spec, u)) * u ** (d - 3) * area,
                    0.0, spec.bump_radius, epsabs=0.0, epsrel=1e-10, limit=200)
    if val <= 0.0 or err > 1e-9 * val:
        raise QuadratureError(f"kernel mass quadrature failed: value {val}, error {err}")
    return val


def ehrling_constants(spec: MollifierSpec, samples: int = 512) -> tuple:
    """Constants (c0, c1) of the low/high-frequency bounds on the scaled symbol.

    Psi(xi) = (2pi)^{-d} m_1(|xi|); c0 bounds Psi/|xi|^2 on 0 < |xi| <= 1 and
    c1 bounds Psi on |xi| >= 1, including the tail limit (2pi)^{-d} * mass(J_1).
    """
    d = spec.dim
    pref = (2.0 * math.pi) ** (-d)

    low = np.logspace(-3, 0, samples)
    c0 = min(pref * multiplier(spec, 1.0, float(r)) / r ** 2 for r in low)

    high = np.logspace(0, math.log10(64.0), samples)
    c1 = min(pref * multiplier(spec, 1.0, float(r)) for r in high)
    c1 = min(c1, pref * kernel_mass(spec))

    if c0 <= 0.0 or c1 <= 0.0:
        raise KernelError(f"kernel violates the admissibility bounds: c0={c0}, c1={c1}")
    return float(c0), float(c1)
