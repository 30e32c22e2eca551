"""Quantitative checks: operator consistency rates, the interpolation
inequality for the nonlocal energy, the spectral floor of the linearized
operator, and convergence studies against curvature flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import Field, TorusGrid, l2_norm, sobolev_norm
from .kernel import MollifierSpec, symbol_table
from .ops import consistency_residual, nonlocal_energy
from .potential import PotentialSpec, f_eval
from .solver import SolverConfig, run
from .geometry import InterfaceSpec, approximate_solution, extract_radius, mcf_radius


class VerifyError(ValueError):
    pass


@dataclass(frozen=True)
class RateReport:
    pairs: tuple
    slope: float
    intercept: float
    r_squared: float
    extras: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "table": [[p, e] for p, e in self.pairs],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            **self.extras,
        }


def fit_rate(pairs) -> RateReport:
    """Least-squares slope of log(error) against log(parameter)."""
    pairs = [(float(p), float(e)) for p, e in pairs]
    if len(pairs) < 3:
        raise VerifyError(f"need at least 3 pairs for a rate fit, got {len(pairs)}")
    if any(p <= 0.0 or e <= 0.0 for p, e in pairs):
        raise VerifyError("rate fit requires positive parameters and errors")
    x = np.log([p for p, _ in pairs])
    y = np.log([e for _, e in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return RateReport(pairs=tuple(pairs), slope=float(slope),
                      intercept=float(intercept), r_squared=max(0.0, min(1.0, r2)))


def band_limited_field(grid: TorusGrid, cutoff: int, rng) -> Field:
    """Random real field with spectrum confined to |k| <= cutoff."""
    shape = grid.shape
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    mask = grid.k_squared() <= cutoff ** 2
    values = np.real(np.fft.ifftn(np.where(mask, coeffs, 0.0)))
    scale = np.max(np.abs(values))
    return Field(grid, values / scale if scale > 0 else values)


def consistency_study(spec: MollifierSpec, grid: TorusGrid, etas,
                      fields, workers: int = 1) -> RateReport:
    """Rate of max_u ||(L_eta + Laplacian)u|| / ||u||_{H^3} as eta shrinks."""
    etas = sorted(float(e) for e in etas)
    if len(etas) < 4:
        raise VerifyError("need at least 4 eta values")
    if not fields:
        raise VerifyError("need at least one field")
    h3 = [sobolev_norm(u, 3) for u in fields]
    pairs = []
    for eta in etas:
        table = symbol_table(spec, eta, grid, workers=workers)
        err = max(consistency_residual(u, table) / n for u, n in zip(fields, h3))
        pairs.append((eta, err))
    if all(e == 0.0 for _, e in pairs):
        raise VerifyError("degenerate field set: all residuals vanish")
    report = fit_rate(pairs)
    ratios = [e / p for p, e in pairs]  # measured K per eta
    k_fine, k_next = ratios[0], ratios[1]
    extras = {
        "max_k": max(ratios),
        "k_stability": abs(k_fine - k_next) / max(k_fine, k_next),
    }
    return RateReport(pairs=report.pairs, slope=report.slope,
                      intercept=report.intercept, r_squared=report.r_squared,
                      extras=extras)


@dataclass(frozen=True)
class EhrlingReport:
    fitted_c: float
    violations: int
    per_r: dict

    def to_dict(self) -> dict:
        return {"fitted_C": self.fitted_c, "violations": self.violations,
                "per_R": {str(r): c for r, c in self.per_r.items()}}


def minimal_ehrling_constant(u: Field, table, r_value: float) -> float:
    """Smallest C with ||u||^2 <= (C/R^2) E(u) + C R^2 ||u||^2_{H^{-1}}."""
    lhs = l2_norm(u) ** 2
    rhs = nonlocal_energy(u, table) / r_value ** 2 \
        + r_value ** 2 * sobolev_norm(u, -1) ** 2
    if rhs <= 0.0:
        return math.inf
    return lhs / rhs


def ehrling_check(spec: MollifierSpec, grid: TorusGrid, r_values, trials: int,
                  seed: int, cap: float = 1e6, workers: int = 1) -> EhrlingReport:
    """Fit the interpolation constant over random fields at eta = 1/R per R."""
    rng = np.random.default_rng(seed)
    per_r = {}
    violations = 0
    cutoff = grid.points_per_axis // 4
    for r_value in r_values:
        if r_value < 1.0:
            raise VerifyError(f"R values must be >= 1, got {r_value}")
        table = symbol_table(spec, 1.0 / r_value, grid, workers=workers)
        worst = 0.0
        for _ in range(trials):
            u = band_limited_field(grid, cutoff, rng)
            c = minimal_ehrling_constant(u, table, r_value)
            if not math.isfinite(c) or c > cap:
                violations += 1
            else:
                worst = max(worst, c)
        per_r[float(r_value)] = worst
    return EhrlingReport(fitted_c=max(per_r.values()), violations=violations,
                         per_r=per_r)


@dataclass(frozen=True)
class EigenEstimate:
    value: float
    converged: bool
    iterations: int


def _pcg(apply_a, b, precond, tol: float, max_iter: int):
    """Conjugate gradients for an SPD operator; returns (x, ok).

    ok turns False if a direction of nonpositive curvature appears, which
    signals that the shifted operator is not positive definite.
    """
    x = np.zeros_like(b)
    r = b.copy()
    z = precond(r)
    p = z.copy()
    rz = float(np.vdot(r, z).real)
    b_norm = float(np.linalg.norm(b))
    for _ in range(max_iter):
        ap = apply_a(p)
        pap = float(np.vdot(p, ap).real)
        if pap <= 0.0:
            return x, False
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        if np.linalg.norm(r) <= tol * b_norm:
            return x, True
        z = precond(r)
        rz_new = float(np.vdot(r, z).real)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, True


def spectral_floor(u_a: Field, epsilon: float, potential: PotentialSpec,
                   tol: float = 1e-6, max_outer: int = 100,
                   inner_tol: float = 1e-8) -> EigenEstimate:
    """Smallest eigenvalue of -Laplacian + eps^{-2} f''(u_a), matrix-free.

    Shift-and-invert power iteration; the shift starts below the trivial
    bound min f''/eps^2 and tracks the Rayleigh quotient from below.  Inner
    solves use conjugate gradients preconditioned by (|k|^2 + c)^{-1}.
    """
    grid = u_a.grid
    ksq = grid.k_squared()
    diag = f_eval(potential, u_a.values, 2) / epsilon ** 2

    def apply_op(v):
        lap = np.real(np.fft.ifftn(ksq * np.fft.fftn(v)))
        return lap + diag * v

    rng = np.random.default_rng(0)
    v = rng.standard_normal(grid.shape)
    v /= np.linalg.norm(v)
    lam = float(np.vdot(v, apply_op(v)).real)

    # the shift must stay below the bottom eigenvalue for (A - shift) to be
    # positive definite; it tracks the Rayleigh quotient from a shrinking margin
    margin = 1.0
    shift = min(float(np.min(diag)) - 1.0, lam - margin)
    iterations = 0
    for outer in range(max_outer):
        iterations = outer + 1
        c0 = max(1.0, float(np.mean(diag)) - shift)

        def apply_shifted(p, _s=shift):
            return apply_op(p) - _s * p

        def precond(r, _c=c0):
            return np.real(np.fft.ifftn(np.fft.fftn(r) / (ksq + _c)))

        w, ok = _pcg(apply_shifted, v, precond, inner_tol, max_iter=500)
        ok = ok and np.linalg.norm(w) > 0.0
        if ok:
            v_new = w / np.linalg.norm(w)
            lam_new = float(np.vdot(v_new, apply_op(v_new)).real)
            # inverse iteration with a valid shift cannot raise the quotient
            ok = lam_new <= lam + 1e-9 * max(1.0, abs(lam))
        if not ok:
            margin *= 2.0
            shift = lam - margin
            continue
        done = abs(lam_new - lam) < tol * max(1.0, abs(lam_new))
        v, lam = v_new, lam_new
        if done:
            return EigenEstimate(value=lam, converged=True, iterations=iterations)
        margin = max(1.0, 0.5 * margin)
        shift = lam - margin
    return EigenEstimate(value=lam, converged=False, iterations=iterations)


def compare_nonlocal_local(base: SolverConfig, kernel_spec: MollifierSpec,
                           initial: Field, etas, workers: int = 1) -> RateReport:
    """Gap sup_t ||c_eta(t) - c_local(t)||_{L2} against eta; base must be local."""
    if not base.is_local:
        raise VerifyError("base config must use the local operator")
    etas = sorted(float(e) for e in etas)
    if len(etas) < 4:
        raise VerifyError("need at least 4 eta values")

    snapshots = []
    run(base, initial, observer=lambda t, fld: snapshots.append(fld.values))

    pairs = []
    for eta in etas:
        table = symbol_table(kernel_spec, eta, base.grid, workers=workers)
        config = SolverConfig(grid=base.grid, epsilon=base.epsilon, dt=base.dt,
                              t_end=base.t_end, potential=base.potential,
                              table=table, stabilizer=base.stabilizer,
                              diagnostic_stride=base.diagnostic_stride,
                              dealias=base.dealias, seed=base.seed)
        diffs = []

        def observer(t, fld, _d=diffs):
            ref = snapshots[len(_d)]
            _d.append(math.sqrt(np.sum((fld.values - ref) ** 2) * base.grid.cell_volume))

        run(config, initial, observer=observer)
        pairs.append((eta, max(diffs)))
    return fit_rate(pairs)


@dataclass(frozen=True)
class McfReport:
    radius_errors: dict  # eps -> max_t |R_num - R_exact|
    radius_curves: dict  # eps -> list of (t, R_num, R_exact)
    field_errors: dict   # eps -> sup_t ||c - ansatz(R_exact)||_{L2}
    field_rate: RateReport | None

    def to_dict(self) -> dict:
        return {
            "radius_errors": {str(e): v for e, v in self.radius_errors.items()},
            "field_errors": {str(e): v for e, v in self.field_errors.items()},
            "field_rate": None if self.field_rate is None else self.field_rate.to_dict(),
        }


def mcf_convergence(spec: InterfaceSpec, epsilons, eta_rule: str, grid: TorusGrid,
                    potential: PotentialSpec, kernel_spec: MollifierSpec | None = None,
                    t_end: float = 0.2, dts=None, stabilizer: float = 2.0,
                    diagnostic_stride: int = 250, eta_exponent: float = 4.0,
                    workers: int = 1) -> McfReport:
    """Shrinking-circle runs across epsilon; radius and field errors vs the
    exact curvature-flow solution.

    eta_rule 'zero' runs the local operator; 'pow4' couples eta = eps^4;
    'custom' uses eta = eps^eta_exponent.
    """
    if eta_rule not in ("zero", "pow4", "custom"):
        raise VerifyError(f"unknown eta_rule {eta_rule!r}")
    epsilons = sorted(float(e) for e in epsilons)
    for eps in epsilons:
        if eps < 1.5 * grid.spacing:
            raise VerifyError(
                f"epsilon {eps} unresolved on grid with spacing {grid.spacing:.4g}")
    dim = grid.dim
    collapse = spec.radius0 ** 2 / (2.0 * (dim - 1))
    if t_end > 0.6 * collapse:
        raise VerifyError(f"t_end {t_end} beyond 0.6 * collapse time {collapse}")
    if dts is None:
        dts = [2.0 * eps ** 4 for eps in epsilons]

    radius_errors, radius_curves, field_errors = {}, {}, {}
    for eps, dt in zip(epsilons, dts):
        if eta_rule == "zero":
            table = None
        else:
            exponent = 4.0 if eta_rule == "pow4" else eta_exponent
            table = symbol_table(kernel_spec, eps ** exponent, grid, workers=workers)
        config = SolverConfig(grid=grid, epsilon=eps, dt=dt, t_end=t_end,
                              potential=potential, table=table,
                              stabilizer=stabilizer,
                              diagnostic_stride=diagnostic_stride)
        initial = approximate_solution(grid, spec, spec.radius0, eps, potential)
        curve = []
        worst_radius = 0.0
        worst_field = 0.0

        def observer(t, fld, _eps=eps):
            nonlocal worst_radius, worst_field
            r_exact = mcf_radius(spec, t, dim) if t < collapse else 0.0
            r_num = extract_radius(fld, spec)
            curve.append((t, r_num, r_exact))
            worst_radius = max(worst_radius, abs(r_num - r_exact))
            ansatz = approximate_solution(grid, spec, r_exact, _eps, potential)
            diff = math.sqrt(np.sum((fld.values - ansatz.values) ** 2) * grid.cell_volume)
            worst_field = max(worst_field, diff)

        run(config, initial, observer=observer)
        radius_errors[eps] = worst_radius
        radius_curves[eps] = curve
        field_errors[eps] = worst_field

    field_rate = None
    if len(epsilons) >= 3:
        field_rate = fit_rate([(e, field_errors[e]) for e in epsilons])
    return McfReport(radius_errors=radius_errors, radius_curves=radius_curves,
                     field_errors=field_errors, field_rate=field_rate)
