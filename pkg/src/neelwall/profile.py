"""Static wall phase: reduced energy, its gradient, and the descent solver.

The phase connects -pi/2 to +pi/2 across the box.  Its smooth continuation
across the box seam is the antiperiodic one, theta(x + 2R) = -theta(x) (an
alternating wall lattice), so the phase is handled directly as a field of
the antiperiodic spectral sector: derivatives, translations, and the
stiffness form all act on theta itself with half-integer frequencies.
cos(theta) is periodic across the box and the nonlocal part of the energy
acts on it with the ordinary periodic calculus.  With this split the
discrete energy is exactly invariant under sector translations, which is
what makes the translation mode of the linearization exact at the discrete
level.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import NoConvergence, RangeViolation
from .grid import (
    Field,
    Grid,
    ap_bessel_inverse,
    ap_derivative,
    ap_derivative_form,
    ap_mirror,
    ap_second_derivative,
    ap_translate,
    b_form,
    far_field_ok,
    inner_l2,
    norm_l2,
    one_plus_half_laplacian,
)

__all__ = [
    "WallProfile",
    "SolveConfig",
    "reference_phase",
    "phase_derivative",
    "translate_wall",
    "energy",
    "energy_gradient",
    "residual",
    "solve_profile",
    "odd_defect",
]

RANGE_GUARD = 0.1


def reference_phase(grid: Grid, delta: float = 0.0) -> Field:
    """Odd initial guess arcsin(tanh(x + delta)) with limits +-pi/2."""
    return Field(grid, np.arcsin(np.tanh(grid.nodes + delta)))


def phase_derivative(theta: Field) -> Field:
    """d theta/dx via the antiperiodic sector derivative."""
    return ap_derivative(theta)


def translate_wall(theta: Field, delta: float) -> Field:
    """theta(. + delta) by the exact sector translation."""
    return ap_translate(theta, delta)


def _check_range(theta: Field):
    lo, hi = -np.pi / 2 - RANGE_GUARD, np.pi / 2 + RANGE_GUARD
    vmin, vmax = float(np.min(theta.values)), float(np.max(theta.values))
    if vmin < lo or vmax > hi:
        raise RangeViolation(
            f"phase range [{vmin:.4f}, {vmax:.4f}] leaves the guard band [{lo:.4f}, {hi:.4f}]"
        )


def energy(theta: Field) -> float:
    """Reduced wall energy.

    E = (1/2) (||theta'||^2_{L2} + b[cos theta, cos theta]) where the b-form
    carries both the |xi| seminorm and the L2 term of cos theta, and the
    derivative term is the antiperiodic stiffness form of the phase.
    """
    _check_range(theta)
    ctheta = Field(theta.grid, np.cos(theta.values))
    return 0.5 * (ap_derivative_form(theta, theta) + b_form(ctheta, ctheta))


def energy_gradient(theta: Field) -> Field:
    """L2 gradient -theta'' - sin(theta) (1 + half_laplacian) cos(theta).

    This is the exact gradient of the discrete energy above.
    """
    _check_range(theta)
    g = theta.grid
    ctheta = Field(g, np.cos(theta.values))
    stheta = np.sin(theta.values)
    nonlocal_term = one_plus_half_laplacian(ctheta)
    return Field(g, -ap_second_derivative(theta).values - stheta * nonlocal_term.values)


def residual(theta: Field) -> float:
    return norm_l2(energy_gradient(theta))


def odd_defect(theta: Field) -> float:
    """max |theta(x) + theta(-x)| under the sector mirror (zero when enforced)."""
    mirrored = ap_mirror(theta)
    return float(np.max(np.abs(theta.values + mirrored.values)))


@dataclass
class SolveConfig:
    grid: Grid
    tol_residual: float = 1e-11
    max_iters: int = 5000
    armijo_c1: float = 1e-4
    shrink: float = 0.5
    # the preconditioned Hessian spectrum sits in roughly [0.7, 3], so a unit
    # step is not contractive; 0.5 keeps every mode inside the stability disk
    alpha0: float = 0.5
    alpha_min: float = 1e-14

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class WallProfile:
    """Converged minimizer with its certificate quantities.

    min_slope is taken over the nodes away from the seam x = -R: the seam is
    the midpoint between the wall and its lattice image, where the slope
    vanishes exactly by symmetry (it represents the point at infinity of the
    single-wall picture).
    """

    theta: Field
    dtheta: Field
    energy: float
    residual_l2: float
    min_slope: float
    odd_defect: float = 0.0
    iterations: int = 0
    residual_history: tuple = dataclass_field(default_factory=tuple)
    energy_history: tuple = dataclass_field(default_factory=tuple)

    @property
    def grid(self) -> Grid:
        return self.theta.grid

    def __post_init__(self):
        center = float(self.theta.values[self.grid.center_index])
        if center != 0.0:
            raise ValueError(f"profile center theta(0) = {center:g} is not exactly zero")


def _odd_projection(grid: Grid, values: np.ndarray) -> np.ndarray:
    """(theta(x) - theta(-x))/2 under the sector mirror; pins theta(0) = 0."""
    mirrored = ap_mirror(Field(grid, values))
    out = 0.5 * (values - mirrored.values)
    out[grid.center_index] = 0.0
    return out


def _make_profile(grid: Grid, theta: Field, iterations: int, history, energies) -> WallProfile:
    dtheta = phase_derivative(theta)
    return WallProfile(
        theta=theta,
        dtheta=dtheta,
        energy=energy(theta),
        residual_l2=residual(theta),
        min_slope=float(np.min(dtheta.values[1:])),
        odd_defect=odd_defect(theta),
        iterations=iterations,
        residual_history=tuple(history),
        energy_history=tuple(energies),
    )


def solve_profile(cfg: SolveConfig, initial: Field | None = None) -> WallProfile:
    """Minimize the wall energy by preconditioned descent with backtracking.

    Starts from arcsin(tanh x) unless an initial phase is supplied.  The
    descent direction is -(1 - d^2/dx^2)^{-1} grad E, odd symmetry is
    re-imposed after every step (which pins theta(0) = 0 exactly), and
    iteration stops once the L2 residual of the Euler-Lagrange equation
    drops below tolerance.

    Raises NoConvergence (carrying the last iterate and the residual
    history) when the iteration cap is reached.
    """
    grid = cfg.grid
    if initial is None:
        vals = reference_phase(grid).values
    else:
        if initial.grid != grid:
            raise ValueError("initial guess lives on a different grid")
        vals = initial.values
    theta = Field(grid, _odd_projection(grid, np.array(vals)))

    e_current = energy(theta)
    history = []
    energies = [e_current]
    alpha = cfg.alpha0

    for it in range(cfg.max_iters + 1):
        grad = energy_gradient(theta)
        res = norm_l2(grad)
        history.append(res)
        if res <= cfg.tol_residual:
            return _make_profile(grid, theta, it, history, energies)
        if it == cfg.max_iters:
            break

        direction = -1.0 * ap_bessel_inverse(grad)
        slope = inner_l2(grad, direction)
        if slope >= 0:  # preconditioner is positive definite; this is roundoff territory
            direction = -1.0 * grad
            slope = -res * res

        alpha = min(cfg.alpha0, 2.0 * alpha)
        # below the measurable energy precision the Armijo test is noise; the
        # preconditioned step is contractive there, so accept it
        floor = 8.0 * np.finfo(float).eps * (abs(e_current) + 1.0)
        while True:
            trial = Field(grid, _odd_projection(grid, theta.values + alpha * direction.values))
            try:
                e_trial = energy(trial)
            except RangeViolation:
                e_trial = np.inf
            if e_trial <= e_current + cfg.armijo_c1 * alpha * slope + floor:
                break
            alpha *= cfg.shrink
            if alpha < cfg.alpha_min:
                raise NoConvergence(
                    f"line search stalled at iteration {it} (residual {res:.3e})",
                    iterate=theta,
                    residual_history=history,
                )
        theta = trial
        e_current = e_trial
        energies.append(e_current)

    raise NoConvergence(
        f"no convergence after {cfg.max_iters} iterations (residual {history[-1]:.3e})",
        iterate=theta,
        residual_history=history,
    )


def far_field_report(profile: WallProfile) -> dict:
    """Decay diagnostics of the profile fields at the box ends."""
    g = profile.grid
    ctheta = Field(g, np.cos(profile.theta.values))
    return {
        "cos_theta_decays": far_field_ok(ctheta),
        "dtheta_decays": far_field_ok(profile.dtheta),
        "sup_dtheta": float(np.max(np.abs(profile.dtheta.values))),
        "sup_d2theta": float(np.max(np.abs(ap_second_derivative(profile.theta).values))),
    }
