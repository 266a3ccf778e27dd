"""Damped wave dynamics of the phase: full and linearized right-hand sides,
explicit time stepping, shift extraction, decay-rate fitting, and the
numerical checks behind the orbital-stability hypotheses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import BlowUp, CflViolation, DegenerateFit, NoBracket
from .grid import (
    Field,
    Grid,
    ap_derivative,
    ap_inner_h1,
    ap_norm_h1,
    gaussian_bump,
    inner_l2,
    norm_l2,
    random_compact,
)
from .operators import CoefficientSet, apply_L, nonlinear_remainder
from .profile import WallProfile, energy, energy_gradient, translate_wall

__all__ = [
    "PairState",
    "TraceRecord",
    "DecayFit",
    "rhs_full",
    "rhs_linear",
    "cfl_limit",
    "step_rk4",
    "evolve",
    "extract_shift",
    "decay_fit",
    "hypothesis_H2_check",
    "hypothesis_H3_check",
    "pair_inner_x",
    "pair_norm_x",
    "perturbation_shape",
]

DEFAULT_CFL = 2.5
BLOWUP_FACTOR = 1e3


@dataclass(frozen=True)
class PairState:
    """Dynamic pair (first, second) = (phase or perturbation, its velocity)."""

    first: Field
    second: Field
    mode: str = "full_phase"

    def __post_init__(self):
        if self.mode not in ("full_phase", "perturbation"):
            raise ValueError(f"unknown mode {self.mode!r}")
        self.first._check(self.second)

    @property
    def grid(self) -> Grid:
        return self.first.grid

    def axpy(self, a: float, other: "PairState") -> "PairState":
        return PairState(
            Field(self.grid, self.first.values + a * other.first.values),
            Field(self.grid, self.second.values + a * other.second.values),
            self.mode,
        )


def pair_inner_x(U: PairState, V: PairState) -> float:
    """Energy-space pairing <(u,v),(f,g)>_X = <u,f>_{H1} + <v,g>_{L2}."""
    return ap_inner_h1(U.first, V.first) + inner_l2(U.second, V.second)


def pair_norm_x(U: PairState) -> float:
    return float(np.sqrt(max(pair_inner_x(U, U), 0.0)))


@dataclass(frozen=True)
class TraceRecord:
    t: float
    h1_distance: float
    shift: float
    kinetic: float
    potential: float
    dissipation_integral: float


@dataclass(frozen=True)
class DecayFit:
    omega: float
    amplitude: float
    window: tuple
    r_squared: float
    quantity: str = "h1_distance"


def rhs_full(state: PairState, nu: float) -> PairState:
    """Full dynamics (theta, v) -> (v, -nu v - grad E(theta))."""
    if state.mode != "full_phase":
        raise ValueError("rhs_full expects a full_phase state")
    grad = energy_gradient(state.first)
    return PairState(
        state.second,
        Field(state.grid, -nu * state.second.values - grad.values),
        state.mode,
    )


def rhs_linear(state: PairState, coeffs: CoefficientSet, nu: float) -> PairState:
    """Linearized dynamics (u, v) -> (v, -L u - nu v)."""
    if state.mode != "perturbation":
        raise ValueError("rhs_linear expects a perturbation state")
    Lu = apply_L(state.first, coeffs)
    return PairState(
        state.second,
        Field(state.grid, -Lu.values - nu * state.second.values),
        state.mode,
    )


def cfl_limit(grid: Grid, c_cfl: float = DEFAULT_CFL) -> float:
    """dt bound c_cfl / sqrt(1 + pi/h + (pi/h)^2) from the top of the symbol."""
    top = np.pi / grid.h
    return c_cfl / np.sqrt(1.0 + top + top**2)


def step_rk4(state: PairState, dt: float, rhs, c_cfl: float = DEFAULT_CFL) -> PairState:
    """One classical fourth-order step; raises CflViolation above the limit."""
    limit = cfl_limit(state.grid, c_cfl)
    if dt > limit:
        raise CflViolation(f"dt = {dt:g} exceeds the stability limit {limit:g}")
    k1 = rhs(state)
    k2 = rhs(state.axpy(0.5 * dt, k1))
    k3 = rhs(state.axpy(0.5 * dt, k2))
    k4 = rhs(state.axpy(dt, k3))
    out = state.axpy(dt / 6.0, k1)
    out = out.axpy(dt / 3.0, k2)
    out = out.axpy(dt / 3.0, k3)
    return out.axpy(dt / 6.0, k4)


def extract_shift(theta: Field, profile: WallProfile) -> tuple[float, float]:
    """Shift minimizing ||theta - wall(.+delta)||_{L2} and the H1 distance there.

    Coarse scan over |delta| <= R/2 brackets the minimum; a bounded
    golden-section/parabolic search refines it.  Raises NoBracket when the
    scan finds no interior minimum.
    """
    g = theta.grid
    half = g.half_width / 2.0

    def dist2(delta: float) -> float:
        d = theta - translate_wall(profile.theta, delta)
        return inner_l2(d, d)

    scan = np.linspace(-half, half, 129)
    vals = np.array([dist2(s) for s in scan])
    imin = int(np.argmin(vals))
    if imin == 0 or imin == scan.size - 1:
        raise NoBracket(f"no interior L2 minimum over |delta| <= {half:g}")
    lo, hi = scan[imin - 1], scan[imin + 1]
    res = optimize.minimize_scalar(dist2, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    delta = float(res.x)
    diff = theta - translate_wall(profile.theta, delta)
    return delta, ap_norm_h1(diff)


def _observe(t, state, profile, dissipation, nu):
    if state.mode == "full_phase":
        shift, h1 = extract_shift(state.first, profile)
        potential = energy(state.first)
    else:
        shift = 0.0
        h1 = ap_norm_h1(state.first)
        potential = energy(profile.theta)
    kinetic = 0.5 * inner_l2(state.second, state.second) * 1.0
    return TraceRecord(
        t=t,
        h1_distance=h1,
        shift=shift,
        kinetic=kinetic,
        potential=potential,
        dissipation_integral=dissipation,
    )


def evolve(
    initial: PairState,
    T: float,
    dt: float,
    every: int,
    nu: float,
    profile: WallProfile,
    coeffs: CoefficientSet | None = None,
    c_cfl: float = DEFAULT_CFL,
) -> list[TraceRecord]:
    """Integrate the pair dynamics, recording diagnostics every `every` steps.

    The dissipation integral nu * int ||d_t theta||^2 dt is accumulated as an
    extra state component inside the same Runge-Kutta stages, so the energy
    balance holds to the integrator's order.  Raises BlowUp when the state
    norm grows by 1e3 over the initial one.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    limit = cfl_limit(initial.grid, c_cfl)
    if dt > limit:
        raise CflViolation(f"dt = {dt:g} exceeds the stability limit {limit:g}")
    if initial.mode == "perturbation" and coeffs is None:
        raise ValueError("linearized evolution needs the operator coefficients")

    if initial.mode == "full_phase":
        rhs = lambda s: rhs_full(s, nu)  # noqa: E731
    else:
        rhs = lambda s: rhs_linear(s, coeffs, nu)  # noqa: E731

    n_steps = int(round(T / dt))
    state = initial
    dissipation = 0.0
    trace = [_observe(0.0, state, profile, dissipation, nu)]
    size0 = ap_norm_h1(initial.first) + norm_l2(initial.second)
    guard = max(BLOWUP_FACTOR * size0, 1.0)

    for step in range(1, n_steps + 1):
        # RK4 on the augmented state (u, v, I) with I' = nu ||v||^2
        k1 = rhs(state)
        q1 = nu * inner_l2(state.second, state.second)
        s2 = state.axpy(0.5 * dt, k1)
        k2 = rhs(s2)
        q2 = nu * inner_l2(s2.second, s2.second)
        s3 = state.axpy(0.5 * dt, k2)
        k3 = rhs(s3)
        q3 = nu * inner_l2(s3.second, s3.second)
        s4 = state.axpy(dt, k3)
        k4 = rhs(s4)
        q4 = nu * inner_l2(s4.second, s4.second)
        out = state.axpy(dt / 6.0, k1)
        out = out.axpy(dt / 3.0, k2)
        out = out.axpy(dt / 3.0, k3)
        state = out.axpy(dt / 6.0, k4)
        dissipation += dt / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4)

        if step % every == 0 or step == n_steps:
            if state.mode == "perturbation":
                size = ap_norm_h1(state.first) + norm_l2(state.second)
            else:
                size = ap_norm_h1(state.first - profile.theta) + norm_l2(state.second)
            if size > guard:
                err = BlowUp(f"state norm {size:.3e} exceeded the guard {guard:.3e} at t = {step*dt:g}")
                err.trace = trace
                raise err
            trace.append(_observe(step * dt, state, profile, dissipation, nu))
    return trace


def decay_fit(trace: list[TraceRecord], window: tuple[float, float], quantity: str = "h1_distance") -> DecayFit:
    """Least-squares line on log(quantity) vs t over the window.

    Raises DegenerateFit when the data underflow 1e-12 (converged to the
    roundoff floor; shrink the window).
    """
    t = np.array([r.t for r in trace])
    if quantity == "h1_distance":
        y = np.array([r.h1_distance for r in trace])
    elif quantity == "x_norm":
        y = np.array([np.sqrt(r.h1_distance**2 + 2.0 * r.kinetic) for r in trace])
    else:
        raise ValueError(f"unknown fit quantity {quantity!r}")
    mask = (t >= window[0]) & (t <= window[1])
    if mask.sum() < 3:
        raise ValueError("fit window contains fewer than 3 records")
    t, y = t[mask], y[mask]
    if np.any(y < 1e-12):
        raise DegenerateFit("distances underflow 1e-12 inside the fit window")
    logy = np.log(y)
    slope, intercept = np.polyfit(t, logy, 1)
    fitted = slope * t + intercept
    ss_res = float(np.sum((logy - fitted) ** 2))
    ss_tot = float(np.sum((logy - np.mean(logy)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(
        omega=float(-slope),
        amplitude=float(np.exp(intercept)),
        window=(float(window[0]), float(window[1])),
        r_squared=float(r2),
        quantity=quantity,
    )


def hypothesis_H2_check(profile: WallProfile, deltas) -> dict:
    """Second-order Taylor defect of the translate family.

    For each delta, computes ||wall(.+delta) - wall - delta*wall'||_{H1} /
    delta^2 and compares the worst ratio against the curvature constant
    ||wall''||_{H1} / sqrt(3).
    """
    theta = profile.theta
    dtheta = profile.dtheta
    d2 = ap_derivative(dtheta)
    const = np.sqrt(max(ap_inner_h1(d2, d2), 0.0)) / np.sqrt(3.0)
    ratios = []
    for d in deltas:
        if d == 0.0:
            continue
        defect = translate_wall(theta, d) - theta - float(d) * dtheta
        ratios.append(ap_norm_h1(defect) / d**2)
    return {
        "deltas": [float(d) for d in deltas if d != 0.0],
        "ratios": [float(r) for r in ratios],
        "max_ratio": float(max(ratios)) if ratios else 0.0,
        "bound": float(const),
    }


def hypothesis_H3_check(profile: WallProfile, directions, amplitudes) -> dict:
    """Quadratic smallness of the nonlinear remainder.

    For each direction, fits the log-log slope of ||N(eps*u)||_{L2} against
    eps; slopes near 2 confirm the quadratic bound.
    """
    amplitudes = np.asarray(list(amplitudes), dtype=float)
    report = {"amplitudes": amplitudes.tolist(), "slopes": [], "norms": []}
    for u in directions:
        scale = ap_norm_h1(u)
        unit = Field(u.grid, u.values / scale)
        norms = []
        for eps in amplitudes:
            r = nonlinear_remainder(Field(u.grid, eps * unit.values), profile)
            norms.append(norm_l2(r))
        slope = np.polyfit(np.log(amplitudes), np.log(norms), 1)[0]
        report["slopes"].append(float(slope))
        report["norms"].append([float(v) for v in norms])
    return report


def perturbation_shape(profile: WallProfile, kind: str, rng: np.random.Generator | None = None) -> Field:
    """Unit-H1 perturbation shapes used by the experiments."""
    g = profile.grid
    if kind == "even_bump":
        shape = gaussian_bump(g, center=0.0, width=2.0)
    elif kind == "odd_bump":
        base = gaussian_bump(g, center=0.0, width=2.0)
        shape = Field(g, g.nodes * base.values)
    elif kind == "random":
        if rng is None:
            raise ValueError("random shape needs a generator")
        shape = random_compact(g, rng)
    else:
        raise ValueError(f"unknown perturbation shape {kind!r}")
    return Field(g, shape.values / ap_norm_h1(shape))
