"""Linearization around the wall: the scalar operator L, its nonlocal piece,
the asymptotic multiplier operator, the nonlinear remainder, and the
associated bilinear forms, both matrix-free and as dense symmetric matrices.

Perturbations of the phase live in the antiperiodic sector (they inherit the
wall's lattice continuation); everything built from cos/sin of the phase is
handled with the periodic calculus, matching the profile module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CenterViolation, OrthogonalityViolation, SymmetryDefect
from .grid import (
    Field,
    Grid,
    _ap_frequencies,
    _ap_modulation,
    _transform_freqs,
    ap_derivative_form,
    ap_second_derivative,
    b_form,
    inner_l2,
    norm_l2,
    one_plus_half_laplacian,
)
from .profile import WallProfile, energy_gradient, translate_wall

__all__ = [
    "CoefficientSet",
    "DenseSymmetricOperator",
    "build_coefficients",
    "apply_S",
    "apply_L",
    "apply_L_infinity",
    "assemble",
    "nonlinear_remainder",
    "a_form",
    "hessian_check",
]

SYMMETRY_DEFECT_LIMIT = 1e-8


@dataclass(frozen=True)
class CoefficientSet:
    """Pointwise coefficients of the linearization at a wall phase."""

    s_theta: Field
    c_theta: Field
    profile: WallProfile | None = None

    @property
    def grid(self) -> Grid:
        return self.s_theta.grid

    def __post_init__(self):
        if np.max(np.abs(self.s_theta.values)) > 1.0 + 1e-12:
            raise ValueError("sin(theta) coefficient exceeds 1 in magnitude")


def build_coefficients(profile_or_theta) -> CoefficientSet:
    """Coefficients sin(theta) and cos(theta)*(1 + half_laplacian)cos(theta).

    Accepts a WallProfile or a bare phase Field.  Far-field warnings from the
    nonlocal application propagate (the wall's lattice tails decay only
    algebraically, so they fire at the default tolerance on production
    grids).
    """
    if isinstance(profile_or_theta, WallProfile):
        theta = profile_or_theta.theta
        profile = profile_or_theta
    else:
        theta = profile_or_theta
        profile = None
    g = theta.grid
    c = Field(g, np.cos(theta.values))
    c_theta = Field(g, c.values * one_plus_half_laplacian(c).values)
    return CoefficientSet(
        s_theta=Field(g, np.sin(theta.values)),
        c_theta=c_theta,
        profile=profile,
    )


def apply_S(u: Field, coeffs: CoefficientSet) -> Field:
    """Nonlocal piece u -> sin(theta) (1 + half_laplacian)(u sin(theta)).

    The product u*sin(theta) must decay at the box ends; the inner nonlocal
    application warns when it does not.
    """
    s = coeffs.s_theta
    inner = one_plus_half_laplacian(s * u)
    return s * inner


def apply_L(u: Field, coeffs: CoefficientSet) -> Field:
    """Linearized operator L u = -u'' + S u - c_theta u (antiperiodic sector)."""
    return Field(
        u.grid,
        -ap_second_derivative(u).values
        + apply_S(u, coeffs).values
        - coeffs.c_theta.values * u.values,
    )


def apply_L_infinity(u: Field) -> Field:
    """Asymptotic operator u -> -u'' + (1 + half_laplacian) u.

    A pure multiplier with symbol 1 + |xi| + xi^2 on the periodic sector,
    where its spectrum reaches the symbol minimum 1 at xi = 0.
    """
    g = u.grid
    xi = _transform_freqs(g)
    m = g.pad_factor * g.n
    if m == g.n:
        buf = u.values
    else:
        buf = np.zeros(m)
        buf[: g.n] = u.values
    sym = 1.0 + np.abs(xi) + xi**2
    out = np.fft.ifft(sym * np.fft.fft(buf)).real
    return Field(g, out[: g.n])


@dataclass(frozen=True)
class DenseSymmetricOperator:
    """Dense symmetric realization of a matrix-free operator.

    The quadratic form of the operator in the h-weighted inner product is
    h * x^T entries y.
    """

    n: int
    entries: np.ndarray
    kind: str
    grid: Grid
    symmetry_defect: float = 0.0

    def __post_init__(self):
        ent = np.array(self.entries, dtype=float, copy=True)
        if ent.shape != (self.n, self.n):
            raise ValueError("entries shape does not match n")
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    def apply(self, u: Field) -> Field:
        return Field(self.grid, self.entries @ u.values)


def _ap_multiplier_matrix(grid: Grid, symbol: np.ndarray) -> np.ndarray:
    """Dense matrix of an antiperiodic-sector multiplier (basis application)."""
    mod = _ap_modulation(grid.n, grid.h)
    cols = np.fft.fft(np.diag(mod), axis=0)
    cols = np.fft.ifft(symbol[:, None] * cols, axis=0)
    return (cols * np.conj(mod)[:, None]).real


def _periodic_multiplier_matrix(grid: Grid, symbol: np.ndarray) -> np.ndarray:
    """Dense matrix of a periodic multiplier on the n-point box."""
    cols = np.fft.fft(np.eye(grid.n), axis=0)
    cols = np.fft.ifft(symbol[:, None] * cols, axis=0)
    return cols.real


def assemble(kind: str, coeffs: CoefficientSet | None = None, grid: Grid | None = None) -> DenseSymmetricOperator:
    """Dense symmetric matrix of L or L_infinity by basis application.

    Columns are the operator applied to unit basis vectors (computed as one
    batched transform); the result is explicitly symmetrized and the
    pre-symmetrization defect recorded.  Raises SymmetryDefect when the
    defect exceeds 1e-8 * max|M|.
    """
    if kind == "L":
        if coeffs is None:
            raise ValueError("assembling L requires coefficients")
        g = coeffs.grid
        if g.pad_factor != 1:
            raise ValueError("dense assembly requires an unpadded grid")
        xi_ap = _ap_frequencies(g.n, g.h)
        xi_per = _transform_freqs(g)
        d2 = _ap_multiplier_matrix(g, -(xi_ap**2))
        bmat = _periodic_multiplier_matrix(g, 1.0 + np.abs(xi_per))
        s = coeffs.s_theta.values
        mat = -d2 + (s[:, None] * bmat * s[None, :]) - np.diag(coeffs.c_theta.values)
    elif kind == "L_infinity":
        if grid is None:
            if coeffs is None:
                raise ValueError("assembling L_infinity requires a grid")
            grid = coeffs.grid
        g = grid
        if g.pad_factor != 1:
            raise ValueError("dense assembly requires an unpadded grid")
        xi = _transform_freqs(g)
        mat = _periodic_multiplier_matrix(g, 1.0 + np.abs(xi) + xi**2)
    else:
        raise ValueError(f"unknown operator kind {kind!r}")

    defect = float(np.max(np.abs(mat - mat.T)))
    scale = float(np.max(np.abs(mat)))
    if defect > SYMMETRY_DEFECT_LIMIT * scale:
        raise SymmetryDefect(
            f"assembled {kind} has symmetry defect {defect:.3e} > {SYMMETRY_DEFECT_LIMIT:g} * {scale:.3e}"
        )
    mat = 0.5 * (mat + mat.T)
    return DenseSymmetricOperator(n=g.n, entries=mat, kind=kind, grid=g, symmetry_defect=defect)


def nonlinear_remainder(u: Field, profile: WallProfile, shift: float = 0.0) -> Field:
    """Remainder grad E(theta_d + u) - grad E(theta_d) - L^d u at the shifted wall.

    Computed directly from the three-term definition; the coefficients of
    L^d come from the spectrally translated profile.
    """
    theta_d = translate_wall(profile.theta, shift) if shift != 0.0 else profile.theta
    coeffs = build_coefficients(theta_d)
    g_pert = energy_gradient(theta_d + u)
    g_base = energy_gradient(theta_d)
    lin = apply_L(u, coeffs)
    return Field(u.grid, g_pert.values - g_base.values - lin.values)


def _check_orthogonal(u: Field, dtheta: Field, tol: float = 1e-8):
    overlap = abs(inner_l2(u, dtheta))
    scale = norm_l2(u) * norm_l2(dtheta)
    if scale > 0 and overlap > tol * scale:
        raise OrthogonalityViolation(
            f"field has overlap {overlap / scale:.3e} with the translation mode (tol {tol:g})"
        )


def a_form(u: Field, v: Field, coeffs: CoefficientSet) -> float:
    """Sesquilinear form a[u,v] = <u',v'> + b[s u, s v] - <c u, v>.

    Equals <L u, v> on the discrete domain.  Both arguments must be
    orthogonal to the translation mode (checked when the coefficient set
    carries its profile).
    """
    if coeffs.profile is not None:
        _check_orthogonal(u, coeffs.profile.dtheta)
        _check_orthogonal(v, coeffs.profile.dtheta)
    s = coeffs.s_theta
    return (
        ap_derivative_form(u, v)
        + b_form(s * u, s * v)
        - inner_l2(coeffs.c_theta * u, v)
    )


def hessian_check(u: Field, coeffs: CoefficientSet) -> tuple[float, float]:
    """Quadratic-form pair for the centered-variation lower bound.

    Returns (<L u, u>, ||u theta'||^2 + b[s u, s u]); the first should
    dominate the second, up to discretization slack, for variations with
    u(0) = 0.  Raises CenterViolation when the center node is not zero.
    """
    g = u.grid
    if u.values[g.center_index] != 0.0:
        raise CenterViolation("variation does not vanish at the center node")
    if coeffs.profile is None:
        raise ValueError("hessian_check needs coefficients built from a profile")
    lhs = inner_l2(apply_L(u, coeffs), u)
    weighted = coeffs.profile.dtheta * u
    s = coeffs.s_theta
    rhs = inner_l2(weighted, weighted) + b_form(s * u, s * u)
    return lhs, rhs
