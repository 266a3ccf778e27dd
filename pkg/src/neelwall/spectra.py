"""Eigen-analysis of the linearization and of the damped block operator.

Covers the dense symmetric eigensolves (translation mode, spectral gap), the
quadratic-root mapping between the scalar and block spectra, the damping
dependent gap bound, the essential-spectrum curve of the asymptotic
operator, the rank-one spectral projector built from the adjoint null
vector, and the resolvent inequality used for semigroup decay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy.spatial import cKDTree

from .errors import EigenFailure, GapViolation, SolveFailure
from .grid import Field, ap_bessel_inverse, inner_l2
from .operators import DenseSymmetricOperator, _check_orthogonal
from .profile import WallProfile
from .dynamics import PairState

__all__ = [
    "SpectrumReport",
    "BlockSpectrumReport",
    "ProjectorData",
    "eig_dense",
    "lambda0_deflated",
    "quadratic_roots",
    "mapped_spectrum",
    "zeta0_formula",
    "companion_spectrum",
    "essential_curve",
    "essential_membership_defect",
    "build_projector",
    "project",
    "resolvent_check",
]

ZERO_MODE_TOL = 1e-5
GAP_TOL = 1e-8


@dataclass(frozen=True)
class SpectrumReport:
    """Eigen-data of a dense symmetric operator."""

    kind: str
    eigenvalues: np.ndarray
    zero_mode_index: int | None
    lambda0: float | None
    zero_mode_residual: float
    n: int
    half_width: float
    eigenvectors: np.ndarray | None = None

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float, copy=True)
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)


@dataclass(frozen=True)
class BlockSpectrumReport:
    """Spectrum of the damped block operator at a given damping."""

    nu: float
    block_eigenvalues: np.ndarray
    mapped_eigenvalues: np.ndarray
    zeta0: float
    max_nonzero_real_part: float
    essential_samples: np.ndarray
    translation_indices: tuple
    hausdorff_mapped_vs_block: float
    lambda0: float
    n: int
    half_width: float


@dataclass(frozen=True)
class ProjectorData:
    """Rank-one spectral projector data at damping nu."""

    Theta: PairState
    Phi_first: Field
    Phi0: PairState
    Xi: float
    nu: float

    def __post_init__(self):
        if not self.Xi > 0:
            raise ValueError("projector normalization Xi must be positive")


def eig_dense(
    op: DenseSymmetricOperator,
    zero_mode_tol: float = ZERO_MODE_TOL,
    want_vectors: bool = False,
) -> SpectrumReport:
    """Full symmetric eigendecomposition with zero-mode classification.

    For kind "L" there must be exactly one eigenvalue within
    zero_mode_tol * max|eigenvalue| of zero; the gap lambda0 is the smallest
    eigenvalue after removing it.  For kind "L_infinity" the minimum must
    sit within 1e-3 of the symbol minimum 1.
    """
    try:
        if want_vectors:
            ev, vec = sla.eigh(op.entries)
        else:
            ev = sla.eigh(op.entries, eigvals_only=True)
            vec = None
    except sla.LinAlgError as exc:  # pragma: no cover - LAPACK failure path
        raise EigenFailure(f"dense eigensolver failed for {op.kind}: {exc}") from exc

    order = np.argsort(ev)
    ev = ev[order]
    if vec is not None:
        vec = vec[:, order]

    zero_index: int | None = None
    lambda0: float | None = None
    zero_residual = float("nan")
    if op.kind == "L":
        scale = float(np.max(np.abs(ev)))
        near = np.where(np.abs(ev) <= zero_mode_tol * scale)[0]
        if near.size != 1:
            raise EigenFailure(
                f"expected exactly one eigenvalue within {zero_mode_tol:g}*max|ev| of zero, found {near.size}"
            )
        zero_index = int(near[0])
        zero_residual = float(abs(ev[zero_index]))
        rest = np.delete(ev, zero_index)
        lambda0 = float(np.min(rest))
        if lambda0 <= 0:
            raise EigenFailure(f"spectral gap is not positive: lambda0 = {lambda0:g}")
    elif op.kind == "L_infinity":
        if ev[0] < 1.0 - 1e-3:
            raise EigenFailure(f"asymptotic operator minimum {ev[0]:.6f} sits below 1 - 1e-3")
    return SpectrumReport(
        kind=op.kind,
        eigenvalues=ev,
        zero_mode_index=zero_index,
        lambda0=lambda0,
        zero_mode_residual=zero_residual,
        n=op.n,
        half_width=op.grid.half_width,
        eigenvectors=vec,
    )


def _complement_basis(direction: np.ndarray) -> np.ndarray:
    """Householder reflector columns spanning the orthogonal complement."""
    q = direction / np.linalg.norm(direction)
    e1 = np.zeros_like(q)
    e1[0] = 1.0
    v = q - e1 if q[0] >= 0 else q + e1
    v /= np.linalg.norm(v)
    H = np.eye(q.size) - 2.0 * np.outer(v, v)
    return H[:, 1:]


def lambda0_deflated(op: DenseSymmetricOperator, dtheta: Field) -> float:
    """Minimum Rayleigh quotient of L over the complement of the translation mode."""
    if op.kind != "L":
        raise ValueError("deflation is defined for kind 'L'")
    Q = _complement_basis(dtheta.values)
    reduced = Q.T @ op.entries @ Q
    try:
        ev = sla.eigh(reduced, eigvals_only=True, subset_by_index=[0, 0])
    except sla.LinAlgError as exc:  # pragma: no cover
        raise EigenFailure(f"deflated eigensolve failed: {exc}") from exc
    return float(ev[0])


def quadratic_roots(mu: float, nu: float) -> tuple[complex, complex]:
    """Roots of lambda^2 + nu lambda + mu = 0, sorted by real part descending."""
    if nu <= 0:
        raise ValueError("damping nu must be positive")
    disc = np.sqrt(complex(nu * nu - 4.0 * mu))
    r1 = 0.5 * (-nu + disc)
    r2 = 0.5 * (-nu - disc)
    pair = sorted((complex(r1), complex(r2)), key=lambda z: (-z.real, -z.imag))
    return pair[0], pair[1]


def mapped_spectrum(eigenvalues: np.ndarray, nu: float) -> np.ndarray:
    """Block spectrum from the root map applied to every scalar eigenvalue."""
    out = np.empty(2 * len(eigenvalues), dtype=complex)
    for i, mu in enumerate(eigenvalues):
        out[2 * i], out[2 * i + 1] = quadratic_roots(float(mu), nu)
    return out


def zeta0_formula(nu: float, lambda0: float) -> float:
    """Gap-to-the-imaginary-axis of the damped block spectrum.

    zeta0 = nu/2 - max( ind[nu >= 2] * sqrt(nu^2-4)/2,
                        ind[nu >= 2 sqrt(lambda0)] * sqrt(nu^2-4 lambda0)/2 ).
    """
    if nu <= 0:
        raise ValueError("damping nu must be positive")
    if lambda0 <= 0:
        raise ValueError("lambda0 must be positive")
    t1 = 0.5 * np.sqrt(nu * nu - 4.0) if nu >= 2.0 else 0.0
    t2 = 0.5 * np.sqrt(nu * nu - 4.0 * lambda0) if nu >= 2.0 * np.sqrt(lambda0) else 0.0
    return float(0.5 * nu - max(t1, t2))


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    pa = np.column_stack([a.real, a.imag])
    pb = np.column_stack([b.real, b.imag])
    da = cKDTree(pb).query(pa)[0].max()
    db = cKDTree(pa).query(pb)[0].max()
    return float(max(da, db))


def companion_spectrum(
    op_L: DenseSymmetricOperator,
    nu: float,
    zero_mode_tol: float = ZERO_MODE_TOL,
    gap_tol: float = GAP_TOL,
    xi_max: float = 50.0,
    xi_samples: int = 4096,
) -> BlockSpectrumReport:
    """Block spectrum by companion eigensolve, cross-checked by the root map.

    The nonsymmetric 2n eigensolve of [[0, I], [-L, -nu I]] is compared as a
    multiset against the quadratic roots of L's eigenvalues (the root map is
    authoritative; the companion solve is the consistency check).  Flags the
    translation pair {0, -nu} and verifies the gap bound on every other
    eigenvalue.
    """
    if op_L.kind != "L":
        raise ValueError("companion spectrum is defined for kind 'L'")
    if nu <= 0:
        raise ValueError("damping nu must be positive")
    scalar = eig_dense(op_L, zero_mode_tol=zero_mode_tol)
    mapped = mapped_spectrum(scalar.eigenvalues, nu)

    n = op_L.n
    comp = np.zeros((2 * n, 2 * n))
    comp[:n, n:] = np.eye(n)
    comp[n:, :n] = -op_L.entries
    comp[n:, n:] = -nu * np.eye(n)
    try:
        block = sla.eig(comp, right=False)
    except sla.LinAlgError as exc:  # pragma: no cover
        raise EigenFailure(f"companion eigensolve failed: {exc}") from exc

    # translation pair: the eigenvalues nearest 0 and nearest -nu
    i_zero = int(np.argmin(np.abs(block)))
    i_nu = int(np.argmin(np.abs(block + nu)))
    if i_zero == i_nu:
        raise EigenFailure("translation pair of the block spectrum collapsed")

    zeta0 = zeta0_formula(nu, scalar.lambda0)
    rest = np.delete(block, [i_zero, i_nu])
    max_re = float(np.max(rest.real))
    if max_re > -zeta0 + gap_tol:
        raise GapViolation(
            f"non-translation eigenvalue with Re = {max_re:.3e} violates the gap -zeta0 = {-zeta0:.3e}"
        )

    hausdorff = _hausdorff(mapped, block)
    xi, samples = essential_curve(nu, xi_max=xi_max, n_samples=xi_samples)
    return BlockSpectrumReport(
        nu=nu,
        block_eigenvalues=block,
        mapped_eigenvalues=mapped,
        zeta0=zeta0,
        max_nonzero_real_part=max_re,
        essential_samples=samples,
        translation_indices=(i_zero, i_nu),
        hausdorff_mapped_vs_block=hausdorff,
        lambda0=scalar.lambda0,
        n=op_L.n,
        half_width=op_L.grid.half_width,
    )


def essential_curve(nu: float, xi_max: float = 50.0, n_samples: int = 4096):
    """Both root branches of lambda^2 + nu lambda + (1 + |xi| + xi^2) = 0.

    Returns (xi, roots) with roots of shape (n_samples, 2); these sample the
    spectrum of the asymptotic block operator.
    """
    if nu <= 0:
        raise ValueError("damping nu must be positive")
    xi = np.linspace(-xi_max, xi_max, n_samples)
    roots = np.empty((n_samples, 2), dtype=complex)
    for i, x in enumerate(xi):
        mu = 1.0 + abs(x) + x * x
        roots[i, 0], roots[i, 1] = quadratic_roots(mu, nu)
    return xi, roots


def essential_membership_defect(lam: complex, nu: float) -> tuple[float, float]:
    """How far lambda sits from the curve {lambda(lambda+nu) in (-inf, -1]}.

    Returns (|Im z|, max(Re z + 1, 0)) for z = lambda(lambda + nu); both
    vanish exactly on the curve.
    """
    z = lam * (lam + nu)
    return float(abs(z.imag)), float(max(z.real + 1.0, 0.0))


def build_projector(profile: WallProfile, nu: float) -> ProjectorData:
    """Adjoint-null-vector projector data at damping nu.

    Theta = (wall', 0); the adjoint null vector has Bessel-smoothed first
    component nu*(1 - d^2/dx^2)^{-1} wall'; the X-pairing against it reduces
    to the plain L2 pairing with Phi0 = (nu wall', wall'), with
    normalization Xi = nu ||wall'||^2.
    """
    if nu <= 0:
        raise ValueError("damping nu must be positive")
    dtheta = profile.dtheta
    g = profile.grid
    zero = g.zeros()
    phi_first = Field(g, nu * ap_bessel_inverse(dtheta).values)
    xi = nu * inner_l2(dtheta, dtheta)
    return ProjectorData(
        Theta=PairState(dtheta, zero, "perturbation"),
        Phi_first=phi_first,
        Phi0=PairState(Field(g, nu * dtheta.values), dtheta, "perturbation"),
        Xi=float(xi),
        nu=nu,
    )


def pair_l2(U: PairState, V: PairState) -> float:
    return inner_l2(U.first, V.first) + inner_l2(U.second, V.second)


def project(U: PairState, pd: ProjectorData) -> PairState:
    """Spectral projection P U = U - <U, Phi0>_{L2} / Xi * Theta."""
    weight = pair_l2(U, pd.Phi0) / pd.Xi
    g = U.grid
    return PairState(
        Field(g, U.first.values - weight * pd.Theta.first.values),
        Field(g, U.second.values - weight * pd.Theta.second.values),
        U.mode,
    )


def resolvent_check(
    lam: complex,
    F: PairState,
    op_L: DenseSymmetricOperator,
    profile: WallProfile,
    nu: float,
) -> dict:
    """Solve (lambda - A) U = F on the translation-orthogonal subspace and
    verify |lambda* a[u,u] + (lambda + nu) ||v||^2| <= ||U||_2 ||F||_2.

    F = (f, g) must have both components orthogonal to the translation mode
    and Re(lambda) must be positive.  Returns a report with both sides of
    the inequality, the slack, and the back-substitution residual.
    """
    lam = complex(lam)
    if lam.real <= 0:
        raise ValueError("the resolvent check needs Re(lambda) > 0")
    if nu <= 0:
        raise ValueError("damping nu must be positive")
    dtheta = profile.dtheta
    _check_orthogonal(F.first, dtheta)
    _check_orthogonal(F.second, dtheta)

    g = profile.grid
    h = g.h
    M = op_L.entries
    Q = _complement_basis(dtheta.values)
    rhs = F.second.values + (lam + nu) * F.first.values
    reduced = Q.T @ M @ Q + lam * (lam + nu) * np.eye(Q.shape[1])
    try:
        u_red = np.linalg.solve(reduced, Q.T @ rhs.astype(complex))
    except np.linalg.LinAlgError as exc:
        raise SolveFailure(f"shifted system is singular at lambda = {lam}: {exc}") from exc
    u = Q @ u_red
    v = lam * u - F.first.values

    # back-substitution residual of (lambda - A) U = F in L2 x L2
    r1 = lam * u - v - F.first.values
    r2 = M @ u + (lam + nu) * v - F.second.values
    res = np.sqrt(h * (np.vdot(r1, r1).real + np.vdot(r2, r2).real))
    f_norm = np.sqrt(h * (np.vdot(F.first.values, F.first.values).real
                          + np.vdot(F.second.values, F.second.values).real))
    if f_norm > 0 and res > 1e-6 * f_norm:
        raise SolveFailure(f"resolvent solve residual {res:.3e} too large relative to ||F|| = {f_norm:.3e}")

    a_uu = float((h * np.vdot(u, M @ u)).real)
    a_ff = float((h * np.vdot(F.first.values, M @ F.first.values)).real)
    v_norm = float(np.sqrt(h * np.vdot(v, v).real))
    g_norm = float(np.sqrt(h * np.vdot(F.second.values, F.second.values).real))
    lhs = abs(np.conj(lam) * a_uu + (lam + nu) * h * np.vdot(v, v).real)
    u2 = np.sqrt(max(a_uu, 0.0)) + v_norm
    f2 = np.sqrt(max(a_ff, 0.0)) + g_norm
    rhs_val = u2 * f2
    return {
        "lambda": lam,
        "nu": nu,
        "lhs": float(lhs),
        "rhs": float(rhs_val),
        "slack": float(rhs_val - lhs),
        "residual": float(res),
        "residual_rel": float(res / f_norm) if f_norm > 0 else 0.0,
        "a_uu": a_uu,
        "v_norm": v_norm,
    }
