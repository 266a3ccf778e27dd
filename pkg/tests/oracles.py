"""Independent reference implementations used as test oracles.

These deliberately avoid the package's multiplier machinery: real-space
kernel matrices built from the classical closed forms, dense linear solves,
and finite differences of scalar functionals.
"""

import numpy as np

from neelwall.grid import Field, one_plus_half_laplacian
from neelwall.profile import translate_wall


def trefethen_diff_matrix(grid):
    """Classical periodic spectral differentiation matrix on [-R, R)."""
    n, R = grid.n, grid.half_width
    kernel = np.zeros(n)
    for shift in range(1, n):
        kernel[shift] = (np.pi / (2 * R)) * (-1) ** shift / np.tan(np.pi * shift / n)
    idx = np.arange(n)
    return kernel[(idx[:, None] - idx[None, :]) % n]


def hilbert_kernel_matrix(grid):
    """Discrete periodic Hilbert transform via the cotangent kernel."""
    n = grid.n
    k = np.zeros(n)
    for j in range(1, n):
        if j % 2 == 1:
            k[j] = (2.0 / n) / np.tan(np.pi * j / n)
    idx = np.arange(n)
    return k[(idx[:, None] - idx[None, :]) % n]


def half_laplacian_matrix(grid):
    """|d/dx| as the composition of the two classical kernel matrices."""
    return hilbert_kernel_matrix(grid) @ trefethen_diff_matrix(grid)


def one_plus_half_laplacian_matrix(grid):
    return np.eye(grid.n) + half_laplacian_matrix(grid)


def b_form_oracle(f, g):
    """b[f, g] via the real-space kernel matrices."""
    grid = f.grid
    B = one_plus_half_laplacian_matrix(grid)
    return grid.h * float(f.values @ B @ g.values)


def bessel_solve_oracle(f):
    """(1 - d^2/dx^2)^{-1} f by a dense LU solve on the kernel matrices."""
    grid = f.grid
    D = trefethen_diff_matrix(grid)
    A = np.eye(grid.n) - D @ D
    return Field(grid, np.linalg.solve(A, f.values))


def fd_directional_derivative(functional, theta, direction, eps):
    """Central difference of a scalar functional along a field direction."""
    up = Field(theta.grid, theta.values + eps * direction.values)
    dn = Field(theta.grid, theta.values - eps * direction.values)
    return (functional(up) - functional(dn)) / (2 * eps)


def remainder_split_oracle(u, profile, shift=0.0):
    """Nonlinear remainder assembled from its three-piece rearrangement.

    A1 = -sin(t+u) B(cos(t+u) - cos t + u sin t)
    A2 = (sin(t+u) - sin t) B(u sin t)
    A3 = -(sin(t+u) - sin t - u cos t) B(cos t)
    with t the (shifted) wall phase and B = 1 + half-Laplacian.
    """
    grid = u.grid
    theta = translate_wall(profile.theta, shift) if shift != 0.0 else profile.theta
    t = theta.values
    w = u.values
    B = lambda arr: one_plus_half_laplacian(Field(grid, arr)).values  # noqa: E731
    a1 = -np.sin(t + w) * B(np.cos(t + w) - np.cos(t) + w * np.sin(t))
    a2 = (np.sin(t + w) - np.sin(t)) * B(w * np.sin(t))
    a3 = -(np.sin(t + w) - np.sin(t) - w * np.cos(t)) * B(np.cos(t))
    return Field(grid, a1 + a2 + a3)


def point_to_polyline_distance(points, vertices):
    """Max over points of the distance to a polyline (complex inputs)."""
    p = np.column_stack([points.real, points.imag])
    v = np.column_stack([vertices.real, vertices.imag])
    a, b = v[:-1], v[1:]
    ab = b - a
    denom = (ab**2).sum(axis=1)
    denom[denom == 0] = 1.0
    worst = 0.0
    for q in p:
        t = np.clip(((q - a) * ab).sum(axis=1) / denom, 0.0, 1.0)
        proj = a + t[:, None] * ab
        d = np.sqrt(((q - proj) ** 2).sum(axis=1).min())
        worst = max(worst, d)
    return worst
