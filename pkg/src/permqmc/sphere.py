"""Geometry linking the unit sphere in R^(d-1) to permutations of d elements.

The d! rank vectors, viewed as points of R^d, lie on a sphere inside the
hyperplane whose normal is the all-ones direction.  A point on the abstract
sphere S^(d-2) is lifted onto that hyperplane with an orthonormal basis and
snapped to the nearest rank vector, which reduces to ranking the lifted
coordinates.  Uniform points on the sphere map to uniform permutations, and
well-spread points map to well-spread permutations.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import beta as _beta_function

from .permutations import Permutation

__all__ = [
    "projection_matrix",
    "uniform_sphere_point",
    "lift_to_hyperplane",
    "nearest_permutation",
    "polar_inverse_cdf",
    "polar_to_cartesian",
]

CDF_NODES = 4096
CDF_TOL = 1e-10
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@lru_cache(maxsize=None)
def projection_matrix(d: int) -> np.ndarray:
    """(d-1) x d matrix with orthonormal rows spanning the sum-zero hyperplane.

    Row k is (1, ..., 1, -k, 0, ..., 0) normalised, so every row is orthogonal
    to the all-ones normal direction.  The returned array is read-only.
    """
    if d < 3:
        raise ValueError(f"projection matrix needs d >= 3, got {d}")
    rows = np.zeros((d - 1, d))
    for k in range(1, d):
        rows[k - 1, :k] = 1.0
        rows[k - 1, k] = -float(k)
        rows[k - 1] /= math.sqrt(k * (k + 1))
    rows.flags.writeable = False
    return rows


def uniform_sphere_point(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the unit sphere in R^(d-1): normalised Gaussian draw."""
    if d < 3:
        raise ValueError(f"sphere sampling needs d >= 3, got {d}")
    while True:
        x = rng.standard_normal(d - 1)
        norm = np.linalg.norm(x)
        if norm > 1e-12:  # an (almost) all-zero draw carries no direction
            return x / norm


def lift_to_hyperplane(x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Map a point of S^(d-2) into the sum-zero hyperplane of R^d."""
    return basis.T @ np.asarray(x, dtype=np.float64)


def lift_rows(points: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Row-wise lift of an (n, d-1) matrix of sphere points."""
    return np.asarray(points, dtype=np.float64) @ basis


def rank_rows(lifted: np.ndarray) -> np.ndarray:
    """Row-wise rank vectors (1-based) of an (n, d) matrix, stable under ties."""
    order = np.argsort(lifted, axis=1, kind="stable")
    ranks = np.empty(lifted.shape, dtype=np.int64)
    n, d = lifted.shape
    np.put_along_axis(ranks, order, np.arange(1, d + 1)[None, :].repeat(n, axis=0), axis=1)
    return ranks


def nearest_permutation(lifted: np.ndarray) -> Permutation:
    """Permutation whose rank vector is closest to a lifted point.

    Maximising the inner product against all rank vectors amounts to ranking
    the coordinates of the input, so the result is the vector of coordinate
    ranks (the inverse of the sorting permutation).  Negating the input yields
    the reverse permutation.
    """
    x = np.asarray(lifted, dtype=np.float64)
    if np.isnan(x).any():
        raise ValueError("nearest_permutation input contains NaN")
    return Permutation(rank_rows(x[None, :])[0])


# -- generalised polar coordinates ------------------------------------------
#
# A point of S^(d-2) is parameterised by d-2 angles: the first d-3 lie in
# [0, pi] with density proportional to sin(phi)^(d-j-2) for axis j, and the
# last is uniform on [0, 2*pi).


def _sin_power_density_norm(k: int) -> float:
    return _beta_function((k + 1) / 2.0, 0.5)


@lru_cache(maxsize=None)
def _cdf_table(d: int, j: int) -> tuple[np.ndarray, np.ndarray, int, float]:
    """Monotone CDF table for angle axis j at dimension d.

    Cumulative integrals of the sine-power density over CDF_NODES grid nodes
    on [0, pi], each cell integrated adaptively.  Shared by all samples at
    this (d, j), with bisection refinement done against local Gauss-Legendre
    panels from the bracketing node.
    """
    k = d - j - 2
    norm = _sin_power_density_norm(k)
    grid = np.linspace(0.0, math.pi, CDF_NODES)
    cdf = np.zeros(CDF_NODES)
    density = lambda t: math.sin(t) ** k / norm
    for i in range(1, CDF_NODES):
        piece, _ = quad(density, grid[i - 1], grid[i])
        cdf[i] = cdf[i - 1] + piece
    grid.flags.writeable = False
    cdf.flags.writeable = False
    return grid, cdf, k, norm


def _cdf_from_node(phi: np.ndarray, base_phi: np.ndarray, base_cdf: np.ndarray,
                   k: int, norm: float) -> np.ndarray:
    # CDF(phi) = table value at the bracketing node + local 16-point panel
    half = (phi - base_phi) / 2.0
    nodes = base_phi[:, None] + half[:, None] * (_GL_NODES[None, :] + 1.0)
    panel = half * ((np.sin(nodes) ** k) @ _GL_WEIGHTS) / norm
    return base_cdf + panel


def inverse_cdf_batch(j: int, u: np.ndarray, d: int) -> np.ndarray:
    """Vectorised inverse CDF for angle axis j; see ``polar_inverse_cdf``."""
    u = np.asarray(u, dtype=np.float64)
    if np.any((u < 0.0) | (u >= 1.0)):
        raise ValueError("uniform inputs must lie in [0, 1)")
    if not 1 <= j <= d - 2:
        raise ValueError(f"angle axis must be in 1..{d - 2}, got {j}")
    if j == d - 2:
        return 2.0 * math.pi * u
    grid, cdf, k, norm = _cdf_table(d, j)
    idx = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, CDF_NODES - 2)
    base_phi, base_cdf = grid[idx], cdf[idx]
    lo, hi = grid[idx].copy(), grid[idx + 1].copy()
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        residual = _cdf_from_node(mid, base_phi, base_cdf, k, norm) - u
        if np.all(np.abs(residual) <= CDF_TOL):
            return mid
        below = residual < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def polar_inverse_cdf(j: int, u: float, d: int) -> float:
    """Angle phi_j with CDF_j(phi_j) = u, for u in [0, 1).

    Axes 1..d-3 are inverted by bisection against the tabulated sine-power
    CDF to within 1e-10; the final axis j = d-2 is simply 2*pi*u.
    """
    return float(inverse_cdf_batch(j, np.array([u]), d)[0])


def polar_to_cartesian(angles: np.ndarray) -> np.ndarray:
    """Unit vector of R^(d-1) from d-2 polar angles."""
    return polar_to_cartesian_batch(np.asarray(angles, dtype=np.float64)[None, :])[0]


def polar_to_cartesian_batch(angles: np.ndarray) -> np.ndarray:
    """Row-wise polar-to-Cartesian map: (n, d-2) angles -> (n, d-1) unit vectors."""
    n, n_angles = angles.shape
    out = np.empty((n, n_angles + 1))
    sin_running = np.ones(n)
    for i in range(n_angles):
        out[:, i] = sin_running * np.cos(angles[:, i])
        sin_running = sin_running * np.sin(angles[:, i])
    out[:, n_angles] = sin_running
    return out
