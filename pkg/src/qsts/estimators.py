"""Parameter estimators for band-limited densities and their design matrices.

The averaged observable Pi_bar of a blocked measurement has mean
m^{1/2} W F^{-1} theta, which makes theta estimable by orthogonality
(preliminary estimator) or by weighted least squares with the inverse
variance weights Delta(theta)^{-1} (improved estimator).  Both reproduce
theta exactly when fed the analytic mean.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionError,
    NonConvergence,
    NotAdmissible,
    RangeError,
    SingularSystem,
)
from .measurement import w_vector
from .spectral import (
    RealParam,
    ParameterSpace,
    SpectralDensity,
    TWO_PI,
    fourier_frequencies,
    psi_basis,
)

_QUAD_GRID = 4096


class DesignMatrices(NamedTuple):
    """W (m x (2d+1), orthonormal columns), F and Delta (diagonals)."""

    W: np.ndarray
    F: np.ndarray
    Delta: np.ndarray


def _w_matrix(m: int, d: int) -> np.ndarray:
    if m % 2 == 0:
        raise DimensionError("design needs odd m")
    if 2 * d + 1 > m:
        raise DimensionError(f"2d+1 = {2 * d + 1} exceeds m = {m}")
    return np.column_stack([w_vector(j, m) for j in range(-d, d + 1)])


def _f_diagonal(m: int, d: int) -> np.ndarray:
    js = np.arange(-d, d + 1)
    return m / (m - np.abs(js))


def theta_density_values(theta: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """a_theta(w) = sum_j theta_j psi_j(w) for theta indexed -d..d."""
    theta = np.asarray(theta, dtype=float)
    d = (theta.size - 1) // 2
    out = np.zeros_like(np.asarray(omega, dtype=float))
    for j in range(-d, d + 1):
        out = out + theta[j + d] * psi_basis(j, omega)
    return out


def design_matrices(m: int, d: int, theta: np.ndarray) -> DesignMatrices:
    """Design matrices at block size m for a parameter theta.

    Delta is the diagonal a_theta^2(w_{j,m}) - 1 over the Fourier
    frequencies; every entry must be positive or the parameter is
    inadmissible.
    """
    W = _w_matrix(m, d)
    F = _f_diagonal(m, d)
    vals = theta_density_values(theta, fourier_frequencies(m))
    Delta = vals ** 2 - 1.0
    if np.any(Delta <= 0.0):
        raise NotAdmissible("a_theta^2 - 1 must be positive at all frequencies")
    return DesignMatrices(W, F, Delta)


def preliminary_estimator(pi_bar: np.ndarray, m: int, d: int) -> np.ndarray:
    """theta_hat = m^{-1/2} F W' pi_bar."""
    pi_bar = np.asarray(pi_bar, dtype=float).reshape(-1)
    if pi_bar.size != m:
        raise DimensionError(f"pi_bar must have length m = {m}")
    W = _w_matrix(m, d)
    F = _f_diagonal(m, d)
    return F * (W.T @ pi_bar) / math.sqrt(m)


def weighted_estimator(pi_bar: np.ndarray, delta: np.ndarray,
                       m: int, d: int) -> np.ndarray:
    """m^{-1/2} F (W' D^{-1} W)^{-1} W' D^{-1} pi_bar for a given diagonal D.

    Scale invariant in D by construction (the weights enter both the normal
    matrix and the right-hand side); the small system is solved, never
    inverted, and a condition number beyond 1e12 is refused.
    """
    pi_bar = np.asarray(pi_bar, dtype=float).reshape(-1)
    delta = np.asarray(delta, dtype=float).reshape(-1)
    if pi_bar.size != m or delta.size != m:
        raise DimensionError(f"pi_bar and delta must have length m = {m}")
    W = _w_matrix(m, d)
    F = _f_diagonal(m, d)
    Winv = W / delta[:, None]
    G = W.T @ Winv                       # W' Delta^{-1} W, symmetric PD
    if np.linalg.cond(G) > 1e12:
        raise SingularSystem("weighted normal equations are too ill-conditioned")
    sol = np.linalg.solve(G, Winv.T @ pi_bar)
    return F * sol / math.sqrt(m)


def improved_estimator(pi_bar: np.ndarray, theta_bar: np.ndarray,
                       m: int, d: int) -> np.ndarray:
    """One-step weighted estimator with D = Delta(theta_bar),

    theta_tilde = m^{-1/2} F (W' D^{-1} W)^{-1} W' D^{-1} pi_bar.
    """
    _, _, Delta = design_matrices(m, d, theta_bar)
    return weighted_estimator(pi_bar, Delta, m, d)


def exact_pi_bar_mean(theta: np.ndarray, m: int) -> np.ndarray:
    """Analytic mean of the averaged observable, m^{1/2} W F^{-1} theta."""
    theta = np.asarray(theta, dtype=float)
    d = (theta.size - 1) // 2
    W = _w_matrix(m, d)
    F = _f_diagonal(m, d)
    return math.sqrt(m) * (W @ (theta / F))


def _project_polyhedron(x: np.ndarray, C: np.ndarray, b: float) -> np.ndarray:
    """Exact Euclidean projection onto {v : C v >= b} (least distance).

    Solved through the Lawson-Hanson reduction to nonnegative least
    squares: minimize ||u|| s.t. C u >= b - C x, then v = x + u.  The
    active-set NNLS terminates finitely, so the projection is exact up to
    rounding.
    """
    from scipy.optimize import nnls

    gaps = b - C @ x
    if np.all(gaps <= 0.0):
        return x.copy()
    n = x.size
    E = np.vstack([C.T, gaps[None, :]])
    f = np.zeros(n + 1)
    f[n] = 1.0
    z, _ = nnls(E, f)
    r = E @ z - f
    if abs(r[n]) < 1e-14:
        raise NonConvergence("half-space family is numerically infeasible")
    return x + (-r[:n] / r[n])


def project_theta(theta_hat: np.ndarray, space: ParameterSpace,
                  tol: float = 1e-10, max_sweeps: int = 10_000,
                  grid_size: int = 512) -> np.ndarray:
    """Euclidean projection onto the admissible parameter set by Dykstra.

    The set is {||theta||^2 <= M} intersected with the half-space family
    a_theta(w_g) >= 1 + 1/M over a uniform frequency grid.  Dykstra
    alternates between the ball and the family with the usual correction
    vectors; each sweep projects onto the whole family at once (exact
    least-distance solve), which avoids the slow ping-pong between nearly
    parallel neighboring half-spaces.  Feasible input is returned unchanged.
    """
    if space.kind != "theta2prime":
        raise RangeError("projection is defined for theta2prime spaces")
    x = np.asarray(theta_hat, dtype=float).reshape(-1).copy()
    d = (x.size - 1) // 2
    radius = math.sqrt(space.M)
    floor = 1.0 + 1.0 / space.M

    omegas = -math.pi + TWO_PI * np.arange(grid_size) / grid_size
    C = np.column_stack([psi_basis(j, omegas) for j in range(-d, d + 1)])
    row_norms = np.sqrt(np.sum(C * C, axis=1))

    def violation(v: np.ndarray) -> float:
        worst = max(0.0, float(np.linalg.norm(v)) - radius)
        gaps = (floor - C @ v) / row_norms
        return max(worst, float(np.max(gaps, initial=0.0)))

    if violation(x) <= tol:
        return x

    p_ball = np.zeros_like(x)
    p_poly = np.zeros_like(x)
    for _ in range(max_sweeps):
        x_prev = x.copy()
        y = x + p_ball
        nrm = float(np.linalg.norm(y))
        proj = y if nrm <= radius else y * (radius / nrm)
        p_ball = y - proj
        y = proj + p_poly
        proj2 = _project_polyhedron(y, C, floor)
        p_poly = y - proj2
        x = proj2
        if max(float(np.max(np.abs(x - x_prev))), violation(x)) <= tol:
            return x
    raise NonConvergence(
        f"Dykstra projection residual {violation(x):.3g} after {max_sweeps} sweeps")


class FisherMatrices(NamedTuple):
    """Limit covariance phi0 of the plain estimator and the information phi."""

    phi0: np.ndarray
    phi: np.ndarray


def phi_matrices(theta: np.ndarray, d: int, grid: int = _QUAD_GRID) -> FisherMatrices:
    """Limit matrices of the estimators,

    phi0_jk = (1/2 pi) int (a_theta^2 - 1) psi_j psi_k dw,
    phi_jk  = (1/2 pi) int (a_theta^2 - 1)^{-1} psi_j psi_k dw,

    by periodic trapezoid quadrature on ``grid`` points.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != 2 * d + 1:
        raise DimensionError(f"theta must have length {2 * d + 1}")
    w = -math.pi + TWO_PI * np.arange(grid) / grid
    weight = theta_density_values(theta, w) ** 2 - 1.0
    if np.any(weight <= 0.0):
        raise NotAdmissible("a_theta must stay above 1 for the phi matrices")
    psi = np.column_stack([psi_basis(j, w) for j in range(-d, d + 1)])
    phi0 = (psi * weight[:, None]).T @ psi / grid
    phi = (psi / weight[:, None]).T @ psi / grid
    phi0 = 0.5 * (phi0 + phi0.T)
    phi = 0.5 * (phi + phi.T)
    return FisherMatrices(phi0, phi)


def nonparametric_estimate(pi: np.ndarray, d_n: int):
    """Truncated-series density estimate from one full-length observable.

    theta_hat_j = (n^{1/2} / (n - |j|)) w_j' pi for |j| <= d_n and
    a_hat = sum_j theta_hat_j psi_j.  Returns (density, theta_hat).
    """
    pi = np.asarray(pi, dtype=float).reshape(-1)
    n = pi.size
    if n % 2 == 0:
        raise DimensionError("observable vector must have odd length")
    if d_n > math.sqrt(n) / 2.0:
        raise DimensionError(f"bandwidth d_n = {d_n} exceeds sqrt(n)/2")
    theta = np.empty(2 * d_n + 1)
    for j in range(-d_n, d_n + 1):
        theta[j + d_n] = math.sqrt(n) / (n - abs(j)) * float(w_vector(j, n) @ pi)
    density = RealParam(d_n, theta).to_density(label="nonparametric")
    return density, theta
