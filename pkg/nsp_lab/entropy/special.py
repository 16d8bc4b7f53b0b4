"""Special entropy pair glued from plus/minus mechanical energy across the characteristic cone.

Inside |u| < k(rho) the entropy solves a Goursat problem. In the coordinates
alpha = (k + u)/2 and beta = (k - u)/2 the entropy equation reads

    eta_ab + kern(alpha + beta) (eta_a + eta_b) = 0,    kern = k''/(2 k'^2) at rho = k^-1(alpha + beta),

and V1 = eta_a/2, V2 = eta_b/2 satisfy the characteristic integral equations

    V1(a, b) = B(a) - int_0^b kern(a + s) (V1 + V2)(a, s) ds,    V2(a, b) = -V1(b, a),

with B(a) = d/da [1/2 rho k^2 + rho e] / 2 on the characteristic u = k(rho).
The grid is uniform in (alpha, beta), so both characteristic integrals are
cumulative trapezoid sums along grid lines.
"""
#  pylint: disable=too-many-locals,too-many-instance-attributes
import logging
from typing import Dict, List, NamedTuple

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy.interpolate import RegularGridInterpolator

from nsp_lab import defaults
from nsp_lab.eos.bounds import resolve_thresholds
from nsp_lab.eos.functions import enthalpy, internal_energy, k_inverse, k_of_rho
from nsp_lab.exceptions import ConvergenceError, DomainError, OutsideRegionError
from nsp_lab.utilities.fitting import fitted_constant, geometric_ratio
from nsp_lab.utilities.quadrature import cumulative_trapezoid

LOGGER = logging.getLogger(__name__)


class EntropyValues(NamedTuple):
    """Special entropy with its derivatives in the conservative variables (rho, m)."""

    eta: np.ndarray
    eta_rho: np.ndarray
    eta_m: np.ndarray


class GoursatResiduals(BaseModel):
    """Discrete residuals of the Goursat field on cells with k >= K/4."""

    resolution: int
    entropy: float
    flux_plus: float
    flux_minus: float
    interface_first_derivative: float


def characteristics_through(law, rho, u):
    """Feet (rho1, u1), (rho2, u2) of the two characteristics through (rho, u) on u = +k and u = -k.

    >>> from nsp_lab.eos.laws import Polytropic
    >>> (rho1, _), _ = characteristics_through(Polytropic(kappa=1.0, gamma=2.0), 1.0, np.sqrt(2.0))
    >>> round(float(rho1), 12)
    0.5625
    """
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    k = k_of_rho(law, rho)
    if np.any(np.abs(u) > k * (1.0 + 1e-14)):
        raise OutsideRegionError("|u| > k(rho): the point lies outside the characteristic region")
    alpha = np.clip(0.5 * (k + u), 0.0, None)
    beta = np.clip(0.5 * (k - u), 0.0, None)
    return (k_inverse(law, alpha), alpha), (k_inverse(law, beta), -beta)


def _mechanical(law, rho, u):
    """Exterior entropy data for u >= k(rho): (eta, eta_rho|u, eta_u, q)."""
    e = internal_energy(law, rho)
    w = enthalpy(law, rho)
    eta = 0.5 * rho * u**2 + rho * e
    eta_rho_u = 0.5 * u**2 + w
    eta_u = rho * u
    q = 0.5 * rho * np.abs(u) ** 3 + rho * np.abs(u) * w
    return eta, eta_rho_u, eta_u, q


class GoursatField:
    """Special entropy tabulated on the characteristic square 0 <= alpha, beta <= K = k(rho_max).

    Only the triangle alpha + beta <= K is physical; the rest of the square is
    computed for vectorization and ignored.
    """

    def __init__(self, law, rho_max, resolution, tol, V1, deltas):
        """Reconstruct eta, its derivatives and q from the converged V1."""
        self.law = law
        self.rho_max = float(rho_max)
        self.resolution = int(resolution)
        self.tol = tol
        self.K = float(k_of_rho(law, rho_max))
        self.h = self.K / self.resolution
        self.deltas = list(deltas)
        self.iterations = len(self.deltas)
        self.ratio = geometric_ratio(self.deltas)
        size = V1.shape[0]
        index = np.arange(size)
        self.axis = self.h * index
        I, J = np.meshgrid(index, index, indexing="ij")
        self.levels = I + J
        self.triangle = self.levels <= self.resolution
        level_k = self.h * np.arange(2 * size - 1)
        self.level_rho = k_inverse(law, level_k)
        self.level_dk = np.zeros_like(level_k)
        self.level_dk[1:] = np.sqrt(law.dpressure(self.level_rho[1:])) / self.level_rho[1:]
        self.rho = self.level_rho[self.levels]
        self.u = self.h * (I - J)
        self.V1 = V1
        self.V2 = -V1.T
        total = self.V1 + self.V2
        dk = self.level_dk[self.levels]
        c = self.rho * dk
        self.eta_u = self.V1 - self.V2
        self.eta_rho_u = np.where(self.levels > 0, dk * total, 0.0)
        self.eta = self._along_diagonals(total, self._boundary_eta())
        self.q = self._along_diagonals(self.u * total + c * self.eta_u, self._boundary_q(), odd=False)
        with np.errstate(divide="ignore", invalid="ignore"):
            self.eta_m = np.where(self.rho > 0.0, self.eta_u / self.rho, 0.0)
        self.eta_rho = self.eta_rho_u - self.u * self.eta_m
        self._interpolators = {}

    def _boundary_eta(self):
        rho = self.level_rho[: self.V1.shape[0]]
        return _mechanical(self.law, rho, self.axis)[0]

    def _boundary_q(self):
        rho = self.level_rho[: self.V1.shape[0]]
        return _mechanical(self.law, rho, self.axis)[3]

    def _along_diagonals(self, slope, start, odd=True):
        """Integrate d/dk along lines of constant u from the characteristic u = k (step dk = 2h)."""
        size = slope.shape[0]
        out = np.zeros_like(slope)
        for shift in range(size):
            rows = np.arange(shift, size)
            cols = rows - shift
            out[rows, cols] = start[shift] + cumulative_trapezoid(slope[rows, cols], 2.0 * self.h)
        upper = np.triu_indices(size, k=1)
        out[upper] = -out.T[upper] if odd else out.T[upper]
        return out

    def _interpolate(self, name, alpha, beta):
        if name not in self._interpolators:
            self._interpolators[name] = RegularGridInterpolator((self.axis, self.axis), getattr(self, name))
        points = np.stack([np.ravel(alpha), np.ravel(beta)], axis=-1)
        return self._interpolators[name](points).reshape(np.shape(alpha))

    def covers(self, rho):
        """Whether every interior query density lies inside the tabulated region."""
        return bool(np.all(np.asarray(rho) <= self.rho_max * (1.0 + 1e-12)))

    def interior(self, rho, u, names):
        """Bilinear values of the named grids at interior points."""
        if not self.covers(rho):
            raise DomainError(f"rho exceeds rho_max={self.rho_max:.6g} of the Goursat field")
        k = k_of_rho(self.law, rho)
        alpha = np.clip(0.5 * (k + u), 0.0, self.K)
        beta = np.clip(0.5 * (k - u), 0.0, self.K)
        return [self._interpolate(name, alpha, beta) for name in names]

    def to_frame(self):
        """Triangle nodes as a DataFrame (rho, u, eta, eta_rho, eta_u, q); eta_rho at fixed u."""
        mask = self.triangle
        return pd.DataFrame(
            {
                "rho": self.rho[mask],
                "u": self.u[mask],
                "eta": self.eta[mask],
                "eta_rho": self.eta_rho_u[mask],
                "eta_u": self.eta_u[mask],
                "q": self.q[mask],
            }
        )


def _boundary_data(law, level_rho, level_dk, axis):
    """B(alpha) = 1/2 rho k + 1/4 k^2/k' + (e + P/rho)/(2 k') at rho = k^-1(alpha)."""
    rho = level_rho[: axis.size]
    dk = level_dk[: axis.size]
    B = np.zeros_like(axis)
    inner = rho > 0.0
    B[inner] = (
        0.5 * rho[inner] * axis[inner]
        + 0.25 * axis[inner] ** 2 / dk[inner]
        + enthalpy(law, rho[inner]) / (2.0 * dk[inner])
    )
    return B


def solve_goursat(law, rho_max=None, resolution=None, tol=None, max_iters=None):
    """Build the special entropy by Picard iteration on the characteristic integral equations.

    Args:
        law (PressureLaw): Pressure law.
        rho_max (float, optional): Largest tabulated density; defaults to 10 rho^*.
        resolution (int, optional): Cells along each characteristic direction.
        tol (float, optional): Relative sup-norm stopping tolerance.
        max_iters (int, optional): Iteration cap.

    Returns:
        GoursatField: The converged field.

    Raises:
        ConvergenceError: The update did not fall below ``tol`` within ``max_iters``.
    """
    rho_max = 10.0 * resolve_thresholds(law)[1] if rho_max is None else rho_max
    resolution = defaults.GOURSAT_RESOLUTION if resolution is None else int(resolution)
    tol = defaults.GOURSAT_TOL if tol is None else tol
    max_iters = defaults.GOURSAT_MAX_ITERS if max_iters is None else max_iters
    if rho_max <= 0.0 or tol <= 0.0 or resolution < 2:
        raise DomainError("rho_max and tol must be positive and resolution >= 2")
    K = float(k_of_rho(law, rho_max))
    h = K / resolution
    size = resolution + 1
    level_rho = k_inverse(law, h * np.arange(2 * size - 1))
    level_dk = np.zeros_like(level_rho)
    level_dk[1:] = np.sqrt(law.dpressure(level_rho[1:])) / level_rho[1:]
    kern = np.zeros_like(level_rho)
    kern[1:] = (0.5 * law.stiffness(level_rho[1:]) - 1.0) / (2.0 * np.sqrt(law.dpressure(level_rho[1:])))
    index = np.arange(size)
    levels = index[:, None] + index[None, :]
    kern_grid = kern[levels]
    triangle = levels <= resolution
    B = _boundary_data(law, level_rho, level_dk, h * index)
    scale = max(float(np.max(np.abs(B))), 1e-300)
    # Endpoint trapezoid weight of each cell; the mirror pair (i, j), (j, i) shares a level and is solved jointly.
    weight = 0.5 * h * kern_grid
    weight[:, 0] = 0.0
    determinant = 1.0 + weight + weight.T
    diagonal = np.eye(size, dtype=bool)
    V1 = np.repeat(B[:, None], size, axis=1)
    deltas = []
    for iteration in range(max_iters):
        S = V1 - V1.T
        R = B[:, None] - cumulative_trapezoid(kern_grid * S, h, axis=1) + weight * S
        with np.errstate(divide="ignore", invalid="ignore"):
            update = (R * (1.0 + weight.T) + weight * R.T) / determinant
        update[diagonal] = R[diagonal]
        delta = float(np.max(np.abs(update - V1)[triangle]))
        if not np.isfinite(delta):
            raise ConvergenceError("Goursat iteration produced non-finite values", deltas=deltas)
        V1 = update
        deltas.append(delta)
        LOGGER.debug("Goursat iteration %d: delta=%.3e", iteration + 1, delta)
        if delta <= tol * scale:
            break
    else:
        ratio = geometric_ratio(deltas)
        raise ConvergenceError(
            f"Goursat iteration stalled at delta={deltas[-1]:.3e} after {max_iters} iterations",
            deltas=deltas,
            ratio=ratio,
        )
    field = GoursatField(law, rho_max, resolution, tol, V1, deltas)
    LOGGER.info(
        "Goursat field for %s: K=%.6g, %d iterations, contraction ratio %.3g",
        law.kind,
        K,
        field.iterations,
        field.ratio,
    )
    return field


def _split(law, rho, u):
    rho, u = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(u, dtype=float))
    if np.any(rho < 0.0):
        raise DomainError("rho must be >= 0")
    k = k_of_rho(law, rho)
    return rho, u, np.abs(u) >= k


def special_entropy(field, law, rho, u):
    """Special entropy and its (rho, m) derivatives at (rho, u).

    Outside the cone the closed form +/-(1/2 rho u^2 + rho e) is used; inside, the
    Goursat field is interpolated bilinearly in the characteristic coordinates.
    """
    rho, u, outside = _split(law, rho, u)
    eta = np.zeros(rho.shape)
    eta_rho = np.zeros(rho.shape)
    eta_m = np.zeros(rho.shape)
    if np.any(outside):
        sign = np.sign(u[outside])
        value, eta_rho_u, _, _ = _mechanical(law, rho[outside], u[outside])
        eta[outside] = sign * value
        eta_m[outside] = sign * u[outside]
        eta_rho[outside] = sign * (eta_rho_u - u[outside] ** 2)
    inside = ~outside
    if np.any(inside):
        eta[inside], eta_rho[inside], eta_m[inside] = field.interior(
            rho[inside], u[inside], ("eta", "eta_rho", "eta_m")
        )
    return EntropyValues(eta, eta_rho, eta_m)


def special_flux(field, law, rho, u):
    """Special entropy flux: 1/2 rho |u|^3 + rho |u| (e + P/rho) outside the cone, tabulated inside."""
    rho, u, outside = _split(law, rho, u)
    q = np.zeros(rho.shape)
    if np.any(outside):
        q[outside] = _mechanical(law, rho[outside], u[outside])[3]
    inside = ~outside
    if np.any(inside):
        (q[inside],) = field.interior(rho[inside], u[inside], ("q",))
    return q


def dissipation_identity(field, law, rho, u):
    """-q + rho u eta_rho + rho u^2 eta_m with eta_rho at fixed m; zero outside the cone."""
    values = special_entropy(field, law, rho, u)
    rho, u = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(u, dtype=float))
    return -special_flux(field, law, rho, u) + rho * u * values.eta_rho + rho * u**2 * values.eta_m


def goursat_residuals(field):
    """Cell-centred residuals of the entropy equation and of the flux relations.

    Cells with k < K/4 are excluded; the vacuum vertex limits the smoothness
    of the characteristic coordinates there.
    """
    h = field.h
    eta, q = field.eta, field.q
    eta_ab = (eta[1:, 1:] - eta[1:, :-1] - eta[:-1, 1:] + eta[:-1, :-1]) / h**2
    eta_a = 0.5 * (eta[1:, 1:] - eta[:-1, 1:] + eta[1:, :-1] - eta[:-1, :-1]) / h
    eta_b = 0.5 * (eta[1:, 1:] - eta[1:, :-1] + eta[:-1, 1:] - eta[:-1, :-1]) / h
    q_a = 0.5 * (q[1:, 1:] - q[:-1, 1:] + q[1:, :-1] - q[:-1, :-1]) / h
    q_b = 0.5 * (q[1:, 1:] - q[1:, :-1] + q[:-1, 1:] - q[:-1, :-1]) / h
    size = eta.shape[0] - 1
    index = np.arange(size)
    levels = index[:, None] + index[None, :] + 1
    mask = (levels <= field.resolution) & (levels >= field.resolution // 4)
    center_k = h * levels
    rho = k_inverse(field.law, center_k)
    sound = np.sqrt(field.law.dpressure(rho))
    kern = (0.5 * field.law.stiffness(rho) - 1.0) / (2.0 * sound)
    u = h * (index[:, None] - index[None, :])
    scale = max(float(np.max(np.abs(eta_a[mask]))), 1e-300)
    entropy = float(np.max(np.abs(eta_ab + kern * (eta_a + eta_b))[mask])) * h / scale
    flux_scale = max(float(np.max(np.abs(q_a[mask]))), 1e-300)
    plus = float(np.max(np.abs(q_a - (u + sound) * eta_a)[mask])) / flux_scale
    minus = float(np.max(np.abs(q_b - (u - sound) * eta_b)[mask])) / flux_scale
    rho_edge = field.level_rho[1 : field.resolution + 1]
    alpha = field.axis[1 : field.resolution + 1]
    dk = field.level_dk[1 : field.resolution + 1]
    exterior_b = (0.5 * alpha**2 + enthalpy(field.law, rho_edge)) / dk - rho_edge * alpha
    interior_b = 2.0 * field.V2[1 : field.resolution + 1, 0]
    interface = float(np.max(np.abs(interior_b - exterior_b)) / max(float(np.max(np.abs(exterior_b))), 1e-300))
    return GoursatResiduals(
        resolution=field.resolution,
        entropy=entropy,
        flux_plus=plus,
        flux_minus=minus,
        interface_first_derivative=interface,
    )


def boundary_gap(field):
    """Relative gap between the tabulated entropy on u = k and the mechanical energy there."""
    rho, u = field.rho[:, 0], field.u[:, 0]
    exact = 0.5 * rho * u**2 + rho * internal_energy(field.law, rho)
    scale = max(float(np.max(np.abs(exact))), 1e-300)
    return float(np.max(np.abs(field.eta[:, 0] - exact))) / scale


def exterior_identity(field, samples=16):
    """Largest dissipation identity value on both exterior branches |u| = 3k/2, relative to rho |u|^3 / 2."""
    law = field.law
    rho = np.geomspace(field.rho_max * 1e-3, field.rho_max, samples)
    k = k_of_rho(law, rho)
    rho = np.concatenate([rho, rho])
    u = np.concatenate([1.5 * k, -1.5 * k])
    identity = dissipation_identity(field, law, rho, u)
    scale = max(float(np.max(0.5 * rho * np.abs(u) ** 3)), 1e-300)
    return float(np.max(np.abs(identity))) / scale


def bound_constants(field) -> Dict[str, float]:
    """Fitted constants of the growth bounds of the special entropy on interior nodes."""
    law = field.law
    mask = field.triangle & (field.levels >= 1)
    rho, u = field.rho[mask], field.u[mask]
    gamma = law.gamma_of(rho)
    theta = law.theta_of(rho)
    d_alpha, d_beta = np.gradient(field.eta_m, field.h)
    dk = field.level_dk[field.levels]
    eta_m_u = 0.5 * (d_alpha - d_beta)
    eta_m_rho = dk * 0.5 * (d_alpha + d_beta)
    strict = field.triangle & (field.levels >= 1) & (np.abs(field.u) < field.h * field.levels)
    return {
        "eta": fitted_constant(field.eta[mask], rho * u**2 + rho**gamma),
        "eta_m": fitted_constant(field.eta_m[mask], np.abs(u) + rho**theta),
        "eta_m_rho": fitted_constant(eta_m_rho[mask], rho**(theta - 1.0)),
        "eta_m_u": fitted_constant(eta_m_u[mask], np.ones_like(rho)),
        "q": fitted_constant(
            field.q[strict], field.rho[strict] ** (law.gamma_of(field.rho[strict]) + law.theta_of(field.rho[strict]))
        ),
    }


class SpecialEntropyPair:
    """Special entropy pair that re-solves with a doubled rho_max when queried beyond its table."""

    def __init__(self, law, rho_max=None, resolution=None, tol=None):
        """Store the solve parameters; the field is built on first use."""
        self.law = law
        self.rho_max = 10.0 * resolve_thresholds(law)[1] if rho_max is None else rho_max
        self.resolution = resolution
        self.tol = tol
        self.field = None
        self.solves: List[float] = []

    def _ensure(self, rho, u):
        rho, u = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(u, dtype=float))
        inside = np.abs(u) < k_of_rho(self.law, rho)
        needed = float(np.max(rho[inside])) if np.any(inside) else 0.0
        while needed > self.rho_max * (1.0 + 1e-12):
            self.rho_max *= 2.0
            self.field = None
        if self.field is None:
            LOGGER.debug("Solving special entropy field up to rho_max=%.6g", self.rho_max)
            self.field = solve_goursat(self.law, self.rho_max, self.resolution, self.tol)
            self.solves.append(self.rho_max)
        return self.field

    def entropy(self, rho, u):
        """(eta, eta_rho, eta_m) at (rho, u)."""
        return special_entropy(self._ensure(rho, u), self.law, rho, u)

    def flux(self, rho, u):
        """q at (rho, u)."""
        return special_flux(self._ensure(rho, u), self.law, rho, u)
