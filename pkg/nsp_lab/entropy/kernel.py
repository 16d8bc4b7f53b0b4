"""Entropy kernel, flux kernel and the weak entropy pairs they generate.

With t = k(rho) and the Galilean variable v = u - s, the entropy kernel chi
solves chi_tt - chi_vv + (k''/k'^2) chi_t = 0 with chi = 0, chi_rho = delta at
vacuum. It satisfies the representation

    2 rho k'(t) chi(t, v) = int_0^t d(s) [chi(s, v + t - s) + chi(s, v - t + s)] ds,

and H = sigma - u chi solves H_tt - H_vv = d chi_v with zero data, so

    H(t, v) = 1/2 int_0^t d(s) [chi(s, v + t - s) - chi(s, v - t + s)] ds.

The general evaluator factors out the cone weight (t^2 - v^2)_+^lambda, starts
from the vacuum value of a1 and solves the representation level by level by
fixed-point iteration, with Gauss-Jacobi nodes along both characteristics.
"""
#  pylint: disable=too-many-locals,too-many-arguments,too-many-instance-attributes
import logging
import threading
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.special import beta, roots_jacobi

from nsp_lab import defaults
from nsp_lab.eos.functions import d2k, d3k, d_of_rho, dk, enthalpy, internal_energy, k_inverse, k_of_rho
from nsp_lab.exceptions import ConvergenceError, DomainError, NotApplicableError
from nsp_lab.utilities.fitting import fitted_constant, geometric_ratio
from nsp_lab.utilities.quadrature import gauss_legendre

LOGGER = logging.getLogger(__name__)

_GRIDS = {}
_GRID_LOCK = threading.Lock()
_PAIR_NODES = 64
_MARCH_ORDER = 16


class Coefficients(NamedTuple):
    """Expansion coefficients chi ~ a1 G_l + a2 G_(l+1), sigma - u chi ~ -v (b1 G_l + b2 G_(l+1))."""

    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray


def _m_lambda(lam):
    """M_lambda and int_{-1}^{1} (1 - z^2)^lambda dz = B(1/2, lambda + 1)."""
    integral = float(beta(0.5, lam + 1.0))
    return np.sqrt(2.0 * lam + 1.0) / (2.0 * lam * integral), integral


class KernelExpansion:
    """Low-density expansion of the entropy and flux kernels of a pressure law.

    >>> from nsp_lab.eos.laws import Polytropic
    >>> expansion = KernelExpansion(Polytropic(kappa=1.0, gamma=2.0))
    >>> round(expansion.M * np.pi / (2.0 * np.sqrt(2.0)), 12)
    1.0
    """

    def __init__(self, law):
        """Fix lambda1 and M_lambda1 for ``law``."""
        self.law = law
        self.lam = law.lambda1
        self.M, self.J = _m_lambda(self.lam)

    @property
    def _vacuum_scale(self):
        law = self.law
        return 2.0 * np.sqrt(law.kappa1 * law.gamma1) / (law.gamma1 - 1.0)

    @property
    def mass_factor(self):
        """Low-density limit of int chi dv / rho for the M-normalized kernel."""
        return self._vacuum_scale ** (self.lam + 0.5) / (1.0 - self.law.theta1)

    @property
    def vacuum_a1(self):
        """Limit of a1 at vacuum, M c^(-lambda-1/2) theta1^(-1/2) with k ~ c rho^theta1."""
        return self.M * self._vacuum_scale ** (-self.lam - 0.5) / np.sqrt(self.law.theta1)

    def G(self, rho, v, power=None):
        """G_power(rho, v) = [k(rho)^2 - v^2]_+^power."""
        power = self.lam if power is None else power
        k = k_of_rho(self.law, rho)
        return np.clip(k**2 - np.asarray(v, dtype=float) ** 2, 0.0, None) ** power

    def _logs(self, rho):
        k = k_of_rho(self.law, rho)
        k1 = dk(self.law, rho)
        k2 = d2k(self.law, rho)
        k3 = d3k(self.law, rho)
        return k, k1, k2, k3

    def a1(self, rho):
        """a1 = M k^-lambda k'^(-1/2)."""
        rho = np.asarray(rho, dtype=float)
        return self.M * k_of_rho(self.law, rho) ** (-self.lam) * dk(self.law, rho) ** -0.5

    def b1(self, rho):
        """b1 = M rho k^(-lambda-1) k'^(1/2)."""
        rho = np.asarray(rho, dtype=float)
        return self.M * rho * k_of_rho(self.law, rho) ** (-self.lam - 1.0) * dk(self.law, rho) ** 0.5

    def _a1_second(self, rho):
        k, k1, k2, k3 = self._logs(rho)
        lam = self.lam
        first = -lam * k1 / k - 0.5 * k2 / k1
        second = -lam * (k2 / k - (k1 / k) ** 2) - 0.5 * (k3 / k1 - (k2 / k1) ** 2)
        return self.a1(rho) * (first**2 + second)

    def _b1_second(self, rho):
        k, k1, k2, k3 = self._logs(rho)
        lam = self.lam
        first = 1.0 / rho - (lam + 1.0) * k1 / k + 0.5 * k2 / k1
        second = -1.0 / rho**2 - (lam + 1.0) * (k2 / k - (k1 / k) ** 2) + 0.5 * (k3 / k1 - (k2 / k1) ** 2)
        return self.b1(rho) * (first**2 + second)

    def _integral(self, integrand, rho):
        """int_0^rho integrand, in log rho, with a power-law head below the table floor."""
        floor = defaults.TABLE_RHO_MIN * 10.0
        if rho <= floor:
            return 0.0

        def _logvar(s):
            y = np.exp(s)
            return float(integrand(y)) * y

        value, _ = quad(_logvar, np.log(floor), np.log(rho), epsabs=0.0, epsrel=1e-10, limit=400)
        f0, f1 = float(integrand(floor)), float(integrand(2.0 * floor))
        if f0 != 0.0 and f1 / f0 > 0.0:
            power = np.log(f1 / f0) / np.log(2.0)
            if power > -1.0:
                value += f0 * floor / (power + 1.0)
        return value

    def coefficients(self, rho):
        """a1, a2, b1, b2 at ``rho`` (> 0); a2 = b2 = 0 for a single power law."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        if np.any(rho <= 0.0):
            raise DomainError("rho must be > 0")
        a1, b1 = self.a1(rho), self.b1(rho)
        if self.law.is_polytropic:
            return Coefficients(a1, np.zeros_like(rho), b1, np.zeros_like(rho))
        lam = self.lam
        c = 1.0 / (4.0 * (lam + 1.0))
        law = self.law

        def _ia(y):
            return k_of_rho(law, y) ** lam * dk(law, y) ** -0.5 * self._a1_second(y)

        def _ib(y):
            return k_of_rho(law, y) ** (lam + 1.0) * dk(law, y) ** -0.5 * self._b1_second(y)

        def _ic(y):
            return y * k_of_rho(law, y) ** lam * dk(law, y) ** 0.5 * self._a1_second(y)

        a2 = np.empty_like(rho)
        b2 = np.empty_like(rho)
        for index, value in enumerate(rho):
            k, k1 = float(k_of_rho(law, value)), float(dk(law, value))
            ia, ib, ic = self._integral(_ia, value), self._integral(_ib, value), self._integral(_ic, value)
            a2[index] = -c * k ** (-lam - 1.0) * k1**-0.5 * ia
            b2[index] = (
                -c * value * k1**0.5 * k ** (-lam - 2.0) * ia
                - c * k ** (-lam - 2.0) * k1**-0.5 * ib
                + c * k ** (-lam - 2.0) * k1**-0.5 * ic
            )
        return Coefficients(a1, a2, b1, b2)

    def D(self, rho):
        """D = a1 b1 - 2 k^2 (a1 b2 - a2 b1) from the coefficients."""
        coeff = self.coefficients(rho)
        k = k_of_rho(self.law, np.atleast_1d(rho))
        return coeff.a1 * coeff.b1 - 2.0 * k**2 * (coeff.a1 * coeff.b2 - coeff.a2 * coeff.b1)

    def D_closed(self, rho):
        """D = M^2 d k^(-2 lambda) / (2 (lambda + 1) k')."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        return (
            self.M**2
            * d_of_rho(self.law, rho)
            * k_of_rho(self.law, rho) ** (-2.0 * self.lam)
            / (2.0 * (self.lam + 1.0) * dk(self.law, rho))
        )


def chi_closed_form(law, rho, v):
    """chi = a1 [k^2 - v^2]_+^lambda for a single power law.

    >>> from nsp_lab.eos.laws import Polytropic
    >>> round(float(chi_closed_form(Polytropic(kappa=1.0, gamma=2.0), 1.0, 0.0)) * np.pi, 12)
    4.0
    """
    if not law.is_polytropic:
        raise NotApplicableError("closed-form kernel needs a polytropic law")
    expansion = KernelExpansion(law)
    rho, v = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(v, dtype=float))
    out = np.zeros(rho.shape)
    positive = rho > 0.0
    out[positive] = expansion.a1(rho[positive]) * expansion.G(rho[positive], v[positive])
    return out


def sigma_closed_form(law, rho, v):
    """sigma - u chi = -theta v chi for a single power law."""
    return -law.theta1 * np.asarray(v, dtype=float) * chi_closed_form(law, rho, v)


class _Stencil(NamedTuple):
    """Quadrature points of one characteristic into a level: rows, row fractions, scaled nodes, weights."""

    lower: np.ndarray
    frac: np.ndarray
    xi: np.ndarray
    weight: np.ndarray


def _sample(table, rows, xi):
    """Linear interpolation of table[row] at scaled positions xi in [-1, 1]; zero outside."""
    nodes = table.shape[1]
    inside = np.abs(xi) <= 1.0
    position = np.clip((xi + 1.0) * 0.5 * (nodes - 1), 0.0, nodes - 1.0)
    lower = np.minimum(np.floor(position).astype(int), nodes - 2)
    frac = position - lower
    values = table[rows, lower] * (1.0 - frac) + table[rows, lower + 1] * frac
    return np.where(inside, values, 0.0)


class KernelGrid:
    """chi and sigma - u chi on levels uniform in t = k(rho) and scaled nodes xi = v/t.

    ``phi`` holds chi / (t^2 - v^2)^lambda and ``hs`` holds
    (sigma - u chi) / (t (t^2 - v^2)^lambda); both stay bounded up to the
    cone edge. ``chi`` and ``h`` are the kernels themselves on the same nodes.
    """

    def __init__(self, law, rho_max, levels, nodes, tol=None, max_iters=None):
        """March the representation formulas up to t = k(rho_max).

        Raises:
            ConvergenceError: A level did not settle below ``tol`` within ``max_iters`` sweeps.
        """
        self.law = law
        self.rho_max = float(rho_max)
        self.levels = int(levels)
        self.nodes = int(nodes)
        if self.rho_max <= 0.0 or self.levels < 1 or self.nodes < 2:
            raise DomainError("kernel grid needs rho_max > 0, levels >= 1 and nodes >= 2")
        self.tol = defaults.KERNEL_TOL if tol is None else float(tol)
        self.max_iters = defaults.KERNEL_MAX_ITERS if max_iters is None else int(max_iters)
        self.expansion = KernelExpansion(law)
        lam = self.expansion.lam
        self.t_max = float(k_of_rho(law, rho_max))
        self.dt = self.t_max / self.levels
        self.t = self.dt * np.arange(self.levels + 1)
        self.rho = k_inverse(law, self.t)
        self.xi = np.linspace(-1.0, 1.0, self.nodes)
        nodes_x, self._weights = roots_jacobi(_MARCH_ORDER, 0.0, lam)
        self._fraction = 0.5 * (1.0 + nodes_x)
        self.phi = np.zeros((self.levels + 1, self.nodes))
        self.hs = np.zeros_like(self.phi)
        self.phi[0] = self.expansion.vacuum_a1
        self.hs[0] = -law.theta1 * self.expansion.vacuum_a1 * self.xi
        self.iterations = np.zeros(self.levels + 1, dtype=int)
        self.ratio = 0.0
        self._march()
        cone = np.clip(1.0 - self.xi**2, 0.0, None) ** lam
        self.chi = self.phi * self.t[:, None] ** (2.0 * lam) * cone
        self.h = self.hs * self.t[:, None] ** (2.0 * lam + 1.0) * cone
        self.seed_mismatch = self._confirm()
        LOGGER.info(
            "Kernel grid for %s: %d levels x %d nodes to rho=%.4g, %d sweeps, expansion gap %.3e",
            law.kind,
            self.levels,
            self.nodes,
            self.rho_max,
            int(self.iterations.sum()),
            self.seed_mismatch,
        )

    def _stencil(self, level, sign):
        t = self.t[level]
        xi = self.xi[:, None]
        fraction = self._fraction[None, :]
        if sign > 0:
            scaled = 0.5 * (1.0 + xi) + 0.5 * (1.0 - xi) * fraction
            target = (xi + 1.0 - scaled) / scaled
        else:
            scaled = 0.5 * (1.0 - xi) + 0.5 * (1.0 + xi) * fraction
            target = (xi - 1.0 + scaled) / scaled
        s = scaled * t
        position = s / self.dt
        lower = np.minimum(np.floor(position).astype(int), level - 1)
        d = d_of_rho(self.law, k_inverse(self.law, s))
        return _Stencil(lower, position - lower, np.clip(target, -1.0, 1.0), self._weights[None, :] * d)

    def _sum(self, stencil):
        below = _sample(self.phi, stencil.lower, stencil.xi)
        above = _sample(self.phi, stencil.lower + 1, stencil.xi)
        return (stencil.weight * ((1.0 - stencil.frac) * below + stencil.frac * above)).sum(axis=1)

    def _march(self):
        scale = 2.0 ** (-self.expansion.lam - 2.0)
        left, right = 1.0 - self.xi, 1.0 + self.xi
        for level in range(1, self.levels + 1):
            plus, minus = self._stencil(level, 1.0), self._stencil(level, -1.0)
            factor = scale * self.t[level] / (2.0 * float(np.sqrt(self.law.dpressure(self.rho[level]))))
            # start from the power law with the local k and k'
            self.phi[level] = self.expansion.a1(self.rho[level])
            deltas = []
            for _ in range(self.max_iters):
                update = factor * (left * self._sum(plus) + right * self._sum(minus))
                delta = float(np.max(np.abs(update - self.phi[level])))
                self.phi[level] = update
                deltas.append(delta)
                if not np.isfinite(delta):
                    raise ConvergenceError(f"kernel level {level} produced non-finite values", deltas=deltas)
                if delta <= self.tol * max(float(np.max(np.abs(update))), 1e-300):
                    break
            else:
                raise ConvergenceError(
                    f"kernel level {level} stalled at delta={deltas[-1]:.3e} after {self.max_iters} sweeps",
                    deltas=deltas,
                    ratio=geometric_ratio(deltas),
                )
            self.iterations[level] = len(deltas)
            self.ratio = max(self.ratio, geometric_ratio(deltas))
            self.hs[level] = 0.5 * scale * (left * self._sum(plus) - right * self._sum(minus))
            LOGGER.debug("Kernel level %d: %d sweeps, last delta %.3e", level, len(deltas), deltas[-1])

    def _confirm(self):
        """Relative gap between the first marched level and the expansion a1 + a2 t^2 (1 - xi^2)."""
        coefficients = self.expansion.coefficients(self.rho[1])
        a1, a2 = float(coefficients.a1[0]), float(coefficients.a2[0])
        expected = a1 + a2 * self.t[1] ** 2 * (1.0 - self.xi**2)
        return float(np.max(np.abs(self.phi[1] - expected))) / max(abs(a1), 1e-300)

    def _levels(self, rho):
        """t = k(rho) after checking the grid range."""
        if np.any(rho < 0.0):
            raise DomainError("rho must be >= 0")
        if np.any(rho > self.rho_max * (1.0 + 1e-12)):
            raise DomainError(f"rho exceeds the kernel grid range {self.rho_max:.6g}")
        return k_of_rho(self.law, rho)

    def _smooth(self, table, t, xi):
        """Bilinear interpolation of a smooth factor table at (t, xi)."""
        position = np.clip(t / self.dt, 0.0, float(self.levels))
        lower = np.minimum(np.floor(position).astype(int), self.levels - 1)
        frac = position - lower
        return (1.0 - frac) * _sample(table, lower, xi) + frac * _sample(table, lower + 1, xi)

    def _evaluate(self, table, power, rho, v):
        rho, v = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(v, dtype=float))
        t = self._levels(rho)
        xi = np.where(t > 0.0, v / np.where(t > 0.0, t, 1.0), 2.0)
        cone = np.clip(1.0 - xi**2, 0.0, None) ** self.expansion.lam
        return np.where(t > 0.0, self._smooth(table, t, xi) * t**power * cone, 0.0)

    def phi_at(self, rho, xi):
        """chi / (k^2 - v^2)^lambda at (rho, v = xi k) for |xi| <= 1."""
        rho, xi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(xi, dtype=float))
        return self._smooth(self.phi, self._levels(rho), xi)

    def chi_at(self, rho, v):
        """chi(rho, v)."""
        return self._evaluate(self.phi, 2.0 * self.expansion.lam, rho, v)

    def h_at(self, rho, v):
        """(sigma - u chi)(rho, v)."""
        return self._evaluate(self.hs, 2.0 * self.expansion.lam + 1.0, rho, v)


def kernel_grid(law, rho_max, levels=None, nodes=None, tol=None, max_iters=None):
    """Shared, lazily built kernel grid (thread safe)."""
    levels = defaults.KERNEL_LEVELS if levels is None else int(levels)
    nodes = defaults.KERNEL_NODES if nodes is None else int(nodes)
    key = (law, float(rho_max), levels, nodes, tol, max_iters)
    grid = _GRIDS.get(key)
    if grid is None:
        with _GRID_LOCK:
            grid = _GRIDS.get(key)
            if grid is None:
                grid = KernelGrid(law, rho_max, levels, nodes, tol=tol, max_iters=max_iters)
                _GRIDS[key] = grid
    return grid


def _grid_for(law, rho, resolution, rho_max):
    rho_max = float(np.max(rho)) if rho_max is None else rho_max
    if rho_max <= 0.0:
        return None
    levels, nodes = (None, None) if resolution is None else resolution
    return kernel_grid(law, rho_max, levels, nodes)


def chi_general(law, rho, v, resolution=None, rho_max=None):
    """chi(rho, v) from the marched representation formula, for any admissible law.

    Args:
        law (PressureLaw): Pressure law.
        rho (float or ndarray): Density, >= 0.
        v (float or ndarray): Galilean variable u - s.
        resolution (tuple, optional): (levels, nodes) of the grid.
        rho_max (float, optional): Grid range; defaults to the largest queried density.
    """
    grid = _grid_for(law, rho, resolution, rho_max)
    if grid is None:
        return np.zeros(np.broadcast(np.asarray(rho), np.asarray(v)).shape)
    return grid.chi_at(rho, v)


def sigma_minus_u_chi(law, rho, v, resolution=None, rho_max=None):
    """(sigma - u chi)(rho, v); closed form -theta v chi for a single power law."""
    if law.is_polytropic:
        return sigma_closed_form(law, rho, v)
    grid = _grid_for(law, rho, resolution, rho_max)
    if grid is None:
        return np.zeros(np.broadcast(np.asarray(rho), np.asarray(v)).shape)
    return grid.h_at(rho, v)


def kernel_mass(law, rho, resolution=None):
    """int chi(rho, v) dv / (mass_factor rho); tends to 1 at vacuum.

    The cone weight is integrated exactly by Gauss-Jacobi nodes.
    """
    rho = float(rho)
    if rho <= 0.0:
        raise DomainError("rho must be > 0")
    expansion = KernelExpansion(law)
    k = float(k_of_rho(law, rho))
    z, weights = roots_jacobi(_PAIR_NODES, expansion.lam, expansion.lam)
    if law.is_polytropic:
        phi = np.full_like(z, float(expansion.a1(rho)))
    else:
        phi = _grid_for(law, rho, resolution, None).phi_at(rho, z)
    return float(k ** (2.0 * expansion.lam + 1.0) * np.dot(weights, phi) / (expansion.mass_factor * rho))


def closed_form_deviation(law, rho, levels=None, nodes=None, rho_max=None):
    """Relative sup-norm gaps of the marched tables against the single power law closed forms.

    The outermost node on each side of the support is excluded; ``support``
    is the largest |chi| found on |v| in (k, 2k] relative to the interior scale.
    """
    if not law.is_polytropic:
        raise NotApplicableError("closed-form comparison needs a polytropic law")
    grid = kernel_grid(law, rho if rho_max is None else rho_max, levels, nodes)
    k = float(k_of_rho(law, rho))
    v = k * grid.xi[1:-1]
    exact_chi = chi_closed_form(law, rho, v)
    exact_h = sigma_closed_form(law, rho, v)
    chi_scale = max(float(np.max(np.abs(exact_chi))), 1e-300)
    h_scale = max(float(np.max(np.abs(exact_h))), 1e-300)
    outside = k * np.linspace(1.0 + 1e-3, 2.0, 64)
    outside = np.concatenate([-outside, outside])
    return {
        "rho": float(rho),
        "chi": float(np.max(np.abs(grid.chi_at(rho, v) - exact_chi))) / chi_scale,
        "flux": float(np.max(np.abs(grid.h_at(rho, v) - exact_h))) / h_scale,
        "support": float(np.max(np.abs(grid.chi_at(rho, outside)))) / chi_scale,
        "seed_mismatch": grid.seed_mismatch,
    }


class TestFunction:
    """Compactly supported test function psi, given by samples on its support."""

    __test__ = False

    def __init__(self, support, samples):
        """Store the support interval and uniformly spaced samples on it."""
        lower, upper = support
        if not upper > lower:
            raise DomainError("test function support must be a non-empty interval")
        self.support = (float(lower), float(upper))
        self.samples = np.asarray(samples, dtype=float)
        self.nodes = np.linspace(lower, upper, self.samples.size)

    @classmethod
    def bump(cls, center=0.0, radius=1.0, count=401, height=1.0):
        """Smooth bump height * exp(1 - 1/(1 - x^2)) on [center - radius, center + radius]."""
        x = np.linspace(-1.0, 1.0, count)
        with np.errstate(divide="ignore", over="ignore"):
            values = np.where(np.abs(x) < 1.0, height * np.exp(1.0 - 1.0 / (1.0 - x**2)), 0.0)
        return cls((center - radius, center + radius), values)

    @classmethod
    def zero(cls, support=(-1.0, 1.0)):
        """psi = 0."""
        return cls(support, np.zeros(3))

    def __call__(self, s):
        """psi(s), zero outside the support."""
        return np.interp(s, self.nodes, self.samples, left=0.0, right=0.0)


def weak_entropy_pair(law, psi, rho, u, resolution=None, rho_max=None):
    """Weak entropy pair generated by psi with the unit-mass kernel chi / mass_factor.

    Returns:
        tuple: (eta_psi, q_psi) arrays with the broadcast shape of (rho, u).
    """
    rho, u = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(u, dtype=float))
    if np.any(rho < 0.0):
        raise DomainError("rho must be >= 0")
    expansion = KernelExpansion(law)
    k = k_of_rho(law, rho)
    eta = np.zeros(rho.shape)
    q = np.zeros(rho.shape)
    lower, upper = psi.support
    active = (rho > 0.0) & (u + k > lower) & (u - k < upper)
    if not np.any(active):
        return eta, q
    k_a, u_a = k[active], u[active]
    if law.is_polytropic:
        z, w = roots_jacobi(_PAIR_NODES, expansion.lam, expansion.lam)
        psi_values = psi(u_a[:, None] + k_a[:, None] * z[None, :])
        scale = expansion.a1(rho[active]) * k_a ** (2.0 * expansion.lam + 1.0) / expansion.mass_factor
        eta[active] = scale * (psi_values @ w)
        q[active] = u_a * eta[active] + law.theta1 * k_a * scale * (psi_values @ (w * z))
        return eta, q
    z_lo = np.clip((lower - u_a) / k_a, -1.0, 1.0)
    z_hi = np.clip((upper - u_a) / k_a, -1.0, 1.0)
    nodes, weights = gauss_legendre(_PAIR_NODES)
    half = 0.5 * (z_hi - z_lo)[:, None]
    z = 0.5 * (z_hi + z_lo)[:, None] + half * nodes[None, :]
    s = u_a[:, None] + k_a[:, None] * z
    v = u_a[:, None] - s
    rho_rep = np.repeat(rho[active][:, None], _PAIR_NODES, axis=1)
    chi = chi_general(law, rho_rep, v, resolution=resolution, rho_max=rho_max or float(np.max(rho)))
    h = sigma_minus_u_chi(law, rho_rep, v, resolution=resolution, rho_max=rho_max or float(np.max(rho)))
    psi_values = psi(s)
    factor = k_a[:, None] * half * weights[None, :] / expansion.mass_factor
    eta[active] = (factor * psi_values * chi).sum(axis=1)
    q[active] = u_a * eta[active] + (factor * psi_values * h).sum(axis=1)
    return eta, q


def mechanical_pair(law, rho, m):
    """Mechanical energy pair eta* = m^2/(2 rho) + rho e, q* = m^3/(2 rho^2) + m (e + P/rho).

    >>> from nsp_lab.eos.laws import Polytropic
    >>> eta, _ = mechanical_pair(Polytropic(kappa=1.0, gamma=2.0), 1.0, 2.0)
    >>> float(eta)
    3.0
    """

    rho, m = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(m, dtype=float))
    if np.any(rho < 0.0):
        raise DomainError("rho must be >= 0")
    safe = np.where(rho > 0.0, rho, 1.0)
    eta = np.where(rho > 0.0, 0.5 * m**2 / safe + rho * internal_energy(law, rho), 0.0)
    q = np.where(rho > 0.0, 0.5 * m**3 / safe**2 + m * enthalpy(law, rho), 0.0)
    return eta, q


def mechanical_hessian(law, rho, m):
    """Hessian of eta* in (rho, m), shape (..., 2, 2); its determinant is P'/rho^2."""
    rho, m = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(m, dtype=float))
    if np.any(rho <= 0.0):
        raise DomainError("rho must be > 0")
    hessian = np.empty(rho.shape + (2, 2))
    hessian[..., 0, 0] = m**2 / rho**3 + law.dpressure(rho) / rho
    hessian[..., 0, 1] = hessian[..., 1, 0] = -m / rho**2
    hessian[..., 1, 1] = 1.0 / rho
    return hessian


def entropy_equation_residual(law, psi, rho, u, step=1e-3, resolution=None):
    """Relative residual of eta_rhorho - (P'/rho^2) eta_uu for the psi pair by central differences."""
    rho = float(rho)
    u = float(u)
    dr = step * rho
    du = step * max(float(k_of_rho(law, rho)), 1.0)
    stencil_rho = np.array([rho - dr, rho, rho + dr, rho, rho])
    stencil_u = np.array([u, u, u, u - du, u + du])
    eta, _ = weak_entropy_pair(law, psi, stencil_rho, stencil_u, resolution=resolution, rho_max=rho + dr)
    eta_rr = (eta[0] - 2.0 * eta[1] + eta[2]) / dr**2
    eta_uu = (eta[3] - 2.0 * eta[1] + eta[4]) / du**2
    residual = eta_rr - law.dpressure(rho) / rho**2 * eta_uu
    return float(abs(residual) / max(abs(eta_rr), abs(law.dpressure(rho) / rho**2 * eta_uu), 1e-300))


def kernel_growth(law, rho_low, rho_high, count=9, resolution=None):
    """Fitted constants of sup_v chi <= C rho and sup_v |sigma - u chi| <= C rho^(1 + theta2) on [rho_low, rho_high]."""
    rho = np.logspace(np.log10(rho_low), np.log10(rho_high), count)
    xi = np.linspace(-1.0, 1.0, 201)
    k = k_of_rho(law, rho)
    v = k[:, None] * xi[None, :]
    rho_rep = np.repeat(rho[:, None], xi.size, axis=1)
    if law.is_polytropic:
        chi = chi_closed_form(law, rho_rep, v)
    else:
        chi = chi_general(law, rho_rep, v, resolution=resolution, rho_max=rho_high)
    h = sigma_minus_u_chi(law, rho_rep, v, resolution=resolution, rho_max=rho_high)
    return {
        "chi": fitted_constant(np.max(np.abs(chi), axis=1), rho),
        "sigma_minus_u_chi": fitted_constant(np.max(np.abs(h), axis=1), rho ** (1.0 + law.theta2)),
    }
