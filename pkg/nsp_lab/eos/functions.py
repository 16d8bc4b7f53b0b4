"""Thermodynamic functions derived from a pressure law.

``k`` and ``e`` have closed forms for polytropic laws. Every other law is served
from a log-spaced table built once per law (Gauss-Legendre panels in log rho plus
a substituted head integral near vacuum) and interpolated with cubic Hermite
splines in log-log coordinates using the exact slopes.
"""
import logging
import threading

import numpy as np
import pandas as pd
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from nsp_lab import defaults
from nsp_lab.exceptions import DomainError
from nsp_lab.utilities.quadrature import gauss_legendre, log_grid

LOGGER = logging.getLogger(__name__)

_TABLES = {}
_TABLE_LOCK = threading.Lock()
_PANEL_ORDER = 8


def _array(rho):
    return np.asarray(rho, dtype=float)


def _require_nonnegative(rho, name="rho"):
    rho = _array(rho)
    if np.any(~np.isfinite(rho)) or np.any(rho < 0.0):
        raise DomainError(f"{name} must be finite and >= 0")
    return rho


def _require_positive(rho, name="rho"):
    rho = _array(rho)
    if np.any(~np.isfinite(rho)) or np.any(rho <= 0.0):
        raise DomainError(f"{name} must be finite and > 0")
    return rho


def pressure(law, rho):
    """Pressure P(rho).

    Args:
        law (PressureLaw): Pressure law.
        rho (float or ndarray): Density, >= 0.

    Returns:
        ndarray: P(rho).

    >>> from nsp_lab.eos.laws import Polytropic
    >>> float(pressure(Polytropic(kappa=1.0, gamma=2.0), 2.0))
    4.0
    """
    rho = _require_nonnegative(rho)
    return np.where(rho > 0.0, law.pressure(rho), 0.0)


def sound_speed(law, rho):
    """Sound speed c = sqrt(P'(rho)) for rho > 0."""
    return np.sqrt(law.dpressure(_require_positive(rho)))


def d_of_rho(law, rho):
    """d(rho) = 2 + rho k''/k' = 1 + rho P''/(2 P')."""
    return 1.0 + 0.5 * law.stiffness(_require_positive(rho))


def dk(law, rho):
    """k'(rho) = sqrt(P'(rho)) / rho."""
    rho = _require_positive(rho)
    return np.sqrt(law.dpressure(rho)) / rho


def d2k(law, rho):
    """k''(rho), from rho k''/k' = d - 2."""
    rho = _require_positive(rho)
    return dk(law, rho) * (d_of_rho(law, rho) - 2.0) / rho


def d3k(law, rho):
    """k'''(rho)."""
    rho = _require_positive(rho)
    g = 0.5 * law.stiffness(rho) - 1.0
    g_slope = 0.5 * law.stiffness_slope(rho)
    return dk(law, rho) / rho**2 * (g * g - g + rho * g_slope)


def k_direct(law, rho):
    """k(rho) by adaptive quadrature, split at the law's breakpoints."""
    return _direct(law, rho, _k_integrand, law.theta1)


def e_direct(law, rho):
    """e(rho) by adaptive quadrature, split at the law's breakpoints."""
    return _direct(law, rho, _e_integrand, law.gamma1 - 1.0)


def _k_integrand(law, y):
    return np.sqrt(law.dpressure(y)) / y


def _e_integrand(law, y):
    return law.pressure(y) / y**2


def _head(law, integrand, power, rho):
    """Integral over [0, rho] with the substitution y = rho * t^(1/power)."""
    if rho <= 0.0:
        return 0.0

    def _substituted(t):
        if t <= 0.0:
            return 0.0
        y = rho * t ** (1.0 / power)
        return float(integrand(law, y)) * rho / power * t ** (1.0 / power - 1.0)

    value, _ = quad(_substituted, 0.0, 1.0, epsabs=0.0, epsrel=defaults.QUAD_RTOL, limit=200)
    return value


def _segment(law, integrand, lower, upper):
    """Integral over [lower, upper] in the variable log y."""
    if upper <= lower:
        return 0.0

    def _logvar(s):
        y = np.exp(s)
        return float(integrand(law, y)) * y

    value, _ = quad(_logvar, np.log(lower), np.log(upper), epsabs=0.0, epsrel=defaults.QUAD_RTOL, limit=200)
    return value


def _direct(law, rho, integrand, power):
    rho = _require_nonnegative(rho)
    out = np.zeros(np.shape(rho))
    first, second = law.breakpoints
    for index, value in np.ndenumerate(rho):
        if value == 0.0:
            continue
        start = min(value, first)
        total = _head(law, integrand, power, start)
        total += _segment(law, integrand, start, min(value, second))
        total += _segment(law, integrand, max(start, second), value) if value > second else 0.0
        out[index] = total
    return out


class ThermoTable:
    """Tabulated k and e with Hermite interpolation and exact slopes."""

    def __init__(self, law):
        """Build the table for ``law``; see the module docstring."""
        self.law = law
        self.rho = log_grid(defaults.TABLE_RHO_MIN, defaults.TABLE_RHO_MAX, defaults.TABLE_POINTS_PER_DECADE)
        log_rho = np.log(self.rho)
        nodes, weights = gauss_legendre(_PANEL_ORDER)
        half = 0.5 * np.diff(log_rho)[:, None]
        mid = 0.5 * (log_rho[1:] + log_rho[:-1])[:, None]
        y = np.exp(mid + half * nodes)
        k_panels = (half * weights * np.sqrt(law.dpressure(y))).sum(axis=1)
        e_panels = (half * weights * law.pressure(y) / y).sum(axis=1)
        rho0 = self.rho[0]
        k_head = _head(law, _k_integrand, law.theta1, rho0)
        e_head = _head(law, _e_integrand, law.gamma1 - 1.0, rho0)
        self.k = np.concatenate([[k_head], k_head + np.cumsum(k_panels)])
        self.e = np.concatenate([[e_head], e_head + np.cumsum(e_panels)])
        k_slope = np.sqrt(law.dpressure(self.rho)) / self.k
        e_slope = law.pressure(self.rho) / (self.rho * self.e)
        self._log_k = CubicHermiteSpline(log_rho, np.log(self.k), k_slope)
        self._log_e = CubicHermiteSpline(log_rho, np.log(self.e), e_slope)
        self._inverse = CubicHermiteSpline(np.log(self.k), log_rho, 1.0 / k_slope)
        LOGGER.debug("Built thermodynamic table for %s with %d nodes", law.kind, self.rho.size)

    def _evaluate(self, spline, rho, fallback):
        rho = _array(rho)
        out = np.zeros(np.shape(rho))
        inside = (rho >= self.rho[0]) & (rho <= self.rho[-1])
        out[inside] = np.exp(spline(np.log(rho[inside])))
        outside = (rho > 0.0) & ~inside
        if np.any(outside):
            out[outside] = fallback(rho[outside])
        return out

    def k_of(self, rho):
        """Interpolated k(rho)."""
        return self._evaluate(self._log_k, rho, lambda r: k_direct(self.law, r))

    def e_of(self, rho):
        """Interpolated e(rho)."""
        return self._evaluate(self._log_e, rho, lambda r: e_direct(self.law, r))

    def k_inverse(self, value):
        """rho with k(rho) = value, Hermite guess plus Newton polish in log rho."""
        value = _array(value)
        out = np.zeros(np.shape(value))
        positive = value > 0.0
        target = value[positive]
        guess = np.exp(self._inverse(np.log(np.clip(target, self.k[0], self.k[-1]))))
        log_rho = np.log(guess)
        for _ in range(50):
            rho = np.exp(log_rho)
            residual = self.k_of(rho) - target
            step = residual / (rho * dk(self.law, rho))
            log_rho = log_rho - step
            if np.all(np.abs(residual) <= 1e-12 * np.maximum(target, 1.0)):
                break
        out[positive] = np.exp(log_rho)
        return out


def table_for(law):
    """Shared, lazily built table for ``law`` (thread safe)."""
    table = _TABLES.get(law)
    if table is None:
        with _TABLE_LOCK:
            table = _TABLES.get(law)
            if table is None:
                table = ThermoTable(law)
                _TABLES[law] = table
    return table


def k_of_rho(law, rho):
    """k(rho) = int_0^rho sqrt(P'(y))/y dy.

    >>> from nsp_lab.eos.laws import Polytropic
    >>> round(float(k_of_rho(Polytropic(kappa=1.0, gamma=2.0), 1.0)) ** 2, 12)
    8.0
    """
    rho = _require_nonnegative(rho)
    if law.is_polytropic:
        return law.k_scale * rho**law.theta1
    return table_for(law).k_of(rho)


def internal_energy(law, rho):
    """e(rho) with e' = P/rho^2 and e(0) = 0."""
    rho = _require_nonnegative(rho)
    if law.is_polytropic:
        return law.kappa * rho ** (law.gamma - 1.0) / (law.gamma - 1.0)
    return table_for(law).e_of(rho)


def k_inverse(law, value):
    """Inverse of k: the density with k(rho) = value."""
    value = _require_nonnegative(value, name="k")
    if law.is_polytropic:
        return (value / law.k_scale) ** (1.0 / law.theta1)
    return table_for(law).k_inverse(value)


def enthalpy(law, rho):
    """e(rho) + P(rho)/rho, zero at vacuum."""
    rho = _require_nonnegative(rho)
    safe = np.where(rho > 0.0, rho, 1.0)
    return np.where(rho > 0.0, internal_energy(law, rho) + law.pressure(safe) / safe, 0.0)


def eos_table(law, grid):
    """Tabulate the thermodynamic functions of ``law`` on ``grid`` (all rho > 0)."""
    rho = _require_positive(grid)
    return pd.DataFrame(
        {
            "rho": rho,
            "P": law.pressure(rho),
            "c": sound_speed(law, rho),
            "k": k_of_rho(law, rho),
            "e": internal_energy(law, rho),
            "d": d_of_rho(law, rho),
            "rho_k2_over_k1": d_of_rho(law, rho) - 2.0,
        }
    )
