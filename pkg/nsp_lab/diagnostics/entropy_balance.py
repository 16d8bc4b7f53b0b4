"""Entropy dissipation balance: weak divergence of an entropy pair against its source terms.

With phi(t, r) = w(r) s(t), w a bump on (d, D) and s = sin^2(pi t / T), the
balance evaluates -int int (eta phi_t + q phi_r) and the terms

    I1 = -int (2/r) m (eta_rho + u eta_m) phi          geometric
    I2 = -eps int rho (eta_m)_r (u_r + 2u/r) phi       viscous
    I3 = -eps int rho eta_m (u_r + 2u/r) phi_r         viscous
    I4 = -eps int (2/r) eta_m rho_r u phi              viscous
    I5 = -int (rho / r^2) eta_m x phi                  gravity

on the snapshots of a run, with trapezoid rules in r and t.
"""
#  pylint: disable=too-many-locals
import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel
from scipy.integrate import trapezoid

from nsp_lab.entropy.kernel import weak_entropy_pair
from nsp_lab.eos.functions import enthalpy, internal_energy
from nsp_lab.exceptions import DomainError

LOGGER = logging.getLogger(__name__)

_RADIAL_POINTS = 401
_RELATIVE_STEP = 1e-4
TERMS = ("I1", "I2", "I3", "I4", "I5")


class BalanceReport(BaseModel):
    """Window-integrated divergence and source terms of one run."""

    epsilon: float
    pair: str
    divergence: float
    I1: float
    I2: float
    I3: float
    I4: float
    I5: float
    residual: float
    viscous: float
    failure: Optional[str] = None


def _window_bump(r, d, upper):
    center, half = 0.5 * (d + upper), 0.5 * (upper - d)
    s = (r - center) / half
    inside = np.abs(s) < 1.0
    safe = np.where(inside, s, 0.0)
    value = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe**2)), 0.0)
    slope = np.where(inside, value * (-2.0 * safe / (1.0 - safe**2) ** 2) / half, 0.0)
    return value, slope


def _mechanical_derivatives(law, rho, u):
    eta = 0.5 * rho * u**2 + rho * internal_energy(law, rho)
    q = u * (eta + law.pressure(rho))
    return eta, q, enthalpy(law, rho) - 0.5 * u**2, u


def _weak_derivatives(law, psi, rho, u):
    eta, q = weak_entropy_pair(law, psi, rho, u)
    step_rho = _RELATIVE_STEP * rho
    step_u = _RELATIVE_STEP * (1.0 + np.abs(u))
    plus, _ = weak_entropy_pair(law, psi, rho + step_rho, u)
    minus, _ = weak_entropy_pair(law, psi, rho - step_rho, u)
    eta_rho_u = (plus - minus) / (2.0 * step_rho)
    plus, _ = weak_entropy_pair(law, psi, rho, u + step_u)
    minus, _ = weak_entropy_pair(law, psi, rho, u - step_u)
    eta_m = (plus - minus) / (2.0 * step_u) / rho
    return eta, q, eta_rho_u - u * eta_m, eta_m


def _fields(frame, inner_radius, grid):
    """rho, u and x of a snapshot interpolated to ``grid`` at volume-centred radii."""
    radius = np.concatenate([[inner_radius], frame["r"].to_numpy()])
    velocity = np.concatenate([[0.0], frame["u"].to_numpy()])
    centers = np.cbrt(0.5 * (radius[1:] ** 3 + radius[:-1] ** 3))
    u_centres = 0.5 * (velocity[1:] + velocity[:-1])
    rho = np.interp(grid, centers, frame["rho"].to_numpy())
    u = np.interp(grid, centers, u_centres)
    x = np.interp(grid, centers, frame["x"].to_numpy())
    return rho, u, x


def entropy_dissipation_balance(result, law, psi=None, window=None):
    """Balance one run; ``psi=None`` selects the mechanical energy pair.

    Args:
        result (RunResult): Run with snapshots covering [0, T].
        law (PressureLaw): Pressure law of the run.
        psi (TestFunction, optional): Generator of the weak entropy pair.
        window (tuple, optional): (d, D); defaults to the ledger window.

    Returns:
        BalanceReport: Integrated divergence, I1..I5 and their balance.
    """
    d, upper = window or result.ledger.window
    if not 0.0 < d < upper:
        raise DomainError(f"window needs 0 < d < D, got ({d}, {upper})")
    times = result.times
    final_time = float(times[-1])
    epsilon = result.initial.epsilon
    grid = np.linspace(d, upper, _RADIAL_POINTS)
    w, w_r = _window_bump(grid, d, upper)
    series = {name: np.zeros(times.size) for name in ("divergence",) + TERMS}
    for index, frame in enumerate(result.snapshots):
        t = times[index]
        s = np.sin(np.pi * t / final_time) ** 2 if final_time > 0.0 else 0.0
        s_t = np.pi / final_time * np.sin(2.0 * np.pi * t / final_time) if final_time > 0.0 else 0.0
        rho, u, x = _fields(frame, result.initial.inner_radius, grid)
        if psi is None:
            eta, q, eta_rho, eta_m = _mechanical_derivatives(law, rho, u)
        else:
            eta, q, eta_rho, eta_m = _weak_derivatives(law, psi, rho, u)
        u_r = np.gradient(u, grid)
        rho_r = np.gradient(rho, grid)
        eta_m_r = np.gradient(eta_m, grid)
        stretch = u_r + 2.0 * u / grid
        phi, phi_r = w * s, w_r * s
        series["divergence"][index] = -trapezoid(eta * w * s_t + q * phi_r, grid)
        series["I1"][index] = -trapezoid(2.0 / grid * rho * u * (eta_rho + u * eta_m) * phi, grid)
        series["I2"][index] = -epsilon * trapezoid(rho * eta_m_r * stretch * phi, grid)
        series["I3"][index] = -epsilon * trapezoid(rho * eta_m * stretch * phi_r, grid)
        series["I4"][index] = -epsilon * trapezoid(2.0 / grid * eta_m * rho_r * u * phi, grid)
        series["I5"][index] = -trapezoid(rho / grid**2 * eta_m * x * phi, grid)
    totals = {name: float(trapezoid(values, times)) if times.size > 1 else 0.0 for name, values in series.items()}
    sources = sum(totals[name] for name in TERMS)
    report = BalanceReport(
        epsilon=epsilon,
        pair="mechanical" if psi is None else "weak",
        residual=totals["divergence"] - sources,
        viscous=abs(totals["I2"]) + abs(totals["I3"]) + abs(totals["I4"]),
        failure=result.failure,
        **totals,
    )
    LOGGER.debug("Entropy balance eps=%.4g: divergence %.6g, sources %.6g", epsilon, report.divergence, sources)
    return report
