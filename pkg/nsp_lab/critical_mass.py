"""Critical total mass for gamma2 in (6/5, 4/3] and the Chandrasekhar mass.

For gamma2 in (6/5, 4/3) the critical mass is the supremum over beta > 0 of the
positive root M_c(beta) of

    (4 - 3 g) (B_beta / (3 (g - 1)))^(-3 (g - 1)/(4 - 3 g)) M^(-(5 g - 6)/(4 - 3 g)) - beta M / w3 = E0 / w3

with B_beta built from C_max(beta). For gamma2 = 4/3 it is the mass of the n = 3
Lane-Emden polytrope.
"""
#  pylint: disable=too-many-locals
import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar
from scipy.special import gamma as gamma_function

from nsp_lab.eos.functions import internal_energy
from nsp_lab.exceptions import InfeasibleError, IntegrationError, NotApplicableError

LOGGER = logging.getLogger(__name__)

RHO_SCAN = np.logspace(-12, 12, 24 * 8 + 1)
BETA_GRID = (1e-8, 1e8, 200)
LANE_EMDEN_START = 1e-6
LANE_EMDEN_LIMIT = 20.0
_FOUR_THIRDS = 4.0 / 3.0


def surface_area(n):
    """Area of the unit sphere in R^n, 2 pi^(n/2) / Gamma(n/2).

    >>> round(surface_area(3) / np.pi, 12)
    4.0
    """
    if int(n) != n or n < 2:
        raise NotApplicableError(f"surface_area needs an integer dimension >= 2, got {n}")
    return float(2.0 * np.pi ** (0.5 * n) / gamma_function(0.5 * n))


def sobolev_constant(n):
    """Best constant A_n = 4 / (n (n - 2)) w_{n+1}^(-2/n) of the gradient Sobolev inequality."""
    if n < 3:
        raise NotApplicableError("the Sobolev constant needs n >= 3")
    return 4.0 / (n * (n - 2.0)) * surface_area(n + 1) ** (-2.0 / n)


def _require_subcritical(law):
    gamma2 = law.gamma2
    if not 1.2 < gamma2 < _FOUR_THIRDS:
        raise NotApplicableError(f"gamma2={gamma2:.6g} outside (6/5, 4/3)")
    return gamma2


class CmaxResult(BaseModel):
    """Supremum of g(rho) = (rho^(g2-1) / (beta + e(rho)))^(1/(5 g2 - 6))."""

    beta: float
    value: float
    rho_argmax: Optional[float]
    limit_value: float
    attained_in_limit: bool


class BetaSample(BaseModel):
    """One point of the beta scan."""

    beta: float
    c_max: float
    b_beta: float
    m_c: float
    residual: float
    attained_in_limit: bool


class HMonotoneReport(BaseModel):
    """Strict increase of h(rho) = P/rho - (gamma2 - 1) e(rho) on a grid."""

    monotone: bool
    first_violation: Optional[float] = None


class CriticalMassReport(BaseModel):
    """Outcome of ``critical_mass``."""

    kind: str
    gamma2: float
    E0: float
    M_c: float
    M_ch: Optional[float] = None
    M_tilde: Optional[float] = None
    margin: Optional[float] = None
    beta_argmax: Optional[float] = None
    supremum_in_limit: bool = False
    beta_samples: List[BetaSample] = []
    h_monotone: Optional[HMonotoneReport] = None
    max_residual: float = 0.0


def _log_g(law, rho, beta, gamma2):
    return ((gamma2 - 1.0) * np.log(rho) - np.log(beta + internal_energy(law, rho))) / (5.0 * gamma2 - 6.0)


def c_max(law, beta):
    """C_max(beta): log-grid scan plus bounded refinement, compared with the rho -> infinity limit.

    Args:
        law (PressureLaw): Law with gamma2 in (6/5, 4/3).
        beta (float): Positive shift.

    Returns:
        CmaxResult: The supremum, where it sits and whether it is only reached in the limit.
    """
    gamma2 = _require_subcritical(law)
    if beta <= 0.0:
        raise NotApplicableError("beta must be positive")
    limit = float((law.kappa2 / (gamma2 - 1.0)) ** (-1.0 / (5.0 * gamma2 - 6.0)))
    values = _log_g(law, RHO_SCAN, beta, gamma2)
    index = int(np.argmax(values))
    best_log, best_rho = float(values[index]), float(RHO_SCAN[index])
    if 0 < index < RHO_SCAN.size - 1:
        bounds = (np.log(RHO_SCAN[index - 1]), np.log(RHO_SCAN[index + 1]))
        found = minimize_scalar(
            lambda s: -float(_log_g(law, np.exp(s), beta, gamma2)),
            bounds=bounds,
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -found.fun > best_log:
            best_log, best_rho = float(-found.fun), float(np.exp(found.x))
    scanned = float(np.exp(best_log))
    if limit >= scanned * (1.0 - 1e-12):
        return CmaxResult(beta=beta, value=limit, rho_argmax=None, limit_value=limit, attained_in_limit=True)
    return CmaxResult(beta=beta, value=scanned, rho_argmax=best_rho, limit_value=limit, attained_in_limit=False)


def b_beta(law, beta, cmax=None):
    """B_beta = (A_3 / 2) w3^((4 - 3 g2)/(3 (g2 - 1))) C_max(beta)^((5 g2 - 6)/(3 (g2 - 1)))."""
    gamma2 = _require_subcritical(law)
    value = c_max(law, beta).value if cmax is None else cmax
    return (
        0.5
        * sobolev_constant(3)
        * surface_area(3) ** ((4.0 - 3.0 * gamma2) / (3.0 * (gamma2 - 1.0)))
        * value ** ((5.0 * gamma2 - 6.0) / (3.0 * (gamma2 - 1.0)))
    )


def _root_terms(gamma2, bb):
    """Coefficient and exponent of the decreasing power term of the root equation."""
    coefficient = (4.0 - 3.0 * gamma2) * (bb / (3.0 * (gamma2 - 1.0))) ** (
        -3.0 * (gamma2 - 1.0) / (4.0 - 3.0 * gamma2)
    )
    return coefficient, (5.0 * gamma2 - 6.0) / (4.0 - 3.0 * gamma2)


def root_residual(law, beta, E0, mass, bb=None):
    """Residual of the root equation at ``mass`` and its scale E0/w3 + beta M/w3 + 1."""
    gamma2 = law.gamma2
    bb = b_beta(law, beta) if bb is None else bb
    w3 = surface_area(3)
    coefficient, power = _root_terms(gamma2, bb)
    residual = coefficient * mass ** (-power) - beta * mass / w3 - E0 / w3
    return float(residual), float(E0 / w3 + beta * mass / w3 + 1.0)


def m_c_of_beta(law, beta, E0, cmax=None):
    """Positive root M_c(beta), solved in log M.

    Returns:
        BetaSample: beta, C_max, B_beta, the root and its scaled residual.
    """
    gamma2 = _require_subcritical(law)
    if E0 < 0.0:
        raise NotApplicableError("E0 must be >= 0")
    cmax = c_max(law, beta) if cmax is None else cmax
    bb = b_beta(law, beta, cmax=cmax.value)
    w3 = surface_area(3)
    coefficient, power = _root_terms(gamma2, bb)
    log_coefficient = np.log(coefficient)

    def _log_balance(s):
        return log_coefficient - power * s - np.log(beta * np.exp(s) / w3 + E0 / w3)

    lower, upper = -1.0, 1.0
    for _ in range(400):
        if _log_balance(lower) > 0.0:
            break
        lower -= 2.0
    for _ in range(400):
        if _log_balance(upper) < 0.0:
            break
        upper += 2.0
    if not _log_balance(lower) > 0.0 > _log_balance(upper):
        raise InfeasibleError(f"No sign change bracketing M_c(beta) for beta={beta:.6g}")
    mass = float(np.exp(brentq(_log_balance, lower, upper, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=500)))
    residual, scale = root_residual(law, beta, E0, mass, bb=bb)
    return BetaSample(
        beta=beta,
        c_max=cmax.value,
        b_beta=bb,
        m_c=mass,
        residual=abs(residual) / scale,
        attained_in_limit=cmax.attained_in_limit,
    )


def m_tilde(law, E0):
    """Closed-form beta -> 0 limit of M_c(beta) with C_max at its rho -> infinity value.

    This is the exact root of the beta = 0 root equation, so it carries no w3
    factor: the w3 powers of B_beta and of E0 / w3 cancel.
    """
    gamma2 = _require_subcritical(law)
    if E0 <= 0.0:
        raise NotApplicableError("E0 must be positive for the closed form")
    base = (
        2.0
        / (9.0 * (gamma2 - 1.0))
        * (law.kappa2 / (gamma2 - 1.0)) ** (-1.0 / (3.0 * (gamma2 - 1.0)))
        * surface_area(4) ** (-2.0 / 3.0)
    )
    return float(
        base ** (-3.0 * (gamma2 - 1.0) / (5.0 * gamma2 - 6.0))
        * (E0 / (4.0 - 3.0 * gamma2)) ** (-(4.0 - 3.0 * gamma2) / (5.0 * gamma2 - 6.0))
    )


def h_function(law, rho):
    """h(rho) = P(rho)/rho - (gamma2 - 1) e(rho); identically zero for a single power law."""
    rho = np.asarray(rho, dtype=float)
    if law.is_polytropic:
        return np.zeros_like(rho)
    return law.pressure(rho) / rho - (law.gamma2 - 1.0) * internal_energy(law, rho)


def h_monotone(law, grid=None):
    """Strict increase of h on ``grid``, tested through h' = (rho P' - gamma2 P) / rho^2.

    >>> from nsp_lab.eos.laws import Polytropic
    >>> h_monotone(Polytropic(kappa=1.0, gamma=1.3)).monotone
    False
    """
    grid = np.logspace(-8, 8, 161) if grid is None else np.asarray(grid, dtype=float)
    if law.is_polytropic:
        return HMonotoneReport(monotone=False, first_violation=float(grid[0]))
    slope = (grid * law.dpressure(grid) - law.gamma2 * law.pressure(grid)) / grid**2
    failing = np.nonzero(~(slope > 0.0))[0]
    if failing.size:
        return HMonotoneReport(monotone=False, first_violation=float(grid[failing[0]]))
    return HMonotoneReport(monotone=True)


def _lane_emden_rhs(xi, y):
    theta, slope = y
    return [slope, -2.0 * slope / xi - np.sign(theta) * np.abs(theta) ** 3]


def _surface(xi, y):  # pylint: disable=unused-argument
    return y[0]


_surface.terminal = True
_surface.direction = -1


def lane_emden(rtol=1e-12, max_step=np.inf):
    """First zero xi1 of the n = 3 Lane-Emden solution and theta'(xi1).

    Raises:
        IntegrationError: No zero crossing before xi = 20.
    """
    xi0 = LANE_EMDEN_START
    start = [1.0 - xi0**2 / 6.0 + xi0**4 / 40.0, -xi0 / 3.0 + xi0**3 / 10.0]
    solution = solve_ivp(
        _lane_emden_rhs,
        (xi0, LANE_EMDEN_LIMIT),
        start,
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-2,
        max_step=max_step,
        events=_surface,
    )
    if solution.status != 1 or not solution.t_events[0].size:
        raise IntegrationError(f"Lane-Emden solution did not reach zero before xi={LANE_EMDEN_LIMIT}")
    xi1 = float(solution.t_events[0][0])
    slope = float(solution.y_events[0][0][1])
    LOGGER.debug("Lane-Emden n=3: xi1=%.10f, xi1^2|theta'|=%.10f", xi1, xi1**2 * abs(slope))
    return xi1, slope


def lane_emden_mass(kappa2, central_density=1.0, rtol=1e-12, max_step=np.inf):
    """Total mass of the n = 3 polytrope for P = kappa2 rho^(4/3) under Laplace(phi) = rho.

    Args:
        kappa2 (float): Pressure scale.
        central_density (float): Central density; the mass does not depend on it.
        rtol (float): Integrator tolerance.
        max_step (float): Integrator step cap, for step-halving checks.

    Returns:
        float: w3 rho_c a^3 xi1^2 |theta'(xi1)| with a^2 = 4 kappa2 rho_c^(-2/3).
    """
    if kappa2 <= 0.0 or central_density <= 0.0:
        raise NotApplicableError("kappa2 and the central density must be positive")
    xi1, slope = lane_emden(rtol=rtol, max_step=max_step)
    length = np.sqrt(4.0 * kappa2 * central_density ** (-2.0 / 3.0))
    return float(surface_area(3) * central_density * length**3 * xi1**2 * abs(slope))


def beta_scan(law, E0, grid=BETA_GRID):
    """M_c(beta) over a log grid of beta."""
    lower, upper, count = grid
    return [m_c_of_beta(law, float(beta), E0) for beta in np.logspace(np.log10(lower), np.log10(upper), int(count))]


def _refine(law, E0, samples, index):
    betas = [sample.beta for sample in samples]
    bounds = (np.log(betas[index - 1]), np.log(betas[index + 1]))
    best = samples[index]
    for _ in range(3):
        found = minimize_scalar(
            lambda s: -m_c_of_beta(law, float(np.exp(s)), E0).m_c,
            bounds=bounds,
            method="bounded",
            options={"xatol": 1e-8},
        )
        candidate = m_c_of_beta(law, float(np.exp(found.x)), E0)
        if candidate.m_c > best.m_c:
            best = candidate
        width = 0.25 * (bounds[1] - bounds[0])
        bounds = (np.log(best.beta) - width, np.log(best.beta) + width)
    return best


def _extrapolate(samples):
    """Linear extrapolation of M_c(beta) to beta = 0 from the two smallest samples."""
    near = samples[0]
    if len(samples) < 2 or not samples[1].attained_in_limit:
        return near.m_c
    far = samples[1]
    slope = (far.m_c - near.m_c) / (far.beta - near.beta)
    return near.m_c - slope * near.beta


def critical_mass(law, E0, grid=BETA_GRID):
    """Critical mass of ``law`` at total energy ``E0``.

    gamma2 = 4/3 routes to the Lane-Emden mass; gamma2 in (6/5, 4/3) maximizes
    M_c(beta) over the beta grid with local refinement. A supremum sitting at
    the smallest beta is extrapolated to beta = 0 and compared with M_tilde.

    Raises:
        NotApplicableError: gamma2 > 4/3 or gamma2 <= 6/5.
    """
    gamma2 = law.gamma2
    if abs(gamma2 - _FOUR_THIRDS) <= 1e-12:
        mass = lane_emden_mass(law.kappa2)
        LOGGER.info("gamma2 = 4/3: critical mass is the Chandrasekhar mass %.10g", mass)
        return CriticalMassReport(kind=law.kind, gamma2=gamma2, E0=E0, M_c=mass, M_ch=mass)
    if gamma2 > _FOUR_THIRDS:
        raise NotApplicableError(f"gamma2={gamma2:.6g} > 4/3 imposes no mass restriction")
    _require_subcritical(law)
    samples = beta_scan(law, E0, grid=grid)
    tilde = m_tilde(law, E0)
    masses = np.array([sample.m_c for sample in samples])
    index = int(np.argmax(masses))
    in_limit = False
    if index == 0 and samples[0].attained_in_limit:
        best, value, in_limit = samples[0], _extrapolate(samples), True
    elif 0 < index < len(samples) - 1:
        best = _refine(law, E0, samples, index)
        value = best.m_c
    else:
        best = samples[index]
        value = best.m_c
    report = CriticalMassReport(
        kind=law.kind,
        gamma2=gamma2,
        E0=E0,
        M_c=value,
        M_tilde=tilde,
        margin=tilde - value,
        beta_argmax=best.beta,
        supremum_in_limit=in_limit,
        beta_samples=samples,
        h_monotone=h_monotone(law),
        max_residual=max(sample.residual for sample in samples),
    )
    LOGGER.info("Critical mass %.10g (closed form %.10g) at beta=%.4g", value, tilde, best.beta)
    return report
