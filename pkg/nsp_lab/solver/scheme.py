"""Staggered Lagrangian time step.

Pressure, gravity and the term -2 eps r rho_x u advance with Heun's method;
the viscous operator eps r^2 (rho^2 (r^2 u)_x)_x is applied implicitly with
the geometry frozen (one tridiagonal solve) both to the stage velocity and to
the final one. The free boundary carries half a cell of mass and a ghost total
stress of zero, so the outer cell follows rho_t = -P(rho) / eps up to O(dx).
"""
import logging

import numpy as np
from scipy.linalg import solve_banded

from nsp_lab import defaults
from nsp_lab.diagnostics.ledger import density_slope
from nsp_lab.exceptions import StepRejected

LOGGER = logging.getLogger(__name__)


def admissible_dt(state, law, cfl=None):
    """Largest step allowed by the acoustic and drift-term CFL conditions.

    Args:
        state (RadialState): Current state.
        law (PressureLaw): Pressure law.
        cfl (float, optional): CFL factor, defaults to ``defaults.CFL``.

    Returns:
        float: cfl * min(dx / (rho r^2 c), 1 / |2 eps r rho_x|).
    """
    cfl = defaults.CFL if cfl is None else cfl
    centers = state.centers
    acoustic = state.dx / (state.density * centers**2 * np.sqrt(law.dpressure(state.density)))
    limit = float(np.min(acoustic))
    drift = np.abs(2.0 * state.epsilon * state.radius * density_slope(state))
    if np.any(drift > 0.0):
        limit = min(limit, 1.0 / float(np.max(drift)))
    return cfl * limit


def _acceleration(state, law, radius, velocity):
    """Explicit edge accelerations for edges 1 .. N at the given geometry."""
    density = 3.0 * state.dx / (radius[1:] ** 3 - radius[:-1] ** 3)
    pressure = np.append(law.pressure(density), 0.0)
    weight = state.edge_weight[1:]
    r = radius[1:]
    x = state.edge_mass[1:]
    slope = np.empty(state.cells)
    slope[:-1] = np.diff(density) / state.dx
    slope[-1] = slope[-2]
    accel = -(r**2) * (pressure[1:] - pressure[:-1]) / weight
    accel -= x / r**2
    accel -= 2.0 * state.epsilon * r * slope * velocity[1:]
    return accel


def _viscous_solve(state, radius, density, velocity, dt):
    """Solve (I - dt V) u = velocity for edges 1 .. N with u[0] = 0."""
    cells = state.cells
    weight = state.edge_weight[1:]
    r2 = radius**2
    g = state.epsilon * density**2 / state.dx
    g_left = g
    g_right = np.append(g[1:], 0.0)
    scale = dt * r2[1:] / weight
    diagonal = 1.0 + scale * (g_right + g_left) * r2[1:]
    upper = -scale[:-1] * g_right[:-1] * r2[2:]
    lower = -scale[1:] * g_left[1:] * r2[1:-1]
    bands = np.zeros((3, cells))
    bands[0, 1:] = upper
    bands[1] = diagonal
    bands[2, :-1] = lower
    out = np.zeros_like(velocity)
    out[1:] = solve_banded((1, 1), bands, velocity[1:])
    return out


def step(state, dt, law, cfl=None):
    """Advance ``state`` by ``dt``.

    Raises:
        StepRejected: ``dt`` exceeds the admissible step.
        BlowupError: a density fell below the floor or the radii lost monotonicity.
    """
    admissible = admissible_dt(state, law, cfl)
    if dt > admissible * (1.0 + 1e-12):
        raise StepRejected(dt, admissible)
    radius, velocity = state.radius, state.velocity
    first = _acceleration(state, law, radius, velocity)
    radius_1 = radius + dt * velocity
    kicked = velocity.copy()
    kicked[1:] += dt * first
    stage = state.evolve(radius_1, kicked, state.time + dt).validate()
    # the stage velocity moves the radii, so it has to carry the viscous tension
    # that holds the boundary cell against its pressure jump
    velocity_1 = _viscous_solve(state, radius_1, stage.density, kicked, dt)
    second = _acceleration(state, law, radius_1, velocity_1)
    new_radius = radius + 0.5 * dt * (velocity + velocity_1)
    new_radius[0] = radius[0]
    predicted = velocity.copy()
    predicted[1:] += 0.5 * dt * (first + second)
    density = 3.0 * state.dx / (new_radius[1:] ** 3 - new_radius[:-1] ** 3)
    new_velocity = _viscous_solve(state, new_radius, density, predicted, dt)
    return state.evolve(new_radius, new_velocity, state.time + dt).validate()
