"""Lagrangian radial state, initial data and the discrete hydrostatic equilibrium.

Cells j = 0 .. N-1 carry densities, edges j = 0 .. N carry radii and velocities.
Edge 0 is the inner radius a, edge N the free boundary b(t). Every cell holds
the same mass coordinate increment dx = M / (w3 N), so

    (r[j+1]^3 - r[j]^3) / 3 * rho[j] = dx

holds by construction.
"""
#  pylint: disable=too-many-arguments,too-many-instance-attributes
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.optimize import brentq

from nsp_lab import defaults
from nsp_lab.critical_mass import surface_area
from nsp_lab.diagnostics.ledger import bd_terms, energy_functionals
from nsp_lab.exceptions import BlowupError, DomainError, InfeasibleError

LOGGER = logging.getLogger(__name__)

OMEGA3 = surface_area(3)
_FINE_FACTOR = 32
_SHOOTING_STEPS = 80


@dataclass(frozen=True)
class RadialState:
    """Discrete state in mass coordinates at time ``time``."""

    radius: np.ndarray
    velocity: np.ndarray
    density: np.ndarray
    mass: float
    epsilon: float
    time: float = 0.0
    rho_floor: float = 0.0
    info: dict = field(default_factory=dict, compare=False)

    @property
    def cells(self):
        """Cell count N."""
        return self.density.size

    @property
    def dx(self):
        """Mass coordinate increment per cell."""
        return self.mass / (OMEGA3 * self.cells)

    @property
    def inner_radius(self):
        """a."""
        return float(self.radius[0])

    @property
    def boundary(self):
        """b(t), the outermost edge."""
        return float(self.radius[-1])

    @property
    def edge_mass(self):
        """Mass coordinates x at the edges, x[0] = 0 and x[N] = M / w3."""
        return self.dx * np.arange(self.cells + 1)

    @property
    def cell_mass(self):
        """Mass coordinates at the cell centers."""
        return self.dx * (np.arange(self.cells) + 0.5)

    @property
    def edge_weight(self):
        """Mass carried by each edge: dx inside, dx / 2 at the free boundary, 0 at the pinned edge."""
        weight = np.full(self.cells + 1, self.dx)
        weight[0] = 0.0
        weight[-1] = 0.5 * self.dx
        return weight

    @property
    def centers(self):
        """Volume-centred radii ((r[j]^3 + r[j+1]^3) / 2)^(1/3)."""
        return np.cbrt(0.5 * (self.radius[1:] ** 3 + self.radius[:-1] ** 3))

    @property
    def widths(self):
        """Radial cell widths."""
        return np.diff(self.radius)

    @property
    def total_mass(self):
        """w3 sum rho (r[j+1]^3 - r[j]^3) / 3."""
        return float(OMEGA3 * np.sum(self.density * (self.radius[1:] ** 3 - self.radius[:-1] ** 3) / 3.0))

    def momentum(self):
        """rho u at cell centres with edge velocities averaged."""
        return self.density * 0.5 * (self.velocity[1:] + self.velocity[:-1])

    def evolve(self, radius, velocity, time):
        """New state with moved edges; densities follow from the volume identity."""
        density = 3.0 * self.dx / (radius[1:] ** 3 - radius[:-1] ** 3)
        return replace(self, radius=radius, velocity=velocity, density=density, time=time)

    def validate(self):
        """Raise BlowupError at the first cell with non-monotone radii or density below the floor."""
        bad = np.flatnonzero(~np.isfinite(self.radius[1:]) | (np.diff(self.radius) <= 0.0))
        if bad.size:
            raise BlowupError("radii lost monotonicity", int(bad[0]), self.time)
        bad = np.flatnonzero(~np.isfinite(self.density) | (self.density <= self.rho_floor))
        if bad.size:
            raise BlowupError("density fell below the floor", int(bad[0]), self.time)
        bad = np.flatnonzero(~np.isfinite(self.velocity))
        if bad.size:
            raise BlowupError("velocity is not finite", int(bad[0]), self.time)
        return self


def gravity(state):
    """Phi_r at the edges: x / r^2, zero at the inner radius.

    Beyond b(t) the field is M / (w3 r^2), which the outermost edge already carries.
    """
    return state.edge_mass / state.radius**2


class ProfileSpec(BaseModel):
    """Shape of the default initial density: a smooth core bump plus a boundary tail."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    radius: PositiveFloat = Field(default=1.0, description="Core radius R of the bump exp(1 - 1/(1 - (r/R)^2)).")
    tail_width: PositiveFloat = Field(default=1.0, description="Decay length of the tail below b.")
    tail_power: PositiveFloat = Field(default=4.0, description="Algebraic decay power of the tail.")
    velocity: float = Field(default=0.0, description="Amplitude of u0 = v (r - a) bump(r / R).")
    hydrostatic: bool = Field(default=False, description="Use the discrete hydrostatic equilibrium instead.")


class InitialDataSpec(BaseModel):
    """Approximate initial data on [1/b, b]."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    M: PositiveFloat = Field(description="Total mass.")
    b: float = Field(gt=1.0, description="Outer radius; the inner radius is 1/b.")
    epsilon: PositiveFloat = Field(description="Viscosity.")
    N: PositiveInt = Field(default=1024, description="Cell count.")
    profile: ProfileSpec = Field(default_factory=ProfileSpec)

    @model_validator(mode="after")
    def check_cells(self):
        """At least four cells."""
        if self.N < 4:
            raise ValueError("N must be at least 4")
        return self


def boundary_exponent(law):
    """alpha = min(1/2, 3 (gamma1 - 1) / gamma1)."""
    return min(0.5, 3.0 * (law.gamma1 - 1.0) / law.gamma1)


def boundary_level(law, b):
    """Prescribed density at the free boundary, b^-(3 - alpha)."""
    return b ** -(3.0 - boundary_exponent(law))


def _bump(r, radius):
    scaled = np.asarray(r, dtype=float) / radius
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(scaled < 1.0, np.exp(1.0 - 1.0 / (1.0 - np.minimum(scaled, 1.0 - 1e-300) ** 2)), 0.0)


def initial_profile(spec, law):
    """Return the (rho0, u0) callables of r for ``spec`` and the core amplitude."""
    profile = spec.profile
    b = spec.b
    a = 1.0 / b
    rho_b = boundary_level(law, b)

    def _tail(r):
        return rho_b * (1.0 + (b - np.asarray(r, dtype=float)) / profile.tail_width) ** -profile.tail_power

    fine = _fine_grid(a, b, profile.radius, spec.N)
    tail_mass = OMEGA3 * trapezoid(_tail(fine) * fine**2, fine)
    core_mass = OMEGA3 * trapezoid(_bump(fine, profile.radius) * fine**2, fine)
    if tail_mass >= spec.M or core_mass <= 0.0:
        raise InfeasibleError(f"tail mass {tail_mass:.6g} leaves nothing for the core of total mass {spec.M:.6g}")
    amplitude = (spec.M - tail_mass) / core_mass

    def rho0(r):
        return amplitude * _bump(r, profile.radius) + _tail(r)

    def u0(r):
        r = np.asarray(r, dtype=float)
        return profile.velocity * (r - a) * _bump(r, profile.radius)

    return rho0, u0, amplitude


def _fine_grid(a, b, core, cells):
    """Radial grid resolving the core, the interior and the boundary layer."""
    count = _FINE_FACTOR * cells
    inner = np.linspace(a, min(core, b), count)
    outer = b - np.geomspace(max(b - min(core, b), 1e-12), 1e-6 * b, count)
    return np.unique(np.concatenate([inner, outer, [b]]))


def build_initial_data(spec, law):
    """Discrete initial state: uniform mass cells placed on the profile.

    The edge radii are the inverse of x(r) = int_a^r rho0 y^2 dy on a fine grid,
    rescaled so that x(b) = M / w3 exactly. E0 and E1 are logged and stored in
    ``state.info``.
    """
    if spec.profile.hydrostatic:
        return hydrostatic_state(law, spec.M, spec.N, 1.0 / spec.b, spec.epsilon)
    rho0, u0, amplitude = initial_profile(spec, law)
    a, b = 1.0 / spec.b, spec.b
    fine = _fine_grid(a, b, spec.profile.radius, spec.N)
    x_fine = cumulative_trapezoid(rho0(fine) * fine**2, fine, initial=0.0)
    x_fine *= (spec.M / OMEGA3) / x_fine[-1]
    targets = (spec.M / OMEGA3) * np.arange(spec.N + 1) / spec.N
    radius = np.interp(targets, x_fine, fine)
    radius[0], radius[-1] = a, b
    velocity = u0(radius)
    velocity[0] = 0.0
    dx = spec.M / (OMEGA3 * spec.N)
    density = 3.0 * dx / (radius[1:] ** 3 - radius[:-1] ** 3)
    rho_b = float(rho0(b))
    state = RadialState(
        radius=radius,
        velocity=velocity,
        density=density,
        mass=spec.M,
        epsilon=spec.epsilon,
        rho_floor=defaults.DENSITY_FLOOR_FACTOR * min(rho_b, float(density[-1])),
    )
    _report(state, law, {"amplitude": amplitude, "rho_b": rho_b, "alpha": boundary_exponent(law)})
    return state.validate()


def _report(state, law, extra):
    energies = energy_functionals(state, law)
    bd = bd_terms(state, law)
    state.info.update(extra)
    state.info["E0"] = energies.total
    state.info["E1"] = bd.gradient + bd.boundary
    LOGGER.info(
        "Initial data: N=%d, a=%.4g, b=%.4g, E0=%.10g, E1=%.10g",
        state.cells,
        state.inner_radius,
        state.boundary,
        state.info["E0"],
        state.info["E1"],
    )


def pressure_inverse(law, pressure_value):
    """Density with P(rho) = pressure_value (> 0)."""
    if pressure_value <= 0.0:
        raise DomainError("pressure must be > 0")
    if law.is_polytropic:
        return (pressure_value / law.kappa) ** (1.0 / law.gamma)
    target = np.log(pressure_value)

    def _residual(log_rho):
        return float(np.log(law.pressure(np.exp(log_rho)))) - target

    lower, upper = -30.0, 30.0
    while _residual(lower) > 0.0:
        lower -= 30.0
    while _residual(upper) < 0.0:
        upper += 30.0
    return float(np.exp(brentq(_residual, lower, upper, xtol=1e-14, rtol=1e-14)))


def _hydrostatic_march(law, mass, cells, outer):
    """Densities and edge radii^3 balancing r^2 dP/dx = -x / r^2 inward from radius ``outer``."""
    dx = mass / (OMEGA3 * cells)
    x = dx * np.arange(cells + 1)
    cubes = np.empty(cells + 1)
    density = np.empty(cells)
    cubes[-1] = outer**3
    pressure_value = x[-1] * dx / (2.0 * outer**4)
    for j in range(cells - 1, -1, -1):
        density[j] = pressure_inverse(law, pressure_value)
        cubes[j] = cubes[j + 1] - 3.0 * dx / density[j]
        if cubes[j] <= 0.0:
            return cubes[j], None, None
        if j > 0:
            pressure_value += x[j] * dx / cubes[j] ** (4.0 / 3.0)
    return cubes[0], cubes, density


def hydrostatic_state(law, mass, cells, inner_radius, epsilon):
    """Discrete static equilibrium with stress-free surface, shooting on the outer radius."""
    target = inner_radius**3

    def _miss(outer):
        return _hydrostatic_march(law, mass, cells, outer)[0] - target

    upper = 1.0
    for _ in range(_SHOOTING_STEPS):
        if _miss(upper) > 0.0:
            break
        upper *= 2.0
    else:
        raise InfeasibleError("no outer radius reaches the inner radius")
    lower = upper
    for _ in range(_SHOOTING_STEPS):
        lower *= 0.5
        if _miss(lower) < 0.0:
            break
    else:
        raise InfeasibleError("hydrostatic shooting could not bracket the outer radius")
    outer = brentq(_miss, lower, upper, xtol=1e-15, rtol=1e-15)
    _, cubes, density = _hydrostatic_march(law, mass, cells, outer)
    if cubes is None:
        raise InfeasibleError("hydrostatic march collapsed at the shooting root")
    radius = np.cbrt(cubes)
    radius[0] = inner_radius
    dx = mass / (OMEGA3 * cells)
    density = 3.0 * dx / (radius[1:] ** 3 - radius[:-1] ** 3)
    state = RadialState(
        radius=radius,
        velocity=np.zeros(cells + 1),
        density=density,
        mass=mass,
        epsilon=epsilon,
        rho_floor=defaults.DENSITY_FLOOR_FACTOR * float(density[-1]),
    )
    _report(state, law, {"rho_b": float(density[-1]), "alpha": boundary_exponent(law), "hydrostatic": True})
    return state.validate()


def snapshot_frame(state, law):
    """Per-cell snapshot rows: tau, j, x_j, r_(j+1/2), rho_j, u_(j+1/2), P(rho_j), Phi_r."""
    return pd.DataFrame(
        {
            "tau": np.full(state.cells, state.time),
            "j": np.arange(state.cells),
            "x": state.cell_mass,
            "r": state.radius[1:],
            "rho": state.density,
            "u": state.velocity[1:],
            "P": law.pressure(state.density),
            "phi_r": gravity(state)[1:],
        }
    )
