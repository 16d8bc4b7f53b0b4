"""Energy, BD and higher-integrability functionals of a Lagrangian state, and the per-step ledger.

Kinetic and internal energies are full 3-D integrals (factor w3); the
gravitational term follows the radial form E_grav = 1/2 int |Phi_r|^2 r^2 dr,
so the conserved total is E_kin + E_int - w3 E_grav.
"""
#  pylint: disable=too-many-instance-attributes,too-many-locals
import logging
from typing import NamedTuple

import numpy as np
import pandas as pd

from nsp_lab.critical_mass import sobolev_constant, surface_area
from nsp_lab.eos.functions import internal_energy
from nsp_lab.exceptions import DomainError

LOGGER = logging.getLogger(__name__)

OMEGA3 = surface_area(3)
A3 = sobolev_constant(3)

LEDGER_COLUMNS = (
    "tau",
    "mass",
    "E_total",
    "E_kinetic",
    "E_internal",
    "E_grav",
    "BD_functional",
    "rho_boundary",
    "b_of_t",
    "dt",
    "rho_P_integral",
    "rho_u3_integral",
    "E_total_alt",
    "dissipation",
    "energy_residual",
    "boundary_term",
    "bd_gradient",
    "bd_dissipation",
    "bd_boundary_flux",
    "rho_gamma_integral",
    "rho_boundary_lower",
    "b_integrated",
    "sobolev_ratio",
)


class Energies(NamedTuple):
    """Energy functionals of one state."""

    kinetic: float
    internal: float
    gravitational: float
    bd: float

    @property
    def total(self):
        """E_kin + E_int - w3 E_grav."""
        return self.kinetic + self.internal - OMEGA3 * self.gravitational

    @property
    def total_alt(self):
        """E_kin + E_int + w3 E_grav."""
        return self.kinetic + self.internal + OMEGA3 * self.gravitational


class BDTerms(NamedTuple):
    """Instantaneous pieces of the BD functional."""

    gradient: float
    boundary: float
    dissipation_rate: float
    boundary_flux_rate: float


def gravitational_energy(state):
    """1/2 int_a^inf x(r)^2 / r^2 dr with x piecewise cubic inside each cell.

    Inside cell j, x(r) = A + B r^3 with B = rho_j / 3, integrated exactly; beyond
    b(t) the field is (M / w3) / r^2.
    """
    r0 = state.radius[:-1]
    r1 = state.radius[1:]
    slope = state.density / 3.0
    offset = state.edge_mass[:-1] - slope * r0**3
    cells = offset**2 * (1.0 / r0 - 1.0 / r1) + offset * slope * (r1**2 - r0**2) + slope**2 * (r1**5 - r0**5) / 5.0
    outer = state.edge_mass[-1] ** 2 / r1[-1]
    return 0.5 * float(np.sum(cells) + outer)


def energy_functionals(state, law):
    """(E_kin, E_int, E_grav, BD) of ``state``; BD is the instantaneous part eps^2 |(sqrt rho)_r|^2 + P b^3 / 3.

    Args:
        state (RadialState): Lagrangian state.
        law (PressureLaw): Pressure law.

    Returns:
        Energies: The four functionals; ``total`` and ``total_alt`` give both sign conventions.
    """
    kinetic = OMEGA3 * 0.5 * float(np.sum(state.edge_weight * state.velocity**2))
    internal = OMEGA3 * float(np.sum(internal_energy(law, state.density))) * state.dx
    terms = bd_terms(state, law)
    return Energies(kinetic, internal, gravitational_energy(state), terms.gradient + terms.boundary)


def _edge_slopes(state, values):
    """Differences of a cell field across interior edges divided by the centre spacing."""
    centers = state.centers
    spacing = np.diff(centers)
    return np.diff(values) / spacing, spacing


def bd_terms(state, law):
    """Gradient, boundary and rate pieces of the BD functional."""
    eps = state.epsilon
    radius = state.radius[1:-1]
    root_slope, spacing = _edge_slopes(state, np.sqrt(state.density))
    gradient = eps**2 * float(np.sum(root_slope**2 * radius**2 * spacing))
    rho_slope, _ = _edge_slopes(state, state.density)
    rho_edge = 0.5 * (state.density[1:] + state.density[:-1])
    dissipation = eps * float(np.sum(law.dpressure(rho_edge) / rho_edge * rho_slope**2 * radius**2 * spacing))
    rho_b = state.density[-1]
    b3 = state.boundary**3
    boundary = float(law.pressure(rho_b)) * b3 / 3.0
    flux = float(law.pressure(rho_b) * law.dpressure(rho_b)) * b3 / (3.0 * eps)
    return BDTerms(gradient, boundary, dissipation, flux)


def density_slope(state):
    """rho_x at the edges; zero at the pinned edge, one-sided at the free boundary."""
    slope = np.zeros(state.cells + 1)
    slope[1:-1] = np.diff(state.density) / state.dx
    slope[-1] = slope[-2]
    return slope


def compression(state):
    """rho^2 (r^2 u)_x = rho div u per cell."""
    flux = state.radius**2 * state.velocity
    return state.density**2 * np.diff(flux) / state.dx


def dissipation_rate(state):
    """Discrete viscous power: eps w3 [sum (rho div u)^2 dx / rho^2 + sum m 2 r rho_x u^2]."""
    eps = state.epsilon
    stretch = compression(state)
    bulk = float(np.sum(stretch**2 / state.density**2)) * state.dx
    drift = float(np.sum(state.edge_weight * 2.0 * state.radius * density_slope(state) * state.velocity**2))
    return OMEGA3 * eps * (bulk + drift)


def sobolev_check(state):
    """||grad Phi||^2 / (A3 ||rho||_{6/5}^2), at most 1 up to discretization.

    >>> import numpy as np
    >>> from nsp_lab.solver.state import RadialState
    >>> r = np.linspace(0.01, 1.0, 201)
    >>> rho = np.ones(200)
    >>> dx = float(np.sum((r[1:] ** 3 - r[:-1] ** 3) / 3.0)) / 200
    >>> state = RadialState(radius=np.cbrt(0.01**3 + 3.0 * dx * np.arange(201)), velocity=np.zeros(201),
    ...                     density=rho, mass=OMEGA3 * dx * 200, epsilon=0.1)
    >>> sobolev_check(state) < 1.0
    True
    """
    field_norm = 2.0 * OMEGA3 * gravitational_energy(state)
    volume = state.dx / state.density
    rho_norm = (OMEGA3 * float(np.sum(state.density ** (6.0 / 5.0) * volume))) ** (5.0 / 3.0)
    return field_norm / (A3 * rho_norm)


def lower_bound_constant(law):
    """(1 + a0) kappa1, the upper low-density constant of the pressure law.

    >>> from nsp_lab.eos import Polytropic
    >>> round(lower_bound_constant(Polytropic(kappa=1.0, gamma=2.0)), 12)
    1.166666666667
    """
    return (1.0 + law.a0) * law.kappa1


def boundary_lower_bound(law, rho_b0, constant, epsilon, time):
    """rho0(b) (1 + C (gamma1 - 1) rho0(b)^(gamma1 - 1) t / eps)^(-1 / (gamma1 - 1))."""
    g = law.gamma1 - 1.0
    return rho_b0 * (1.0 + constant * g * rho_b0**g * time / epsilon) ** (-1.0 / g)


class DiagnosticsLedger:
    """Per-step scalar ledger with trapezoid-in-time accumulators.

    Args:
        law (PressureLaw): Pressure law.
        window (tuple): (d, D) for the window accumulators.
    """

    def __init__(self, law, window):
        """Start an empty ledger."""
        d, upper = window
        if not 0.0 < d < upper:
            raise DomainError(f"window needs 0 < d < D, got ({d}, {upper})")
        self.law = law
        self.window = (float(d), float(upper))
        self.rows = []
        self._previous = None
        self._start = None

    def _rates(self, state):
        d, upper = self.window
        centers = state.centers
        outside = centers >= d
        edges = (state.radius >= d) & (state.radius <= upper)
        terms = bd_terms(state, self.law)
        return {
            "rho_P": float(np.sum(self.law.pressure(state.density[outside]))) * state.dx,
            "rho_u3": float(np.sum(state.edge_weight[edges] * np.abs(state.velocity[edges]) ** 3)),
            "rho_gamma": float(np.sum(state.density[outside] ** self.law.gamma2)) * state.dx,
            "dissipation": dissipation_rate(state),
            "bd_dissipation": terms.dissipation_rate,
            "bd_flux": terms.boundary_flux_rate,
            "u_b": float(state.velocity[-1]),
        }

    def record(self, state, dt=0.0):
        """Append the row for ``state``, reached from the previous record by a step ``dt``."""
        energies = energy_functionals(state, self.law)
        terms = bd_terms(state, self.law)
        rates = self._rates(state)
        if self._previous is None:
            rho_b0 = float(state.density[-1])
            self._start = {
                "E0": energies.total,
                "rho_b0": rho_b0,
                "constant": lower_bound_constant(self.law),
                "b0": state.boundary,
            }
            totals = dict.fromkeys(("rho_P", "rho_u3", "rho_gamma", "dissipation", "bd_dissipation", "bd_flux"), 0.0)
            totals["b"] = state.boundary
        else:
            previous_rates, previous_totals = self._previous
            totals = {
                key: previous_totals[key] + 0.5 * dt * (previous_rates[key] + rates[key])
                for key in ("rho_P", "rho_u3", "rho_gamma", "dissipation", "bd_dissipation", "bd_flux")
            }
            totals["b"] = previous_totals["b"] + 0.5 * dt * (previous_rates["u_b"] + rates["u_b"])
        self._previous = (rates, totals)
        start = self._start
        self.rows.append(
            {
                "tau": state.time,
                "mass": state.total_mass,
                "E_total": energies.total,
                "E_kinetic": energies.kinetic,
                "E_internal": energies.internal,
                "E_grav": energies.gravitational,
                "BD_functional": terms.gradient + totals["bd_dissipation"] + terms.boundary,
                "rho_boundary": float(state.density[-1]),
                "b_of_t": state.boundary,
                "dt": dt,
                "rho_P_integral": totals["rho_P"],
                "rho_u3_integral": totals["rho_u3"],
                "E_total_alt": energies.total_alt,
                "dissipation": totals["dissipation"],
                "energy_residual": energies.total + totals["dissipation"] - start["E0"],
                "boundary_term": terms.boundary,
                "bd_gradient": terms.gradient,
                "bd_dissipation": totals["bd_dissipation"],
                "bd_boundary_flux": totals["bd_flux"],
                "rho_gamma_integral": totals["rho_gamma"],
                "rho_boundary_lower": boundary_lower_bound(
                    self.law, start["rho_b0"], start["constant"], state.epsilon, state.time
                ),
                "b_integrated": totals["b"],
                "sobolev_ratio": sobolev_check(state),
            }
        )

    def energy_scale(self):
        """E_kin + E_int + w3 E_grav at the first record, the scale of the energy residual."""
        first = self.rows[0]
        return first["E_kinetic"] + first["E_internal"] + OMEGA3 * first["E_grav"]

    def frame(self):
        """Ledger as a DataFrame with the documented column order."""
        return pd.DataFrame(self.rows, columns=list(LEDGER_COLUMNS))

    def summary(self):
        """Terminal row plus extrema used by sweep reports."""
        frame = self.frame()
        last = frame.iloc[-1].to_dict()
        last["energy_scale"] = self.energy_scale()
        last["max_abs_energy_residual"] = float(frame["energy_residual"].abs().max())
        last["max_sobolev_ratio"] = float(frame["sobolev_ratio"].max())
        last["mass_drift"] = float((frame["mass"] - frame["mass"].iloc[0]).abs().max())
        last["min_boundary_margin"] = float((frame["rho_boundary"] - frame["rho_boundary_lower"]).min())
        last["steps"] = len(frame) - 1
        return last

    def check_finite(self):
        """Names of ledger columns holding NaN or infinite values."""
        frame = self.frame()
        return [column for column in frame.columns if not np.all(np.isfinite(frame[column].to_numpy(dtype=float)))]
