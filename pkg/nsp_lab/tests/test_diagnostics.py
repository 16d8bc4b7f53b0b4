"""Test ledgers, balances and sweeps."""
import unittest

import numpy as np

from nsp_lab.diagnostics import (
    DiagnosticsLedger,
    bd_terms,
    boundary_lower_bound,
    energy_functionals,
    entropy_dissipation_balance,
    gravitational_energy,
    sobolev_check,
)
from nsp_lab.diagnostics.sweeps import domain_sweep, epsilon_sweep, window_difference
from nsp_lab.entropy import TestFunction
from nsp_lab.eos import Polytropic
from nsp_lab.exceptions import DomainError
from nsp_lab.solver import InitialDataSpec, RadialState, build_initial_data, run
from nsp_lab.utilities import fitted_constant, fitted_rate, geometric_ratio, stability_ratio

LAW = Polytropic(kappa=1.0, gamma=2.0)
SPEC = InitialDataSpec(M=1.0, b=100.0, epsilon=0.1, N=32)
WINDOW = (0.1, 5.0)


def _uniform_ball(cells=400, outer=1.0, inner=1e-3):
    """Unit density shell [inner, outer] split into equal-mass cells."""
    cubes = np.linspace(inner**3, outer**3, cells + 1)
    dx = (outer**3 - inner**3) / (3.0 * cells)
    return RadialState(
        radius=np.cbrt(cubes),
        velocity=np.zeros(cells + 1),
        density=np.ones(cells),
        mass=4.0 * np.pi * dx * cells,
        epsilon=0.1,
    )


class TestFunctionals(unittest.TestCase):
    """Energy functionals of a fixed state."""

    def test_gravitational_energy_of_ball(self):
        """A unit ball of unit density has 1/2 (int_0^1 x^2 / r^2 dr + x(1)^2) = 1/15."""
        state = _uniform_ball(inner=1e-6)
        self.assertAlmostEqual(gravitational_energy(state), 1.0 / 15.0, places=9)

    def test_sobolev_ratio_below_one(self):
        """The Sobolev ratio of a uniform ball is below one."""
        ratio = sobolev_check(_uniform_ball())
        self.assertGreater(ratio, 0.0)
        self.assertLess(ratio, 1.0)

    def test_rest_energies(self):
        """A state at rest has no kinetic energy and a positive BD functional."""
        state = build_initial_data(SPEC, LAW)
        energies = energy_functionals(state, LAW)
        self.assertEqual(energies.kinetic, 0.0)
        self.assertGreater(energies.internal, 0.0)
        self.assertGreater(energies.bd, 0.0)
        self.assertAlmostEqual(energies.total_alt - energies.total, 2.0 * 4.0 * np.pi * energies.gravitational)
        terms = bd_terms(state, LAW)
        self.assertAlmostEqual(energies.bd, terms.gradient + terms.boundary, places=14)

    def test_boundary_lower_bound(self):
        """The boundary density bound starts at rho0(b) and decays in time."""
        law = Polytropic(kappa=1.0, gamma=5.0 / 3.0)
        self.assertEqual(boundary_lower_bound(law, 1e-3, 2.0, 0.1, 0.0), 1e-3)
        self.assertLess(boundary_lower_bound(law, 1e-3, 2.0, 0.1, 1.0), 1e-3)

    def test_window_validation(self):
        """Windows need 0 < d < D."""
        self.assertRaises(DomainError, DiagnosticsLedger, LAW, (1.0, 0.5))
        self.assertRaises(DomainError, DiagnosticsLedger, LAW, (0.0, 0.5))


class TestFitting(unittest.TestCase):
    """Fitted constants and rates."""

    def test_rate(self):
        """The fitted rate of y = x^2 is 2."""
        x = np.array([0.1, 0.05, 0.025])
        self.assertAlmostEqual(fitted_rate(x, 3.0 * x**2), 2.0, places=12)
        self.assertTrue(np.isnan(fitted_rate([1.0], [1.0])))

    def test_constant(self):
        """Non-positive bounds are skipped."""
        self.assertEqual(fitted_constant([1.0, 5.0], [0.5, 0.0]), 2.0)
        self.assertEqual(fitted_constant([1.0], [0.0]), 0.0)

    def test_ratios(self):
        """Geometric and stability ratios."""
        self.assertAlmostEqual(geometric_ratio([1.0, 0.5, 0.25, 0.125]), 0.5, places=14)
        self.assertTrue(np.isnan(stability_ratio([0.0, np.nan])))


class TestEntropyBalance(unittest.TestCase):
    """Entropy dissipation balance on a short run."""

    @classmethod
    def setUpClass(cls):
        """Run once for the whole class."""
        cls.result = run(SPEC, LAW, 0.02, snapshots=4, schedule="uniform", window=WINDOW)

    def test_zero_generator(self):
        """psi = 0 gives a zero divergence and zero source terms."""
        report = entropy_dissipation_balance(self.result, LAW, psi=TestFunction.zero())
        self.assertEqual(report.pair, "weak")
        for name in ("divergence", "I1", "I2", "I3", "I4", "I5", "residual", "viscous"):
            self.assertEqual(getattr(report, name), 0.0)

    def test_mechanical(self):
        """The mechanical pair balance has finite terms."""
        report = entropy_dissipation_balance(self.result, LAW)
        self.assertEqual(report.pair, "mechanical")
        self.assertEqual(report.epsilon, 0.1)
        self.assertIsNone(report.failure)
        for name in ("divergence", "I1", "I2", "I3", "I4", "I5", "residual"):
            self.assertTrue(np.isfinite(getattr(report, name)))
        self.assertGreaterEqual(report.viscous, 0.0)

    def test_bad_window(self):
        """Inverted windows are rejected."""
        self.assertRaises(DomainError, entropy_dissipation_balance, self.result, LAW, None, (2.0, 1.0))


class TestSweeps(unittest.TestCase):
    """Epsilon and domain sweeps."""

    def test_identical_viscosities(self):
        """Repeating a viscosity gives a zero window difference."""
        result = epsilon_sweep(SPEC, LAW, [0.1, 0.1], 0.02, window=WINDOW, snapshots=2, workers=1)
        self.assertEqual(result.axis, "epsilon")
        self.assertEqual(result.differences, [0.0])
        self.assertEqual(result.l2_differences, [0.0])
        self.assertTrue(result.monotone)
        self.assertFalse(result.partial)
        self.assertEqual(result.functional_ratios["E_internal"], 1.0)

    def test_increasing_viscosities(self):
        """Viscosity lists must not increase."""
        self.assertRaises(DomainError, epsilon_sweep, SPEC, LAW, [0.05, 0.1], 0.02, WINDOW)

    def test_window_inside_domain(self):
        """The window upper edge must exceed d."""
        self.assertRaises(DomainError, domain_sweep, SPEC, LAW, [50.0, 100.0], 0.02, (1.0, 0.5))

    def test_window_difference(self):
        """The window distance is symmetric and positive for different fields."""
        grid = np.linspace(0.1, 1.0, 11)
        times = np.array([0.0, 0.5, 1.0])
        first = (np.ones((3, 11)), np.zeros((3, 11)))
        second = (np.full((3, 11), 2.0), np.zeros((3, 11)))
        self.assertAlmostEqual(window_difference(first, second, grid, times), 0.9, places=12)
        self.assertAlmostEqual(window_difference(second, first, grid, times), 0.9, places=12)
        self.assertAlmostEqual(window_difference(first, second, grid, times, order=2), np.sqrt(0.9), places=12)
