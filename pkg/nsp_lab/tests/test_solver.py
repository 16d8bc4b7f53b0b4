"""Test the Lagrangian solver."""
import unittest
from dataclasses import replace

import numpy as np

from nsp_lab.diagnostics import LEDGER_COLUMNS
from nsp_lab.eos import Polytropic
from nsp_lab.exceptions import BlowupError, InfeasibleError, StepRejected
from nsp_lab.solver import (
    InitialDataSpec,
    ProfileSpec,
    admissible_dt,
    boundary_exponent,
    boundary_level,
    build_initial_data,
    gravity,
    hydrostatic_state,
    pressure_inverse,
    run,
    snapshot_frame,
    snapshot_times,
    step,
)

LAW = Polytropic(kappa=1.0, gamma=2.0)


class TestSnapshotTimes(unittest.TestCase):
    """Output schedules."""

    def test_geometric(self):
        """Geometric times start at T / 1000 and end at T."""
        times = snapshot_times(2.0, count=4)
        self.assertAlmostEqual(times[0], 2e-3, places=15)
        self.assertEqual(times[-1], 2.0)
        self.assertTrue(np.all(np.diff(times) > 0.0))

    def test_invalid(self):
        """Empty or unknown schedules are rejected."""
        self.assertRaises(ValueError, snapshot_times, 0.0, 3)
        self.assertRaises(ValueError, snapshot_times, 1.0, 0)
        self.assertRaises(ValueError, snapshot_times, 1.0, 3, "random")


class TestInitialData(unittest.TestCase):
    """Discrete initial state."""

    def setUp(self):
        """Setup."""
        self.spec = InitialDataSpec(M=1.0, b=100.0, epsilon=0.1, N=64)
        self.state = build_initial_data(self.spec, LAW)

    def test_geometry(self):
        """Edges span [1/b, b] monotonically."""
        self.assertEqual(self.state.inner_radius, 0.01)
        self.assertEqual(self.state.boundary, 100.0)
        self.assertTrue(np.all(np.diff(self.state.radius) > 0.0))
        self.assertTrue(np.all(self.state.density > 0.0))

    def test_mass(self):
        """Uniform mass cells add up to M."""
        self.assertAlmostEqual(self.state.total_mass, 1.0, places=12)
        self.assertEqual(self.state.edge_mass[-1], self.state.dx * 64)

    def test_boundary_level(self):
        """The boundary density is b^-(3 - alpha) with alpha = min(1/2, 3 (gamma1 - 1) / gamma1)."""
        self.assertEqual(boundary_exponent(LAW), 0.5)
        self.assertAlmostEqual(boundary_level(LAW, 100.0), 100.0**-2.5, places=15)
        self.assertAlmostEqual(self.state.info["rho_b"] / 100.0**-2.5, 1.0, places=12)

    def test_energies_reported(self):
        """E0 and E1 are stored with the state."""
        self.assertIn("E0", self.state.info)
        self.assertIn("E1", self.state.info)
        self.assertGreater(self.state.info["E1"], 0.0)

    def test_rest(self):
        """The default profile starts at rest."""
        np.testing.assert_array_equal(self.state.velocity, 0.0)

    def test_gravity(self):
        """Phi_r = x / r^2 vanishes at the inner radius."""
        field = gravity(self.state)
        self.assertEqual(field[0], 0.0)
        self.assertAlmostEqual(field[-1], self.state.mass / (4.0 * np.pi * 100.0**2), places=15)

    def test_infeasible_tail(self):
        """A tail heavier than M is infeasible."""
        spec = InitialDataSpec(M=1.0, b=10.0, epsilon=0.1, N=16)
        self.assertRaises(InfeasibleError, build_initial_data, spec, LAW)

    def test_snapshot_frame(self):
        """Snapshots carry one row per cell."""
        frame = snapshot_frame(self.state, LAW)
        self.assertEqual(list(frame.columns), ["tau", "j", "x", "r", "rho", "u", "P", "phi_r"])
        self.assertEqual(len(frame), 64)


class TestStep(unittest.TestCase):
    """Single time steps."""

    def setUp(self):
        """Setup."""
        spec = InitialDataSpec(M=1.0, b=100.0, epsilon=0.1, N=32, profile=ProfileSpec(velocity=0.2))
        self.state = build_initial_data(spec, LAW)

    def test_mass_exact(self):
        """A step conserves mass to round-off."""
        dt = admissible_dt(self.state, LAW)
        after = step(self.state, dt, LAW)
        self.assertAlmostEqual(after.total_mass, self.state.total_mass, places=13)
        self.assertEqual(after.inner_radius, self.state.inner_radius)
        self.assertEqual(after.velocity[0], 0.0)
        self.assertAlmostEqual(after.time, dt, places=15)

    def test_rejected(self):
        """Steps above the CFL limit are rejected with the admissible step attached."""
        dt = admissible_dt(self.state, LAW)
        with self.assertRaises(StepRejected) as context:
            step(self.state, 10.0 * dt, LAW)
        self.assertAlmostEqual(context.exception.admissible, dt, places=15)

    def test_blowup(self):
        """Crossed edges are reported with their cell."""
        radius = self.state.radius.copy()
        radius[5], radius[6] = radius[6], radius[5]
        broken = replace(self.state, radius=radius)
        with self.assertRaises(BlowupError) as context:
            broken.validate()
        self.assertEqual(context.exception.cell, 5)


class TestRun(unittest.TestCase):
    """Short runs."""

    @classmethod
    def setUpClass(cls):
        """Run once for the whole class."""
        cls.spec = InitialDataSpec(M=1.0, b=100.0, epsilon=0.1, N=64)
        cls.result = run(cls.spec, LAW, 0.05, snapshots=4, schedule="uniform")

    def test_completes(self):
        """The run reaches T with every snapshot."""
        self.assertFalse(self.result.failed)
        self.assertIsNone(self.result.failure)
        np.testing.assert_allclose(self.result.times, [0.0, 0.0125, 0.025, 0.0375, 0.05], atol=1e-12)
        self.assertEqual(len(self.result.trajectory()), 5 * 64)

    def test_ledger(self):
        """The ledger has the documented columns and only finite values."""
        frame = self.result.ledger_frame()
        self.assertEqual(list(frame.columns), list(LEDGER_COLUMNS))
        self.assertEqual(self.result.ledger.check_finite(), [])

    def test_mass_drift(self):
        """Mass stays at M to machine precision."""
        summary = self.result.ledger.summary()
        self.assertLessEqual(summary["mass_drift"], 1e-12)

    def test_energy_balance(self):
        """Total energy plus dissipation stays close to E0."""
        summary = self.result.ledger.summary()
        self.assertLessEqual(summary["max_abs_energy_residual"], 5e-2 * summary["energy_scale"])

    def test_sobolev(self):
        """The gravitational field obeys the sharp Sobolev bound."""
        self.assertLessEqual(self.result.ledger.summary()["max_sobolev_ratio"], 1.0)

    def test_step_budget(self):
        """An exhausted step budget stops the run and keeps the partial products."""
        result = run(self.spec, LAW, 0.05, snapshots=2, schedule="uniform", max_steps=1)
        self.assertTrue(result.failed)
        self.assertIsInstance(result.error, BlowupError)
        self.assertEqual(len(result.ledger.rows), 2)
        self.assertGreaterEqual(len(result.snapshots), 2)
        self.assertEqual(float(result.snapshots[-1]["tau"].iloc[0]), result.state.time)
        self.assertLess(result.state.time, 0.05)

    def test_deterministic(self):
        """Identical inputs give identical ledgers."""
        again = run(self.spec, LAW, 0.05, snapshots=4, schedule="uniform")
        self.assertTrue(again.ledger_frame().equals(self.result.ledger_frame()))


class TestHydrostatic(unittest.TestCase):
    """Discrete static equilibrium."""

    def setUp(self):
        """Setup."""
        self.state = hydrostatic_state(LAW, 1.0, 32, 0.01, 0.1)

    def test_construction(self):
        """The equilibrium has mass M, the requested inner radius and no motion."""
        self.assertEqual(self.state.inner_radius, 0.01)
        self.assertAlmostEqual(self.state.total_mass, 1.0, places=12)
        self.assertTrue(self.state.info["hydrostatic"])
        self.assertTrue(np.all(np.diff(self.state.density) < 0.0))

    def test_holds(self):
        """The scheme keeps the equilibrium at rest."""
        result = run(None, LAW, 5.0, snapshots=2, schedule="uniform", state=self.state)
        self.assertFalse(result.failed)
        sound = float(np.sqrt(LAW.dpressure(self.state.density).max()))
        self.assertLessEqual(float(np.abs(result.state.velocity).max()), 1e-6 * sound)

    def test_pressure_inverse(self):
        """pressure_inverse undoes the pressure law."""
        self.assertAlmostEqual(pressure_inverse(LAW, 4.0), 2.0, places=14)


class TestBoundaryCell(unittest.TestCase):
    """The outer cell empties at the rate -P(rho) / eps."""

    def test_refinement(self):
        """The outer-cell density follows its ODE and stays above the lower bound as N grows."""
        final_time, epsilon = 0.02, 0.1
        for cells in (128, 256, 512):
            with self.subTest(cells=cells):
                spec = InitialDataSpec(M=1.0, b=100.0, epsilon=epsilon, N=cells)
                result = run(spec, LAW, final_time, snapshots=2, schedule="uniform")
                self.assertFalse(result.failed)
                frame = result.ledger_frame()
                rho = frame["rho_boundary"].to_numpy()
                self.assertTrue(np.all(np.diff(rho) <= 0.0))
                self.assertTrue(np.all(rho >= frame["rho_boundary_lower"].to_numpy()))
                # P = rho^2 integrates to rho0 / (1 + rho0 t / eps)
                exact = rho[0] / (1.0 + rho[0] * final_time / epsilon)
                self.assertAlmostEqual((rho[0] - rho[-1]) / (rho[0] - exact), 1.0, delta=0.25)

    def test_lower_bound_constant(self):
        """The ledger bound uses (1 + a0) kappa1 with a0 = (3 - gamma1) / (2 (gamma1 + 1))."""
        spec = InitialDataSpec(M=1.0, b=100.0, epsilon=0.1, N=32)
        frame = run(spec, LAW, 0.01, snapshots=1, schedule="uniform").ledger_frame()
        rho0 = float(frame["rho_boundary"].iloc[0])
        expected = rho0 / (1.0 + (7.0 / 6.0) * rho0 * 0.01 / 0.1)
        self.assertAlmostEqual(float(frame["rho_boundary_lower"].iloc[-1]) / expected, 1.0, places=12)
        self.assertEqual(float(frame["rho_boundary_lower"].iloc[0]), rho0)
