"""Test the special entropy pair."""
import unittest

import numpy as np

from nsp_lab.entropy import (
    SpecialEntropyPair,
    bound_constants,
    boundary_gap,
    characteristics_through,
    exterior_identity,
    goursat_residuals,
    solve_goursat,
    special_entropy,
    special_flux,
)
from nsp_lab.eos import Polytropic, internal_energy, k_of_rho
from nsp_lab.exceptions import ConvergenceError, DomainError, OutsideRegionError

LAW = Polytropic(kappa=1.0, gamma=2.0)


class TestCharacteristics(unittest.TestCase):
    """Feet of the characteristics through an interior point."""

    def test_feet_on_cone(self):
        """Both feet lie on u = +k and u = -k."""
        (rho1, u1), (rho2, u2) = characteristics_through(LAW, 2.0, 0.5)
        self.assertAlmostEqual(float(k_of_rho(LAW, rho1)), float(u1), places=12)
        self.assertAlmostEqual(float(k_of_rho(LAW, rho2)), float(-u2), places=12)

    def test_outside(self):
        """Points with |u| > k are rejected."""
        self.assertRaises(OutsideRegionError, characteristics_through, LAW, 1.0, 10.0)


class TestGoursat(unittest.TestCase):
    """Picard solve of the characteristic integral equations."""

    @classmethod
    def setUpClass(cls):
        """Solve once for the whole class."""
        cls.field = solve_goursat(LAW, rho_max=4.0, resolution=32)

    def test_contraction(self):
        """The iteration converges with a contraction ratio below one."""
        self.assertLess(self.field.ratio, 1.0)
        self.assertEqual(self.field.iterations, len(self.field.deltas))
        self.assertLess(self.field.deltas[-1], self.field.deltas[0])

    def test_boundary_data(self):
        """On u = k the field carries the mechanical energy."""
        self.assertLessEqual(boundary_gap(self.field), 1e-12)

    def test_exterior_identity(self):
        """The dissipation identity vanishes outside the cone."""
        self.assertLessEqual(exterior_identity(self.field), 1e-12)

    def test_exterior_values(self):
        """Outside the cone the entropy is plus or minus the mechanical energy."""
        rho = 1.5
        k = float(k_of_rho(LAW, rho))
        mechanical = 0.5 * rho * (2.0 * k) ** 2 + rho * float(internal_energy(LAW, rho))
        plus = special_entropy(self.field, LAW, rho, 2.0 * k)
        minus = special_entropy(self.field, LAW, rho, -2.0 * k)
        self.assertAlmostEqual(float(plus.eta) / mechanical, 1.0, places=12)
        self.assertAlmostEqual(float(minus.eta) / mechanical, -1.0, places=12)
        self.assertAlmostEqual(float(plus.eta_m), 2.0 * k, places=12)

    def test_odd_in_velocity(self):
        """The entropy is odd in u and vanishes at rest."""
        rho = np.array([0.5, 1.0, 3.0])
        u = 0.3 * k_of_rho(LAW, rho)
        plus = special_entropy(self.field, LAW, rho, u).eta
        minus = special_entropy(self.field, LAW, rho, -u).eta
        scale = np.max(np.abs(plus))
        np.testing.assert_allclose(plus, -minus, atol=1e-12 * scale)
        np.testing.assert_allclose(special_entropy(self.field, LAW, rho, 0.0 * rho).eta, 0.0, atol=1e-12 * scale)

    def test_flux_even_in_velocity(self):
        """The flux is even in u."""
        rho = np.array([0.5, 2.0])
        u = 0.6 * k_of_rho(LAW, rho)
        np.testing.assert_allclose(
            special_flux(self.field, LAW, rho, u), special_flux(self.field, LAW, rho, -u), rtol=1e-10
        )

    def test_beyond_table(self):
        """Interior queries above rho_max are rejected."""
        self.assertRaises(DomainError, special_entropy, self.field, LAW, 8.0, 0.0)

    def test_residuals_shrink(self):
        """Refining the grid lowers the entropy equation residual."""
        coarse = goursat_residuals(solve_goursat(LAW, rho_max=4.0, resolution=16))
        fine = goursat_residuals(self.field)
        self.assertEqual(fine.resolution, 32)
        self.assertLess(fine.entropy, coarse.entropy)

    def test_bound_constants(self):
        """Every fitted growth constant is finite and non-negative."""
        constants = bound_constants(self.field)
        self.assertEqual(set(constants), {"eta", "eta_m", "eta_m_rho", "eta_m_u", "q"})
        for value in constants.values():
            self.assertTrue(np.isfinite(value))
            self.assertGreaterEqual(value, 0.0)

    def test_frame(self):
        """The dump holds the triangle nodes only."""
        frame = self.field.to_frame()
        self.assertEqual(list(frame.columns), ["rho", "u", "eta", "eta_rho", "eta_u", "q"])
        self.assertEqual(len(frame), 33 * 34 // 2)


class TestGoursatFailures(unittest.TestCase):
    """Argument and convergence failures."""

    def test_iteration_cap(self):
        """A single iteration cannot meet a tight tolerance."""
        with self.assertRaises(ConvergenceError) as context:
            solve_goursat(LAW, rho_max=4.0, resolution=16, tol=1e-14, max_iters=1)
        self.assertEqual(len(context.exception.deltas), 1)

    def test_bad_resolution(self):
        """Resolutions below two are rejected."""
        self.assertRaises(DomainError, solve_goursat, LAW, rho_max=4.0, resolution=1)


class TestSpecialEntropyPair(unittest.TestCase):
    """Lazy pair that grows its table on demand."""

    def test_regrow(self):
        """Queries above rho_max double the table range once per overflow."""
        pair = SpecialEntropyPair(LAW, rho_max=1.0, resolution=16)
        pair.entropy(3.0, 0.0)
        self.assertEqual(pair.solves, [4.0])
        pair.flux(0.5, 0.1)
        self.assertEqual(pair.solves, [4.0])

    def test_exterior_keeps_range(self):
        """Exterior queries at high density do not grow the table."""
        pair = SpecialEntropyPair(LAW, rho_max=1.0, resolution=16)
        rho = 100.0
        pair.flux(rho, 3.0 * float(k_of_rho(LAW, rho)))
        self.assertEqual(pair.solves, [1.0])
