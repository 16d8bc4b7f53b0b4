"""Test the entropy kernel and the weak entropy pairs."""
import unittest

import numpy as np
from scipy.special import gamma as gamma_function

from nsp_lab.entropy import (
    KernelExpansion,
    KernelGrid,
    TestFunction,
    chi_closed_form,
    chi_general,
    closed_form_deviation,
    kernel_growth,
    kernel_mass,
    mechanical_hessian,
    mechanical_pair,
    sigma_minus_u_chi,
    weak_entropy_pair,
)
from nsp_lab.eos import Polytropic, WhiteDwarf, internal_energy, k_of_rho
from nsp_lab.exceptions import ConvergenceError, DomainError, NotApplicableError

MONATOMIC = Polytropic(kappa=1.0, gamma=5.0 / 3.0)
ISOTHERMAL_LIKE = Polytropic(kappa=1.0, gamma=2.0)
WHITE_DWARF = WhiteDwarf(C1=1.0, C2=1.0, C3=1.0)


class TestExpansion(unittest.TestCase):
    """Normalization and low-density coefficients."""

    def test_m_lambda(self):
        """M_lambda matches the Beta function closed form."""
        expansion = KernelExpansion(MONATOMIC)
        lam = expansion.lam
        integral = np.sqrt(np.pi) * gamma_function(lam + 1.0) / gamma_function(lam + 1.5)
        self.assertAlmostEqual(lam, 1.0, places=14)
        self.assertAlmostEqual(expansion.M * 2.0 * lam / np.sqrt(2.0 * lam + 1.0) * integral, 1.0, places=12)

    def test_polytropic_coefficients(self):
        """A single power law has no second-order coefficients and D agrees with its closed form."""
        expansion = KernelExpansion(ISOTHERMAL_LIKE)
        rho = np.geomspace(1e-4, 1e2, 7)
        coefficients = expansion.coefficients(rho)
        np.testing.assert_array_equal(coefficients.a2, 0.0)
        np.testing.assert_array_equal(coefficients.b2, 0.0)
        np.testing.assert_allclose(expansion.D(rho), expansion.D_closed(rho), rtol=1e-12)

    def test_bad_density(self):
        """Coefficients need positive densities."""
        self.assertRaises(DomainError, KernelExpansion(MONATOMIC).coefficients, [0.0, 1.0])


class TestClosedForm(unittest.TestCase):
    """Single power law kernels."""

    def test_support(self):
        """chi vanishes for |v| >= k."""
        k = float(k_of_rho(MONATOMIC, 2.0))
        values = chi_closed_form(MONATOMIC, 2.0, np.array([-1.5 * k, -k, 0.0, k, 1.5 * k]))
        self.assertEqual(values[0], 0.0)
        self.assertEqual(values[-1], 0.0)
        self.assertGreater(values[2], 0.0)

    def test_flux_kernel(self):
        """sigma - u chi = -theta v chi."""
        v = np.linspace(-1.0, 1.0, 5)
        expected = -MONATOMIC.theta1 * v * chi_closed_form(MONATOMIC, 1.0, v)
        np.testing.assert_allclose(sigma_minus_u_chi(MONATOMIC, 1.0, v), expected, rtol=1e-14)

    def test_needs_power_law(self):
        """The closed forms are only defined for a single power law."""
        law = WhiteDwarf(C1=1.0, C2=1.0, C3=1.0)
        self.assertRaises(NotApplicableError, chi_closed_form, law, 1.0, 0.0)
        self.assertRaises(NotApplicableError, closed_form_deviation, law, 1.0)

    def test_mass(self):
        """The normalized kernel carries unit mass."""
        self.assertAlmostEqual(kernel_mass(MONATOMIC, 0.3), 1.0, places=12)
        self.assertAlmostEqual(kernel_mass(MONATOMIC, 40.0), 1.0, places=12)
        self.assertAlmostEqual(kernel_mass(ISOTHERMAL_LIKE, 2.0), 1.0, places=12)

    def test_growth(self):
        """sup chi is linear in rho for a single power law."""
        constants = kernel_growth(MONATOMIC, 1e-3, 1e3)
        self.assertTrue(np.isfinite(constants["chi"]))
        self.assertGreater(constants["chi"], 0.0)
        self.assertTrue(np.isfinite(constants["sigma_minus_u_chi"]))


class TestMarchedKernel(unittest.TestCase):
    """Representation formula marched on a level grid."""

    def test_against_closed_form(self):
        """The marched tables follow the closed forms of a single power law."""
        for gamma in (5.0 / 3.0, 1.4, 2.0):
            with self.subTest(gamma=gamma):
                deviation = closed_form_deviation(Polytropic(kappa=1.0, gamma=gamma), 1.0, levels=128, nodes=129)
                self.assertLessEqual(deviation["chi"], 1e-3)
                self.assertLessEqual(deviation["flux"], 1e-3)
                self.assertLessEqual(deviation["support"], 1e-8)

    def test_refinement(self):
        """Grid-to-grid differences of a white-dwarf kernel shrink as the grid is refined."""
        reference = KernelGrid(WHITE_DWARF, 2.0, 64, 65)
        rho = np.repeat([0.5, 2.0], 9)
        xi = np.tile(np.linspace(-0.8, 0.8, 9), 2)
        exact = reference.phi_at(rho, xi)
        gaps = []
        for levels in (8, 16, 32):
            grid = KernelGrid(WHITE_DWARF, 2.0, levels, levels + 1)
            gaps.append(float(np.max(np.abs(grid.phi_at(rho, xi) - exact) / np.abs(exact))))
        self.assertGreater(gaps[0], gaps[1])
        self.assertGreater(gaps[1], gaps[2])
        self.assertLess(gaps[2], 1e-3)

    def test_level_iteration(self):
        """A level that cannot settle within the sweep cap raises with its delta history."""
        with self.assertRaises(ConvergenceError) as context:
            KernelGrid(WHITE_DWARF, 1.0, 4, 9, tol=1e-14, max_iters=1)
        self.assertEqual(len(context.exception.deltas), 1)

    def test_level_sweeps(self):
        """Every level settles and the first level agrees with the low-density expansion."""
        grid = KernelGrid(WHITE_DWARF, 1e-3, 16, 17)
        self.assertTrue(np.all(grid.iterations[1:] >= 1))
        self.assertLess(grid.ratio, 1.0)
        self.assertLess(grid.seed_mismatch, 1e-3)

    def test_white_dwarf_mass(self):
        """The white-dwarf kernel carries unit mass near vacuum."""
        self.assertAlmostEqual(kernel_mass(WHITE_DWARF, 1e-6, resolution=(32, 33)), 1.0, delta=0.01)

    def test_vacuum(self):
        """The kernel is zero at vacuum."""
        np.testing.assert_array_equal(chi_general(MONATOMIC, 0.0, np.array([0.0, 0.5])), 0.0)

    def test_range(self):
        """Densities above the grid range are rejected."""
        self.assertRaises(
            DomainError, chi_general, MONATOMIC, np.array([2.0]), np.array([0.0]), (16, 17), 1.0
        )


class TestTestFunction(unittest.TestCase):
    """Sampled test functions."""

    def test_bump(self):
        """The bump peaks at its centre and vanishes outside its support."""
        psi = TestFunction.bump(center=1.0, radius=0.5)
        self.assertAlmostEqual(float(psi(1.0)), 1.0, places=12)
        self.assertEqual(float(psi(2.0)), 0.0)
        self.assertEqual(psi.support, (0.5, 1.5))

    def test_empty_support(self):
        """Supports must be non-empty."""
        self.assertRaises(DomainError, TestFunction, (1.0, 1.0), [0.0, 0.0])


class TestWeakPair(unittest.TestCase):
    """Weak entropy pairs generated by test functions."""

    def setUp(self):
        """Setup."""
        self.rho = np.array([0.0, 0.2, 1.0, 5.0])
        self.u = np.array([0.0, -0.3, 0.1, 0.7])

    def test_zero_generator(self):
        """psi = 0 generates the zero pair."""
        eta, q = weak_entropy_pair(MONATOMIC, TestFunction.zero(), self.rho, self.u)
        np.testing.assert_array_equal(eta, 0.0)
        np.testing.assert_array_equal(q, 0.0)

    def test_unit_generator(self):
        """psi = 1 on a wide support generates (rho, rho u)."""
        psi = TestFunction((-100.0, 100.0), np.ones(3))
        eta, q = weak_entropy_pair(MONATOMIC, psi, self.rho, self.u)
        np.testing.assert_allclose(eta, self.rho, rtol=1e-10, atol=1e-14)
        np.testing.assert_allclose(q, self.rho * self.u, rtol=1e-8, atol=1e-12)

    def test_negative_density(self):
        """Negative densities are rejected."""
        self.assertRaises(DomainError, weak_entropy_pair, MONATOMIC, TestFunction.zero(), -1.0, 0.0)


class TestMechanicalPair(unittest.TestCase):
    """Mechanical energy pair."""

    def test_values(self):
        """eta* and q* follow their definitions."""
        rho, m = 2.0, 3.0
        e = float(internal_energy(ISOTHERMAL_LIKE, rho))
        eta, q = mechanical_pair(ISOTHERMAL_LIKE, rho, m)
        self.assertAlmostEqual(float(eta), m**2 / (2.0 * rho) + rho * e, places=12)
        self.assertAlmostEqual(float(q), m**3 / (2.0 * rho**2) + m * (e + rho), places=12)

    def test_vacuum(self):
        """The pair vanishes at vacuum."""
        eta, q = mechanical_pair(ISOTHERMAL_LIKE, 0.0, 0.0)
        self.assertEqual(float(eta), 0.0)
        self.assertEqual(float(q), 0.0)

    def test_hessian_determinant(self):
        """det D^2 eta* = P' / rho^2."""
        rho = np.array([0.5, 2.0])
        m = np.array([1.0, -3.0])
        hessian = mechanical_hessian(ISOTHERMAL_LIKE, rho, m)
        np.testing.assert_allclose(np.linalg.det(hessian), ISOTHERMAL_LIKE.dpressure(rho) / rho**2, rtol=1e-12)
        self.assertRaises(DomainError, mechanical_hessian, ISOTHERMAL_LIKE, 0.0, 1.0)
