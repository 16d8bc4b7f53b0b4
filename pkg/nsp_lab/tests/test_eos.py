"""Test pressure laws and thermodynamic functions."""
import unittest

import numpy as np
from scipy.integrate import quad

from nsp_lab.eos import (
    PDelta,
    Polytropic,
    WhiteDwarf,
    build_law,
    d_of_rho,
    eos_table,
    internal_energy,
    k_direct,
    k_inverse,
    k_of_rho,
    pressure,
    resolve_thresholds,
    verify_asymptotic_bounds,
)
from nsp_lab.exceptions import BoundViolationError, DomainError, LawError


class TestPolytropic(unittest.TestCase):
    """Closed forms of a single power law."""

    def setUp(self):
        """Setup."""
        self.law = Polytropic(kappa=1.0, gamma=2.0)
        self.rho = np.geomspace(1e-6, 1e6, 25)

    def test_closed_forms(self):
        """Pressure, k and e follow the power law formulas."""
        np.testing.assert_allclose(pressure(self.law, self.rho), self.rho**2, rtol=1e-14)
        np.testing.assert_allclose(k_of_rho(self.law, self.rho), 2.0 * np.sqrt(2.0) * np.sqrt(self.rho), rtol=1e-14)
        np.testing.assert_allclose(internal_energy(self.law, self.rho), self.rho, rtol=1e-14)

    def test_k_matches_quadrature(self):
        """The closed form k agrees with the integral definition."""
        rho = np.array([1e-3, 0.7, 50.0])
        np.testing.assert_allclose(k_direct(self.law, rho), k_of_rho(self.law, rho), rtol=1e-10)

    def test_vacuum(self):
        """Every function vanishes at rho = 0."""
        self.assertEqual(float(pressure(self.law, 0.0)), 0.0)
        self.assertEqual(float(k_of_rho(self.law, 0.0)), 0.0)
        self.assertEqual(float(internal_energy(self.law, 0.0)), 0.0)

    def test_negative_density(self):
        """Negative densities are outside the domain."""
        self.assertRaises(DomainError, pressure, self.law, -1.0)
        self.assertRaises(DomainError, d_of_rho, self.law, 0.0)

    def test_bounds_pass(self):
        """A power law meets its own tail bounds with margin."""
        report = verify_asymptotic_bounds(self.law)
        self.assertTrue(report.passed)
        self.assertGreaterEqual(report.margin, 0.0)
        self.assertEqual(resolve_thresholds(self.law), (0.5, 2.0))

    def test_d_constant(self):
        """d(rho) = (gamma + 1) / 2 for a single power law."""
        np.testing.assert_allclose(d_of_rho(self.law, self.rho), 1.5, rtol=1e-14)


class TestWhiteDwarf(unittest.TestCase):
    """Degenerate electron gas law."""

    def setUp(self):
        """Setup."""
        self.law = WhiteDwarf(C1=1.0, C2=1.0, C3=1.0)

    def test_derived_constants(self):
        """Exponents and tail coefficients follow from C1, C2, C3."""
        law = WhiteDwarf(C1=2.0, C2=1.5, C3=0.5)
        self.assertAlmostEqual(law.gamma1, 5.0 / 3.0, places=14)
        self.assertAlmostEqual(law.gamma2, 4.0 / 3.0, places=14)
        self.assertAlmostEqual(law.kappa1, 2.0 * 1.5**5 / (5.0 * np.sqrt(0.5)), places=12)
        self.assertAlmostEqual(law.kappa2, 2.0 * 1.5**4 / 4.0, places=12)
        self.assertAlmostEqual(law.epsilon, 2.0 / 3.0, places=14)

    def test_pressure_matches_quadrature(self):
        """Series and Gauss pieces reproduce the defining integral."""
        for rho in (1e-9, 0.05, 1.0, 30.0, 1e7):
            upper = rho ** (1.0 / 3.0)
            exact, _ = quad(lambda s: s**4 / np.sqrt(1.0 + s**2), 0.0, upper, epsabs=0.0, epsrel=1e-13)
            self.assertAlmostEqual(float(self.law.pressure(rho)) / exact, 1.0, places=9)

    def test_d_law(self):
        """d(rho) = 7/6 + 1/(6 (1 + x^2)) with x = rho^(1/3)."""
        rho = np.geomspace(1e-6, 1e6, 13)
        x = np.cbrt(rho)
        np.testing.assert_allclose(d_of_rho(self.law, rho), 7.0 / 6.0 + 1.0 / (6.0 * (1.0 + x**2)), rtol=1e-13)

    def test_tail_ratios(self):
        """Pressure approaches kappa1 rho^(5/3) at vacuum and kappa2 rho^(4/3) at high density."""
        low = float(self.law.pressure(1e-9)) / (self.law.kappa1 * 1e-9 ** (5.0 / 3.0))
        high = float(self.law.pressure(1e9)) / (self.law.kappa2 * 1e9 ** (4.0 / 3.0))
        self.assertAlmostEqual(low, 1.0, places=5)
        self.assertAlmostEqual(high, 1.0, places=3)

    def test_table_matches_quadrature(self):
        """The interpolated k agrees with adaptive quadrature."""
        rho = np.array([1e-4, 0.3, 8.0, 2e3])
        np.testing.assert_allclose(k_of_rho(self.law, rho), k_direct(self.law, rho), rtol=1e-6)

    def test_k_inverse(self):
        """k_inverse undoes k."""
        rho = np.geomspace(1e-5, 1e5, 11)
        np.testing.assert_allclose(k_inverse(self.law, k_of_rho(self.law, rho)), rho, rtol=1e-8)

    def test_forced_threshold_violation(self):
        """A low-density threshold deep in the relativistic regime violates the bounds."""
        with self.assertRaises(BoundViolationError) as context:
            verify_asymptotic_bounds(self.law, samples=np.array([1e6]), rho_low=1e6, rho_high=1e7)
        self.assertFalse(context.exception.report.passed)
        report = verify_asymptotic_bounds(
            self.law, samples=np.array([1e6]), rho_low=1e6, rho_high=1e7, raise_on_failure=False
        )
        self.assertFalse(report.passed)
        self.assertLess(report.margin, 0.0)

    def test_table_columns(self):
        """eos_table carries every tabulated function."""
        frame = eos_table(self.law, np.geomspace(1e-3, 1e3, 7))
        self.assertEqual(list(frame.columns), ["rho", "P", "c", "k", "e", "d", "rho_k2_over_k1"])
        self.assertEqual(len(frame), 7)
        self.assertRaises(DomainError, eos_table, self.law, np.array([0.0, 1.0]))


class TestBuildLaw(unittest.TestCase):
    """Law construction from configuration mappings."""

    def test_kinds(self):
        """Each kind builds its own class."""
        self.assertIsInstance(build_law({"kind": "polytropic", "kappa": 1.0, "gamma": 1.5}), Polytropic)
        self.assertIsInstance(build_law({"kind": "white_dwarf", "C1": 1.0, "C2": 1.0, "C3": 1.0}), WhiteDwarf)
        self.assertIsInstance(build_law({"kind": "p_delta", "delta": 1.0, "eps0": 0.4}), PDelta)

    def test_p_delta_exponent(self):
        """gamma2 = 4/3 - eps0 / 6 for the perturbed law."""
        law = PDelta(delta=1.0, eps0=0.4)
        self.assertAlmostEqual(law.gamma2, 4.0 / 3.0 - 0.4 / 6.0, places=14)
        self.assertAlmostEqual(law.gamma1, 5.0 / 3.0, places=14)

    def test_unknown_kind(self):
        """Unknown kinds are rejected."""
        self.assertRaises(LawError, build_law, {"kind": "ideal_gas", "gamma": 1.4})

    def test_inadmissible(self):
        """Exponents outside (1, 3) and eps0 outside (0, 0.8) are rejected."""
        self.assertRaises(LawError, build_law, {"kind": "polytropic", "kappa": 1.0, "gamma": 3.5})
        self.assertRaises(LawError, build_law, {"kind": "polytropic", "kappa": 1.0, "gamma": 1.0})
        self.assertRaises(LawError, build_law, {"kind": "p_delta", "delta": 1.0, "eps0": 0.9})

    def test_passthrough(self):
        """An existing law is returned unchanged."""
        law = Polytropic(kappa=2.0, gamma=1.4)
        self.assertIs(build_law(law), law)


class TestTailBounds(unittest.TestCase):
    """Every sandwich bound is checked on both tails."""

    QUANTITIES = ("P", "P'", "P''", "e'", "k'", "e", "k", "|k''|")

    def test_degenerate_laws(self):
        """The white dwarf and perturbed laws meet each bound at their resolved thresholds."""
        for law in (WhiteDwarf(C1=1.0, C2=1.0, C3=1.0), PDelta(delta=1.0, eps0=0.4)):
            report = verify_asymptotic_bounds(law, raise_on_failure=False)
            checks = {(check.quantity, check.tail): check for check in report.checks}
            for tail in ("low", "high"):
                for quantity in self.QUANTITIES:
                    with self.subTest(law=law.kind, tail=tail, quantity=quantity):
                        check = checks[(quantity, tail)]
                        self.assertTrue(check.asserted)
                        self.assertTrue(check.passed)
                        self.assertGreaterEqual(check.min_ratio, check.lower)
                        self.assertLessEqual(check.max_ratio, check.upper)
            self.assertTrue(report.passed)

    def test_high_tail_energy_violation(self):
        """A high threshold far below the relativistic regime fails the e and k bounds."""
        law = WhiteDwarf(C1=1.0, C2=1.0, C3=1.0)
        report = verify_asymptotic_bounds(
            law, samples=np.array([1e-3, 1e-2]), rho_low=1e-4, rho_high=1e-3, raise_on_failure=False
        )
        failed = {check.quantity for check in report.checks if check.tail == "high" and not check.passed}
        self.assertIn("e", failed)
        self.assertIn("k", failed)
        self.assertFalse(report.passed)
