"""Test the lab jobs."""
import filecmp
import json
import os
import tempfile
import unittest

from nsp_lab.jobs import (
    CriticalMassJob,
    EpsilonSweepJob,
    Job,
    KernelJob,
    SimulateJob,
    SpecialEntropyJob,
    jobs,
)
from nsp_lab.models import load_config
from nsp_lab.tests.fixtures import real_path

FIXTURES = os.environ.get("FIXTURE_DIR", real_path)


def _read_json(path):
    with open(path, "r", encoding="utf-8") as file:
        return json.load(file)


class JobTestCase(unittest.TestCase):
    """Temporary output directory and the polytropic fixture."""

    def setUp(self):
        """Setup."""
        self.tmp = tempfile.TemporaryDirectory()  # pylint: disable=consider-using-with
        self.addCleanup(self.tmp.cleanup)
        self.out = self.tmp.name
        self.config = load_config(f"{FIXTURES}/polytropic_config.json")


class TestJobBase(JobTestCase):
    """Shared job behaviour."""

    def test_registry(self):
        """Every subcommand has a job."""
        self.assertEqual(len(jobs), 7)
        for job in jobs:
            self.assertTrue(job.Meta.description)

    def test_config_information(self):
        """config_information lists process-wide defaults."""
        info = SimulateJob.config_information()
        for key in ("Settings File", "Quadrature Tolerance", "Output Digits", "CFL", "Snapshot Count"):
            self.assertIn(key, info)

    def test_log_debug(self):
        """Debug messages are only kept with debug enabled."""
        quiet = Job(self.config, output=self.out)
        quiet.log_debug("hidden")
        self.assertEqual(quiet.journal, [])
        loud = Job(self.config, output=self.out, debug=True)
        loud.log_debug("shown")
        self.assertEqual(loud.journal, [("debug", "shown")])

    def test_log_failure(self):
        """A logged failure marks the job as failed."""
        job = Job(self.config, output=self.out)
        job.log_failure("broken")
        self.assertTrue(job.failed)

    def test_default_output(self):
        """Without an output argument the configured directory is used."""
        self.assertEqual(Job(self.config).output, "nsp-lab-output")


class TestCriticalMassJob(JobTestCase):
    """Critical mass products."""

    def test_chandrasekhar(self):
        """The white dwarf law writes a report and no beta scan."""
        config = load_config(f"{FIXTURES}/white_dwarf_config.json")
        job = CriticalMassJob(config, output=self.out)
        results = job.run()
        self.assertFalse(job.failed)
        self.assertIn("critical_mass.json", results)
        self.assertNotIn("beta_scan.csv", results)
        report = _read_json(results["critical_mass.json"])
        self.assertEqual(report["M_c"], report["M_ch"])

    def test_beta_scan(self):
        """A single power law in range writes the beta scan."""
        config = load_config(f"{FIXTURES}/polytropic_config.json", ["law.gamma=1.3"])
        results = CriticalMassJob(config, output=self.out).run()
        self.assertIn("beta_scan.csv", results)


class TestSpecialEntropyJob(JobTestCase):
    """Special entropy products."""

    def test_dump(self):
        """dump writes the Goursat field next to the report."""
        job = SpecialEntropyJob(self.config, output=self.out, dump=True)
        results = job.run()
        self.assertIn("goursat_field.csv", results)
        report = _read_json(results["special_entropy.json"])
        self.assertEqual(report["rho_max"], 4.0)
        self.assertLess(report["convergence"]["ratio"], 1.0)
        self.assertEqual(set(report["residuals"]), {"coarse", "fine", "entropy_order"})


class TestKernelJob(JobTestCase):
    """Entropy kernel products."""

    def test_report(self):
        """A single power law gets the closed form comparison."""
        results = KernelJob(self.config, output=self.out).run()
        self.assertIn("kernel_coefficients.csv", results)
        report = _read_json(results["kernel_report.json"])
        self.assertIn("closed_form", report)
        self.assertEqual(report["rho_max"], 4.0)
        self.assertEqual(set(report["normalization"]), {"1e-06", "1e-03"})


class TestSimulateJob(JobTestCase):
    """Simulation products."""

    def test_products(self):
        """A short run writes every product and does not fail."""
        job = SimulateJob(self.config, output=self.out)
        results = job.run()
        self.assertFalse(job.failed)
        for name in ("ledger.csv", "snapshots.csv", "final_state.csv", "summary.json", "effective_config.yaml"):
            self.assertIn(name, results)
        summary = _read_json(results["summary.json"])
        self.assertIsNone(summary["failure"])
        self.assertAlmostEqual(summary["final_time"], 0.02, places=12)

    def test_deterministic(self):
        """Two runs of the same configuration write identical ledgers."""
        first = SimulateJob(self.config, output=os.path.join(self.out, "first")).run()
        second = SimulateJob(self.config, output=os.path.join(self.out, "second")).run()
        self.assertTrue(filecmp.cmp(first["ledger.csv"], second["ledger.csv"], shallow=False))

    def test_step_budget(self):
        """An exhausted step budget marks the job as failed."""
        config = load_config(f"{FIXTURES}/polytropic_config.json", ["solver.max_steps=1"])
        job = SimulateJob(config, output=self.out)
        job.run()
        self.assertTrue(job.failed)
        self.assertIsNotNone(_read_json(job.results["summary.json"])["failure"])


class TestSweepJob(JobTestCase):
    """Sweep products."""

    def test_epsilon_sweep(self):
        """The epsilon sweep writes one comparison per consecutive pair."""
        job = EpsilonSweepJob(self.config, output=self.out)
        results = job.run()
        self.assertFalse(job.failed)
        sweep = _read_json(results["sweep.json"])
        self.assertEqual(sweep["parameters"], [0.1, 0.05])
        self.assertEqual(len(sweep["differences"]), 1)
        self.assertGreater(sweep["differences"][0], 0.0)
