#  pylint: disable=too-few-public-methods
#  pylint: disable=too-many-locals

"""Lab jobs: one per subcommand, each writing its products into an output directory."""
import logging
import os

import numpy as np
import pandas as pd

from nsp_lab import defaults
from nsp_lab.critical_mass import critical_mass
from nsp_lab.diagnostics.sweeps import domain_sweep, epsilon_sweep
from nsp_lab.entropy.kernel import (
    KernelExpansion,
    TestFunction,
    closed_form_deviation,
    entropy_equation_residual,
    kernel_grid,
    kernel_growth,
    kernel_mass,
)
from nsp_lab.entropy.special import bound_constants, boundary_gap, exterior_identity, goursat_residuals, solve_goursat
from nsp_lab.eos.bounds import resolve_thresholds, verify_asymptotic_bounds
from nsp_lab.eos.functions import eos_table
from nsp_lab.models import effective_config
from nsp_lab.solver.run import run
from nsp_lab.solver.state import snapshot_frame
from nsp_lab.utilities.quadrature import log_grid
from nsp_lab.utilities.writers import write_csv, write_json, write_yaml

LOGGER = logging.getLogger(__name__)

name = "Navier-Stokes-Poisson lab"  # pylint: disable=invalid-name

_REPORT_POINTS_PER_DECADE = 8


class Job:
    """Base class of the lab jobs.

    A job holds a validated ``RunConfig`` and keyword options (``debug``,
    ``dump``, ``rho_max``); ``run`` echoes the effective configuration and
    calls ``execute``. Messages go to the module logger and to ``journal``.
    """

    class Meta:
        """Metadata about this Job."""

        name = "Lab job"
        description = "Base class."
        field_order = ("debug",)

    def __init__(self, config, output=None, **kwargs):
        """Bind the configuration and the output directory."""
        self.config = config
        self.output = output or config.output.directory
        self.kwargs = kwargs
        self.logger = LOGGER.getChild(type(self).__name__)
        self.journal = []
        self.results = {}
        self.failed = False

    @classmethod
    def config_information(cls):
        """Process-wide defaults used by this job."""
        return {
            "Settings File": os.environ.get("NSP_LAB_SETTINGS", ""),
            "Quadrature Tolerance": defaults.QUAD_RTOL,
            "Output Digits": defaults.OUTPUT_DIGITS,
        }

    @property
    def law(self):
        """Pressure law of the configuration."""
        return self.config.law

    def log_debug(self, message):
        """Conditionally log a debug message."""
        if self.kwargs.get("debug"):
            self.journal.append(("debug", message))
            self.logger.debug(message)

    def log_info(self, message):
        """Log an informational message."""
        self.journal.append(("info", message))
        self.logger.info(message)

    def log_warning(self, message):
        """Log a warning."""
        self.journal.append(("warning", message))
        self.logger.warning(message)

    def log_success(self, message):
        """Log successful completion."""
        self.journal.append(("success", message))
        self.logger.info(message)

    def log_failure(self, message):
        """Log a failure and mark the job as failed."""
        self.failed = True
        self.journal.append(("failure", message))
        self.logger.error(message)

    def path(self, filename):
        """Location of ``filename`` inside the output directory."""
        return os.path.join(self.output, filename)

    def save_json(self, payload, filename):
        """Write a JSON product and remember it."""
        self.results[filename] = write_json(payload, self.path(filename))
        self.log_debug(message=f"Wrote {self.results[filename]}")

    def save_csv(self, frame, filename):
        """Write a CSV product and remember it."""
        self.results[filename] = write_csv(frame, self.path(filename))
        self.log_debug(message=f"Wrote {self.results[filename]} ({len(frame)} rows)")

    def execute(self):
        """Compute and write the products of the job."""
        raise NotImplementedError

    def run(self):
        """Echo the effective configuration, then execute."""
        options = ", ".join(f"`{key}`: {value}" for key, value in sorted(self.kwargs.items()))
        self.log_info(message=f"Starting {self.Meta.name} ({self.law.kind} law) with options: {options or 'none'}")
        self.results["effective_config.yaml"] = write_yaml(
            effective_config(self.config), self.path("effective_config.yaml")
        )
        self.execute()
        if not self.failed:
            self.log_success(message=f"{self.Meta.name} complete; outputs in {self.output}")
        return self.results


class EosReportJob(Job):
    """Tabulate the thermodynamic functions and check the asymptotic bounds."""

    class Meta:
        """Metadata about this Job."""

        name = "EOS report"
        description = "Thermodynamic table, derived constants and asymptotic tail bounds of a pressure law."
        field_order = ("debug", "dump")

    @classmethod
    def config_information(cls):
        """Table range and density."""
        info = super().config_information()
        info.update(
            {
                "Table Density Range": (defaults.TABLE_RHO_MIN, defaults.TABLE_RHO_MAX),
                "Table Points Per Decade": defaults.TABLE_POINTS_PER_DECADE,
            }
        )
        return info

    def execute(self):
        """Write eos_table.csv and eos_report.json."""
        law = self.law
        per_decade = defaults.TABLE_POINTS_PER_DECADE if self.kwargs.get("dump") else _REPORT_POINTS_PER_DECADE
        grid = log_grid(defaults.TABLE_RHO_MIN, defaults.TABLE_RHO_MAX, per_decade)
        self.save_csv(eos_table(law, grid), "eos_table.csv")
        rho_low, rho_high = resolve_thresholds(law)
        self.log_info(message=f"Thresholds rho_low={rho_low:.6g}, rho_high={rho_high:.6g}")
        report = verify_asymptotic_bounds(law, raise_on_failure=False)
        self.save_json(
            {
                "law": law.model_dump(),
                "derived": {
                    "gamma1": law.gamma1,
                    "gamma2": law.gamma2,
                    "kappa1": law.kappa1,
                    "kappa2": law.kappa2,
                    "epsilon": law.epsilon,
                    "theta1": law.theta1,
                    "theta2": law.theta2,
                    "lambda1": law.lambda1,
                    "a0": law.a0,
                    "nu": law.nu,
                },
                "bounds": report,
            },
            "eos_report.json",
        )
        if not report.passed:
            quantity, rho, ratio = report.worst
            self.log_failure(message=f"Asymptotic bound {quantity} violated at rho={rho:.6g} (ratio {ratio:.6g})")


class CriticalMassJob(Job):
    """Critical mass for gamma2 in (6/5, 4/3]."""

    class Meta:
        """Metadata about this Job."""

        name = "Critical mass"
        description = "Supremum of the root mass over beta, or the Chandrasekhar mass when gamma2 = 4/3."
        field_order = ("debug",)

    def execute(self):
        """Write critical_mass.json and beta_scan.csv."""
        report = critical_mass(self.law, self.config.E0, grid=self.config.beta_grid.as_tuple())
        self.save_json(report.model_dump(exclude={"beta_samples"}), "critical_mass.json")
        if report.beta_samples:
            self.save_csv(pd.DataFrame([sample.model_dump() for sample in report.beta_samples]), "beta_scan.csv")
        if report.margin is not None and report.margin < 0.0:
            self.log_warning(message=f"Scan exceeds the closed-form bound by {-report.margin:.3e}")
        if report.h_monotone is not None and not report.h_monotone.monotone:
            self.log_warning(message=f"h(rho) not increasing near rho={report.h_monotone.first_violation:.6g}")
        self.log_info(message=f"M_c = {report.M_c:.10g}")


class SpecialEntropyJob(Job):
    """Goursat construction of the special entropy pair."""

    class Meta:
        """Metadata about this Job."""

        name = "Special entropy"
        description = "Picard solve of the characteristic Goursat problem, residuals and fitted bounds."
        field_order = ("debug", "rho_max", "dump")

    @classmethod
    def config_information(cls):
        """Goursat defaults."""
        info = super().config_information()
        info.update(
            {
                "Goursat Tolerance": defaults.GOURSAT_TOL,
                "Goursat Max Iterations": defaults.GOURSAT_MAX_ITERS,
                "Goursat Resolution": defaults.GOURSAT_RESOLUTION,
            }
        )
        return info

    def execute(self):
        """Write special_entropy.json and, with ``dump``, goursat_field.csv."""
        settings = self.config.goursat
        rho_max = self.kwargs.get("rho_max") or settings.rho_max
        coarse_resolution = max(settings.resolution // 2, 8)
        fields = {}
        for resolution in (coarse_resolution, settings.resolution):
            fields[resolution] = solve_goursat(self.law, rho_max, resolution, settings.tol, settings.max_iters)
            self.log_debug(message=f"Resolution {resolution}: {fields[resolution].iterations} iterations")
        field = fields[settings.resolution]
        coarse = goursat_residuals(fields[coarse_resolution])
        fine = goursat_residuals(field)
        order = float("nan")
        if coarse.entropy > 0.0 and fine.entropy > 0.0:
            order = float(np.log2(coarse.entropy / fine.entropy))
        if field.ratio >= 1.0:
            self.log_warning(message=f"Empirical contraction ratio {field.ratio:.3g} is not below 1")
        self.save_json(
            {
                "rho_max": field.rho_max,
                "K": field.K,
                "convergence": {"iterations": field.iterations, "ratio": field.ratio, "deltas": field.deltas},
                "residuals": {"coarse": coarse, "fine": fine, "entropy_order": order},
                "boundary_gap": boundary_gap(field),
                "exterior_identity": exterior_identity(field),
                "bounds": {"coarse": bound_constants(fields[coarse_resolution]), "fine": bound_constants(field)},
            },
            "special_entropy.json",
        )
        if self.kwargs.get("dump"):
            self.save_csv(field.to_frame(), "goursat_field.csv")


class KernelJob(Job):
    """Entropy kernel coefficients, normalization, growth and the generated pair."""

    class Meta:
        """Metadata about this Job."""

        name = "Entropy kernel"
        description = "Kernel expansion coefficients, marched kernel checks and the weak entropy pair of psi."
        field_order = ("debug", "rho_max", "dump")

    @classmethod
    def config_information(cls):
        """Kernel grid defaults."""
        info = super().config_information()
        info.update(
            {
                "Kernel Levels": defaults.KERNEL_LEVELS,
                "Kernel Nodes": defaults.KERNEL_NODES,
                "Kernel Tolerance": defaults.KERNEL_TOL,
                "Kernel Max Sweeps": defaults.KERNEL_MAX_ITERS,
            }
        )
        return info

    def execute(self):
        """Write kernel_report.json, kernel_coefficients.csv and, with ``dump``, kernel_grid.csv."""
        law = self.law
        settings = self.config.kernel
        resolution = (settings.levels, settings.nodes)
        rho_high = resolve_thresholds(law)[1]
        rho_max = self.kwargs.get("rho_max") or settings.rho_max or 100.0 * rho_high
        expansion = KernelExpansion(law)
        rho = np.geomspace(1e-6, rho_max, 13)
        coefficients = expansion.coefficients(rho)
        self.save_csv(
            pd.DataFrame(
                {
                    "rho": rho,
                    "a1": coefficients.a1,
                    "a2": coefficients.a2,
                    "b1": coefficients.b1,
                    "b2": coefficients.b2,
                    "D": expansion.D(rho),
                    "D_closed": expansion.D_closed(rho),
                }
            ),
            "kernel_coefficients.csv",
        )
        masses = {f"{value:.0e}": kernel_mass(law, value, resolution=resolution) for value in (1e-6, 1e-3)}
        growth_low = min(rho_high, 0.01 * rho_max)
        growth = kernel_growth(law, growth_low, rho_max, resolution=resolution)
        psi = TestFunction.bump(settings.psi_center, settings.psi_radius)
        sample_rho = min(1.0, 0.5 * rho_max)
        residual = entropy_equation_residual(law, psi, sample_rho, settings.psi_center, resolution=resolution)
        report = {
            "lambda": expansion.lam,
            "M_lambda": expansion.M,
            "mass_factor": expansion.mass_factor,
            "rho_max": rho_max,
            "normalization": masses,
            "growth": {"rho_range": [growth_low, rho_max], "constants": growth},
            "entropy_residual": {"rho": sample_rho, "u": settings.psi_center, "relative": residual},
        }
        if law.is_polytropic:
            report["closed_form"] = closed_form_deviation(law, rho_max, settings.levels, settings.nodes)
        self.save_json(report, "kernel_report.json")
        for key, value in masses.items():
            if abs(value - 1.0) > 0.01:
                self.log_warning(message=f"Kernel mass at rho={key} is {value:.6g}, not within 1% of 1")
        if self.kwargs.get("dump"):
            grid = kernel_grid(law, rho_max, settings.levels, settings.nodes)
            levels, nodes = np.meshgrid(np.arange(grid.levels + 1), np.arange(grid.nodes), indexing="ij")
            self.save_csv(
                pd.DataFrame(
                    {
                        "t": grid.t[levels].ravel(),
                        "rho": grid.rho[levels].ravel(),
                        "v": (grid.t[levels] * grid.xi[nodes]).ravel(),
                        "chi": grid.chi.ravel(),
                        "sigma_minus_u_chi": grid.h.ravel(),
                    }
                ),
                "kernel_grid.csv",
            )


class SimulateJob(Job):
    """One viscous free-boundary run."""

    class Meta:
        """Metadata about this Job."""

        name = "Simulate"
        description = "Integrate the viscous free-boundary problem and write its ledger and snapshots."
        field_order = ("debug",)

    @classmethod
    def config_information(cls):
        """Solver defaults."""
        info = super().config_information()
        info.update(
            {
                "CFL": defaults.CFL,
                "Snapshot Count": defaults.SNAPSHOT_COUNT,
                "Density Floor Factor": defaults.DENSITY_FLOOR_FACTOR,
            }
        )
        return info

    def execute(self):
        """Write ledger.csv, snapshots.csv, final_state.csv and summary.json."""
        config = self.config.require_solver_law("simulate")
        solver = config.solver
        result = run(
            solver.initial_data(),
            self.law,
            solver.T,
            snapshots=config.output.snapshots,
            schedule=config.output.schedule,
            cfl=solver.cfl,
            window=config.window_tuple(),
            max_steps=solver.max_steps,
        )
        self.save_csv(result.ledger_frame(), "ledger.csv")
        self.save_csv(result.trajectory(), "snapshots.csv")
        self.save_csv(snapshot_frame(result.state, self.law), "final_state.csv")
        summary = result.ledger.summary()
        self.save_json(
            {
                "ledger": summary,
                "initial": result.initial.info,
                "final_time": result.state.time,
                "failure": result.failure,
            },
            "summary.json",
        )
        broken = result.ledger.check_finite()
        if broken:
            self.log_warning(message=f"Ledger columns with non-finite values: {', '.join(broken)}")
        if result.failed:
            self.log_failure(message=f"Run stopped early: {result.failure}")
        else:
            residual, drift = summary["max_abs_energy_residual"], summary["mass_drift"]
            self.log_info(message=f"Energy residual {residual:.3e}, mass drift {drift:.3e}")


class _SweepJob(Job):
    """Shared plumbing of the two sweeps."""

    command = ""

    def sweep(self, spec, settings, **options):
        """Run the sweep; subclasses pick the axis."""
        raise NotImplementedError

    def execute(self):
        """Write sweep.json."""
        config = self.config.require_solver_law(self.command)
        settings = config.sweep
        psi = None
        if settings.pair == "weak":
            psi = TestFunction.bump(config.kernel.psi_center, config.kernel.psi_radius)
        result = self.sweep(
            config.solver.initial_data(),
            settings,
            final_time=config.solver.T,
            window=(config.window.d, config.window.D),
            snapshots=config.output.snapshots,
            schedule=config.output.schedule,
            cfl=config.solver.cfl,
            workers=settings.workers,
            psi=psi,
            entropy_balance=settings.entropy_balance,
            slack=settings.slack,
        )
        self.save_json(result, "sweep.json")
        self.log_info(message=f"Window differences {result.differences}, fitted rate {result.rate:.3g}")
        if not result.monotone:
            self.log_warning(message="Consecutive window differences are not decreasing within the slack")
        if result.partial:
            failures = [failure for failure in result.failures if failure]
            self.log_failure(message=f"{len(failures)} sweep run(s) stopped early: {failures[0]}")


class EpsilonSweepJob(_SweepJob):
    """Vanishing-viscosity sweep."""

    command = "sweep-epsilon"

    class Meta:
        """Metadata about this Job."""

        name = "Epsilon sweep"
        description = "Same initial data for a decreasing list of viscosities, compared on a fixed window."
        field_order = ("debug",)

    def sweep(self, spec, settings, **options):
        """Sweep over ``settings.epsilons``."""
        return epsilon_sweep(spec, self.law, settings.epsilons, **options)


class DomainSweepJob(_SweepJob):
    """Domain-expansion sweep."""

    command = "sweep-domain"

    class Meta:
        """Metadata about this Job."""

        name = "Domain sweep"
        description = "Same viscosity for a list of outer radii, compared on a fixed window."
        field_order = ("debug",)

    def sweep(self, spec, settings, **options):
        """Sweep over ``settings.domains``."""
        return domain_sweep(spec, self.law, settings.domains, **options)


jobs = [EosReportJob, CriticalMassJob, SpecialEntropyJob, KernelJob, SimulateJob, EpsilonSweepJob, DomainSweepJob]
