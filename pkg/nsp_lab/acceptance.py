"""Acceptance suite run by ``nsp-lab --check``.

Each criterion returns its measured quantities and a verdict; exceptions from
the lab mark the criterion as failed instead of aborting the suite.
"""
#  pylint: disable=too-many-locals
import filecmp
import logging
import math
import os
import tempfile
import time
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel

from nsp_lab.critical_mass import critical_mass, lane_emden_mass
from nsp_lab.diagnostics.sweeps import epsilon_sweep
from nsp_lab.entropy.kernel import closed_form_deviation, kernel_mass
from nsp_lab.entropy.special import bound_constants, boundary_gap, exterior_identity, goursat_residuals, solve_goursat
from nsp_lab.eos.bounds import resolve_thresholds
from nsp_lab.eos.functions import d_of_rho
from nsp_lab.eos.laws import PDelta, Polytropic, WhiteDwarf
from nsp_lab.exceptions import NspLabError
from nsp_lab.jobs import SimulateJob
from nsp_lab.solver.run import run
from nsp_lab.utilities.fitting import fitted_constant, stability_ratio
from nsp_lab.utilities.writers import write_json

LOGGER = logging.getLogger(__name__)

Detail = Dict[str, Union[float, bool, str, None]]

TITLES = {
    1: "EOS closed forms",
    2: "d(rho) law",
    3: "Critical mass",
    4: "Goursat entropy",
    5: "Kernel oracle",
    6: "Solver conservation",
    7: "Uniform-estimate balances",
    8: "Determinism",
}


class CriterionResult(BaseModel):
    """Verdict and measurements of one criterion."""

    number: int
    title: str
    passed: bool
    detail: Detail = {}
    seconds: float = 0.0
    error: Optional[str] = None


class AcceptanceReport(BaseModel):
    """All evaluated criteria."""

    results: List[CriterionResult]

    @property
    def passed(self):
        """Whether every evaluated criterion passed."""
        return all(result.passed for result in self.results)


def _relative(value, reference):
    return abs(value - reference) / abs(reference)


def _with_solver(config, cells, final_time):
    solver = config.solver.model_copy(update={"N": cells, "T": final_time})
    return config.model_copy(update={"solver": solver})


def eos_closed_forms(config):  # pylint: disable=unused-argument
    """White-dwarf derived constants and the two tail ratios."""
    law = WhiteDwarf(C1=2.0, C2=1.5, C3=0.5)
    symbolic = (
        math.isclose(law.gamma1, 5.0 / 3.0, rel_tol=1e-15)
        and math.isclose(law.gamma2, 4.0 / 3.0, rel_tol=1e-15)
        and math.isclose(law.kappa1, 2.0 * 1.5**5 / (5.0 * math.sqrt(0.5)), rel_tol=1e-14)
        and math.isclose(law.kappa2, 2.0 * 1.5**4 / 4.0, rel_tol=1e-14)
        and math.isclose(law.epsilon, 2.0 / 3.0, rel_tol=1e-15)
    )
    unit = WhiteDwarf(C1=1.0, C2=1.0, C3=1.0)
    low = float(unit.pressure(1e-8) / (unit.kappa1 * 1e-8 ** (5.0 / 3.0)))
    high = float(unit.pressure(1e8) / (unit.kappa2 * 1e8 ** (4.0 / 3.0)))
    detail = {"symbolic": symbolic, "low_tail_ratio": low, "high_tail_ratio": high}
    return symbolic and abs(low - 1.0) <= 0.01 and abs(high - 1.0) <= 0.02, detail


def d_law(config):  # pylint: disable=unused-argument
    """d = 1 + theta for a polytrope; |d - 7/6| <= C rho^(-2/3) with a stable C for the white dwarf."""
    polytrope = Polytropic(kappa=1.0, gamma=2.0)
    grid = np.geomspace(1e-8, 1e8, 65)
    polytropic_gap = float(np.max(np.abs(d_of_rho(polytrope, grid) - (1.0 + polytrope.theta1))))
    law = WhiteDwarf(C1=1.0, C2=1.0, C3=1.0)
    rho_high = resolve_thresholds(law)[1]
    constants = []
    for lower in (rho_high, 10.0 * rho_high):
        rho = np.geomspace(lower, 10.0 * lower, 33)
        constants.append(fitted_constant(d_of_rho(law, rho) - 7.0 / 6.0, rho ** (-2.0 / 3.0)))
    ratio = stability_ratio(constants)
    detail = {"polytropic_gap": polytropic_gap, "C_first_decade": constants[0], "C_second_decade": constants[1]}
    detail["stability"] = ratio
    return polytropic_gap <= 1e-12 and ratio <= 1.2, detail


def critical_masses(config):
    """Root residuals, closed-form limit, P_delta margin and Lane-Emden invariances."""
    grid = config.beta_grid.as_tuple()
    polytrope = critical_mass(Polytropic(kappa=1.0, gamma=1.3), config.E0, grid=grid)
    delta = critical_mass(PDelta(delta=1.0, eps0=0.4), config.E0, grid=grid)
    base = lane_emden_mass(1.0)
    central = _relative(lane_emden_mass(1.0, central_density=8.0), base)
    halving = _relative(lane_emden_mass(1.0, rtol=1e-11), lane_emden_mass(1.0, rtol=1e-8))
    scaling = _relative(lane_emden_mass(2.0), 2.0**1.5 * base)
    detail = {
        "max_residual": max(polytrope.max_residual, delta.max_residual),
        "polytropic_gap": _relative(polytrope.M_c, polytrope.M_tilde),
        "p_delta_margin": delta.margin,
        "M_ch": base,
        "central_density_gap": central,
        "step_halving_gap": halving,
        "scaling_gap": scaling,
    }
    passed = (
        detail["max_residual"] <= 1e-10
        and detail["polytropic_gap"] <= 1e-4
        and delta.margin is not None
        and delta.margin > 0.0
        and central <= 1e-8
        and halving <= 1e-6
        and scaling <= 1e-12
    )
    return passed, detail


def goursat_entropy(config):
    """Contraction, boundary data, residual order, bound stability and the exterior identity."""
    law = WhiteDwarf(C1=1.0, C2=1.0, C3=1.0)
    settings = config.goursat
    resolution = config.check.goursat_resolution
    coarse = solve_goursat(law, settings.rho_max, max(resolution // 2, 8), settings.tol, settings.max_iters)
    fine = solve_goursat(law, settings.rho_max, resolution, settings.tol, settings.max_iters)
    coarse_residual = goursat_residuals(coarse).entropy
    fine_residual = goursat_residuals(fine).entropy
    order = float(np.log2(coarse_residual / fine_residual)) if fine_residual > 0.0 else float("inf")
    constants = (bound_constants(coarse), bound_constants(fine))
    finite = all(np.isfinite(value) for values in constants for value in values.values())
    stability = max(stability_ratio([constants[0][key], constants[1][key]]) for key in constants[1])
    detail = {
        "ratio": fine.ratio,
        "boundary_gap": boundary_gap(fine),
        "order": order,
        "bounds_finite": finite,
        "bounds_stability": stability,
        "exterior_identity": exterior_identity(fine),
    }
    passed = (
        fine.ratio < 1.0
        and detail["boundary_gap"] <= 10.0 * settings.tol
        and order >= 1.0
        and finite
        and stability <= 1.5
        and detail["exterior_identity"] <= 1e-12
    )
    return passed, detail


def kernel_oracle(config):
    """Marched kernel against the closed form, support, flux relation and normalization."""
    settings = config.check
    deviation = closed_form_deviation(
        Polytropic(kappa=1.0, gamma=5.0 / 3.0), 1.0, settings.kernel_levels, settings.kernel_nodes
    )
    resolution = (settings.kernel_levels, settings.kernel_nodes)
    mass = kernel_mass(WhiteDwarf(C1=1.0, C2=1.0, C3=1.0), 1e-6, resolution=resolution)
    detail = {
        "chi_gap": deviation["chi"],
        "flux_gap": deviation["flux"],
        "support": deviation["support"],
        "white_dwarf_mass": mass,
    }
    passed = deviation["chi"] <= 1e-3 and deviation["flux"] <= 1e-3 and deviation["support"] <= 1e-8
    return passed and abs(mass - 1.0) <= 0.01, detail


def _conservation_run(config, cells):
    config = _with_solver(config, cells, config.check.final_time).require_solver_law("simulate")
    solver = config.solver
    return run(
        solver.initial_data(),
        config.law,
        solver.T,
        snapshots=config.output.snapshots,
        schedule=config.output.schedule,
        cfl=solver.cfl,
        window=config.window_tuple(),
    )


def solver_conservation(config):
    """Mass drift, energy identity under refinement, boundary density and the Sobolev ratio."""
    cells = config.check.cells
    coarse = _conservation_run(config, max(cells // 2, 4))
    fine = _conservation_run(config, cells)
    coarse_summary, fine_summary = coarse.ledger.summary(), fine.ledger.summary()
    boundary = fine.ledger.frame()["rho_boundary"].to_numpy()
    rising = float(np.max(np.diff(boundary), initial=0.0)) / boundary[0]
    detail = {
        "failure": fine.failure or coarse.failure,
        "mass_drift": fine_summary["mass_drift"] / fine.initial.total_mass,
        "energy_residual": fine_summary["max_abs_energy_residual"],
        "coarse_energy_residual": coarse_summary["max_abs_energy_residual"],
        "boundary_rise": rising,
        "boundary_margin": fine_summary["min_boundary_margin"],
        "max_sobolev_ratio": fine_summary["max_sobolev_ratio"],
    }
    passed = (
        not fine.failed
        and not coarse.failed
        and detail["mass_drift"] <= 1e-12
        and detail["energy_residual"] <= 1e-3
        and detail["energy_residual"] <= detail["coarse_energy_residual"]
        and rising <= 1e-12
        and detail["boundary_margin"] >= 0.0
        and detail["max_sobolev_ratio"] <= 1.01
    )
    return passed, detail


def uniform_estimates(config):
    """Functional stability across the epsilon list and the heuristic Cauchy check."""
    settings = config.check
    config = _with_solver(config, settings.sweep_cells, settings.sweep_time).require_solver_law("sweep-epsilon")
    result = epsilon_sweep(
        config.solver.initial_data(),
        config.law,
        config.sweep.epsilons,
        config.solver.T,
        window=(config.window.d, config.window.D),
        snapshots=config.output.snapshots,
        schedule="uniform",
        cfl=config.solver.cfl,
        workers=config.sweep.workers,
        slack=config.sweep.slack,
    )
    ratios = [value for value in result.functional_ratios.values() if np.isfinite(value)]
    worst = max(ratios) if ratios else float("nan")
    detail = {"worst_functional_ratio": worst, "monotone": result.monotone, "partial": result.partial}
    detail.update({f"difference_{index}": value for index, value in enumerate(result.differences)})
    return bool(ratios) and worst <= 2.0 and result.monotone and not result.partial, detail


def determinism(config):
    """Two identical simulate runs write byte-identical files."""
    settings = config.check
    config = _with_solver(config, settings.sweep_cells, settings.sweep_time)
    with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
        outputs = [SimulateJob(config, output=directory).run() for directory in (first, second)]
        names = sorted(outputs[0])
        identical = [
            filecmp.cmp(outputs[0][name], os.path.join(second, name), shallow=False)
            for name in names
        ]
    detail = {"files": len(identical), "identical": sum(identical)}
    return bool(identical) and all(identical), detail


CRITERIA = {
    1: eos_closed_forms,
    2: d_law,
    3: critical_masses,
    4: goursat_entropy,
    5: kernel_oracle,
    6: solver_conservation,
    7: uniform_estimates,
    8: determinism,
}


def evaluate(number, config):
    """Run one criterion, turning lab errors into a failed verdict."""
    start = time.perf_counter()
    try:
        passed, detail = CRITERIA[number](config)
        error = None
    except NspLabError as err:
        passed, detail, error = False, {}, f"{type(err).__name__}: {err}"
        LOGGER.warning("Criterion %d raised %s", number, error)
    seconds = time.perf_counter() - start
    LOGGER.info("Criterion %d (%s): %s in %.2fs", number, TITLES[number], "pass" if passed else "FAIL", seconds)
    return CriterionResult(
        number=number, title=TITLES[number], passed=bool(passed), detail=detail, seconds=seconds, error=error
    )


def run_acceptance(config, output=None):
    """Evaluate ``config.check.criteria`` and write acceptance.json into ``output`` when given."""
    report = AcceptanceReport(results=[evaluate(number, config) for number in config.check.criteria])
    if output is not None:
        write_json(report, os.path.join(output, "acceptance.json"))
    return report


def format_table(report):
    """Plain-text pass/fail table."""
    lines = [f"{'#':>2}  {'criterion':<26} {'result':<6} {'seconds':>8}"]
    for result in report.results:
        verdict = "pass" if result.passed else "FAIL"
        lines.append(f"{result.number:>2}  {result.title:<26} {verdict:<6} {result.seconds:>8.2f}")
        if result.error:
            lines.append(f"    {result.error}")
    lines.append(f"overall: {'pass' if report.passed else 'FAIL'}")
    return "\n".join(lines)
