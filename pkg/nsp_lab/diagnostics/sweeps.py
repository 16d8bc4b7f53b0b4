"""Vanishing-viscosity and domain-expansion sweeps with window comparisons."""
#  pylint: disable=too-many-arguments,too-many-locals
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel
from scipy.integrate import trapezoid

from nsp_lab import defaults
from nsp_lab.diagnostics.entropy_balance import BalanceReport, entropy_dissipation_balance
from nsp_lab.exceptions import DomainError
from nsp_lab.solver.run import run
from nsp_lab.utilities.fitting import fitted_rate, stability_ratio

LOGGER = logging.getLogger(__name__)

_WINDOW_POINTS = 256
FUNCTIONALS = (
    "E_kinetic",
    "E_internal",
    "E_grav",
    "BD_functional",
    "rho_P_integral",
    "rho_u3_integral",
    "rho_gamma_integral",
)


class RunSummary(BaseModel):
    """Terminal ledger values and the sampled window fields of one sweep run."""

    parameter: float
    ledger: Dict[str, float]
    failure: Optional[str] = None
    min_boundary: float
    times: List[float]
    rho: List[List[float]]
    m: List[List[float]]
    balance: Optional[BalanceReport] = None


class SweepResult(BaseModel):
    """Outcome of an epsilon or domain sweep."""

    axis: str
    parameters: List[float]
    window: List[float]
    final_time: float
    summaries: List[Dict[str, Optional[float]]]
    failures: List[Optional[str]]
    differences: List[float]
    difference_matrix: List[List[float]]
    l2_differences: List[float]
    monotone: bool
    rate: float
    functional_ratios: Dict[str, float]
    balances: List[BalanceReport] = []
    viscous_rate: Optional[float] = None

    @property
    def partial(self):
        """Whether any run stopped early."""
        return any(self.failures)


def window_fields(result, grid):
    """(rho, m) of every snapshot linearly interpolated onto ``grid``."""
    inner = result.initial.inner_radius
    rho_rows, m_rows = [], []
    for frame in result.snapshots:
        radius = np.concatenate([[inner], frame["r"].to_numpy()])
        velocity = np.concatenate([[0.0], frame["u"].to_numpy()])
        centers = np.cbrt(0.5 * (radius[1:] ** 3 + radius[:-1] ** 3))
        rho = frame["rho"].to_numpy()
        m = rho * 0.5 * (velocity[1:] + velocity[:-1])
        rho_rows.append(np.interp(grid, centers, rho))
        m_rows.append(np.interp(grid, centers, m))
    return np.array(rho_rows), np.array(m_rows)


def window_difference(first, second, grid, times, order=1):
    """L^order distance of two (rho, m) window samples over [d, D] x [0, T].

    >>> import numpy as np
    >>> grid, times = np.linspace(0.1, 1.0, 5), np.array([0.0, 1.0])
    >>> field = (np.ones((2, 5)), np.zeros((2, 5)))
    >>> window_difference(field, field, grid, times)
    0.0
    """
    total = 0.0
    for left, right in zip(first, second):
        integrand = np.abs(np.asarray(left) - np.asarray(right)) ** order
        total += float(trapezoid(trapezoid(integrand, grid, axis=1), times))
    return total ** (1.0 / order)


def _sweep_run(payload):
    """Worker: one run plus its window samples; picklable for the process pool."""
    spec, law, final_time, snapshots, schedule, cfl, window, parameter, psi, entropy_balance = payload
    result = run(spec, law, final_time, snapshots=snapshots, schedule=schedule, cfl=cfl, window=window)
    grid = np.linspace(window[0], window[1], _WINDOW_POINTS)
    rho, m = window_fields(result, grid)
    summary = result.ledger.summary()
    report = entropy_dissipation_balance(result, law, psi, window) if entropy_balance else None
    return RunSummary(
        parameter=parameter,
        ledger={key: float(value) for key, value in summary.items()},
        failure=result.failure,
        min_boundary=float(result.ledger.frame()["b_of_t"].min()),
        times=result.times.tolist(),
        rho=rho.tolist(),
        m=m.tolist(),
        balance=report,
    )


def _fan_out(payloads, workers):
    workers = defaults.SWEEP_WORKERS if workers is None else int(workers)
    if workers <= 1 or len(payloads) == 1:
        return [_sweep_run(payload) for payload in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_run, payloads))


def _resolve_window(window, specs):
    d = defaults.WINDOW_D if window is None or window[0] is None else float(window[0])
    smallest_b = min(spec.b for spec in specs)
    if window is None or window[1] is None:
        upper = defaults.WINDOW_D_FRACTION * smallest_b
    else:
        upper = float(window[1])
    if not 0.0 < d < upper:
        raise DomainError(f"window needs 0 < d < D, got ({d}, {upper})")
    return d, upper


def _compare(axis, parameters, summaries, window, final_time, slack):
    grid = np.linspace(window[0], window[1], _WINDOW_POINTS)
    count = len(summaries)
    times = np.asarray(summaries[0].times)
    comparable = all(len(summary.times) == times.size for summary in summaries)
    matrix = np.full((count, count), np.nan)
    l2_matrix = np.full((count, count), np.nan)
    if comparable:
        for i in range(count):
            for j in range(count):
                first = (np.asarray(summaries[i].rho), np.asarray(summaries[i].m))
                second = (np.asarray(summaries[j].rho), np.asarray(summaries[j].m))
                matrix[i, j] = window_difference(first, second, grid, times)
                l2_matrix[i, j] = window_difference(first, second, grid, times, order=2)
    consecutive = [float(matrix[i, i + 1]) for i in range(count - 1)]
    monotone = all(later <= (1.0 + slack) * earlier for earlier, later in zip(consecutive, consecutive[1:]))
    shrinking = [abs(parameters[i] - parameters[i + 1]) for i in range(count - 1)]
    rate = fitted_rate(shrinking, consecutive) if axis == "epsilon" else fitted_rate(parameters[1:], consecutive)
    for summary in summaries:
        if summary.min_boundary <= window[1]:
            LOGGER.warning(
                "Run %s=%g shrank below the window: min b(t)=%.4g", axis, summary.parameter, summary.min_boundary
            )
    ratios = {
        name: stability_ratio([summary.ledger.get(name, np.nan) for summary in summaries]) for name in FUNCTIONALS
    }
    balances = [summary.balance for summary in summaries if summary.balance is not None]
    viscous_rate = None
    if axis == "epsilon" and len(balances) > 1:
        viscous_rate = fitted_rate([item.epsilon for item in balances], [item.viscous for item in balances])
    return SweepResult(
        axis=axis,
        parameters=list(parameters),
        window=list(window),
        final_time=final_time,
        summaries=[summary.ledger for summary in summaries],
        failures=[summary.failure for summary in summaries],
        differences=consecutive,
        difference_matrix=matrix.tolist(),
        l2_differences=[float(l2_matrix[i, i + 1]) for i in range(count - 1)],
        monotone=monotone,
        rate=rate,
        functional_ratios=ratios,
        balances=balances,
        viscous_rate=viscous_rate,
    )


def epsilon_sweep(
    spec,
    law,
    epsilons,
    final_time,
    window=None,
    snapshots=None,
    schedule="uniform",
    cfl=None,
    workers=None,
    psi=None,
    entropy_balance=False,
    slack=None,
):
    """Run the same initial data for every viscosity and compare on the window.

    The monotone flag is a heuristic Cauchy check: each consecutive difference
    may exceed the previous one by at most ``slack``.

    Args:
        spec (InitialDataSpec): Initial data; its epsilon is replaced per run.
        law (PressureLaw): Pressure law.
        epsilons (list): Decreasing viscosities.
        final_time (float): T.
        window (tuple, optional): (d, D); D defaults to a fraction of the smallest b.
        snapshots (int, optional): Shared snapshot count.
        schedule (str): Shared snapshot schedule.
        cfl (float, optional): CFL factor.
        workers (int, optional): Process count.
        psi (TestFunction, optional): Weak pair generator; None selects the mechanical pair.
        entropy_balance (bool): Run the entropy dissipation balance on each run.
        slack (float, optional): Relative slack of the monotone check.

    Returns:
        SweepResult: Differences, rates, functional ratios and balances.
    """
    epsilons = [float(value) for value in epsilons]
    if any(later > earlier for earlier, later in zip(epsilons, epsilons[1:])):
        raise DomainError("epsilon list must be non-increasing")
    specs = [spec.model_copy(update={"epsilon": value}) for value in epsilons]
    window = _resolve_window(window, specs)
    payloads = [
        (item, law, final_time, snapshots, schedule, cfl, window, value, psi, entropy_balance)
        for item, value in zip(specs, epsilons)
    ]
    LOGGER.info("Epsilon sweep over %s on window %s", epsilons, window)
    summaries = _fan_out(payloads, workers)
    slack = defaults.MONOTONE_SLACK if slack is None else slack
    return _compare("epsilon", epsilons, summaries, window, final_time, slack)


def domain_sweep(
    spec,
    law,
    domains,
    final_time,
    window=None,
    snapshots=None,
    schedule="uniform",
    cfl=None,
    workers=None,
    psi=None,
    entropy_balance=False,
    slack=None,
):
    """As :func:`epsilon_sweep` with the outer radius b varying and epsilon fixed."""
    domains = [float(value) for value in domains]
    specs = [spec.model_copy(update={"b": value}) for value in domains]
    window = _resolve_window(window, specs)
    payloads = [
        (item, law, final_time, snapshots, schedule, cfl, window, value, psi, entropy_balance)
        for item, value in zip(specs, domains)
    ]
    LOGGER.info("Domain sweep over %s on window %s", domains, window)
    summaries = _fan_out(payloads, workers)
    slack = defaults.MONOTONE_SLACK if slack is None else slack
    return _compare("b", domains, summaries, window, final_time, slack)
