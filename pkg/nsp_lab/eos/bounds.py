"""Asymptotic tail bounds of a pressure law and the default threshold scan."""
#  pylint: disable=too-many-locals
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from nsp_lab.eos.functions import d2k, dk, internal_energy, k_of_rho
from nsp_lab.exceptions import BoundViolationError

LOGGER = logging.getLogger(__name__)

SCAN_GRID = np.logspace(-12, 12, 24 * 16 + 1)
TAIL_DECADES = 12
TAIL_POINTS = 200


class BoundCheck(BaseModel):
    """Ratio range of one quantity against its power-law reference on one tail."""

    quantity: str
    tail: str
    lower: float
    upper: float
    min_ratio: float
    max_ratio: float
    asserted: bool
    passed: bool
    worst_rho: float
    worst_ratio: float


class AsymptoticReport(BaseModel):
    """Outcome of ``verify_asymptotic_bounds``."""

    kind: str
    rho_low: float
    rho_high: float
    a0: float
    nu: float
    checks: List[BoundCheck]
    fitted: Dict[str, Tuple[float, float]]
    high_tail_stiffness: float
    worst: Optional[Tuple[str, float, float]] = None
    margin: float
    passed: bool


def _references(law, rho, tail):
    """Power-law references (value, lower factor, upper factor) per quantity on one tail."""
    if tail == "low":
        gamma, kappa = law.gamma1, law.kappa1
    else:
        gamma, kappa = law.gamma2, law.kappa2
    theta = 0.5 * (gamma - 1.0)
    lo, hi = 1.0 - law.a0, 1.0 + law.a0
    root_lo, root_hi = np.sqrt(lo), np.sqrt(hi)
    c_k = np.sqrt(kappa * gamma)
    return {
        "P": (law.pressure(rho), kappa * rho**gamma, lo, hi),
        "P'": (law.dpressure(rho), kappa * gamma * rho ** (gamma - 1.0), lo, hi),
        "P''": (law.d2pressure(rho), kappa * gamma * (gamma - 1.0) * rho ** (gamma - 2.0), lo, hi),
        "e'": (law.pressure(rho) / rho**2, kappa * rho ** (gamma - 2.0), lo, hi),
        "k'": (dk(law, rho), c_k * rho ** (theta - 1.0), root_lo, root_hi),
        "e": (internal_energy(law, rho), kappa * rho ** (gamma - 1.0) / (gamma - 1.0), lo, hi),
        "k": (k_of_rho(law, rho), c_k * rho**theta / theta, root_lo, root_hi),
        "|k''|": (np.abs(d2k(law, rho)), c_k * (1.0 - theta) * rho ** (theta - 2.0), root_lo, root_hi),
    }


_QUANTITIES = ("P", "P'", "P''", "e'", "k'", "e", "k", "|k''|")

# every sandwich bound is asserted on both tails
_ASSERTED = {"low": _QUANTITIES, "high": _QUANTITIES}


def _tail_grid(rho_low, rho_high, samples):
    if samples is not None:
        samples = np.asarray(samples, dtype=float)
        return samples[samples <= rho_low], samples[samples >= rho_high]
    low = np.logspace(np.log10(rho_low) - TAIL_DECADES, np.log10(rho_low), TAIL_POINTS)
    high = np.logspace(np.log10(rho_high), np.log10(rho_high) + TAIL_DECADES, TAIL_POINTS)
    return low, high


def verify_asymptotic_bounds(law, samples=None, rho_low=None, rho_high=None, raise_on_failure=True):
    """Check the low/high density sandwich bounds of ``law``.

    Args:
        law (PressureLaw): Law under test.
        samples (ndarray, optional): Density grid; defaults to twelve decades on each tail.
        rho_low (float, optional): Low threshold; defaults to the resolved threshold.
        rho_high (float, optional): High threshold; defaults to the resolved threshold.
        raise_on_failure (bool): Raise ``BoundViolationError`` instead of returning a failed report.

    Returns:
        AsymptoticReport: Ratio ranges, fitted constants and the worst violation.
    """
    if rho_low is None or rho_high is None:
        default_low, default_high = resolve_thresholds(law)
        rho_low = default_low if rho_low is None else rho_low
        rho_high = default_high if rho_high is None else rho_high
    low, high = _tail_grid(rho_low, rho_high, samples)
    checks = []
    fitted = {}
    worst = None
    margin = np.inf
    for tail, rho in (("low", low), ("high", high)):
        if rho.size == 0:
            continue
        for quantity, (value, reference, lower, upper) in _references(law, rho, tail).items():
            ratio = np.asarray(value) / reference
            asserted = quantity in _ASSERTED[tail]
            slack = np.minimum(ratio - lower, upper - ratio)
            index = int(np.argmin(slack))
            passed = bool(np.all(slack >= 0.0))
            checks.append(
                BoundCheck(
                    quantity=quantity,
                    tail=tail,
                    lower=lower,
                    upper=upper,
                    min_ratio=float(ratio.min()),
                    max_ratio=float(ratio.max()),
                    asserted=asserted,
                    passed=passed,
                    worst_rho=float(rho[index]),
                    worst_ratio=float(ratio[index]),
                )
            )
            fitted[f"{quantity}:{tail}"] = (float(ratio.min()), float(ratio.max()))
            if asserted:
                if slack[index] < margin:
                    margin = float(slack[index])
                    worst = (f"{quantity}:{tail}", float(rho[index]), float(ratio[index]))
        stiffness = np.abs(law.stiffness(rho) / 2.0 - 1.0)
        bound = law.nu if tail == "low" else 1.0
        slack = bound - stiffness
        index = int(np.argmin(slack))
        checks.append(
            BoundCheck(
                quantity="|rho k''/k'|",
                tail=tail,
                lower=0.0,
                upper=bound,
                min_ratio=float(stiffness.min()),
                max_ratio=float(stiffness.max()),
                asserted=True,
                passed=bool(np.all(slack > 0.0) if tail == "high" else np.all(slack >= 0.0)),
                worst_rho=float(rho[index]),
                worst_ratio=float(stiffness[index]),
            )
        )
        if slack[index] < margin:
            margin = float(slack[index])
            worst = (f"|rho k''/k'|:{tail}", float(rho[index]), float(stiffness[index]))
    high_stiffness = float(np.max(np.abs(law.stiffness(high) / 2.0 - 1.0))) if high.size else float("nan")
    passed = all(check.passed for check in checks if check.asserted)
    report = AsymptoticReport(
        kind=law.kind,
        rho_low=float(rho_low),
        rho_high=float(rho_high),
        a0=law.a0,
        nu=law.nu,
        checks=checks,
        fitted=fitted,
        high_tail_stiffness=high_stiffness,
        worst=worst,
        margin=float(margin),
        passed=passed,
    )
    LOGGER.debug("Asymptotic bounds for %s: passed=%s margin=%.3g", law.kind, passed, margin)
    if not passed and raise_on_failure:
        raise BoundViolationError(report)
    return report


def _pointwise_pass(law, rho, tail):
    ok = np.ones(rho.shape, dtype=bool)
    for value, reference, lower, upper in _references(law, rho, tail).values():
        ratio = np.asarray(value) / reference
        ok &= (ratio >= lower) & (ratio <= upper)
    stiffness = np.abs(law.stiffness(rho) / 2.0 - 1.0)
    ok &= stiffness <= (law.nu if tail == "low" else 1.0)
    return ok


def threshold_scan(law):
    """Largest rho_* and smallest rho^* on a log grid for which every tail bound holds pointwise.

    The integral quantities e and k come from the tabulated law, so the high
    threshold also waits for their integration constants to fade.
    """
    grid = SCAN_GRID
    low_ok = _pointwise_pass(law, grid, "low")
    high_ok = _pointwise_pass(law, grid, "high")
    failing_low = np.nonzero(~low_ok)[0]
    rho_low = grid[failing_low[0] - 1] if failing_low.size and failing_low[0] > 0 else grid[-1]
    if failing_low.size and failing_low[0] == 0:
        rho_low = grid[0]
    failing_high = np.nonzero(~high_ok)[0]
    rho_high = grid[failing_high[-1] + 1] if failing_high.size and failing_high[-1] + 1 < grid.size else grid[0]
    if failing_high.size and failing_high[-1] + 1 >= grid.size:
        rho_high = grid[-1]
    rho_low = min(rho_low, 0.25 * rho_high)
    LOGGER.debug("Threshold scan for %s: rho_low=%.4g rho_high=%.4g", law.kind, rho_low, rho_high)
    return float(rho_low), float(rho_high)


_RESOLVED = {}


def resolve_thresholds(law):
    """User thresholds when set; polytropic defaults; otherwise the scan result."""
    if law.is_polytropic or (law.rho_low is not None and law.rho_high is not None):
        return law.breakpoints
    if law not in _RESOLVED:
        scanned = threshold_scan(law)
        _RESOLVED[law] = (law.rho_low or scanned[0], law.rho_high or scanned[1])
    return _RESOLVED[law]
