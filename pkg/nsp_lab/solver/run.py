"""Integrate the approximate free-boundary problem to a final time."""
#  pylint: disable=too-many-arguments
import logging
from typing import List, Optional

import numpy as np
import pandas as pd

from nsp_lab import defaults
from nsp_lab.diagnostics.ledger import DiagnosticsLedger
from nsp_lab.exceptions import BlowupError, NspLabError
from nsp_lab.solver.scheme import admissible_dt, step
from nsp_lab.solver.state import build_initial_data, snapshot_frame

LOGGER = logging.getLogger(__name__)


def snapshot_times(final_time, count=None, schedule="geometric"):
    """Output times: geometric (from 1e-3 T) or uniform, always ending at T.

    >>> [round(t, 6) for t in snapshot_times(1.0, count=3, schedule="uniform").tolist()]
    [0.333333, 0.666667, 1.0]
    """
    count = defaults.SNAPSHOT_COUNT if count is None else int(count)
    if final_time <= 0.0 or count < 1:
        raise ValueError("snapshot schedule needs T > 0 and at least one snapshot")
    if schedule == "uniform":
        times = final_time * np.arange(1, count + 1) / count
    elif schedule == "geometric":
        times = np.geomspace(1e-3 * final_time, final_time, count) if count > 1 else np.array([final_time])
    else:
        raise ValueError(f"unknown snapshot schedule {schedule!r}")
    times[-1] = final_time
    return times


class RunResult:
    """Trajectory, ledger and terminal state of one run.

    ``error`` holds the exception that stopped the run early; the partial
    trajectory and ledger are kept.
    """

    def __init__(self, initial, state, snapshots, ledger, error=None):
        """Collect the run products."""
        self.initial = initial
        self.state = state
        self.snapshots: List[pd.DataFrame] = snapshots
        self.ledger = ledger
        self.error: Optional[NspLabError] = error

    @property
    def failed(self):
        """Whether the run stopped before the final time."""
        return self.error is not None

    @property
    def failure(self):
        """Failure marker for reports."""
        return None if self.error is None else f"{type(self.error).__name__}: {self.error}"

    @property
    def times(self):
        """Snapshot times, starting with 0."""
        return np.array([float(frame["tau"].iloc[0]) for frame in self.snapshots])

    def trajectory(self):
        """All snapshots stacked in one DataFrame."""
        return pd.concat(self.snapshots, ignore_index=True)

    def ledger_frame(self):
        """Per-step ledger DataFrame."""
        return self.ledger.frame()


def run(
    spec,
    law,
    final_time,
    snapshots=None,
    schedule="geometric",
    cfl=None,
    window=None,
    max_steps=None,
    state=None,
):
    """Integrate from the initial data of ``spec`` to ``final_time``.

    Steps use the admissible CFL step, clipped to land on the snapshot times.
    Step errors stop the run and are returned in ``RunResult.error``.

    Args:
        spec (InitialDataSpec): Initial data.
        law (PressureLaw): Pressure law.
        final_time (float): T.
        snapshots (int, optional): Snapshot count after t = 0.
        schedule (str): ``geometric`` or ``uniform`` snapshot times.
        cfl (float, optional): CFL factor.
        window (tuple, optional): (d, D) for the ledger accumulators.
        max_steps (int, optional): Stop with an error after this many steps.
        state (RadialState, optional): Start from this state instead of building one.

    Returns:
        RunResult: Products of the run.
    """
    initial = build_initial_data(spec, law) if state is None else state
    window = window or (defaults.WINDOW_D, defaults.WINDOW_D_FRACTION * initial.boundary)
    ledger = DiagnosticsLedger(law, window)
    ledger.record(initial)
    frames = [snapshot_frame(initial, law)]
    current = initial
    error = None
    steps = 0
    for target in snapshot_times(final_time, snapshots, schedule):
        try:
            while current.time < target * (1.0 - 1e-14):
                if max_steps is not None and steps >= max_steps:
                    raise BlowupError("step budget exhausted", -1, current.time)
                dt = min(admissible_dt(current, law, cfl), target - current.time)
                current = step(current, dt, law, cfl)
                steps += 1
                ledger.record(current, dt)
        except NspLabError as err:
            LOGGER.warning("Run stopped at t=%.6g after %d steps: %s", current.time, steps, err)
            error = err
            frames.append(snapshot_frame(current, law))
            break
        frames.append(snapshot_frame(current, law))
        LOGGER.debug("Snapshot t=%.6g after %d steps, b(t)=%.6g", current.time, steps, current.boundary)
    LOGGER.info(
        "Run eps=%.4g N=%d finished at t=%.6g after %d steps%s",
        initial.epsilon,
        initial.cells,
        current.time,
        steps,
        "" if error is None else " (failed)",
    )
    return RunResult(initial, current, frames, ledger, error)
