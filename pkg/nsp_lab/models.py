"""Run configuration: a validated model tree loaded from YAML plus dotted overrides."""
#  pylint: disable=too-few-public-methods
import logging
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, field_validator
from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from nsp_lab import defaults
from nsp_lab.eos.laws import PDelta, Polytropic, WhiteDwarf
from nsp_lab.exceptions import ConfigError
from nsp_lab.solver.state import InitialDataSpec, ProfileSpec

LOGGER = logging.getLogger(__name__)

LawConfig = Annotated[Union[Polytropic, WhiteDwarf, PDelta], Field(discriminator="kind")]
SOLVER_COMMANDS = ("simulate", "sweep-epsilon", "sweep-domain")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SolverConfig(_Section):
    """Initial data and time integration."""

    M: PositiveFloat = 1.0
    b: float = Field(default=100.0, gt=1.0)
    epsilon: float = 0.05
    N: PositiveInt = 1024
    T: PositiveFloat = 1.0
    cfl: float = Field(default=defaults.CFL, gt=0.0, le=1.0)
    profile: ProfileSpec = Field(default_factory=ProfileSpec)
    max_steps: Optional[PositiveInt] = None

    @field_validator("epsilon")
    @classmethod
    def check_epsilon(cls, value):
        """The solver needs positive viscosity."""
        if value <= 0.0:
            raise ValueError("epsilon must be > 0; the inviscid limit is only approached by sweep-epsilon")
        return value

    def initial_data(self):
        """InitialDataSpec for this section."""
        return InitialDataSpec(M=self.M, b=self.b, epsilon=self.epsilon, N=self.N, profile=self.profile)


class WindowConfig(_Section):
    """Comparison window [d, D]; D defaults to a fraction of the smallest b(t)."""

    d: PositiveFloat = defaults.WINDOW_D
    D: Optional[PositiveFloat] = None


class GoursatConfig(_Section):
    """Special entropy solve."""

    rho_max: Optional[PositiveFloat] = None
    resolution: PositiveInt = defaults.GOURSAT_RESOLUTION
    tol: PositiveFloat = defaults.GOURSAT_TOL
    max_iters: PositiveInt = defaults.GOURSAT_MAX_ITERS


class KernelConfig(_Section):
    """Entropy kernel grid and the generating test function."""

    levels: PositiveInt = defaults.KERNEL_LEVELS
    nodes: PositiveInt = defaults.KERNEL_NODES
    rho_max: Optional[PositiveFloat] = None
    psi_center: float = 0.0
    psi_radius: PositiveFloat = 1.0


class SweepConfig(_Section):
    """Sweep parameters."""

    epsilons: List[PositiveFloat] = [0.1, 0.05, 0.025, 0.0125]
    domains: List[float] = [50.0, 100.0, 200.0]
    workers: PositiveInt = defaults.SWEEP_WORKERS
    entropy_balance: bool = False
    pair: Literal["mechanical", "weak"] = "mechanical"
    slack: float = Field(default=defaults.MONOTONE_SLACK, ge=0.0)


class OutputConfig(_Section):
    """Where and how often results are written."""

    directory: str = "nsp-lab-output"
    snapshots: PositiveInt = defaults.SNAPSHOT_COUNT
    schedule: Literal["geometric", "uniform"] = "geometric"


class BetaGridConfig(_Section):
    """Log grid of beta for the critical mass scan."""

    lower: PositiveFloat = 1e-8
    upper: PositiveFloat = 1e8
    count: int = Field(default=200, ge=3)

    def as_tuple(self):
        """(lower, upper, count)."""
        return (self.lower, self.upper, self.count)


QUICK_CHECK = {
    "goursat_resolution": 128,
    "kernel_levels": 128,
    "kernel_nodes": 129,
    "cells": 256,
    "final_time": 0.05,
    "sweep_cells": 64,
    "sweep_time": 0.02,
}


class CheckConfig(_Section):
    """Resolution of the acceptance suite run by ``--check``; ``quick()`` gives the smoke profile."""

    criteria: List[int] = [1, 2, 3, 4, 5, 6, 7, 8]
    goursat_resolution: PositiveInt = 512
    kernel_levels: PositiveInt = 256
    kernel_nodes: PositiveInt = 257
    cells: PositiveInt = 4096
    final_time: PositiveFloat = 1.0
    sweep_cells: PositiveInt = 2048
    sweep_time: PositiveFloat = 1.0

    def quick(self):
        """Same criteria at the small ``QUICK_CHECK`` resolutions."""
        return self.model_copy(update=QUICK_CHECK)

    @field_validator("criteria")
    @classmethod
    def check_criteria(cls, value):
        """Criteria are numbered 1 to 8."""
        unknown = sorted(set(value) - set(range(1, 9)))
        if unknown:
            raise ValueError(f"unknown acceptance criteria {unknown}")
        return sorted(set(value))


class RunConfig(_Section):
    """Complete configuration of every subcommand."""

    law: LawConfig
    E0: PositiveFloat = 1.0
    solver: SolverConfig = Field(default_factory=SolverConfig)
    window: WindowConfig = Field(default_factory=WindowConfig)
    goursat: GoursatConfig = Field(default_factory=GoursatConfig)
    kernel: KernelConfig = Field(default_factory=KernelConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    beta_grid: BetaGridConfig = Field(default_factory=BetaGridConfig)
    check: CheckConfig = Field(default_factory=CheckConfig)

    def window_tuple(self, b=None):
        """(d, D) with D resolved against ``b`` (defaults to the configured outer radius)."""
        b = self.solver.b if b is None else b
        upper = self.window.D if self.window.D is not None else defaults.WINDOW_D_FRACTION * b
        return (self.window.d, upper)

    def require_solver_law(self, command):
        """Solver subcommands need gamma2 in (6/5, gamma1]."""
        if command in SOLVER_COMMANDS and not self.law.gamma2 > 1.2:
            raise ConfigError(
                f"{command} needs gamma2 > 6/5", errors=[f"law: gamma2={self.law.gamma2:.6g} is not above 6/5"]
            )
        return self


def parse_override_value(raw):
    """Parse the value of a ``path=value`` override as a YAML scalar.

    >>> parse_override_value("1e-3"), parse_override_value("true"), parse_override_value("[1, 2]")
    (0.001, True, [1, 2])
    """
    try:
        return YAML(typ="safe").load(raw)
    except YAMLError as err:
        raise ConfigError(f"Cannot parse override value {raw!r}", errors=[str(err)]) from err


def apply_overrides(payload, overrides):
    """Apply dotted-path ``path=value`` overrides to a mapping in place."""
    for item in overrides or ():
        key, sep, raw = item.partition("=")
        parts = [segment for segment in key.strip().split(".") if segment]
        if not sep or not parts:
            raise ConfigError(f"Invalid override {item!r}; expected path=value")
        target = payload
        for segment in parts[:-1]:
            if target.get(segment) is None:
                target[segment] = {}
            target = target[segment]
            if not isinstance(target, dict):
                raise ConfigError(f"Cannot set {item!r}: {segment} is not a mapping")
        target[parts[-1]] = parse_override_value(raw)
    return payload


def _field_errors(err):
    return [f"{'.'.join(str(part) for part in error['loc']) or '<root>'}: {error['msg']}" for error in err.errors()]


def validate_config(payload):
    """Validate a plain mapping into a RunConfig.

    Raises:
        ConfigError: With one ``dotted.path: message`` entry per schema violation.
    """
    if not isinstance(payload, dict):
        raise ConfigError("Configuration root must be a mapping")
    try:
        return RunConfig.model_validate(payload)
    except ValidationError as err:
        errors = _field_errors(err)
        raise ConfigError(f"Invalid configuration: {errors[0]}", errors=errors) from err


def load_config(path=None, overrides=None):
    """Load YAML (or JSON) from ``path``, apply overrides and validate."""
    payload = {}
    if path is not None:
        yaml = YAML(typ="safe")
        try:
            with open(path, "r", encoding="utf-8") as file:
                payload = yaml.load(file) or {}
        except (OSError, YAMLError) as err:
            raise ConfigError(f"Cannot read configuration {path}: {err}") from err
    payload = apply_overrides(payload, overrides)
    config = validate_config(payload)
    LOGGER.debug("Loaded configuration from %s with %d overrides", path or "<flags>", len(overrides or ()))
    return config


def effective_config(config):
    """Plain mapping of the validated configuration, defaults filled in."""
    return config.model_dump(mode="json")
