"""Pressure laws P(rho) and their structural parameters."""
#  pylint: disable=too-few-public-methods
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, model_validator
from scipy.special import binom

from nsp_lab.exceptions import LawError

# Terms kept in the binomial expansions of (1 + t)^(-1/2); |t| <= 1/4 on every branch.
_SERIES_TERMS = 32
_GAUSS_NODES = 48
_SAMPLES = np.logspace(-12, 12, 97)


def _as_array(rho):
    return np.asarray(rho, dtype=float)


class PressureLaw(BaseModel):
    """Barotropic pressure law with low/high density power-law tails.

    Subclasses implement ``pressure``, ``dpressure``, ``stiffness`` (the ratio
    rho P''/P') and its density derivative; everything else in the lab is
    derived from those four callables.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    rho_low: Optional[PositiveFloat] = Field(default=None, description="Low-density threshold rho_*.")
    rho_high: Optional[PositiveFloat] = Field(default=None, description="High-density threshold rho^*.")

    @property
    def is_polytropic(self):
        """Whether the law is a single power law."""
        return False

    @property
    def gamma1(self):
        """Low-density exponent."""
        raise NotImplementedError

    @property
    def gamma2(self):
        """High-density exponent."""
        raise NotImplementedError

    @property
    def kappa1(self):
        """Low-density pressure scale."""
        raise NotImplementedError

    @property
    def kappa2(self):
        """High-density pressure scale."""
        raise NotImplementedError

    @property
    def epsilon(self):
        """Decay exponent of the high-density correction."""
        raise NotImplementedError

    @property
    def theta1(self):
        """(gamma1 - 1) / 2."""
        return 0.5 * (self.gamma1 - 1.0)

    @property
    def theta2(self):
        """(gamma2 - 1) / 2."""
        return 0.5 * (self.gamma2 - 1.0)

    @property
    def lambda1(self):
        """Kernel exponent (3 - gamma1) / (2 (gamma1 - 1))."""
        return (3.0 - self.gamma1) / (2.0 * (self.gamma1 - 1.0))

    @property
    def a0(self):
        """Sandwich margin (3 - gamma1) / (2 (gamma1 + 1))."""
        return (3.0 - self.gamma1) / (2.0 * (self.gamma1 + 1.0))

    @property
    def nu(self):
        """Upper bound for |rho k''/k'| on both tails."""
        gamma1 = self.gamma1
        return 1.0 - (3.0 * gamma1 - 1.0) * (gamma1 - 1.0) / (2.0 * (5.0 + gamma1))

    @property
    def breakpoints(self):
        """Quadrature split points, the thresholds when set."""
        return (self.rho_low or 1e-2, self.rho_high or 1e2)

    def gamma_of(self, rho):
        """Piecewise exponent gamma(rho) used by the bound fits."""
        rho_low = self.rho_low or self.breakpoints[0]
        return np.where(_as_array(rho) <= rho_low, self.gamma1, self.gamma2)

    def theta_of(self, rho):
        """Piecewise theta(rho) = (gamma(rho) - 1) / 2."""
        return 0.5 * (self.gamma_of(rho) - 1.0)

    def pressure(self, rho):
        """P(rho)."""
        raise NotImplementedError

    def dpressure(self, rho):
        """P'(rho)."""
        raise NotImplementedError

    def stiffness(self, rho):
        """rho P''(rho) / P'(rho)."""
        raise NotImplementedError

    def stiffness_slope(self, rho):
        """Density derivative of ``stiffness``."""
        raise NotImplementedError

    def d2pressure(self, rho):
        """P''(rho)."""
        rho = _as_array(rho)
        return self.dpressure(rho) * self.stiffness(rho) / rho

    def d3pressure(self, rho):
        """P'''(rho), from the stiffness ratio and its slope."""
        rho = _as_array(rho)
        ratio = self.stiffness(rho)
        dp = self.dpressure(rho)
        return (self.d2pressure(rho) * ratio + dp * self.stiffness_slope(rho)) / rho - dp * ratio / rho**2

    def _check_admissible(self):
        gamma1, gamma2 = self.gamma1, self.gamma2
        if not 1.0 < gamma1 < 3.0:
            raise ValueError(f"gamma1={gamma1:.6g} must lie in (1, 3)")
        if not 1.0 < gamma2 <= gamma1 + 1e-14:
            raise ValueError(f"gamma2={gamma2:.6g} must lie in (1, gamma1]")
        dp = self.dpressure(_SAMPLES)
        if not np.all(dp > 0.0):
            raise ValueError("P' must be positive on sampled densities")
        if not np.all(2.0 + self.stiffness(_SAMPLES) > 0.0):
            raise ValueError("2P' + rho P'' must be positive on sampled densities")
        if self.rho_low is not None and self.rho_high is not None and self.rho_low >= self.rho_high:
            raise ValueError("rho_low must be smaller than rho_high")
        return self


class Polytropic(PressureLaw):
    """P = kappa rho^gamma."""

    kind: Literal["polytropic"] = "polytropic"
    kappa: PositiveFloat
    gamma: float

    @model_validator(mode="after")
    def validate_admissible(self):
        """Check the structural conditions on the law."""
        return self._check_admissible()

    @property
    def is_polytropic(self):
        """Single power law."""
        return True

    @property
    def gamma1(self):
        """Low-density exponent."""
        return self.gamma

    @property
    def gamma2(self):
        """High-density exponent."""
        return self.gamma

    @property
    def kappa1(self):
        """Low-density pressure scale."""
        return self.kappa

    @property
    def kappa2(self):
        """High-density pressure scale."""
        return self.kappa

    @property
    def epsilon(self):
        """No correction term; any positive decay works."""
        return 1.0

    @property
    def breakpoints(self):
        """Thresholds default to (0.5, 2)."""
        return (self.rho_low or 0.5, self.rho_high or 2.0)

    @property
    def k_scale(self):
        """Coefficient c in k(rho) = c rho^theta."""
        return 2.0 * np.sqrt(self.kappa * self.gamma) / (self.gamma - 1.0)

    def pressure(self, rho):
        """P(rho)."""
        return self.kappa * _as_array(rho) ** self.gamma

    def dpressure(self, rho):
        """P'(rho)."""
        return self.kappa * self.gamma * _as_array(rho) ** (self.gamma - 1.0)

    def stiffness(self, rho):
        """rho P''/P' = gamma - 1."""
        return np.full_like(_as_array(rho), self.gamma - 1.0)

    def stiffness_slope(self, rho):
        """Constant stiffness."""
        return np.zeros_like(_as_array(rho))


class _DegenerateLaw(PressureLaw):
    """P = scale * int_0^x s^4 (delta + s^q)^(-1/2) ds with x = stretch * rho^(1/3)."""

    @property
    def core_scale(self):
        """Overall pressure scale."""
        raise NotImplementedError

    @property
    def core_stretch(self):
        """Factor in x = stretch * rho^(1/3)."""
        raise NotImplementedError

    @property
    def core_delta(self):
        """Offset under the square root."""
        raise NotImplementedError

    @property
    def core_power(self):
        """Power q of s under the square root."""
        raise NotImplementedError

    @property
    def gamma1(self):
        """Low-density exponent 5/3."""
        return 5.0 / 3.0

    @property
    def gamma2(self):
        """High-density exponent 5/3 - q/6."""
        return 5.0 / 3.0 - self.core_power / 6.0

    @property
    def kappa1(self):
        """Leading low-density coefficient."""
        return self.core_scale * self.core_stretch**5 / (5.0 * np.sqrt(self.core_delta))

    @property
    def kappa2(self):
        """Leading high-density coefficient."""
        return self.core_scale * self.core_stretch ** (5.0 - self.core_power / 2.0) / (5.0 - self.core_power / 2.0)

    @property
    def epsilon(self):
        """Relative correction decays like rho^(-q/3)."""
        return self.core_power / 3.0

    def _x(self, rho):
        return self.core_stretch * np.cbrt(_as_array(rho))

    def _fraction(self, rho):
        """x^q / (delta + x^q), computed without overflow."""
        xq = self._x(rho) ** self.core_power
        return xq / (self.core_delta + xq)

    def pressure(self, rho):
        """P(rho)."""
        return self.core_scale * _root_integral(self._x(rho), self.core_delta, self.core_power)

    def dpressure(self, rho):
        """P'(rho) = scale x^5 / (3 rho sqrt(delta + x^q))."""
        rho = _as_array(rho)
        x = self._x(rho)
        with np.errstate(divide="ignore", invalid="ignore"):
            value = self.core_scale * x**5 / (3.0 * rho * np.sqrt(self.core_delta + x**self.core_power))
        return np.where(rho > 0.0, value, 0.0)

    def stiffness(self, rho):
        """rho P''/P' = 2/3 - (q/6) x^q / (delta + x^q)."""
        return 2.0 / 3.0 - self.core_power / 6.0 * self._fraction(rho)

    def stiffness_slope(self, rho):
        """Derivative of the stiffness ratio."""
        rho = _as_array(rho)
        frac = self._fraction(rho)
        return -(self.core_power**2) / 18.0 * frac * (1.0 - frac) / rho


class WhiteDwarf(_DegenerateLaw):
    """Degenerate electron gas: P = C1 int_0^{C2 rho^(1/3)} s^4 / sqrt(C3 + s^2) ds."""

    kind: Literal["white_dwarf"] = "white_dwarf"
    C1: PositiveFloat
    C2: PositiveFloat
    C3: PositiveFloat

    @model_validator(mode="after")
    def validate_admissible(self):
        """Check the structural conditions on the law."""
        return self._check_admissible()

    @property
    def core_scale(self):
        """See the base class."""
        return self.C1

    @property
    def core_stretch(self):
        """See the base class."""
        return self.C2

    @property
    def core_delta(self):
        """See the base class."""
        return self.C3

    @property
    def core_power(self):
        """See the base class."""
        return 2.0


class PDelta(_DegenerateLaw):
    """Perturbed degenerate law P = int_0^{rho^(1/3)} s^4 / sqrt(delta + s^(2+eps0)) ds."""

    kind: Literal["p_delta"] = "p_delta"
    delta: PositiveFloat
    eps0: float = Field(gt=0.0, lt=0.8)

    @model_validator(mode="after")
    def validate_admissible(self):
        """Check the structural conditions on the law."""
        return self._check_admissible()

    @property
    def core_scale(self):
        """See the base class."""
        return 1.0

    @property
    def core_stretch(self):
        """See the base class."""
        return 1.0

    @property
    def core_delta(self):
        """See the base class."""
        return self.delta

    @property
    def core_power(self):
        """See the base class."""
        return 2.0 + self.eps0


def _lower_series(x, delta, q):
    """int_0^x s^4 (delta + s^q)^(-1/2) ds for x^q <= delta / 4."""
    n = np.arange(_SERIES_TERMS)
    t = (x**q / delta)[..., None]
    terms = binom(-0.5, n) * t**n / (5.0 + n * q)
    return x**5 / np.sqrt(delta) * terms.sum(axis=-1)


def _upper_series(x1, x2, delta, q):
    """int_{x1}^{x2} s^4 (delta + s^q)^(-1/2) ds for s^q >= 4 delta."""
    total = np.zeros_like(x2)
    power = 5.0 - 0.5 * q
    for n in range(_SERIES_TERMS):
        exponent = power - n * q
        coeff = binom(-0.5, n) * delta**n
        if abs(exponent) < 1e-12:
            total += coeff * (np.log(x2) - np.log(x1))
        else:
            total += coeff * (x2**exponent - x1**exponent) / exponent
    return total


def _gauss_piece(x1, x2, delta, q):
    """Gauss-Legendre integral over [x1, x2] inside the transition band."""
    nodes, weights = np.polynomial.legendre.leggauss(_GAUSS_NODES)
    half = 0.5 * (x2 - x1)[..., None]
    mid = 0.5 * (x2 + x1)[..., None]
    s = mid + half * nodes
    return (half * weights * s**4 / np.sqrt(delta + s**q)).sum(axis=-1)


def _root_integral(x, delta, q):
    """int_0^x s^4 (delta + s^q)^(-1/2) ds, vectorized over x >= 0."""
    shape = np.shape(x)
    x = np.atleast_1d(_as_array(x)).ravel()
    x_lo = (0.25 * delta) ** (1.0 / q)
    x_hi = (4.0 * delta) ** (1.0 / q)
    lower = _lower_series(np.minimum(x, x_lo), delta, q)
    band = _gauss_piece(np.full_like(x, x_lo), np.clip(x, x_lo, x_hi), delta, q)
    upper = _upper_series(np.full_like(x, x_hi), np.maximum(x, x_hi), delta, q)
    return (lower + band + upper).reshape(shape)


LAW_KINDS = {"polytropic": Polytropic, "white_dwarf": WhiteDwarf, "p_delta": PDelta}


def build_law(spec):
    """Construct a pressure law from a mapping carrying a ``kind`` key.

    Args:
        spec (dict): Law parameters, e.g. ``{"kind": "white_dwarf", "C1": 1, "C2": 1, "C3": 1}``.

    Returns:
        PressureLaw: The validated, immutable law.

    Raises:
        LawError: Unknown kind or inadmissible parameters.

    >>> build_law({"kind": "polytropic", "kappa": 1.0, "gamma": 2.0}).theta1
    0.5
    """
    if isinstance(spec, PressureLaw):
        return spec
    params = dict(spec)
    kind = params.pop("kind", None)
    if kind not in LAW_KINDS:
        raise LawError(f"Unknown pressure law kind {kind!r}; expected one of {sorted(LAW_KINDS)}")
    try:
        return LAW_KINDS[kind](**params)
    except ValidationError as err:
        raise LawError(f"Inadmissible {kind} law: {err.errors()[0]['msg']}") from err
