"""Pressure laws and the thermodynamic functions derived from them."""
from .bounds import AsymptoticReport, BoundCheck, resolve_thresholds, threshold_scan, verify_asymptotic_bounds
from .functions import (
    d2k,
    d3k,
    d_of_rho,
    dk,
    e_direct,
    enthalpy,
    eos_table,
    internal_energy,
    k_direct,
    k_inverse,
    k_of_rho,
    pressure,
    sound_speed,
    table_for,
)
from .laws import LAW_KINDS, PDelta, Polytropic, PressureLaw, WhiteDwarf, build_law

__all__ = (
    "AsymptoticReport",
    "BoundCheck",
    "LAW_KINDS",
    "PDelta",
    "Polytropic",
    "PressureLaw",
    "WhiteDwarf",
    "build_law",
    "d2k",
    "d3k",
    "d_of_rho",
    "dk",
    "e_direct",
    "enthalpy",
    "eos_table",
    "internal_energy",
    "k_direct",
    "k_inverse",
    "k_of_rho",
    "pressure",
    "resolve_thresholds",
    "sound_speed",
    "table_for",
    "threshold_scan",
    "verify_asymptotic_bounds",
)
