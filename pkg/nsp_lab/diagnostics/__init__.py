"""Ledgers, bound fits and entropy balances; sweeps live in :mod:`nsp_lab.diagnostics.sweeps`."""
from nsp_lab.diagnostics.entropy_balance import BalanceReport, entropy_dissipation_balance
from nsp_lab.diagnostics.ledger import (
    A3,
    LEDGER_COLUMNS,
    BDTerms,
    DiagnosticsLedger,
    Energies,
    bd_terms,
    boundary_lower_bound,
    compression,
    density_slope,
    dissipation_rate,
    energy_functionals,
    gravitational_energy,
    sobolev_check,
)

__all__ = (
    "A3",
    "LEDGER_COLUMNS",
    "BalanceReport",
    "BDTerms",
    "DiagnosticsLedger",
    "Energies",
    "bd_terms",
    "boundary_lower_bound",
    "compression",
    "density_slope",
    "dissipation_rate",
    "energy_functionals",
    "entropy_dissipation_balance",
    "gravitational_energy",
    "sobolev_check",
)
