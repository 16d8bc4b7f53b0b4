"""Utilities."""
from .fitting import fitted_constant, fitted_rate, geometric_ratio, stability_ratio
from .quadrature import gauss_legendre, log_grid
from .writers import to_jsonable, write_csv, write_json, write_yaml

__all__ = (
    "fitted_constant",
    "fitted_rate",
    "gauss_legendre",
    "geometric_ratio",
    "log_grid",
    "stability_ratio",
    "to_jsonable",
    "write_csv",
    "write_json",
    "write_yaml",
)
