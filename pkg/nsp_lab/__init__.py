"""Numerical lab for spherically symmetric Navier-Stokes-Poisson flows."""
try:
    from importlib import metadata
except ImportError:
    # Python version < 3.8
    import importlib_metadata as metadata

__version__ = metadata.version("nsp-lab")
