"""Default settings to use across different files."""
import os

from ruamel.yaml import YAML


def _load_settings(path):
    """Load the optional settings mapping named by ``NSP_LAB_SETTINGS``."""
    if not path:
        return {}
    yaml = YAML(typ="safe")
    with open(path, "r", encoding="utf-8") as file:
        data = yaml.load(file)
    return data or {}


CONFIG = _load_settings(os.environ.get("NSP_LAB_SETTINGS"))
QUAD_RTOL = CONFIG.get("QUAD_RTOL", 1e-12)
TABLE_RHO_MIN = CONFIG.get("TABLE_RHO_MIN", 1e-12)
TABLE_RHO_MAX = CONFIG.get("TABLE_RHO_MAX", 1e12)
TABLE_POINTS_PER_DECADE = CONFIG.get("TABLE_POINTS_PER_DECADE", 96)
GOURSAT_TOL = CONFIG.get("GOURSAT_TOL", 1e-10)
GOURSAT_MAX_ITERS = CONFIG.get("GOURSAT_MAX_ITERS", 200)
GOURSAT_RESOLUTION = CONFIG.get("GOURSAT_RESOLUTION", 256)
KERNEL_LEVELS = CONFIG.get("KERNEL_LEVELS", 256)
KERNEL_NODES = CONFIG.get("KERNEL_NODES", 257)
KERNEL_TOL = CONFIG.get("KERNEL_TOL", 1e-12)
KERNEL_MAX_ITERS = CONFIG.get("KERNEL_MAX_ITERS", 500)
CFL = CONFIG.get("CFL", 0.4)
SNAPSHOT_COUNT = CONFIG.get("SNAPSHOT_COUNT", 24)
DENSITY_FLOOR_FACTOR = CONFIG.get("DENSITY_FLOOR_FACTOR", 1e-14)
WINDOW_D = CONFIG.get("WINDOW_D", 0.1)
WINDOW_D_FRACTION = CONFIG.get("WINDOW_D_FRACTION", 0.8)
SWEEP_WORKERS = CONFIG.get("SWEEP_WORKERS", 1)
MONOTONE_SLACK = CONFIG.get("MONOTONE_SLACK", 0.1)
OUTPUT_DIGITS = CONFIG.get("OUTPUT_DIGITS", 17)
