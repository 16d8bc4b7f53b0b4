"""Deterministic CSV, JSON and YAML writers."""
import json
import math
import os
from enum import Enum

import numpy as np
from pydantic import BaseModel
from ruamel.yaml import YAML

from nsp_lab import defaults


def _float(value):
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(f"{value:.{defaults.OUTPUT_DIGITS}g}")


def to_jsonable(payload):
    """Convert models, arrays and numpy scalars into plain JSON data.

    >>> to_jsonable({"a": np.float64(0.5), "b": (1, 2)})
    {'a': 0.5, 'b': [1, 2]}
    """
    if isinstance(payload, BaseModel):
        return to_jsonable(payload.model_dump(mode="python"))
    if isinstance(payload, dict):
        return {str(key): to_jsonable(value) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [to_jsonable(value) for value in payload]
    if isinstance(payload, np.ndarray):
        return [to_jsonable(value) for value in payload.tolist()]
    if isinstance(payload, Enum):
        return payload.value
    if isinstance(payload, (bool, np.bool_)):
        return bool(payload)
    if isinstance(payload, (int, np.integer)):
        return int(payload)
    if isinstance(payload, (float, np.floating)):
        return _float(payload)
    if payload is None or isinstance(payload, str):
        return payload
    return str(payload)


def write_json(payload, path):
    """Write ``payload`` as sorted, indented JSON."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as file:
        json.dump(to_jsonable(payload), file, indent=2, sort_keys=True)
        file.write("\n")
    return path


def write_csv(frame, path):
    """Write a DataFrame with a fixed float format."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame.to_csv(path, index=False, float_format=f"%.{defaults.OUTPUT_DIGITS}g")
    return path


def write_yaml(payload, path):
    """Write a mapping as block-style YAML."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    yaml = YAML()
    yaml.default_flow_style = False
    with open(path, "w", encoding="utf-8") as file:
        yaml.dump(to_jsonable(payload), file)
    return path
