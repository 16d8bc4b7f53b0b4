"""Test Utils."""
import json
import os


def json_fixture(json_file_path):
    """Load and return JSON Fixture."""
    with open(json_file_path, "r", encoding="utf-8") as file:
        return json.load(file)


def write_fixture_config(payload, directory, filename="config.json"):
    """Write a configuration mapping into ``directory`` and return its path."""
    path = os.path.join(directory, filename)
    with open(path, "w", encoding="utf-8") as file:
        json.dump(payload, file)
    return path
