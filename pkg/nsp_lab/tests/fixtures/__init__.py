"""Fixtures.

In your test file, simply import:
```
from nsp_lab.tests.fixtures import json_fixture, real_path
```
Then you can load the configurations that you have added to the fixtures directory
with the json_fixture utility:

json_fixture(f"{FIXTURES}/polytropic_config.json")

This will return a loaded json object, ready for ``validate_config``. The same
files can be handed to ``load_config`` or to ``nsp-lab --config`` directly.
"""
import os

from .utilities import json_fixture, write_fixture_config

__all__ = ("json_fixture", "write_fixture_config")

real_path = os.path.dirname(os.path.realpath(__file__))
