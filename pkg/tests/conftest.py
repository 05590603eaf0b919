"""Shared fixtures: a small mission that plans in about a second."""

import pytest

from bisar import scenario

SMALL_MISSION = """\
[power]

[sar]

[bs]

[mission]
start_x_m = -500.0
start_y_m = -1000.0
slot_duration_s = 0.5
slot_count = 40

[landmarks]
pattern = "turn"
spacing_m = 30.0
count = 4
hold_slots = 10
"""


@pytest.fixture(scope="session")
def small_sc():
    return scenario.loads(SMALL_MISSION)


@pytest.fixture(scope="session")
def small_scenario_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("scen") / "small.toml"
    path.write_text(SMALL_MISSION)
    return path
