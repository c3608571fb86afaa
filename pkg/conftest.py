"""Shared fixtures; the repository root is on sys.path so `src` imports resolve"""

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from src.field import FieldDescriptor, GridSpec, sample  # noqa: E402
from src.filterbank import build_partition  # noqa: E402
from src.utils.report_writer import write_json  # noqa: E402

# Observed constants of the slow acceptance runs, pinned to +-20%
REGRESSION_PINS = Path(__file__).resolve().parent / "tests" / "regression_pins.json"
PIN_TOLERANCE = 0.2


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-resolution acceptance runs")


@pytest.fixture(scope="session")
def regression_pin():
    """pin(key, value): compare against the stored value, or store it on the first green run"""
    pins = json.loads(REGRESSION_PINS.read_text()) if REGRESSION_PINS.exists() else {}

    def pin(key, value):
        if key in pins:
            assert value == pytest.approx(pins[key], rel=PIN_TOLERANCE), f"{key} drifted from its pinned value"
        else:
            pins[key] = float(value)
            write_json(REGRESSION_PINS, dict(sorted(pins.items())))

    return pin


@pytest.fixture(scope="session")
def grid_1d():
    """Default production grid: N=1, n=4096, L=40"""
    return GridSpec(1, 4096, 40.0)


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec(1, 1024, 40.0)


@pytest.fixture(scope="session")
def grid_2d():
    return GridSpec(2, 64, 16.0)


@pytest.fixture(scope="session")
def gaussian(grid_1d):
    return sample(FieldDescriptor('gaussian'), grid_1d)


@pytest.fixture(scope="session")
def small_gaussian(small_grid):
    return sample(FieldDescriptor('gaussian'), small_grid)


@pytest.fixture(scope="session")
def random_field(small_grid):
    return sample(FieldDescriptor('random_bandlimited', seed=42), small_grid)


@pytest.fixture(scope="session")
def small_bank(small_grid):
    return build_partition(small_grid, -3, 5)


@pytest.fixture(scope="session")
def bank(grid_1d):
    return build_partition(grid_1d, -3, 7)
