import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'src'))

from core.longitudinal_models import DrivingMode
from core.sim_engine import Scenario, VehicleSetup
from core.vehicle_dynamics import Environment
from fleet.catalog import find_driver, find_vehicle, load_builtin_drivers, load_builtin_fleet
from schedule.driving_schedule import Schedule, SpeedUnits, load_schedule
from utils.config import Config


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-schedule sweeps (deselect with -m 'not slow')")


@pytest.fixture(scope='session')
def fleet():
    return load_builtin_fleet()


@pytest.fixture(scope='session')
def drivers():
    return load_builtin_drivers()


@pytest.fixture(scope='session')
def env():
    return Environment()


@pytest.fixture(scope='session')
def civic(fleet):
    return find_vehicle(fleet, 1)


@pytest.fixture(scope='session')
def default_driver(drivers):
    return find_driver(drivers, Config.DRIVER_TYPE)


@pytest.fixture(scope='session')
def us06():
    return load_schedule(os.path.join(Config.SCHEDULES_DIR, 'us06.csv'))


@pytest.fixture(scope='session')
def hd_udds():
    return load_schedule(os.path.join(Config.SCHEDULES_DIR, 'hd_udds.csv'))


@pytest.fixture
def short_schedule():
    """60 s: stand 1 s, ramp to 40 ft/s, hold, brake to a stop."""
    t = np.arange(61, dtype=float)
    v = np.interp(t, [0, 1, 11, 40, 52, 60], [0, 0, 40, 40, 0, 0])
    return Schedule(name='short', time=t, native_speed=v, native_units=SpeedUnits.FPS)


@pytest.fixture
def make_scenario(civic, default_driver):
    """Two-vehicle string behind the Civic Si; keyword overrides go to ``Scenario``."""
    def build(schedule, follower=None, mode=DrivingMode.MANUAL, leader=None, **overrides):
        vehicles = (
            VehicleSetup(leader or civic, default_driver, mode),
            VehicleSetup(follower or civic, default_driver, mode),
        )
        return Scenario(schedule=schedule, vehicles=vehicles, **overrides)
    return build


@pytest.fixture
def write_schedule(tmp_path):
    def write(rows, name='schedule.csv', header=True):
        lines = ['time_s,speed'] if header else []
        lines += [f"{t},{v}" for t, v in rows]
        path = tmp_path / name
        path.write_text('\n'.join(lines) + '\n')
        return str(path)
    return write
