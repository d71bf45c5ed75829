"""Scenario JSON files: schema validation and conversion into a ``Scenario``."""
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match

try:
    from ..core.longitudinal_models import DrivingMode, GainSet
    from ..core.sim_engine import Scenario, VehicleSetup
    from ..core.vehicle_dynamics import Environment
    from ..fleet.catalog import (VehicleSpec, find_driver, find_vehicle, load_builtin_drivers, load_fleet,
                                 sample_driver_types)
    from ..schedule.driving_schedule import load_schedule
    from ..utils.config import Config
    from ..utils.exceptions import ConfigurationError, ValidationError
    from ..utils.file_handler import FileHandler
except ImportError:
    from core.longitudinal_models import DrivingMode, GainSet
    from core.sim_engine import Scenario, VehicleSetup
    from core.vehicle_dynamics import Environment
    from fleet.catalog import (VehicleSpec, find_driver, find_vehicle, load_builtin_drivers, load_fleet,
                               sample_driver_types)
    from schedule.driving_schedule import load_schedule
    from utils.config import Config
    from utils.exceptions import ConfigurationError, ValidationError
    from utils.file_handler import FileHandler

logger = logging.getLogger(__name__)

SAMPLED_DRIVER = 'sampled'


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario
    output_dir: str
    write_plots: bool = True
    source: Optional[str] = None


def load_schema() -> Dict[str, Any]:
    schema = FileHandler.read_json_file(Config.SCENARIO_SCHEMA_PATH)
    if schema is None:
        raise ConfigurationError(f"cannot read scenario schema {Config.SCENARIO_SCHEMA_PATH}")
    return schema


def validate_config(data: Any) -> None:
    """Raise ``ConfigurationError`` naming the offending key if ``data`` breaks the schema."""
    error = best_match(Draft7Validator(load_schema()).iter_errors(data))
    if error is None:
        return
    location = '/'.join(str(p) for p in error.absolute_path) or '<root>'
    raise ConfigurationError(f"{location}: {error.message}")


def _resolve(path: str, base_dir: str) -> str:
    if os.path.isabs(path):
        return path
    candidate = os.path.normpath(os.path.join(base_dir, path))
    if os.path.exists(candidate):
        return candidate
    fallback = os.path.normpath(os.path.join(Config.DATA_DIR, path))
    return fallback if os.path.exists(fallback) else candidate


def _positive(data: Dict[str, Any], key: str) -> None:
    if key in data and not data[key] > 0:
        raise ConfigurationError(f"{key} must be positive")


def _vehicle_setups(entries: Sequence[Dict[str, Any]], fleet: Sequence[VehicleSpec],
                    seed: int) -> List[VehicleSetup]:
    drivers = load_builtin_drivers()
    sampled = sum(1 for e in entries if e.get('driver') == SAMPLED_DRIVER)
    draws = iter(sample_driver_types(sampled, seed, drivers)) if sampled else iter(())

    setups = []
    for index, entry in enumerate(entries):
        spec = find_vehicle(fleet, entry['vehicle'])
        if spec is None:
            raise ConfigurationError(f"vehicles/{index}/vehicle: unknown vehicle id {entry['vehicle']}")
        driver_key = entry.get('driver', Config.DRIVER_TYPE)
        if driver_key == SAMPLED_DRIVER:
            driver = next(draws)
        else:
            driver = find_driver(drivers, driver_key)
            if driver is None:
                raise ConfigurationError(f"vehicles/{index}/driver: unknown driver type {driver_key}")
        try:
            setups.append(VehicleSetup(
                spec=spec,
                driver=driver,
                mode=DrivingMode(entry.get('mode', DrivingMode.MANUAL.value)),
                time_gap_setting=entry.get('time_gap_s'),
                sensing_delay=entry.get('sensing_delay_s'),
            ))
        except ValidationError as e:
            raise ConfigurationError(f"vehicles/{index}: {e}") from e
    return setups


def build_scenario_config(data: Dict[str, Any], base_dir: str = '.',
                          fleet: Optional[Sequence[VehicleSpec]] = None,
                          out_dir: Optional[str] = None,
                          continue_on_collision: Optional[bool] = None) -> ScenarioConfig:
    validate_config(data)
    for key in ('dt', 'initial_spacing_ft', 'free_flow_speed_fps', 'detection_range_m'):
        _positive(data, key)

    if fleet is None:
        catalog = data.get('catalog') or Config.fleet_path()
        fleet = load_fleet(_resolve(catalog, base_dir) if catalog else None)

    schedule_cfg = data['schedule']
    schedule = load_schedule(_resolve(schedule_cfg['path'], base_dir),
                             units=schedule_cfg.get('units', 'mph'))
    seed = data.get('seed', 0)
    name = data.get('name', schedule.name)

    if continue_on_collision is None:
        continue_on_collision = data.get('continue_on_collision', False)
    try:
        scenario = Scenario(
            schedule=schedule,
            vehicles=tuple(_vehicle_setups(data['vehicles'], fleet, seed)),
            env=Environment(**data.get('environment', {})),
            dt=data.get('dt', Config.TIME_STEP),
            communication_delay=data.get('communication_delay_s', Config.COMMUNICATION_DELAY),
            broadcast_period=data.get('broadcast_period_s'),
            initial_spacing=data.get('initial_spacing_ft', Config.INITIAL_SPACING),
            free_flow_speed=data.get('free_flow_speed_fps', Config.FREE_FLOW_SPEED),
            alpha=data.get('alpha', Config.ALPHA),
            beta=data.get('beta', Config.BETA),
            detection_range=data.get('detection_range_m', Config.DETECTION_RANGE_M) * Config.FT_PER_METER,
            gains=GainSet.initial(data.get('gains')),
            seed=seed,
            name=name,
            adaptive_gains=data.get('adaptive_gains', True),
            adaptive_time_gap=data.get('adaptive_time_gap', True),
            continue_on_collision=continue_on_collision,
            startup_exclusion=data.get('startup_exclusion_s', Config.STARTUP_EXCLUSION),
        )
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e

    output = data.get('output', {})
    if out_dir is None:
        out_dir = _resolve(output['dir'], base_dir) if 'dir' in output else os.path.join(Config.OUTPUTS_DIR, name)
    return ScenarioConfig(scenario=scenario, output_dir=out_dir, write_plots=output.get('plots', True))


def load_scenario_config(path: str, **kwargs) -> ScenarioConfig:
    if not FileHandler.validate_file_path(path):
        raise ConfigurationError(f"config file not found: {path}")
    data = FileHandler.read_json_file(path)
    if data is None:
        raise ConfigurationError(f"config file is not valid JSON: {path}")
    base_dir = os.path.dirname(os.path.abspath(path))
    config = build_scenario_config(data, base_dir=base_dir, **kwargs)
    logger.debug("Loaded scenario %s from %s", config.scenario.name, path)
    return ScenarioConfig(scenario=config.scenario, output_dir=config.output_dir,
                          write_plots=config.write_plots, source=path)
