import io
import logging
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

try:
    from ..utils.config import Config
    from ..utils.exceptions import CatalogParseError, ValidationError
    from ..utils.file_handler import FileHandler
    from .torque_map import TorqueMap, validate_knots
except ImportError:
    from utils.config import Config
    from utils.exceptions import CatalogParseError, ValidationError
    from utils.file_handler import FileHandler
    from fleet.torque_map import TorqueMap, validate_knots

logger = logging.getLogger(__name__)

CATALOG_COLUMNS = [
    'id', 'name', 'fleet_type', 'fhwa_class', 'length_ft', 'width_ft', 'height_ft',
    'weight_lb', 'wheel_radius_ft', 'drag_coeff', 'drivetrain', 'slippage', 'efficiency',
    'diff_ratio', 'gears',
]
ENGINE_COLUMNS = ['engine_id', 'displacement_l', 'idle_rpm', 'max_rpm']
GEOMETRY_COLUMNS = ['wheelbase_ratio', 'cg_height_ratio']
TORQUE_COLUMNS = ['engine_id', 'rpm', 'torque_lbft']


class FleetType(str, Enum):
    SMALL_AUTO = 'small-auto'
    LARGE_AUTO = 'large-auto'
    SMALL_TRUCK = 'small-truck'
    LARGE_TRUCK = 'large-truck'

    @property
    def is_truck(self) -> bool:
        return self in (FleetType.SMALL_TRUCK, FleetType.LARGE_TRUCK)


class Drivetrain(str, Enum):
    FRONT_WHEEL = 'front-wheel'
    REAR_WHEEL = 'rear-wheel'
    ALL_WHEEL = 'all-wheel'


def _positive(name: str, value: float):
    if not value > 0:
        raise ValidationError(name, "must be positive")


@dataclass(frozen=True)
class EngineSpec:
    engine_id: str
    displacement: float
    idle_speed: float
    max_speed: float
    torque_map: TorqueMap
    rpm_knots: np.ndarray = field(init=False, repr=False, compare=False)
    torque_knots: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _positive('idle_speed', self.idle_speed)
        _positive('max_speed', self.max_speed)
        _positive('displacement', self.displacement)
        if not self.idle_speed < self.max_speed:
            raise ValidationError('idle_speed', "must be below max_speed")
        try:
            validate_knots(self.torque_map)
        except ValueError as e:
            raise ValidationError('torque_map', str(e))
        rpm = np.array([k[0] for k in self.torque_map], dtype=float)
        if not math.isclose(rpm[0], self.idle_speed) or not math.isclose(rpm[-1], self.max_speed):
            raise ValidationError('torque_map', "must span idle_speed to max_speed")
        torque = np.array([k[1] for k in self.torque_map], dtype=float)
        rpm.setflags(write=False)
        torque.setflags(write=False)
        object.__setattr__(self, 'rpm_knots', rpm)
        object.__setattr__(self, 'torque_knots', torque)


@dataclass(frozen=True)
class Gear:
    ratio: float
    shift_up: float    # mi/h
    shift_down: float  # mi/h


@dataclass(frozen=True)
class TransmissionSpec:
    slippage: float
    efficiency: float
    differential_ratio: float
    gears: Tuple[Gear, ...]

    def __post_init__(self):
        if not 0 <= self.slippage < 1:
            raise ValidationError('slippage', "must be in [0, 1)")
        if not 0 < self.efficiency <= 1:
            raise ValidationError('efficiency', "must be in (0, 1]")
        _positive('differential_ratio', self.differential_ratio)
        if not self.gears:
            raise ValidationError('gears', "must list at least one gear")
        for index, gear in enumerate(self.gears, start=1):
            _positive(f'gears[{index}].ratio', gear.ratio)
            if not gear.shift_down < gear.shift_up:
                raise ValidationError(f'gears[{index}]', "shift_down must be below shift_up")
        ratios = [g.ratio for g in self.gears]
        if any(b >= a for a, b in zip(ratios, ratios[1:])):
            raise ValidationError('gears', "ratios must be strictly decreasing")

    @property
    def gear_count(self) -> int:
        return len(self.gears)

    def overall_ratio(self, gear: int) -> float:
        return self.gears[gear - 1].ratio * self.differential_ratio


@dataclass(frozen=True)
class VehicleSpec:
    vehicle_id: int
    name: str
    fleet_type: FleetType
    fhwa_class: int
    length: float
    width: float
    height: float
    weight: float
    wheel_radius: float
    drag_coefficient: float
    drivetrain: Drivetrain
    engine: EngineSpec
    transmission: TransmissionSpec
    wheelbase_ratio: float = Config.DEFAULT_WHEELBASE_RATIO
    cg_height_ratio: float = Config.DEFAULT_CG_HEIGHT_RATIO
    l_r: Optional[float] = None

    def __post_init__(self):
        for name in ('length', 'width', 'height', 'weight', 'wheel_radius'):
            _positive(name, getattr(self, name))
        if not 0 < self.drag_coefficient < 2:
            raise ValidationError('drag_coefficient', "must be in (0, 2)")
        if not 0 < self.wheelbase_ratio <= 1:
            raise ValidationError('wheelbase_ratio', "must be in (0, 1]")
        _positive('cg_height_ratio', self.cg_height_ratio)
        if self.l_r is None:
            object.__setattr__(self, 'l_r', self.wheelbase / 2.0)
        if not 0 < self.l_r < self.wheelbase:
            raise ValidationError('l_r', "must lie inside the wheelbase")
        if not 0 < self.cg_height < self.height:
            raise ValidationError('cg_height_ratio', "must put the centre of gravity below the roof")

    @property
    def wheelbase(self) -> float:
        return self.wheelbase_ratio * self.length

    @property
    def l_f(self) -> float:
        return self.wheelbase - self.l_r

    @property
    def cg_height(self) -> float:
        return self.cg_height_ratio * self.wheelbase

    @property
    def frontal_area(self) -> float:
        return self.width * self.height

    @property
    def is_truck(self) -> bool:
        return self.fleet_type.is_truck


@dataclass(frozen=True)
class DriverType:
    driver_id: int
    speed_multiplier: float         # w
    acceleration_multiplier: float  # n
    deceleration_multiplier: float  # q
    traffic_share: float            # percent

    def __post_init__(self):
        for name in ('speed_multiplier', 'acceleration_multiplier', 'deceleration_multiplier'):
            value = getattr(self, name)
            if not 0.5 < value < 1.5:
                raise ValidationError(name, "must be in (0.5, 1.5)")
        if self.traffic_share < 0:
            raise ValidationError('traffic_share', "must not be negative")


def validate_driver_set(drivers: Sequence[DriverType]) -> None:
    total = sum(d.traffic_share for d in drivers)
    if not math.isclose(total, 100.0, abs_tol=1e-9):
        raise ValidationError('traffic_share', f"must sum to 100 (got {total})")
    ordered = sorted(drivers, key=lambda d: d.driver_id)
    for name in ('speed_multiplier', 'acceleration_multiplier', 'deceleration_multiplier'):
        values = [getattr(d, name) for d in ordered]
        if any(b < a for a, b in zip(values, values[1:])):
            raise ValidationError(name, "must be nondecreasing in driver id")


def load_builtin_fleet() -> List[VehicleSpec]:
    try:
        from .builtin import build_fleet
    except ImportError:
        from fleet.builtin import build_fleet
    return build_fleet()


def load_builtin_drivers() -> List[DriverType]:
    try:
        from .builtin import build_drivers
    except ImportError:
        from fleet.builtin import build_drivers
    return build_drivers()


def builtin_engines() -> Dict[str, EngineSpec]:
    return {spec.engine.engine_id: spec.engine for spec in load_builtin_fleet()}


def find_vehicle(specs: Sequence[VehicleSpec], vehicle_id: int) -> Optional[VehicleSpec]:
    for spec in specs:
        if spec.vehicle_id == vehicle_id:
            return spec
    return None


def find_driver(drivers: Sequence[DriverType], driver_id: int) -> Optional[DriverType]:
    for driver in drivers:
        if driver.driver_id == driver_id:
            return driver
    return None


def sample_driver_types(count: int, seed: int,
                        drivers: Optional[Sequence[DriverType]] = None) -> List[DriverType]:
    """Draw driver types in proportion to their traffic shares."""
    pool = list(drivers) if drivers is not None else load_builtin_drivers()
    shares = np.array([d.traffic_share for d in pool], dtype=float)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pool), size=count, p=shares / shares.sum())
    return [pool[int(i)] for i in picks]


# ---------------------------------------------------------------------------
# CSV catalog format
# ---------------------------------------------------------------------------

def _parse_gears(text: str, row: int) -> Tuple[Gear, ...]:
    gears = []
    for chunk in text.split(';'):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split('/')
        if len(parts) != 3:
            raise CatalogParseError(f"gear '{chunk}' is not ratio/up_mph/down_mph", row)
        try:
            ratio, up, down = (float(p) for p in parts)
        except ValueError:
            raise CatalogParseError(f"gear '{chunk}' is not numeric", row)
        gears.append(Gear(ratio=ratio, shift_up=up, shift_down=down))
    return tuple(gears)


def _format_gears(gears: Sequence[Gear]) -> str:
    return ';'.join(f"{g.ratio!r}/{g.shift_up!r}/{g.shift_down!r}" for g in gears)


def _number(record: Dict[str, str], column: str, row: int, cast=float):
    raw = record.get(column, '').strip()
    if raw == '':
        raise CatalogParseError(f"column '{column}' is empty", row)
    try:
        value = float(raw)
    except ValueError:
        raise CatalogParseError(f"column '{column}' is not a number: '{raw}'", row)
    if cast is int:
        if not value.is_integer():
            raise CatalogParseError(f"column '{column}' is not a whole number: '{raw}'", row)
        return int(value)
    return cast(value)


def _read_frame(text: str, required: Sequence[str], what: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as e:
        raise CatalogParseError(f"malformed {what}: {e}")
    frame = frame.fillna('')
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise CatalogParseError(f"{what} header is missing columns: {', '.join(missing)}", 1)
    return frame


def parse_torque_maps(text: str) -> Dict[str, TorqueMap]:
    if not text or not text.strip():
        return {}
    frame = _read_frame(text, TORQUE_COLUMNS, "torque map")
    knots: Dict[str, List[Tuple[float, float]]] = {}
    for index, record in enumerate(frame.to_dict('records')):
        row = index + 2
        engine_id = record['engine_id'].strip()
        knots.setdefault(engine_id, []).append(
            (_number(record, 'rpm', row), _number(record, 'torque_lbft', row)))
    return {engine_id: tuple(sorted(points)) for engine_id, points in knots.items()}


def _build_engine(record: Dict[str, str], row: int, torque_maps: Dict[str, TorqueMap],
                  known: Dict[str, EngineSpec]) -> EngineSpec:
    engine_id = record.get('engine_id', '').strip()
    if not engine_id:
        raise ValidationError('engine_id', "is required", row)
    has_ratings = all(record.get(c, '').strip() for c in ENGINE_COLUMNS[1:])
    if not has_ratings:
        if engine_id in known and engine_id not in torque_maps:
            return known[engine_id]
        raise ValidationError('displacement_l', f"idle_rpm and max_rpm are required for engine {engine_id}", row)

    knots = torque_maps.get(engine_id)
    if knots is None and engine_id in known:
        knots = known[engine_id].torque_map
    if knots is None:
        raise ValidationError('torque_map', f"has no knots for engine {engine_id}", row)
    return EngineSpec(
        engine_id=engine_id,
        displacement=_number(record, 'displacement_l', row),
        idle_speed=_number(record, 'idle_rpm', row),
        max_speed=_number(record, 'max_rpm', row),
        torque_map=knots,
    )


def _build_vehicle(record: Dict[str, str], row: int, torque_maps: Dict[str, TorqueMap],
                   known: Dict[str, EngineSpec]) -> VehicleSpec:
    try:
        fleet_type = FleetType(record['fleet_type'].strip())
    except ValueError:
        raise CatalogParseError(f"unknown fleet_type '{record['fleet_type']}'", row)
    try:
        drivetrain = Drivetrain(record['drivetrain'].strip())
    except ValueError:
        raise CatalogParseError(f"unknown drivetrain '{record['drivetrain']}'", row)

    geometry = {}
    for column in GEOMETRY_COLUMNS:
        if record.get(column, '').strip():
            geometry[column] = _number(record, column, row)

    transmission = TransmissionSpec(
        slippage=_number(record, 'slippage', row),
        efficiency=_number(record, 'efficiency', row),
        differential_ratio=_number(record, 'diff_ratio', row),
        gears=_parse_gears(record['gears'], row),
    )
    return VehicleSpec(
        vehicle_id=_number(record, 'id', row, int),
        name=record['name'].strip(),
        fleet_type=fleet_type,
        fhwa_class=_number(record, 'fhwa_class', row, int),
        length=_number(record, 'length_ft', row),
        width=_number(record, 'width_ft', row),
        height=_number(record, 'height_ft', row),
        weight=_number(record, 'weight_lb', row),
        wheel_radius=_number(record, 'wheel_radius_ft', row),
        drag_coefficient=_number(record, 'drag_coeff', row),
        drivetrain=drivetrain,
        engine=_build_engine(record, row, torque_maps, known),
        transmission=transmission,
        **geometry,
    )


def parse_catalog(text: str, torque_text: Optional[str] = None) -> List[VehicleSpec]:
    """Parse a catalog CSV (and optional torque sidecar) into validated specs.

    Rows are numbered as file lines, the header being row 1. Structural problems
    raise ``CatalogParseError``; invariant violations raise ``ValidationError``
    naming the field, both carrying the row.
    """
    if not text or not text.strip():
        return []
    torque_maps = parse_torque_maps(torque_text or '')
    known = builtin_engines()
    frame = _read_frame(text, CATALOG_COLUMNS, "catalog")

    specs = []
    for index, record in enumerate(frame.to_dict('records')):
        row = index + 2
        try:
            specs.append(_build_vehicle(record, row, torque_maps, known))
        except ValidationError as e:
            if e.row is None:
                raise ValidationError(e.field, e.message, row) from e
            raise
    logger.debug("Parsed %d catalog rows", len(specs))
    return specs


def serialize_catalog(specs: Sequence[VehicleSpec]) -> Tuple[str, str]:
    """Return ``(catalog_csv, torque_csv)``; ``parse_catalog`` inverts it."""
    rows = []
    engines: Dict[str, EngineSpec] = {}
    for spec in specs:
        rows.append({
            'id': spec.vehicle_id,
            'name': spec.name,
            'fleet_type': spec.fleet_type.value,
            'fhwa_class': spec.fhwa_class,
            'length_ft': repr(spec.length),
            'width_ft': repr(spec.width),
            'height_ft': repr(spec.height),
            'weight_lb': repr(spec.weight),
            'wheel_radius_ft': repr(spec.wheel_radius),
            'drag_coeff': repr(spec.drag_coefficient),
            'drivetrain': spec.drivetrain.value,
            'slippage': repr(spec.transmission.slippage),
            'efficiency': repr(spec.transmission.efficiency),
            'diff_ratio': repr(spec.transmission.differential_ratio),
            'gears': _format_gears(spec.transmission.gears),
            'engine_id': spec.engine.engine_id,
            'displacement_l': repr(spec.engine.displacement),
            'idle_rpm': repr(spec.engine.idle_speed),
            'max_rpm': repr(spec.engine.max_speed),
            'wheelbase_ratio': repr(spec.wheelbase_ratio),
            'cg_height_ratio': repr(spec.cg_height_ratio),
        })
        engines.setdefault(spec.engine.engine_id, spec.engine)

    columns = CATALOG_COLUMNS + ENGINE_COLUMNS + GEOMETRY_COLUMNS
    catalog = pd.DataFrame(rows, columns=columns).to_csv(index=False, lineterminator='\n')
    torque_rows = [
        {'engine_id': engine_id, 'rpm': repr(rpm), 'torque_lbft': repr(torque)}
        for engine_id, engine in engines.items()
        for rpm, torque in engine.torque_map
    ]
    torque = pd.DataFrame(torque_rows, columns=TORQUE_COLUMNS).to_csv(index=False, lineterminator='\n')
    return catalog, torque


def torque_sidecar_path(catalog_path: str) -> str:
    root, ext = os.path.splitext(catalog_path)
    return f"{root}_torque{ext or '.csv'}"


def load_fleet(path: Optional[str] = None) -> List[VehicleSpec]:
    """Built-in fleet, or the catalog at ``path`` plus its ``_torque`` sidecar."""
    if path is None:
        return load_builtin_fleet()
    if not FileHandler.validate_file_path(path):
        raise CatalogParseError(f"catalog file not found: {path}")
    sidecar = torque_sidecar_path(path)
    torque_text = FileHandler.read_text_file(sidecar) if os.path.exists(sidecar) else None
    specs = parse_catalog(FileHandler.read_text_file(path), torque_text)
    logger.info("Loaded %d vehicles from %s", len(specs), path)
    return specs
