"""Driving schedules: timestamped speed traces used as the leader's speed command."""
import io
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

try:
    from ..utils.config import Config
    from ..utils.exceptions import DomainError, ScheduleError, ValidationError
    from ..utils.file_handler import FileHandler
except ImportError:
    from utils.config import Config
    from utils.exceptions import DomainError, ScheduleError, ValidationError
    from utils.file_handler import FileHandler

logger = logging.getLogger(__name__)

HEADER = ('time_s', 'speed')
TIME_TOLERANCE = 1e-9


class SpeedUnits(str, Enum):
    MPH = 'mph'
    FPS = 'fps'

    @property
    def to_fps(self) -> float:
        return Config.MPH_TO_FPS if self == SpeedUnits.MPH else 1.0


@dataclass(frozen=True)
class Schedule:
    """Samples are kept in the units they were read in; ``speed`` is always ft/s."""
    name: str
    time: np.ndarray
    native_speed: np.ndarray
    native_units: SpeedUnits = SpeedUnits.MPH
    speed: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        time = np.array(self.time, dtype=float)
        native = np.array(self.native_speed, dtype=float)
        if time.ndim != 1 or time.shape != native.shape:
            raise ScheduleError("time and speed columns must have equal length")
        if len(time) == 0:
            raise ScheduleError("schedule has no samples")
        speed = native * SpeedUnits(self.native_units).to_fps
        for array in (time, native, speed):
            array.setflags(write=False)
        object.__setattr__(self, 'native_units', SpeedUnits(self.native_units))
        object.__setattr__(self, 'time', time)
        object.__setattr__(self, 'native_speed', native)
        object.__setattr__(self, 'speed', speed)

    @property
    def duration(self) -> float:
        return float(self.time[-1] - self.time[0])

    def __len__(self) -> int:
        return len(self.time)


@dataclass(frozen=True)
class ScheduleStats:
    duration: float       # s
    distance_mi: float
    avg_speed: float      # ft/s
    max_speed: float      # ft/s
    max_accel: float      # ft/s^2
    max_decel: float      # ft/s^2, positive magnitude

    @property
    def avg_speed_mph(self) -> float:
        return self.avg_speed / Config.MPH_TO_FPS

    @property
    def max_speed_mph(self) -> float:
        return self.max_speed / Config.MPH_TO_FPS

    def to_dict(self) -> Dict[str, float]:
        return {
            'duration_s': self.duration,
            'distance_mi': self.distance_mi,
            'avg_speed_fps': self.avg_speed,
            'avg_speed_mph': self.avg_speed_mph,
            'max_speed_fps': self.max_speed,
            'max_speed_mph': self.max_speed_mph,
            'max_accel_fps2': self.max_accel,
            'max_decel_fps2': self.max_decel,
        }


def _is_number(value: str) -> bool:
    try:
        float(value)
        return True
    except ValueError:
        return False


def parse_schedule_csv(text: str, units: str = 'mph', name: str = 'schedule') -> Schedule:
    """Parse a two-column ``time_s,speed`` CSV; the header line is optional.

    Errors carry the 1-based file line of the offending row.
    """
    units = SpeedUnits(units)
    if not text or not text.strip():
        raise ScheduleError("schedule file is empty")
    width = max(line.count(",") + 1 for line in text.splitlines())
    try:
        frame = pd.read_csv(io.StringIO(text), header=None, names=list(range(width)), dtype=str,
                            keep_default_na=False, skip_blank_lines=False, skipinitialspace=True)
    except pd.errors.ParserError as e:
        raise ScheduleError(f"malformed schedule: {e}")
    frame = frame.fillna('')

    times: List[float] = []
    speeds: List[float] = []
    header_seen = False
    for index, values in enumerate(frame.itertuples(index=False)):
        line = index + 1
        cells = [str(v).strip() for v in values]
        if not any(cells):
            continue
        if not times and not header_seen and not _is_number(cells[0]):
            header_seen = True
            continue
        filled = [c for c in cells if c]
        if len(filled) != 2 or any(cells[2:]):
            raise ScheduleError(f"expected 2 columns, got {len(filled)}", line)
        try:
            t, v = float(cells[0]), float(cells[1])
        except ValueError:
            raise ScheduleError(f"non-numeric value in '{','.join(cells[:2])}'", line)
        if not times and t != 0:
            raise ScheduleError("time must start at 0", line)
        if times and not t > times[-1]:
            raise ScheduleError("time must be strictly increasing", line)
        if v < 0:
            raise ValidationError('speed', "must not be negative", line)
        times.append(t)
        speeds.append(v)

    if not times:
        raise ScheduleError("schedule has no samples")
    logger.debug("Parsed schedule %s: %d samples", name, len(times))
    return Schedule(name=name, time=np.array(times), native_speed=np.array(speeds),
                    native_units=units)


def serialize_schedule(schedule: Schedule) -> str:
    """CSV text in the schedule's native units; ``parse_schedule_csv`` inverts it."""
    frame = pd.DataFrame({
        HEADER[0]: [repr(float(t)) for t in schedule.time],
        HEADER[1]: [repr(float(v)) for v in schedule.native_speed],
    })
    return frame.to_csv(index=False, lineterminator='\n')


def load_schedule(path: str, units: str = 'mph', name: Optional[str] = None) -> Schedule:
    if not FileHandler.validate_file_path(path):
        raise ScheduleError(f"schedule file not found: {path}")
    name = name or os.path.splitext(os.path.basename(path))[0]
    return parse_schedule_csv(FileHandler.read_text_file(path), units=units, name=name)


def speed_at(schedule: Schedule, t: float) -> float:
    """Linearly interpolated speed (ft/s) at time ``t``."""
    start, end = float(schedule.time[0]), float(schedule.time[-1])
    if t < start - TIME_TOLERANCE or t > end + TIME_TOLERANCE:
        raise DomainError(f"t={t} outside schedule range [{start}, {end}]")
    return float(np.interp(t, schedule.time, schedule.speed))


def schedule_stats(schedule: Schedule) -> ScheduleStats:
    if len(schedule) < 2:
        raise DomainError("schedule statistics need at least 2 samples")
    t, v = schedule.time, schedule.speed
    dt = np.diff(t)
    distance_ft = float(np.sum((v[1:] + v[:-1]) / 2.0 * dt))
    accel = np.diff(v) / dt
    duration = schedule.duration
    return ScheduleStats(
        duration=duration,
        distance_mi=distance_ft / Config.FT_PER_MILE,
        avg_speed=distance_ft / duration,
        max_speed=float(np.max(v)),
        max_accel=max(float(np.max(accel)), 0.0),
        max_decel=max(float(-np.min(accel)), 0.0),
    )


def build_schedule_from_segments(text: str, name: str = 'schedule') -> Schedule:
    """Build a 1 Hz mi/h schedule from ``duration_s end_speed_mph`` segments.

    Each segment ramps linearly from the previous end speed, one sample per
    second, rounded to 0.1 mi/h. Lines starting with ``#`` are comments.
    """
    times = [0.0]
    speeds = [0.0]
    current = 0.0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        parts = line.split()
        if len(parts) < 2:
            continue
        try:
            duration, target = int(parts[0]), float(parts[1])
        except ValueError:
            raise ScheduleError(f"segment '{line}' is not 'duration_s end_speed_mph'", line_no)
        if duration <= 0 or target < 0:
            raise ScheduleError(f"segment '{line}' needs a positive duration and speed >= 0", line_no)
        for k in range(1, duration + 1):
            times.append(times[-1] + 1.0)
            speeds.append(float(f"{current + (target - current) * k / duration:.1f}"))
        current = target
    return Schedule(name=name, time=np.array(times), native_speed=np.array(speeds),
                    native_units=SpeedUnits.MPH)


def stats_payload(schedule: Schedule) -> Dict[str, Any]:
    payload: Dict[str, Any] = {'name': schedule.name, 'samples': len(schedule)}
    payload.update(schedule_stats(schedule).to_dict())
    return payload
