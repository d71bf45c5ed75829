"""Longitudinal control laws: the human car-following model, cruise P control,
gap-keeping PD control (ACC) and cooperative PID control (CACC), plus the
arbitration that picks one of them for a vehicle at each step."""
import logging
import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Dict, Optional, Tuple

try:
    from ..fleet.catalog import DriverType
    from ..utils.config import Config
    from ..utils.exceptions import CollisionError, ValidationError
    from .vehicle_dynamics import DynamicsOutput
except ImportError:
    from fleet.catalog import DriverType
    from utils.config import Config
    from utils.exceptions import CollisionError, ValidationError
    from core.vehicle_dynamics import DynamicsOutput

logger = logging.getLogger(__name__)

Bounds = Tuple[float, float]


class DrivingMode(str, Enum):
    MANUAL = 'manual'
    AUTONOMOUS = 'autonomous'
    COOPERATIVE = 'cooperative'


class ControlLaw(str, Enum):
    MANUAL = 'manual'
    CRUISE = 'cruise'
    ACC = 'acc'
    CACC = 'cacc'


@dataclass(frozen=True)
class GainSet:
    kp1: float
    kp2: float
    kp3: float
    ki1: float
    kd1: float
    kd2: float
    infeasible: bool = False

    def __post_init__(self):
        for name in ('kp1', 'kp2', 'kp3', 'ki1', 'kd1', 'kd2'):
            if abs(getattr(self, name)) > Config.GAIN_LIMIT:
                raise ValidationError(name, f"must not exceed {Config.GAIN_LIMIT} in magnitude")

    @classmethod
    def initial(cls, overrides: Optional[Dict[str, float]] = None) -> 'GainSet':
        values = dict(Config.INITIAL_GAINS)
        values.update(overrides or {})
        return cls(**values)

    def as_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def for_law(self, law: 'ControlLaw') -> Tuple[float, float, float]:
        """(kp, ki, kd) as reported in traces for the active law."""
        if law == ControlLaw.CRUISE:
            return self.kp1, 0.0, 0.0
        if law == ControlLaw.ACC:
            return self.kp2, 0.0, self.kd1
        if law == ControlLaw.CACC:
            return self.kp3, self.ki1, self.kd2
        return 0.0, 0.0, 0.0


@dataclass(frozen=True)
class ControlContext:
    mode: DrivingMode
    time_gap_setting: float
    free_flow_speed: float = Config.FREE_FLOW_SPEED
    sensing_delay: float = 0.0
    communication_delay: float = Config.COMMUNICATION_DELAY
    detection_range: float = Config.DETECTION_RANGE
    alpha: float = Config.ALPHA
    beta: float = Config.BETA

    def __post_init__(self):
        if not self.time_gap_setting > 0:
            raise ValidationError('T_set', "must be positive")
        if not self.free_flow_speed > 0:
            raise ValidationError('free_flow_speed', "must be positive")
        if self.alpha < 1 or self.beta < 1:
            raise ValidationError('alpha', "and beta must be at least 1")
        if not self.detection_range > 0:
            raise ValidationError('detection_range', "must be positive")

    @classmethod
    def for_mode(cls, mode: DrivingMode, **overrides) -> 'ControlContext':
        mode = DrivingMode(mode)
        settings = {
            'time_gap_setting': Config.PRESET_TIME_GAP.get(mode.value, Config.PRESET_TIME_GAP['autonomous']),
            'sensing_delay': Config.SENSING_DELAY[mode.value],
        }
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(mode=mode, **settings)


def clamp(value: float, bounds: Bounds) -> float:
    a_max, d_max = bounds
    return min(max(value, -d_max), a_max)


def iidm_accel(driver: DriverType, follower_dyn: DynamicsOutput, gap: float, s_min: float,
               v_leader: float, ctx: ControlContext) -> float:
    """Human car-following acceleration.

    Above the safe gap the driver accelerates at n*a_max scaled by the gap
    coefficient 1 - (S_safe/S)^alpha and the speed coefficient
    1 - (v_leader / (w FFS))^beta; inside it they brake at q*d_max. S_safe is
    S_min floored at the standstill gap, since S_min vanishes at rest.
    """
    if gap <= 0:
        raise CollisionError(gap)
    bounds = follower_dyn.bounds
    safe_gap = max(s_min, Config.STANDSTILL_GAP)
    if gap < safe_gap:
        return clamp(-driver.deceleration_multiplier * follower_dyn.d_max, bounds)
    gap_coefficient = 1.0 - (safe_gap / gap) ** ctx.alpha
    desired_speed = driver.speed_multiplier * ctx.free_flow_speed
    speed_coefficient = 1.0 - (v_leader / desired_speed) ** ctx.beta
    accel = (driver.acceleration_multiplier * follower_dyn.a_max
             * gap_coefficient * speed_coefficient)
    return clamp(accel, bounds)


def cruise_accel(gains: GainSet, v: float, ctx: ControlContext, bounds: Bounds,
                 target_speed: Optional[float] = None) -> float:
    target = ctx.free_flow_speed if target_speed is None else target_speed
    return clamp(gains.kp1 * (target - v), bounds)


def desired_gap(time_gap_setting: float, min_time_gap_prev: float, v_prev: float,
                standstill_gap: float = Config.STANDSTILL_GAP) -> float:
    return max(max(time_gap_setting, min_time_gap_prev) * v_prev, standstill_gap)


def acc_accel(gains: GainSet, gap: float, gap_desired: float, v_self: float, v_leader: float,
              bounds: Bounds) -> float:
    gap_error = gap_desired - gap
    return clamp(gains.kp2 * gap_error + gains.kd1 * (v_leader - v_self), bounds)


def cacc_accel(gains: GainSet, gap: float, gap_desired: float, v_self: float, v_leader: float,
               a_leader: float, bounds: Bounds) -> float:
    gap_error = gap_desired - gap
    return clamp(gains.kp3 * (v_leader - v_self) + gains.ki1 * gap_error + gains.kd2 * a_leader,
                 bounds)


def has_discrepancy(sensor_gap: float, v2v_gap: float) -> bool:
    """True when sensed and communicated gaps disagree by more than 10 % or 3 ft."""
    threshold = max(Config.DISCREPANCY_RATIO * abs(sensor_gap), Config.DISCREPANCY_FLOOR)
    return abs(sensor_gap - v2v_gap) > threshold


def select_control_mode(subject: DrivingMode, leader: Optional[DrivingMode], gap: float,
                        discrepancy: bool, detection_range: float = Config.DETECTION_RANGE
                        ) -> ControlLaw:
    if subject == DrivingMode.MANUAL:
        return ControlLaw.MANUAL
    if leader is None or gap > detection_range or math.isinf(gap):
        return ControlLaw.CRUISE
    if (subject == DrivingMode.COOPERATIVE and leader == DrivingMode.COOPERATIVE
            and not discrepancy):
        return ControlLaw.CACC
    return ControlLaw.ACC
