"""Per-step vehicle physics: resistances, gearing, tractive effort and the
acceleration/deceleration limits and safe gaps derived from them.

Units are US customary: ft, lb, slug, s. Speeds are ft/s unless a name says mph.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

try:
    from ..fleet.catalog import Drivetrain, VehicleSpec
    from ..fleet.torque_map import horsepower, torque_at
    from ..utils.config import Config
    from ..utils.exceptions import DomainError, ValidationError
except ImportError:
    from fleet.catalog import Drivetrain, VehicleSpec
    from fleet.torque_map import horsepower, torque_at
    from utils.config import Config
    from utils.exceptions import DomainError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Environment:
    air_density: float = Config.AIR_DENSITY
    grade: float = Config.GRADE
    adhesion: float = Config.ADHESION
    braking_efficiency: float = Config.BRAKING_EFFICIENCY
    brake_mass_factor: float = Config.BRAKE_MASS_FACTOR
    gravity: float = Config.GRAVITY

    def __post_init__(self):
        if not self.air_density > 0:
            raise ValidationError('air_density', "must be positive")
        if not 0 < self.adhesion <= 1.2:
            raise ValidationError('adhesion', "must be in (0, 1.2]")
        if not 0 < self.braking_efficiency <= 1:
            raise ValidationError('braking_efficiency', "must be in (0, 1]")
        if not self.brake_mass_factor >= 1:
            raise ValidationError('brake_mass_factor', "must be at least 1")
        if not self.gravity > 0:
            raise ValidationError('gravity', "must be positive")


@dataclass(frozen=True)
class DynamicsOutput:
    a_max: float        # ft/s^2
    d_max: float        # ft/s^2, positive magnitude
    tractive_effort: float
    total_resistance: float
    gear: int
    engine_speed: float  # revs/min
    engine_power: float  # hp
    mass_factor: float
    lag: float           # s, v / d_max

    @property
    def bounds(self):
        return self.a_max, self.d_max


def _mass(spec: VehicleSpec, env: Environment) -> float:
    return spec.weight / env.gravity


def rolling_coefficient(v: float) -> float:
    return Config.ROLLING_BASE * (1.0 + v / Config.ROLLING_SPEED_SCALE)


def aerodynamic_resistance(spec: VehicleSpec, env: Environment, v: float) -> float:
    return env.air_density * spec.drag_coefficient * spec.frontal_area * v * v / 2.0


def rolling_resistance(spec: VehicleSpec, v: float) -> float:
    return rolling_coefficient(v) * spec.weight


def grade_resistance(spec: VehicleSpec, env: Environment) -> float:
    if abs(env.grade) >= Config.MAX_GRADE:
        raise DomainError("grade outside small-angle regime")
    return spec.weight * env.grade


def total_resistance(spec: VehicleSpec, env: Environment, v: float) -> float:
    return (aerodynamic_resistance(spec, env, v) + rolling_resistance(spec, v)
            + grade_resistance(spec, env))


def select_gear(spec: VehicleSpec, v: float, previous_gear: int = 1) -> int:
    """Hysteretic gear choice.

    Upshifts while the speed exceeds the current gear's shift-up speed, then
    downshifts while it is below the current gear's shift-down speed; inside
    the band the previous gear is held.
    """
    gears = spec.transmission.gears
    count = len(gears)
    gear = min(max(int(previous_gear), 1), count)
    v_mph = v / Config.MPH_TO_FPS
    while gear < count and v_mph > gears[gear - 1].shift_up:
        gear += 1
    while gear > 1 and v_mph < gears[gear - 1].shift_down:
        gear -= 1
    return gear


def engine_speed(spec: VehicleSpec, v: float, gear: int) -> float:
    """Engine speed in revs/min, clamped to the idle/max range (idle when stopped)."""
    engine = spec.engine
    if v <= 0:
        return engine.idle_speed
    ratio = spec.transmission.overall_ratio(gear)
    revs_per_s = v * ratio / (2.0 * math.pi * spec.wheel_radius * (1.0 - spec.transmission.slippage))
    return min(max(revs_per_s * 60.0, engine.idle_speed), engine.max_speed)


def engine_power(n_e: float, torque: float) -> float:
    """Engine-generated horsepower for ``n_e`` in revs/min and torque in ft-lb."""
    return horsepower(torque, n_e)


def engine_tractive_effort(spec: VehicleSpec, v: float, gear: int) -> float:
    torque = torque_at(spec.engine, engine_speed(spec, v, gear))
    return (torque * spec.transmission.overall_ratio(gear) * spec.transmission.efficiency
            / spec.wheel_radius)


def max_tractive_effort(spec: VehicleSpec, env: Environment, v: float) -> float:
    """Adhesion-limited tractive effort for the vehicle's drivetrain."""
    mu = env.adhesion
    f = rolling_coefficient(v)
    wheelbase, h = spec.wheelbase, spec.cg_height
    if spec.drivetrain == Drivetrain.FRONT_WHEEL:
        return mu * spec.weight * (spec.l_r + h * f) / (wheelbase + mu * h)
    if spec.drivetrain == Drivetrain.REAR_WHEEL:
        if wheelbase <= mu * h:
            raise DomainError("degenerate geometry")
        return mu * spec.weight * (spec.l_f - h * f) / (wheelbase - mu * h)
    return mu * spec.weight


def max_braking_force(spec: VehicleSpec, env: Environment, v: float) -> float:
    mu, eta = env.adhesion, env.braking_efficiency
    f = rolling_coefficient(v)
    wheelbase, h = spec.wheelbase, spec.cg_height
    if spec.drivetrain == Drivetrain.FRONT_WHEEL:
        return eta * mu * spec.weight * (spec.l_r + h * (mu + f)) / wheelbase
    if spec.drivetrain == Drivetrain.REAR_WHEEL:
        if wheelbase <= mu * h:
            raise DomainError("degenerate geometry")
        return eta * mu * spec.weight * (spec.l_f - h * (mu + f)) / wheelbase
    return eta * mu * spec.weight


def mass_factor(overall_ratio: float) -> float:
    return 1.04 + 0.0025 * overall_ratio ** 2


def max_deceleration(spec: VehicleSpec, env: Environment, v: float) -> float:
    """Maximum deceleration magnitude in ft/s^2."""
    braking = max_braking_force(spec, env, v)
    return (braking + total_resistance(spec, env, v)) / (_mass(spec, env) * env.brake_mass_factor)


def max_acceleration(spec: VehicleSpec, env: Environment, v: float,
                     previous_gear: Optional[int] = None) -> DynamicsOutput:
    """Evaluate the vehicle's limits at speed ``v``.

    The returned output carries a_max together with d_max and the braking lag,
    since every per-step consumer needs all three.
    """
    v = max(v, 0.0)
    gear = select_gear(spec, v, previous_gear if previous_gear is not None else 1)
    n_e = engine_speed(spec, v, gear)
    torque = torque_at(spec.engine, n_e)
    ratio = spec.transmission.overall_ratio(gear)
    f_engine = torque * ratio * spec.transmission.efficiency / spec.wheel_radius
    tractive = min(max_tractive_effort(spec, env, v), f_engine)
    resistance = total_resistance(spec, env, v)
    gamma_m = mass_factor(ratio)
    a_max = max(0.0, (tractive - resistance) / (_mass(spec, env) * gamma_m))
    d_max = max_deceleration(spec, env, v)
    return DynamicsOutput(
        a_max=a_max,
        d_max=d_max,
        tractive_effort=tractive,
        total_resistance=resistance,
        gear=gear,
        engine_speed=n_e,
        engine_power=engine_power(n_e, torque),
        mass_factor=gamma_m,
        lag=braking_lag(v, d_max),
    )


def braking_lag(v: float, d_max: float) -> float:
    return v / d_max if d_max > 0 else 0.0


def min_safe_distance_gap(v_follower: float, sensing_delay: float, communication_delay: float,
                          lag_follower: float, v_leader: float, lag_leader: float) -> float:
    """Minimum bumper gap (ft); may be negative, callers clamp."""
    return ((sensing_delay + communication_delay + lag_follower / 2.0) * v_follower
            - lag_leader * v_leader / 2.0)


def min_safe_time_gap(sensing_delay: float, communication_delay: float,
                      lag_follower: float, lag_leader: float) -> float:
    return sensing_delay + communication_delay + lag_follower - lag_leader
