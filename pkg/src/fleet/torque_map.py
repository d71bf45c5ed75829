"""Engine torque maps.

The built-in maps are synthetic: two parabolic branches that meet at the peak
torque point, falling to a launch fraction of peak at idle and a tail fraction
of peak at the maximum engine speed. Lookup is piecewise linear between knots.
"""
from typing import Sequence, Tuple

import numpy as np

TorqueMap = Tuple[Tuple[float, float], ...]

HP_FT_LB_PER_S = 550.0


def synthetic_torque_map(idle_speed: float, max_speed: float, peak_speed: float,
                         peak_torque: float, tail_fraction: float = 0.85,
                         launch_fraction: float = 0.75, samples: int = 9) -> TorqueMap:
    """Build knots for a peaked torque curve.

    Parameters
    ----------
    idle_speed, max_speed : float
        Engine speed range (revs/min).
    peak_speed : float
        Engine speed of peak torque, strictly inside the range.
    peak_torque : float
        Peak torque (ft-lb).
    tail_fraction : float
        Torque at ``max_speed`` as a fraction of peak.
    launch_fraction : float
        Torque at ``idle_speed`` as a fraction of peak.
    samples : int
        Evenly spaced knots between idle and max; the peak knot is added on top.
    """
    if not idle_speed < peak_speed < max_speed:
        raise ValueError("peak_speed must lie strictly between idle_speed and max_speed")

    rpm = np.union1d(np.linspace(idle_speed, max_speed, samples), [peak_speed])
    rising = rpm <= peak_speed
    drop = np.where(rising, 1.0 - launch_fraction, 1.0 - tail_fraction)
    span = np.where(rising, idle_speed - peak_speed, max_speed - peak_speed)
    torque = peak_torque * (1.0 - drop * ((rpm - peak_speed) / span) ** 2)
    return tuple((float(n), float(m)) for n, m in zip(rpm, torque))


def interpolate_torque(rpm: np.ndarray, torque: np.ndarray, idle_speed: float,
                       max_speed: float, n_e: float) -> float:
    n = min(max(n_e, idle_speed), max_speed)
    return float(np.interp(n, rpm, torque))


def torque_at(engine, n_e: float) -> float:
    """Torque (ft-lb) at engine speed ``n_e`` (revs/min), clamped to the engine's range."""
    return interpolate_torque(engine.rpm_knots, engine.torque_knots,
                              engine.idle_speed, engine.max_speed, n_e)


def horsepower(torque: float, n_e: float) -> float:
    """Engine power (hp) for torque in ft-lb at ``n_e`` revs/min."""
    return 2.0 * np.pi * torque * (n_e / 60.0) / HP_FT_LB_PER_S


def rated_power(engine, points: int = 2001) -> Tuple[float, float]:
    """Return ``(hp, rpm)`` at the maximum of the interpolated power curve."""
    grid = np.union1d(np.linspace(engine.idle_speed, engine.max_speed, points), engine.rpm_knots)
    torque = np.interp(grid, engine.rpm_knots, engine.torque_knots)
    power = 2.0 * np.pi * torque * (grid / 60.0) / HP_FT_LB_PER_S
    best = int(np.argmax(power))
    return float(power[best]), float(grid[best])


def validate_knots(knots: Sequence[Tuple[float, float]]) -> None:
    rpm = [k[0] for k in knots]
    if len(rpm) < 2:
        raise ValueError("needs at least two knots")
    if any(b <= a for a, b in zip(rpm, rpm[1:])):
        raise ValueError("knots must be strictly increasing in engine speed")
    if any(k[1] <= 0 for k in knots):
        raise ValueError("torques must be positive")
