"""Closed-loop analysis of the upper-level longitudinal controller.

The plant (desired to actual acceleration, first-order lag ``tau``) closed
with a PD controller gives the second-order loop

    H(s) = (K_p + K_d s) / (tau s^2 + (K_d + 1) s + K_p)

whose pole pair is that of G(s) = w_n^2 / (s^2 + 2 zeta w_n s + w_n^2) with
w_n = sqrt(K_p / tau) and zeta = (K_d + 1) / (2 sqrt(K_p tau)).
"""
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import signal

try:
    from ..utils.config import Config
    from ..utils.exceptions import DomainError, OracleError
    from .longitudinal_models import ControlLaw, GainSet
except ImportError:
    from utils.config import Config
    from utils.exceptions import DomainError, OracleError
    from core.longitudinal_models import ControlLaw, GainSet

logger = logging.getLogger(__name__)

RISE_LIMITS = (0.1, 0.9)
SETTLING_BAND = 0.1


class Phase(str, Enum):
    ACCELERATING = 'accelerating'
    DECELERATING = 'decelerating'
    CRUISING = 'cruising'

    @classmethod
    def from_command(cls, accel: float, threshold: float = Config.PHASE_THRESHOLD) -> 'Phase':
        if accel > threshold:
            return cls.ACCELERATING
        if accel < -threshold:
            return cls.DECELERATING
        return cls.CRUISING


@dataclass(frozen=True)
class LoopParams:
    kp: float
    kd: float
    lag: float

    @property
    def discriminant(self) -> float:
        return 4.0 * self.kp * self.lag - (self.kd + 1.0) ** 2


@dataclass(frozen=True)
class StepMetrics:
    natural_frequency: float
    damping_ratio: float
    rise_time: float
    settling_time: float
    overshoot: Optional[float]    # fraction of the step, absent unless underdamped
    peak_time: Optional[float]

    @property
    def underdamped(self) -> bool:
        return self.overshoot is not None

    def overshoot_distance(self, v_i: float) -> Optional[float]:
        """(T_c - T_r)(v_p - v_i), the overshoot-distance approximation."""
        if not self.underdamped:
            return None
        return (self.peak_time - self.rise_time) * (self.overshoot - v_i)


@dataclass(frozen=True)
class StepResponse:
    time: np.ndarray
    output: np.ndarray


@dataclass(frozen=True)
class MeasuredStep:
    rise_time: float
    settling_time: float
    overshoot: float
    peak_time: float
    steady_state: float


def natural_frequency(kp: float, lag: float) -> float:
    return math.sqrt(kp / lag)


def damping_ratio(kp: float, kd: float, lag: float) -> float:
    return (kd + 1.0) / (2.0 * math.sqrt(kp * lag))


def loop_metrics(p: LoopParams) -> StepMetrics:
    if not p.lag > 0:
        raise DomainError("lag must be positive")
    if not p.kp > 0:
        raise DomainError("kp must be positive for loop metrics")
    wn = natural_frequency(p.kp, p.lag)
    zeta = damping_ratio(p.kp, p.kd, p.lag)
    return metrics_from_poles(wn, zeta)


def metrics_from_poles(wn: float, zeta: float) -> StepMetrics:
    rise = math.pi / (2.0 * wn)
    settling = 4.0 / (zeta * wn) if zeta > 0 else math.inf
    if 0 < zeta < 1:
        root = math.sqrt(1.0 - zeta ** 2)
        overshoot = math.exp(-math.pi * zeta / root)
        peak = math.pi / (wn * root)
    else:
        overshoot = peak = None
    return StepMetrics(wn, zeta, rise, settling, overshoot, peak)


# ---------------------------------------------------------------------------
# Numerical oracles
# ---------------------------------------------------------------------------

def _time_grid(dt: float, horizon: float) -> np.ndarray:
    steps = int(round(horizon / dt))
    return np.arange(steps + 1) * dt


def _simulate(num, den, dt: float, horizon: float) -> StepResponse:
    t = _time_grid(dt, horizon)
    _, y = signal.step(signal.lti(num, den), T=t)
    return StepResponse(time=t, output=np.asarray(y, dtype=float))


def _check_settled(response: StepResponse, final: float = 1.0):
    tail = response.output[-max(len(response.output) // 20, 2):]
    if np.max(np.abs(tail - final)) >= SETTLING_BAND * abs(final) / 2:
        raise OracleError("horizon too short for the response to settle")


def simulate_step_response(wn: float, zeta: float, dt: float, horizon: float) -> StepResponse:
    """Unit-step response of the canonical second-order loop G(s)."""
    if not dt <= 0.01 * (2.0 * math.pi / wn):
        raise DomainError("dt must be at most 1% of the natural period")
    response = _simulate([wn ** 2], [1.0, 2.0 * zeta * wn, wn ** 2], dt, horizon)
    _check_settled(response)
    return response


def simulate_full_loop_step(p: LoopParams, dt: float, horizon: float) -> StepResponse:
    """Unit-step response of the PD loop H(s), including its zero."""
    if not p.lag > 0 or not p.kp > 0:
        raise DomainError("kp and lag must be positive")
    wn = natural_frequency(p.kp, p.lag)
    if not dt <= 0.01 * (2.0 * math.pi / wn):
        raise DomainError("dt must be at most 1% of the natural period")
    num = [p.kd, p.kp] if p.kd != 0 else [p.kp]
    response = _simulate(num, [p.lag, p.kd + 1.0, p.kp], dt, horizon)
    _check_settled(response)
    return response


def _crossing(t: np.ndarray, y: np.ndarray, level: float) -> float:
    index = int(np.argmax(y >= level))
    if index == 0:
        return float(t[0])
    t0, t1, y0, y1 = t[index - 1], t[index], y[index - 1], y[index]
    return float(t0 + (level - y0) * (t1 - t0) / (y1 - y0))


def measure_step(response: StepResponse, final: float = 1.0) -> MeasuredStep:
    """Rise (10-90 %), settling (+-10 %), overshoot and peak time of a step response.

    Crossings are linearly interpolated between samples.
    """
    t, y = response.time, response.output
    rise = _crossing(t, y, RISE_LIMITS[1] * final) - _crossing(t, y, RISE_LIMITS[0] * final)

    outside = np.where(np.abs(y / final - 1.0) >= SETTLING_BAND)[0]
    if len(outside) == 0:
        settling = float(t[0])
    else:
        last = outside[-1]
        if last + 1 >= len(t):
            raise OracleError("response never settles within the horizon")
        y0, y1 = y[last], y[last + 1]
        level = final * (1.0 + SETTLING_BAND) if y0 > final else final * (1.0 - SETTLING_BAND)
        settling = float(t[last] + (level - y0) * (t[last + 1] - t[last]) / (y1 - y0))

    peak_index = int(np.argmax(y))
    overshoot = max(0.0, float(y[peak_index]) / final - 1.0)
    if peak_index > 0 and peak_index + 1 < len(t):
        # vertex of the parabola through the three samples around the peak
        ym, y0, yp = y[peak_index - 1], y[peak_index], y[peak_index + 1]
        denom = ym - 2.0 * y0 + yp
        shift = 0.5 * (ym - yp) / denom if denom != 0 else 0.0
        step = t[1] - t[0]
        peak_time = float(t[peak_index] + shift * step)
        if overshoot > 0:
            overshoot = max(0.0, (y0 - 0.25 * (ym - yp) * shift) / final - 1.0)
    else:
        peak_time = float(t[peak_index])
    return MeasuredStep(rise, settling, overshoot, peak_time, float(y[-1]))


# ---------------------------------------------------------------------------
# Gain constraints and tuning
# ---------------------------------------------------------------------------

def kd_bound_decel(t_min: float, lag: float) -> float:
    """Strict upper bound on K_d while decelerating; negative means infeasible."""
    if not lag > 0:
        raise DomainError("lag must be positive")
    return t_min / (8.0 * lag) - 1.0


def accel_constraint_ok(kp: float, kd: float, lag: float, v_i: float, s_min: float) -> bool:
    """Overshoot-distance condition while accelerating, evaluated as printed:

        [2 pi tau / sqrt(D) - pi sqrt(tau / (4 K_p))] [exp(-pi (K_d + 1) / sqrt(D)) - v_i] < S_min

    with D = 4 K_p tau - (K_d + 1)^2. Non-oscillating loops (D <= 0) pass.
    """
    if not lag > 0:
        raise DomainError("lag must be positive")
    disc = LoopParams(kp, kd, lag).discriminant
    if disc <= 0 or kp <= 0:
        return True
    root = math.sqrt(disc)
    span = 2.0 * math.pi * lag / root - math.pi * math.sqrt(lag / (4.0 * kp))
    excess = math.exp(-math.pi * (kd + 1.0) / root) - v_i
    return span * excess < s_min


TUNED_PAIRS = {
    ControlLaw.CRUISE: ('kp1', None),
    ControlLaw.ACC: ('kp2', 'kd1'),
    ControlLaw.CACC: ('kp3', 'kd2'),
}


def tune_gains(current: GainSet, t_min: float, lag: float, v_i: float, s_min: float,
               phase: Phase, law: ControlLaw = ControlLaw.ACC) -> GainSet:
    """Adjust the gain pair used by ``law`` toward the two safety conditions.

    Decelerating: K_d is clamped to 0.9 of the K_d bound (floored at zero).
    Accelerating: K_p and K_d are scaled by 0.8 until the overshoot-distance
    condition holds, at most ten times. Cruising leaves the gains alone. The
    returned set carries ``infeasible=True`` whenever a floor or the iteration
    limit was reached. Gains never grow in magnitude.
    """
    if not lag > 0:
        raise DomainError("lag must be positive")
    if phase == Phase.CRUISING or law not in TUNED_PAIRS:
        return replace(current, infeasible=False)

    kp_name, kd_name = TUNED_PAIRS[law]
    kp = getattr(current, kp_name)
    kd = getattr(current, kd_name) if kd_name else 0.0
    infeasible = False

    if phase == Phase.DECELERATING:
        if kd_name is None:
            return replace(current, infeasible=False)
        bound = kd_bound_decel(t_min, lag)
        if bound > 0:
            kd = max(min(kd, Config.KD_MARGIN * bound), Config.KD_FLOOR)
        else:
            kd = Config.KD_FLOOR
            infeasible = True
        return replace(current, infeasible=infeasible, **{kd_name: kd})

    sign = 1.0 if kp >= 0 else -1.0
    magnitude = abs(kp)
    satisfied = accel_constraint_ok(magnitude, kd, lag, v_i, s_min)
    steps = 0
    while not satisfied and steps < Config.MAX_BACKOFF_STEPS:
        magnitude *= Config.BACKOFF_FACTOR
        kd = max(kd * Config.BACKOFF_FACTOR, Config.KD_FLOOR)
        steps += 1
        if magnitude <= Config.KP_FLOOR:
            magnitude = min(Config.KP_FLOOR, abs(kp))
            infeasible = True
            break
        satisfied = accel_constraint_ok(magnitude, kd, lag, v_i, s_min)
    if not satisfied and not infeasible:
        infeasible = True
    changes = {kp_name: sign * magnitude}
    if kd_name:
        changes[kd_name] = kd
    return replace(current, infeasible=infeasible, **changes)


def loop_params_for(gains: GainSet, law: ControlLaw, lag: float) -> Optional[LoopParams]:
    """Loop parameters seen by the tuner for ``law`` (|K_p|, K_d, lag)."""
    if law not in TUNED_PAIRS or not lag > 0:
        return None
    kp_name, kd_name = TUNED_PAIRS[law]
    kd = getattr(gains, kd_name) if kd_name else 0.0
    return LoopParams(kp=abs(getattr(gains, kp_name)), kd=kd, lag=lag)


def reference_grid(points: int = 50) -> Tuple[np.ndarray, np.ndarray]:
    """(w_n, zeta) pairs covering [0.5, 5] x [0.2, 0.9] for oracle sweeps."""
    rows = 5
    cols = points // rows
    wn, zeta = np.meshgrid(np.linspace(0.5, 5.0, cols), np.linspace(0.2, 0.9, rows))
    return wn.ravel(), zeta.ravel()
