"""Time-stepped simulation of a single-lane vehicle string.

The first vehicle tracks a driving schedule with the cruise law; every other
vehicle follows its immediate leader with the law its driving mode selects.
Each step re-evaluates the dynamics limits at the new speed, the minimum safe
gaps against the leader and (optionally) the controller gains.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pathos.pools import ThreadPool

try:
    from ..fleet.catalog import DriverType, VehicleSpec, find_driver, find_vehicle, load_builtin_drivers, load_fleet
    from ..schedule.driving_schedule import Schedule, speed_at
    from ..utils.config import Config
    from ..utils.exceptions import ConfigurationError, ValidationError
    from .control_design import TUNED_PAIRS, Phase, tune_gains
    from .longitudinal_models import (ControlContext, ControlLaw, DrivingMode, GainSet, acc_accel,
                                      cacc_accel, cruise_accel, desired_gap, has_discrepancy,
                                      iidm_accel, select_control_mode)
    from .vehicle_dynamics import (DynamicsOutput, Environment, max_acceleration,
                                   min_safe_distance_gap, min_safe_time_gap)
except ImportError:
    from fleet.catalog import DriverType, VehicleSpec, find_driver, find_vehicle, load_builtin_drivers, load_fleet
    from schedule.driving_schedule import Schedule, speed_at
    from utils.config import Config
    from utils.exceptions import ConfigurationError, ValidationError
    from core.control_design import TUNED_PAIRS, Phase, tune_gains
    from core.longitudinal_models import (ControlContext, ControlLaw, DrivingMode, GainSet, acc_accel,
                                          cacc_accel, cruise_accel, desired_gap, has_discrepancy,
                                          iidm_accel, select_control_mode)
    from core.vehicle_dynamics import (DynamicsOutput, Environment, max_acceleration,
                                       min_safe_distance_gap, min_safe_time_gap)

logger = logging.getLogger(__name__)

TRACE_COLUMNS = [
    't', 'vehicle_id', 'mode', 'x_ft', 'v_fps', 'a_fps2', 'gear', 'amax_fps2', 'dmax_fps2',
    'gap_ft', 'timegap_s', 'smin_ft', 'tmin_s', 'kp', 'ki', 'kd', 'flag',
]
PLOT_COLUMNS = ['t', 'speed_fps', 'amax_fps2', 'dmax_fps2', 'timegap_s']

FLAG_COLLISION = 'collision'
FLAG_INFEASIBLE = 'infeasible'
FLAG_BRAKE = 'brake'

Mapper = Callable[[Callable, Sequence], List]


@dataclass(frozen=True)
class VehicleSetup:
    spec: VehicleSpec
    driver: DriverType
    mode: DrivingMode
    time_gap_setting: Optional[float] = None
    sensing_delay: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'mode', DrivingMode(self.mode))
        if self.time_gap_setting is not None and not self.time_gap_setting > 0:
            raise ValidationError('T_set', "must be positive")
        if self.sensing_delay is not None and self.sensing_delay < 0:
            raise ValidationError('sensing_delay', "must not be negative")


@dataclass(frozen=True)
class Scenario:
    schedule: Schedule
    vehicles: Tuple[VehicleSetup, ...]
    env: Environment = field(default_factory=Environment)
    dt: float = Config.TIME_STEP
    communication_delay: float = Config.COMMUNICATION_DELAY
    initial_spacing: float = Config.INITIAL_SPACING
    free_flow_speed: float = Config.FREE_FLOW_SPEED
    alpha: float = Config.ALPHA
    beta: float = Config.BETA
    detection_range: float = Config.DETECTION_RANGE
    gains: GainSet = field(default_factory=GainSet.initial)
    seed: int = 0
    name: str = 'scenario'
    adaptive_gains: bool = True
    adaptive_time_gap: bool = True
    continue_on_collision: bool = False
    startup_exclusion: float = Config.STARTUP_EXCLUSION
    broadcast_period: Optional[float] = None     # V2V send interval, s; None sends every step

    def __post_init__(self):
        object.__setattr__(self, 'vehicles', tuple(self.vehicles))
        if not self.dt > 0:
            raise ValidationError('dt', "must be positive")
        if not self.vehicles:
            raise ValidationError('vehicles', "must list at least the leader")
        if self.communication_delay < 0:
            raise ValidationError('communication_delay', "must not be negative")
        if self.startup_exclusion < 0:
            raise ValidationError('startup_exclusion', "must not be negative")
        if self.broadcast_period is not None and not self.broadcast_period > 0:
            raise ValidationError('broadcast_period', "must be positive")

    @property
    def step_count(self) -> int:
        return int(round(self.schedule.duration / self.dt))

    @property
    def broadcast_steps(self) -> int:
        if self.broadcast_period is None:
            return 1
        return max(1, int(round(self.broadcast_period / self.dt)))

    def context_for(self, index: int) -> ControlContext:
        setup = self.vehicles[index]
        return ControlContext.for_mode(
            setup.mode,
            time_gap_setting=setup.time_gap_setting,
            sensing_delay=setup.sensing_delay,
            communication_delay=self.communication_delay,
            free_flow_speed=self.free_flow_speed,
            detection_range=self.detection_range,
            alpha=self.alpha,
            beta=self.beta,
        )


@dataclass(frozen=True)
class Broadcast:
    """Last V2V message a vehicle sent: its state at ``step``."""
    step: int
    x: float
    v: float
    a: float

    def position_at(self, step: int, dt: float) -> float:
        """Receiver's dead-reckoned front-bumper position at ``step``."""
        tau = (step - self.step) * dt
        if self.v + self.a * tau < 0:
            return self.x + self.v * self.v / (2.0 * -self.a)
        return self.x + self.v * tau + self.a * tau * tau / 2.0


@dataclass(frozen=True)
class VehicleState:
    vehicle_id: int
    x: float                 # front bumper, ft
    v: float
    a: float                 # command applied over the next step
    gear: int
    gains: GainSet
    dyn: DynamicsOutput
    law: ControlLaw
    gap: Optional[float] = None          # bumper-to-bumper, ft; None for the leader
    time_gap: Optional[float] = None     # S / v, None at standstill
    s_min: Optional[float] = None
    t_min: Optional[float] = None
    desired_gap: Optional[float] = None
    target_time_gap: Optional[float] = None
    broadcast: Optional[Broadcast] = None
    flag: str = ''

    @property
    def collided(self) -> bool:
        return FLAG_COLLISION in self.flag.split(';')

    @property
    def infeasible(self) -> bool:
        return FLAG_INFEASIBLE in self.flag.split(';')

    @property
    def braking(self) -> bool:
        return FLAG_BRAKE in self.flag.split(';')


@dataclass(frozen=True)
class CollisionEvent:
    vehicle_id: int
    step: int
    t: float
    gap: float


@dataclass
class Trace:
    scenario: Scenario
    steps: List[List[VehicleState]]
    collisions: List[CollisionEvent] = field(default_factory=list)
    halted: bool = False

    @property
    def dt(self) -> float:
        return self.scenario.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.steps)) * self.dt

    @property
    def vehicle_ids(self) -> List[int]:
        return [state.vehicle_id for state in self.steps[0]]

    def series(self, vehicle_id: int, attr: str) -> np.ndarray:
        """One state attribute over time; ``None`` values become NaN."""
        index = vehicle_id - 1
        values = [getattr(step[index], attr) for step in self.steps]
        return np.array([np.nan if v is None else v for v in values], dtype=float)

    def dyn_series(self, vehicle_id: int, attr: str) -> np.ndarray:
        index = vehicle_id - 1
        return np.array([getattr(step[index].dyn, attr) for step in self.steps], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for k, states in enumerate(self.steps):
            t = k * self.dt
            for state in states:
                kp, ki, kd = state.gains.for_law(state.law)
                rows.append((
                    t, state.vehicle_id, state.law.value, state.x, state.v, state.a, state.gear,
                    state.dyn.a_max, state.dyn.d_max, state.gap, state.time_gap, state.s_min,
                    state.t_min, kp, ki, kd, state.flag,
                ))
        return pd.DataFrame(rows, columns=TRACE_COLUMNS)

    def plot_frame(self, vehicle_id: int) -> pd.DataFrame:
        return pd.DataFrame({
            'speed_fps': self.series(vehicle_id, 'v'),
            'amax_fps2': self.dyn_series(vehicle_id, 'a_max'),
            'dmax_fps2': self.dyn_series(vehicle_id, 'd_max'),
            'timegap_s': self.series(vehicle_id, 'target_time_gap'),
        }).assign(t=self.times)[PLOT_COLUMNS]


@dataclass(frozen=True)
class VehicleSummary:
    vehicle_id: int
    model_id: int
    name: str
    mode: str
    peak_a_max: float
    peak_d_max: float
    peak_speed: float
    collision_count: int
    peak_T_gap: Optional[float] = None
    peak_measured_T_gap: Optional[float] = None
    speed_rmse_vs_leader: Optional[float] = None
    speed_rmse_vs_schedule: Optional[float] = None
    mean_abs_gap_error: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            'model_id': self.model_id,
            'name': self.name,
            'mode': self.mode,
            'peak_a_max': self.peak_a_max,
            'peak_d_max': self.peak_d_max,
            'peak_T_gap': self.peak_T_gap,
            'peak_measured_T_gap': self.peak_measured_T_gap,
            'peak_speed': self.peak_speed,
            'collision_count': self.collision_count,
            'speed_rmse_vs_leader': self.speed_rmse_vs_leader,
            'speed_rmse_vs_schedule': self.speed_rmse_vs_schedule,
            'mean_abs_gap_error': self.mean_abs_gap_error,
        }


def _join_flags(*flags: str) -> str:
    return ';'.join(f for f in flags if f)


class StringSimulator:

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.contexts = [scenario.context_for(i) for i in range(len(scenario.vehicles))]

    # -- initial conditions -------------------------------------------------

    def init_string(self) -> List[VehicleState]:
        sc = self.scenario
        count = len(sc.vehicles)
        positions = [(count - 1 - i) * sc.initial_spacing for i in range(count)]
        states = []
        for i, setup in enumerate(sc.vehicles):
            dyn = max_acceleration(setup.spec, sc.env, 0.0, previous_gear=1)
            if i == 0:
                states.append(VehicleState(vehicle_id=1, x=positions[0], v=0.0, a=0.0, gear=dyn.gear,
                                           gains=sc.gains, dyn=dyn, law=ControlLaw.CRUISE))
                continue
            leader = sc.vehicles[i - 1].spec
            gap = positions[i - 1] - positions[i] - leader.length
            if gap <= 0:
                raise ConfigurationError(
                    f"initial spacing {sc.initial_spacing} ft does not clear vehicle {i} "
                    f"({leader.length} ft long)")
            ctx = self.contexts[i]
            law = select_control_mode(setup.mode, sc.vehicles[i - 1].mode, gap, False,
                                      ctx.detection_range)
            t_min = min_safe_time_gap(ctx.sensing_delay, ctx.communication_delay, 0.0, 0.0)
            states.append(VehicleState(
                vehicle_id=i + 1, x=positions[i], v=0.0, a=0.0, gear=dyn.gear, gains=sc.gains,
                dyn=dyn, law=law, gap=gap, s_min=0.0, t_min=t_min,
                desired_gap=Config.STANDSTILL_GAP, target_time_gap=self._target_time_gap(ctx, law, t_min),
                broadcast=self._broadcast(i, 0, None, positions[i], 0.0, 0.0),
            ))
        return states

    # -- one step -----------------------------------------------------------

    def _advance(self, state: VehicleState, spec: VehicleSpec) -> Tuple[float, float, DynamicsOutput]:
        dt = self.scenario.dt
        v = state.v + state.a * dt
        if v < 0:
            # stops inside the step
            x = state.x + state.v * state.v / (2.0 * -state.a)
            v = 0.0
        else:
            x = state.x + state.v * dt + state.a * dt * dt / 2.0
        dyn = max_acceleration(spec, self.scenario.env, v, previous_gear=state.gear)
        return x, v, dyn

    def _target_time_gap(self, ctx: ControlContext, law: ControlLaw, t_min: float) -> float:
        if law in (ControlLaw.ACC, ControlLaw.CACC):
            if self.scenario.adaptive_time_gap:
                return max(ctx.time_gap_setting, t_min)
            return ctx.time_gap_setting
        return t_min

    def _broadcast(self, i: int, k: int, prev: Optional[VehicleState], x: float, v: float,
                   a: float) -> Optional[Broadcast]:
        """V2V message held by vehicle ``i`` after step ``k``; only cooperative vehicles send."""
        if self.scenario.vehicles[i].mode != DrivingMode.COOPERATIVE:
            return None
        if prev is None or prev.broadcast is None or k % self.scenario.broadcast_steps == 0:
            return Broadcast(step=k, x=x, v=v, a=a)
        return prev.broadcast

    def _discrepancy(self, i: int, k: int, gap: float, x: float, lead_prev: VehicleState) -> bool:
        """Sensed gap against the gap implied by the leader's last broadcast."""
        message = lead_prev.broadcast
        if message is None:
            return False
        v2v_gap = message.position_at(k, self.scenario.dt) - x - self.scenario.vehicles[i - 1].spec.length
        return has_discrepancy(gap, v2v_gap)

    def _leader_command(self, k: int, prev: VehicleState, x: float, v: float,
                        dyn: DynamicsOutput) -> VehicleState:
        sc = self.scenario
        t_next = min((k + 1) * sc.dt, sc.schedule.duration)
        target = speed_at(sc.schedule, t_next)
        a = cruise_accel(sc.gains, v, self.contexts[0], dyn.bounds, target_speed=target)
        return VehicleState(vehicle_id=1, x=x, v=v, a=a, gear=dyn.gear, gains=sc.gains, dyn=dyn,
                            law=ControlLaw.CRUISE, broadcast=self._broadcast(0, k, prev, x, v, a))

    def _follower_command(self, i: int, k: int, prev: VehicleState, lead_prev: VehicleState,
                          own: Tuple[float, float, DynamicsOutput],
                          lead: Tuple[float, float, DynamicsOutput]) -> VehicleState:
        sc = self.scenario
        setup = sc.vehicles[i]
        ctx = self.contexts[i]
        x, v, dyn = own
        x_l, v_l, dyn_l = lead
        gap = x_l - x - sc.vehicles[i - 1].spec.length
        s_min = min_safe_distance_gap(v, ctx.sensing_delay, ctx.communication_delay, dyn.lag,
                                      v_l, dyn_l.lag)
        t_min = min_safe_time_gap(ctx.sensing_delay, ctx.communication_delay, dyn.lag, dyn_l.lag)
        law = select_control_mode(setup.mode, sc.vehicles[i - 1].mode, gap,
                                  self._discrepancy(i, k, gap, x, lead_prev), ctx.detection_range)

        gains = sc.gains
        if sc.adaptive_gains and v > 0 and law in TUNED_PAIRS:
            tuned = tune_gains(sc.gains, t_min, dyn.lag, v_l, s_min, Phase.from_command(prev.a), law)
            # an infeasible step keeps the last feasible gains
            gains = replace(prev.gains, infeasible=True) if tuned.infeasible else tuned

        gap_desired = None
        if law in (ControlLaw.ACC, ControlLaw.CACC):
            t_min_prev = (prev.t_min or 0.0) if sc.adaptive_time_gap else 0.0
            gap_desired = desired_gap(ctx.time_gap_setting, t_min_prev, prev.v)

        collided = gap <= 0
        # gap-keeping laws brake fully once the gap, less one step of closing, is inside the safe gap
        braking = (not collided and law in (ControlLaw.ACC, ControlLaw.CACC)
                   and gap - max(v - v_l, 0.0) * sc.dt < max(s_min, Config.STANDSTILL_GAP))
        if collided or braking:
            a = -dyn.d_max
        elif law == ControlLaw.MANUAL:
            a = iidm_accel(setup.driver, dyn, gap, s_min, v_l, ctx)
        elif law == ControlLaw.CRUISE:
            a = cruise_accel(gains, v, ctx, dyn.bounds)
        elif law == ControlLaw.ACC:
            a = acc_accel(gains, gap, gap_desired, v, v_l, dyn.bounds)
        else:
            a = cacc_accel(gains, gap, gap_desired, v, v_l, lead_prev.a, dyn.bounds)

        return VehicleState(
            vehicle_id=i + 1, x=x, v=v, a=a, gear=dyn.gear, gains=gains, dyn=dyn, law=law,
            gap=gap, time_gap=gap / v if v > 0 else None, s_min=s_min, t_min=t_min,
            desired_gap=gap_desired, target_time_gap=self._target_time_gap(ctx, law, t_min),
            broadcast=self._broadcast(i, k, prev, x, v, a),
            flag=_join_flags(FLAG_COLLISION if collided else '',
                             FLAG_BRAKE if braking else '',
                             FLAG_INFEASIBLE if gains.infeasible else ''),
        )

    def step(self, states: List[VehicleState], k: int, mapper: Mapper = None) -> List[VehicleState]:
        """Advance every vehicle from step ``k - 1`` to step ``k``.

        Kinematics are integrated first for the whole string, then each vehicle's
        command is computed from the new positions; ``mapper`` may spread those
        per-vehicle computations over a pool as results come back in order.
        """
        if k < 1:
            raise ValueError("step index must be at least 1")
        sc = self.scenario
        moved = [self._advance(state, setup.spec) for state, setup in zip(states, sc.vehicles)]

        def command(i: int) -> VehicleState:
            x, v, dyn = moved[i]
            if i == 0:
                return self._leader_command(k, states[0], x, v, dyn)
            return self._follower_command(i, k, states[i], states[i - 1], moved[i], moved[i - 1])

        indices = list(range(len(states)))
        if mapper is None:
            return [command(i) for i in indices]
        return list(mapper(command, indices))

    # -- full run -----------------------------------------------------------

    def run(self, threads: int = 1) -> Trace:
        sc = self.scenario
        states = self.init_string()
        trace = Trace(scenario=sc, steps=[states])
        logger.info("Running %s: %d vehicles, %d steps of %.3g s",
                    sc.name, len(states), sc.step_count, sc.dt)

        pool = ThreadPool(nodes=threads) if threads > 1 and len(states) > 1 else None
        mapper = pool.map if pool is not None else None
        infeasible_steps = 0
        try:
            for k in range(1, sc.step_count + 1):
                previous, states = states, self.step(states, k, mapper)
                trace.steps.append(states)
                for before, state in zip(previous, states):
                    if state.infeasible:
                        infeasible_steps += 1
                        if not before.infeasible:
                            logger.debug("Vehicle %d: gain tuning infeasible from t=%.1f s",
                                         state.vehicle_id, k * sc.dt)
                    if state.braking and not before.braking:
                        logger.debug("Vehicle %d: full braking inside the safe gap at t=%.1f s",
                                     state.vehicle_id, k * sc.dt)
                    if state.collided and not before.collided:
                        event = CollisionEvent(state.vehicle_id, k, k * sc.dt, state.gap)
                        trace.collisions.append(event)
                        logger.warning("Vehicle %d collided at t=%.1f s (gap %.3f ft)",
                                       event.vehicle_id, event.t, event.gap)
                if trace.collisions and not sc.continue_on_collision:
                    trace.halted = True
                    break
        finally:
            if pool is not None:
                pool.close()
                pool.join()
                pool.clear()

        if infeasible_steps:
            logger.warning("%s: gain constraints infeasible on %d vehicle-steps",
                           sc.name, infeasible_steps)
        return trace


def init_string(sc: Scenario) -> List[VehicleState]:
    return StringSimulator(sc).init_string()


def step(states: List[VehicleState], sc: Scenario, k: int) -> List[VehicleState]:
    return StringSimulator(sc).step(states, k)


def run(sc: Scenario, threads: int = 1) -> Trace:
    return StringSimulator(sc).run(threads=threads)


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------

def _peak(values: np.ndarray, mask: np.ndarray) -> float:
    selected = values[mask & ~np.isnan(values)]
    return float(np.max(selected)) if selected.size else 0.0


def _rmse(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.mean((a - b) ** 2)))


def summarize(trace: Trace) -> Dict[int, VehicleSummary]:
    """Per-vehicle peaks, errors and collision counts.

    Acceleration peaks only count steps where the vehicle moves and its speed
    changes; time-gap peaks skip the start-up transient and crawling speeds.
    """
    sc = trace.scenario
    if not trace.steps:
        raise ValueError("trace is empty")
    t = trace.times
    leader_speed = trace.series(1, 'v')
    en_route = t >= sc.startup_exclusion
    summaries = {}
    for vehicle_id in trace.vehicle_ids:
        setup = sc.vehicles[vehicle_id - 1]
        v = trace.series(vehicle_id, 'v')
        a = trace.series(vehicle_id, 'a')
        moving = v > 0
        cruising_speed = en_route & (v >= Config.MOVING_SPEED)
        common = dict(
            vehicle_id=vehicle_id,
            model_id=setup.spec.vehicle_id,
            name=setup.spec.name,
            mode=setup.mode.value,
            peak_a_max=_peak(trace.dyn_series(vehicle_id, 'a_max'), moving & (np.abs(a) > Config.PHASE_THRESHOLD)),
            peak_d_max=_peak(trace.dyn_series(vehicle_id, 'd_max'), moving),
            peak_speed=float(np.max(v)),
            collision_count=sum(1 for e in trace.collisions if e.vehicle_id == vehicle_id),
        )
        if vehicle_id == 1:
            scheduled = np.array([speed_at(sc.schedule, min(tk, sc.schedule.duration)) for tk in t])
            summaries[vehicle_id] = VehicleSummary(speed_rmse_vs_schedule=_rmse(v, scheduled), **common)
            continue

        gap = trace.series(vehicle_id, 'gap')
        desired = trace.series(vehicle_id, 'desired_gap')
        regulated = ~np.isnan(desired)
        measured = np.where(moving, gap / np.where(moving, v, 1.0), np.nan)
        summaries[vehicle_id] = VehicleSummary(
            peak_T_gap=_peak(trace.series(vehicle_id, 'target_time_gap'), cruising_speed),
            peak_measured_T_gap=_peak(measured, cruising_speed),
            speed_rmse_vs_leader=_rmse(v, trace.series(vehicle_id - 1, 'v')),
            mean_abs_gap_error=float(np.mean(np.abs(gap - desired)[regulated])) if regulated.any() else None,
            **common,
        )
    return summaries


def summary_payload(summaries: Dict[int, VehicleSummary]) -> Dict[str, Dict]:
    return {str(vehicle_id): summary.to_dict() for vehicle_id, summary in summaries.items()}


# ---------------------------------------------------------------------------
# Batch sweep
# ---------------------------------------------------------------------------

@dataclass
class SweepResult:
    rows: List[Dict]

    @property
    def collided(self) -> bool:
        return any(row['collisions'] for row in self.rows)

    def _pivot(self, value: str) -> pd.DataFrame:
        frame = pd.DataFrame(self.rows)
        frame['column'] = frame['schedule'] + '_' + frame['mode']
        table = frame.pivot_table(index=['model_id', 'name'], columns='column', values=value,
                                  sort=False, aggfunc='first')
        table.columns.name = None
        return table.reset_index()

    def _with_collisions(self, table: pd.DataFrame) -> pd.DataFrame:
        counts = pd.DataFrame(self.rows).groupby('model_id', sort=False)['collisions'].sum()
        return table.assign(collisions=table['model_id'].map(counts).astype(int))

    def deceleration_table(self) -> pd.DataFrame:
        """Peak d_max per schedule: manual and autonomous/cooperative columns."""
        table = self._pivot('peak_d_max')
        columns = ['model_id', 'name']
        for schedule in dict.fromkeys(row['schedule'] for row in self.rows):
            manual, shared = f"{schedule}_manual", f"{schedule}_autonomous_cooperative"
            if manual in table:
                columns.append(manual)
            source = f"{schedule}_autonomous" if f"{schedule}_autonomous" in table else f"{schedule}_cooperative"
            if source in table:
                table[shared] = table[source]
                columns.append(shared)
        return self._with_collisions(table[columns])

    def acceleration_table(self) -> pd.DataFrame:
        """Peak a_max per schedule and mode, highest first."""
        table = self._pivot('peak_a_max')
        key = f"{self.rows[0]['schedule']}_{self.rows[0]['mode']}"
        ranked = table.sort_values(key, ascending=False, kind='mergesort')
        return self._with_collisions(ranked.reset_index(drop=True))

    def time_gap_table(self) -> pd.DataFrame:
        return self._with_collisions(self._pivot('peak_T_gap'))


def sweep_scenario(schedule: Schedule, leader: VehicleSpec, follower: VehicleSpec,
                   driver: DriverType, mode: DrivingMode, dt: float = Config.TIME_STEP,
                   **overrides) -> Scenario:
    return Scenario(
        schedule=schedule,
        vehicles=(VehicleSetup(leader, driver, mode), VehicleSetup(follower, driver, mode)),
        dt=dt,
        name=f"{schedule.name}/{mode.value}/{follower.vehicle_id}",
        **overrides,
    )


def run_sweep(schedules: Sequence[Schedule], modes: Optional[Sequence[str]] = None,
              fleet: Optional[Sequence[VehicleSpec]] = None,
              followers: Optional[Sequence[VehicleSpec]] = None, leader_id: int = Config.LEADER_VEHICLE_ID,
              driver_id: int = Config.DRIVER_TYPE, dt: float = Config.TIME_STEP,
              threads: int = 1, **overrides) -> SweepResult:
    """Every catalog vehicle behind the leader model, per mode and schedule."""
    fleet = list(fleet) if fleet is not None else load_fleet()
    leader = find_vehicle(fleet, leader_id)
    if leader is None:
        raise ConfigurationError(f"leader vehicle {leader_id} is not in the catalog")
    driver = find_driver(load_builtin_drivers(), driver_id)
    if driver is None:
        raise ConfigurationError(f"driver type {driver_id} is not defined")
    modes = [DrivingMode(m) for m in (modes or Config.DRIVING_MODES)]

    followers = list(followers) if followers is not None else fleet
    jobs = [(schedule, mode, spec) for schedule in schedules for mode in modes for spec in followers]

    def one(job) -> Dict:
        schedule, mode, spec = job
        trace = run(sweep_scenario(schedule, leader, spec, driver, mode, dt=dt, **overrides))
        follower = summarize(trace)[2]
        return {
            'schedule': schedule.name,
            'mode': mode.value,
            'model_id': spec.vehicle_id,
            'name': spec.name,
            'peak_a_max': follower.peak_a_max,
            'peak_d_max': follower.peak_d_max,
            'peak_T_gap': follower.peak_T_gap,
            'peak_measured_T_gap': follower.peak_measured_T_gap,
            'collisions': len(trace.collisions),
        }

    logger.info("Sweep: %d runs over %d schedule(s)", len(jobs), len(schedules))
    if threads > 1:
        pool = ThreadPool(nodes=threads)
        try:
            rows = pool.map(one, jobs)
        finally:
            pool.close()
            pool.join()
            pool.clear()
    else:
        rows = [one(job) for job in jobs]
    return SweepResult(rows=list(rows))
