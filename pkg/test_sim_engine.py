import logging
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

import core.sim_engine as engine
from core.longitudinal_models import ControlLaw, DrivingMode, GainSet
from core.sim_engine import (FLAG_BRAKE, FLAG_COLLISION, TRACE_COLUMNS, Broadcast, Scenario, StringSimulator,
                             VehicleSetup, init_string, run, run_sweep, step, summarize, summary_payload)
from fleet.catalog import find_vehicle
from schedule.driving_schedule import Schedule, SpeedUnits
from utils.config import Config
from utils.exceptions import ConfigurationError, ValidationError

PEAK_DECELERATION = {
    1: 25.6, 2: 25.2, 3: 25.1, 4: 27.9, 5: 26.1, 6: 25.7, 7: 26.8,
    8: 26.0, 9: 25.4, 10: 25.4, 11: 26.2, 12: 21.3, 13: 20.0, 14: 19.6,
}


def _standing(seconds=10):
    t = np.arange(seconds + 1, dtype=float)
    return Schedule(name='standing', time=t, native_speed=np.zeros_like(t), native_units=SpeedUnits.FPS)


def _within_bounds(trace):
    for states in trace.steps:
        for state in states:
            if state.collided:
                continue
            if not -state.dyn.d_max - 1e-9 <= state.a <= state.dyn.a_max + 1e-9:
                return False
    return True


def test_initial_positions(make_scenario, short_schedule, civic):
    states = init_string(make_scenario(short_schedule))
    assert [s.x for s in states] == [100.0, 0.0]
    assert states[1].gap == pytest.approx(100.0 - civic.length)
    assert all(s.v == 0.0 and s.a == 0.0 for s in states)
    assert states[0].law == ControlLaw.CRUISE
    assert states[1].law == ControlLaw.MANUAL


def test_initial_positions_for_three_vehicles(short_schedule, civic, default_driver):
    setup = VehicleSetup(civic, default_driver, DrivingMode.MANUAL)
    scenario = Scenario(schedule=short_schedule, vehicles=(setup, setup, setup))
    assert [s.x for s in init_string(scenario)] == [200.0, 100.0, 0.0]
    assert [s.vehicle_id for s in init_string(scenario)] == [1, 2, 3]


def test_overlapping_vehicles_are_rejected(make_scenario, short_schedule):
    with pytest.raises(ConfigurationError):
        init_string(make_scenario(short_schedule, initial_spacing=10.0))


def test_time_step_must_be_positive(make_scenario, short_schedule):
    with pytest.raises(ValidationError) as info:
        make_scenario(short_schedule, dt=0.0)
    assert info.value.field == 'dt'


def test_step_index_starts_at_one(make_scenario, short_schedule):
    scenario = make_scenario(short_schedule)
    with pytest.raises(ValueError):
        step(init_string(scenario), scenario, 0)


def test_leader_alone_at_rest_stays_put(civic, default_driver):
    scenario = Scenario(schedule=_standing(), vehicles=(VehicleSetup(civic, default_driver, 'manual'),))
    trace = run(scenario)
    assert len(trace.steps) == 101
    first = trace.steps[0][0]
    for states in trace.steps:
        assert (states[0].x, states[0].v, states[0].a) == (first.x, 0.0, 0.0)
    summary = summarize(trace)[1]
    assert summary.peak_a_max == 0.0
    assert summary.peak_d_max == 0.0
    assert summary.peak_speed == 0.0
    assert summary.speed_rmse_vs_schedule == 0.0


def test_record_count(make_scenario, short_schedule):
    trace = run(make_scenario(short_schedule))
    assert len(trace.steps) == 601
    assert list(trace.vehicle_ids) == [1, 2]
    assert trace.times[-1] == pytest.approx(60.0)


def test_kinematics_are_consistent(make_scenario, short_schedule):
    trace = run(make_scenario(short_schedule))
    dt = trace.dt
    for vehicle_id in trace.vehicle_ids:
        x = trace.series(vehicle_id, 'x')
        v = trace.series(vehicle_id, 'v')
        a = trace.series(vehicle_id, 'a')
        np.testing.assert_allclose(v[1:], np.maximum(v[:-1] + a[:-1] * dt, 0.0), atol=1e-9)
        assert np.all(np.diff(x) >= -1e-9)
        assert np.all(v >= 0.0)


def test_leader_tracks_schedule_within_its_limits(make_scenario, short_schedule):
    trace = run(make_scenario(short_schedule))
    assert _within_bounds(trace)
    leader = summarize(trace)[1]
    assert leader.peak_speed == pytest.approx(40.0, abs=1.0)
    assert leader.speed_rmse_vs_schedule < 3.0


def test_manual_follower_keeps_a_positive_gap(make_scenario, short_schedule):
    trace = run(make_scenario(short_schedule))
    assert not trace.collisions
    gaps = trace.series(2, 'gap')
    assert np.all(gaps > 0)
    assert all(state.law == ControlLaw.MANUAL for state in (s[1] for s in trace.steps))


def _opening(hd_udds, seconds=120):
    """Heavy-duty cycle cut to its first ``seconds``, where the leader stops and starts often."""
    n = seconds + 1
    return Schedule(name='hd_open', time=hd_udds.time[:n], native_speed=hd_udds.native_speed[:n],
                    native_units=hd_udds.native_units)


def test_manual_follower_holds_standstill_gap_behind_stopped_leader(make_scenario):
    # leader drives off, stops at t=42 and stands for 78 s
    t = np.arange(121, dtype=float)
    v = np.interp(t, [0, 1, 11, 30, 42, 120], [0, 0, 40, 40, 0, 0])
    schedule = Schedule(name='stop', time=t, native_speed=v, native_units=SpeedUnits.FPS)
    trace = run(make_scenario(schedule))
    assert not trace.collisions
    gaps = trace.series(2, 'gap')
    assert np.all(gaps > 0)
    settled = trace.times >= 110.0
    assert np.all(trace.series(1, 'v')[settled] == 0.0)
    assert np.all(trace.series(2, 'v')[settled] == 0.0)
    assert np.ptp(gaps[settled]) == 0.0
    assert gaps[settled][0] >= Config.STANDSTILL_GAP - 1.0


@pytest.mark.parametrize('mode', [DrivingMode.AUTONOMOUS, DrivingMode.COOPERATIVE])
def test_gap_keeping_laws_brake_inside_safe_gap(make_scenario, mode):
    scenario = make_scenario(_standing(), mode=mode, initial_spacing=60.0)
    states = init_string(scenario)
    states[1] = replace(states[1], v=60.0, a=0.0)
    follower = step(states, scenario, 1)[1]
    assert follower.law in (ControlLaw.ACC, ControlLaw.CACC)
    assert follower.gap < follower.s_min
    assert follower.braking
    assert FLAG_BRAKE in follower.flag.split(';')
    assert follower.a == -follower.dyn.d_max


@pytest.mark.parametrize('mode', [DrivingMode.AUTONOMOUS, DrivingMode.COOPERATIVE])
@pytest.mark.parametrize('follower_id', [4, 14])
def test_gap_keeping_followers_survive_heavy_duty_start(make_scenario, fleet, hd_udds, mode, follower_id):
    trace = run(make_scenario(_opening(hd_udds), follower=find_vehicle(fleet, follower_id), mode=mode))
    assert not trace.collisions
    assert np.all(trace.series(2, 'gap') > 0)
    assert _within_bounds(trace)


def test_infeasible_tuning_keeps_last_feasible_gains(make_scenario, short_schedule, monkeypatch):
    nominal = GainSet.initial()
    monkeypatch.setattr(engine, 'tune_gains',
                        lambda current, *args: replace(current, kd1=0.0, kd2=0.0, infeasible=True))
    trace = run(make_scenario(short_schedule, mode=DrivingMode.AUTONOMOUS))
    followers = [states[1] for states in trace.steps]
    assert any(state.infeasible for state in followers)
    assert all(state.gains.kd1 == nominal.kd1 for state in followers)


def test_broadcast_dead_reckoning():
    message = Broadcast(step=10, x=100.0, v=20.0, a=-4.0)
    assert message.position_at(10, 0.1) == 100.0
    assert message.position_at(20, 0.1) == pytest.approx(100.0 + 20.0 - 2.0)
    # stopped after 5 s: 20^2 / (2 * 4)
    assert message.position_at(100, 0.1) == pytest.approx(150.0)


def test_only_cooperative_vehicles_broadcast(make_scenario, short_schedule):
    cooperative = init_string(make_scenario(short_schedule, mode=DrivingMode.COOPERATIVE))
    assert cooperative[0].broadcast == Broadcast(step=0, x=100.0, v=0.0, a=0.0)
    autonomous = init_string(make_scenario(short_schedule, mode=DrivingMode.AUTONOMOUS))
    assert all(state.broadcast is None for state in autonomous)


def test_stale_broadcast_switches_cooperative_follower_to_acc(make_scenario, short_schedule):
    fresh = run(make_scenario(short_schedule, mode=DrivingMode.COOPERATIVE))
    stale = run(make_scenario(short_schedule, mode=DrivingMode.COOPERATIVE, broadcast_period=5.0))
    assert ControlLaw.ACC not in {states[1].law for states in fresh.steps}
    stale_laws = [states[1].law for states in stale.steps]
    assert ControlLaw.ACC in stale_laws
    assert ControlLaw.CACC in stale_laws
    assert not stale.collisions


def test_broadcast_period_must_be_positive(make_scenario, short_schedule):
    with pytest.raises(ValidationError) as info:
        make_scenario(short_schedule, broadcast_period=0.0)
    assert info.value.field == 'broadcast_period'


def test_runs_are_deterministic(make_scenario, short_schedule):
    scenario = make_scenario(short_schedule, mode=DrivingMode.COOPERATIVE)
    pd.testing.assert_frame_equal(run(scenario).to_frame(), run(scenario).to_frame())


def test_threaded_run_matches_serial(make_scenario, short_schedule):
    scenario = make_scenario(short_schedule, mode=DrivingMode.AUTONOMOUS)
    pd.testing.assert_frame_equal(run(scenario, threads=3).to_frame(), run(scenario).to_frame())


def test_trace_frame_layout(make_scenario, short_schedule):
    trace = run(make_scenario(short_schedule, mode=DrivingMode.COOPERATIVE))
    frame = trace.to_frame()
    assert list(frame.columns) == TRACE_COLUMNS
    assert len(frame) == 2 * 601
    assert set(frame.loc[frame['vehicle_id'] == 1, 'mode']) == {'cruise'}
    assert set(frame.loc[frame['vehicle_id'] == 2, 'mode']) <= {'cacc', 'acc', 'cruise'}
    plot = trace.plot_frame(2)
    assert list(plot.columns) == ['t', 'speed_fps', 'amax_fps2', 'dmax_fps2', 'timegap_s']


def test_cooperative_pair_uses_cacc(make_scenario, short_schedule):
    trace = run(make_scenario(short_schedule, mode=DrivingMode.COOPERATIVE))
    assert trace.steps[100][1].law == ControlLaw.CACC


def test_out_of_range_follower_cruises(make_scenario, short_schedule):
    trace = run(make_scenario(short_schedule, mode=DrivingMode.AUTONOMOUS, detection_range=50.0))
    assert trace.steps[1][1].law == ControlLaw.CRUISE


def _collision_scenario(make_scenario, **overrides):
    # the follower cannot see a leader 1 ft away and cruises into it
    return make_scenario(_standing(20), mode=DrivingMode.AUTONOMOUS, detection_range=1.0, **overrides)


def test_collision_halts_the_run(make_scenario, caplog):
    with caplog.at_level(logging.WARNING):
        trace = run(_collision_scenario(make_scenario))
    assert trace.halted
    assert len(trace.steps) < 201
    event = trace.collisions[0]
    assert event.vehicle_id == 2
    assert event.gap <= 0
    assert trace.steps[-1][1].flag.split(';')[0] == FLAG_COLLISION
    assert 'collided' in caplog.text


def test_collision_can_be_run_through(make_scenario):
    trace = run(_collision_scenario(make_scenario, continue_on_collision=True))
    assert not trace.halted
    assert len(trace.steps) == 201
    assert summarize(trace)[2].collision_count == 1
    assert trace.steps[-1][1].v == 0.0


def test_summary_payload(make_scenario, short_schedule, civic):
    summaries = summarize(run(make_scenario(short_schedule)))
    payload = summary_payload(summaries)
    assert set(payload) == {'1', '2'}
    assert payload['2']['model_id'] == civic.vehicle_id
    assert payload['2']['mode'] == 'manual'
    assert payload['2']['collision_count'] == 0
    assert payload['1']['speed_rmse_vs_leader'] is None
    assert payload['2']['peak_a_max'] > 0
    assert payload['2']['peak_T_gap'] >= 1.0


def test_time_gap_setting_without_adaptation(make_scenario, short_schedule, civic, default_driver):
    vehicles = (VehicleSetup(civic, default_driver, 'autonomous'),
                VehicleSetup(civic, default_driver, 'autonomous', time_gap_setting=2.0))
    trace = run(Scenario(schedule=short_schedule, vehicles=vehicles, adaptive_time_gap=False))
    regulated = [s[1].target_time_gap for s in trace.steps if s[1].law == ControlLaw.ACC]
    assert regulated and set(regulated) == {2.0}


def test_sweep_rejects_unknown_ids(fleet, short_schedule):
    with pytest.raises(ConfigurationError):
        run_sweep([short_schedule], fleet=fleet, leader_id=99)
    with pytest.raises(ConfigurationError):
        run_sweep([short_schedule], fleet=fleet, driver_id=42)


def test_small_sweep_tables(fleet, short_schedule):
    followers = [find_vehicle(fleet, 1), find_vehicle(fleet, 12)]
    result = run_sweep([short_schedule], fleet=fleet, followers=followers)
    assert len(result.rows) == 6
    assert not result.collided
    decel = result.deceleration_table()
    assert list(decel.columns) == ['model_id', 'name', 'short_manual', 'short_autonomous_cooperative',
                                   'collisions']
    accel = result.acceleration_table()
    assert list(accel['model_id']) == [1, 12]
    assert {'short_manual', 'short_autonomous', 'short_cooperative'} <= set(result.time_gap_table().columns)


@pytest.mark.slow
def test_full_sweep_is_collision_free_and_reproduces_peaks(fleet, us06, hd_udds):
    result = run_sweep([us06, hd_udds], fleet=fleet, threads=4)
    assert len(result.rows) == 84
    assert not result.collided

    rows = pd.DataFrame(result.rows)
    manual = rows[(rows['schedule'] == 'us06') & (rows['mode'] == 'manual')].set_index('model_id')
    for vehicle_id, published in PEAK_DECELERATION.items():
        assert manual.loc[vehicle_id, 'peak_d_max'] == pytest.approx(published, rel=0.10)

    us06_rows = rows[rows['schedule'] == 'us06']
    # double semi behind the Civic Si, manual
    semi = us06_rows[(us06_rows['model_id'] == 14) & (us06_rows['mode'] == 'manual')]
    assert semi['peak_T_gap'].item() == pytest.approx(5.5, rel=0.15)
    for vehicle_id in (11, 12, 13, 14):
        gap = us06_rows[us06_rows['model_id'] == vehicle_id].set_index('mode')['peak_T_gap']
        assert gap['manual'] > gap['autonomous'] > gap['cooperative']

    accel = us06_rows.pivot(index='model_id', columns='mode', values='peak_a_max')
    decel = us06_rows.pivot(index='model_id', columns='mode', values='peak_d_max')
    for table in (accel, decel):
        np.testing.assert_allclose(table['autonomous'], table['cooperative'], rtol=0.02)


@pytest.mark.slow
def test_leader_limits_do_not_depend_on_mode(fleet, us06, default_driver):
    leader = find_vehicle(fleet, Config.LEADER_VEHICLE_ID)
    follower = find_vehicle(fleet, 13)
    traces = {}
    for mode in (DrivingMode.AUTONOMOUS, DrivingMode.COOPERATIVE):
        vehicles = (VehicleSetup(leader, default_driver, mode), VehicleSetup(follower, default_driver, mode))
        traces[mode] = StringSimulator(Scenario(schedule=us06, vehicles=vehicles)).run()
    for attr in ('a_max', 'd_max'):
        np.testing.assert_array_equal(traces[DrivingMode.AUTONOMOUS].dyn_series(1, attr),
                                      traces[DrivingMode.COOPERATIVE].dyn_series(1, attr))
    for trace in traces.values():
        assert not trace.collisions
        assert _within_bounds(trace)
