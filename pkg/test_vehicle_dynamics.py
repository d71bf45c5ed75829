from dataclasses import replace

import numpy as np
import pytest

from core.vehicle_dynamics import (Environment, aerodynamic_resistance, braking_lag, engine_power, engine_speed,
                                   engine_tractive_effort, grade_resistance, mass_factor, max_acceleration,
                                   max_deceleration, max_tractive_effort, min_safe_distance_gap,
                                   min_safe_time_gap, rolling_coefficient, rolling_resistance, select_gear,
                                   total_resistance)
from fleet.catalog import Drivetrain, EngineSpec, find_vehicle
from utils.config import Config
from utils.exceptions import DomainError, ValidationError

FLAT_ENGINE = EngineSpec(engine_id='flat', displacement=2.0, idle_speed=1000.0, max_speed=8000.0,
                         torque_map=((1000.0, 140.0), (8000.0, 140.0)))

# Published peak maximum deceleration (ft/s^2) per vehicle id, reached near 80 ft/s.
PEAK_DECELERATION = {
    1: 25.6, 2: 25.2, 3: 25.1, 4: 27.9, 5: 26.1, 6: 25.7, 7: 26.8,
    8: 26.0, 9: 25.4, 10: 25.4, 11: 26.2, 12: 21.3, 13: 20.0, 14: 19.6,
}


@pytest.fixture
def flat_civic(civic):
    """Civic Si with an 8.8 ft wheelbase, 2 ft CG height and a flat 140 lb-ft engine."""
    return replace(civic, length=16.0, cg_height_ratio=2.0 / 8.8, engine=FLAT_ENGINE, l_r=None)


def _peak_a_max(spec, env, top_speed=80.5, dv=0.5):
    gear, peak = 1, 0.0
    for v in np.arange(dv, top_speed, dv):
        out = max_acceleration(spec, env, float(v), previous_gear=gear)
        gear, peak = out.gear, max(peak, out.a_max)
    return peak


def test_rolling_coefficient_grows_with_speed():
    assert rolling_coefficient(0.0) == pytest.approx(0.01)
    assert rolling_coefficient(147.0) == pytest.approx(0.02)


def test_resistance_at_standstill_is_rolling_only(civic, env):
    assert aerodynamic_resistance(civic, env, 0.0) == 0.0
    assert total_resistance(civic, env, 0.0) == pytest.approx(0.01 * 3060)


def test_grade_outside_small_angle_regime(civic):
    with pytest.raises(DomainError):
        grade_resistance(civic, Environment(grade=0.3))
    assert grade_resistance(civic, Environment(grade=0.02)) == pytest.approx(61.2)


def test_environment_validation():
    with pytest.raises(ValidationError):
        Environment(adhesion=0.0)
    with pytest.raises(ValidationError):
        Environment(brake_mass_factor=0.9)


@pytest.mark.parametrize('v_mph, expected', [(10, 1), (20, 2), (34.09, 3), (50, 5), (80, 6)])
def test_gear_selection_from_first_gear(civic, v_mph, expected):
    assert select_gear(civic, v_mph * Config.MPH_TO_FPS, previous_gear=1) == expected


def test_gear_selection_hysteresis(civic):
    v = 12 * Config.MPH_TO_FPS
    # inside gear 2's band: held in 2, and gear 1 only upshifts above 15 mi/h
    assert select_gear(civic, v, previous_gear=2) == 2
    assert select_gear(civic, v, previous_gear=1) == 1
    assert select_gear(civic, 8 * Config.MPH_TO_FPS, previous_gear=2) == 1


def test_flat_engine_operating_point(flat_civic, env):
    out = max_acceleration(flat_civic, env, 50.0)
    assert out.gear == 3
    assert out.engine_speed == pytest.approx(3537.9, abs=0.5)
    assert engine_tractive_effort(flat_civic, 50.0, 3) == pytest.approx(906.7, abs=0.5)
    assert max_tractive_effort(flat_civic, env, 50.0) == pytest.approx(1254.3, abs=0.5)
    assert out.tractive_effort == pytest.approx(906.7, abs=0.5)
    assert out.mass_factor == pytest.approx(1.1714, abs=1e-4)
    assert out.a_max == pytest.approx(7.545, abs=0.005)


def test_engine_speed_is_idle_at_standstill(civic):
    assert engine_speed(civic, 0.0, 1) == civic.engine.idle_speed


def test_rolling_resistance_and_engine_power(civic):
    assert rolling_resistance(civic, 147.0) == pytest.approx(0.02 * 3060)
    assert engine_power(5252.0, 100.0) == pytest.approx(100.0, rel=1e-3)


def test_mass_factor():
    assert mass_factor(0.0) == pytest.approx(1.04)
    assert mass_factor(10.0) == pytest.approx(1.29)


def test_all_wheel_drive_deceleration_at_rest(civic, env):
    awd = replace(civic, drivetrain=Drivetrain.ALL_WHEEL)
    assert max_deceleration(awd, env, 0.0) == pytest.approx(29.70, abs=0.01)


def test_front_wheel_deceleration_with_default_cg(civic, env):
    spec = replace(civic, cg_height_ratio=0.35, l_r=None)
    assert max_deceleration(spec, env, 80.0) == pytest.approx(26.27, abs=0.01)


def test_rear_wheel_degenerate_geometry(civic):
    rwd = replace(civic, drivetrain=Drivetrain.REAR_WHEEL, length=5.0, height=10.0,
                  cg_height_ratio=3.0, l_r=None)
    with pytest.raises(DomainError):
        max_tractive_effort(rwd, Environment(), 10.0)


def test_acceleration_limit_is_never_negative(fleet, env):
    for spec in fleet:
        out = max_acceleration(spec, env, 150.0)
        assert out.a_max >= 0.0
        assert out.d_max > 0.0


def test_output_carries_braking_lag(civic, env):
    out = max_acceleration(civic, env, 60.0)
    assert out.lag == pytest.approx(60.0 / out.d_max)
    assert out.bounds == (out.a_max, out.d_max)
    assert braking_lag(0.0, out.d_max) == 0.0


def test_deceleration_at_80_fps_matches_published_peaks(fleet, env):
    for spec in fleet:
        d_max = max_deceleration(spec, env, 80.0)
        assert d_max == pytest.approx(PEAK_DECELERATION[spec.vehicle_id], rel=0.10)


def test_deceleration_ranking_matches_published_order(fleet, env):
    d_max = {spec.vehicle_id: max_deceleration(spec, env, 80.0) for spec in fleet}
    for a, target_a in PEAK_DECELERATION.items():
        for b, target_b in PEAK_DECELERATION.items():
            if target_a > target_b:
                assert d_max[a] > d_max[b], (a, b)


def test_trucks_accelerate_slower_than_every_car(fleet, env):
    peaks = {spec.vehicle_id: _peak_a_max(spec, env) for spec in fleet}
    slowest_car = min(peaks[s.vehicle_id] for s in fleet if not s.is_truck)
    fastest_truck = max(peaks[s.vehicle_id] for s in fleet if s.is_truck)
    assert fastest_truck < slowest_car


@pytest.mark.parametrize('vehicle_id, published, tolerance', [
    (11, 4.7, 0.25),
    (12, 7.0, 0.15),
    (13, 5.2, 0.15),
    (14, 5.0, 0.15),
])
def test_truck_peak_acceleration(fleet, env, vehicle_id, published, tolerance):
    peak = _peak_a_max(find_vehicle(fleet, vehicle_id), env)
    assert peak == pytest.approx(published, rel=tolerance)


def test_safe_gaps_at_standstill():
    assert min_safe_distance_gap(0.0, 1.0, 0.1, 0.0, 0.0, 0.0) == 0.0
    assert min_safe_time_gap(1.0, 0.1, 0.0, 0.0) == pytest.approx(1.1)


def test_safe_gaps_for_equal_vehicles():
    # same lag and speed: the follower needs its reaction distance plus half the lag difference
    assert min_safe_distance_gap(80.0, 0.6, 0.1, 3.0, 80.0, 3.0) == pytest.approx(56.0)
    assert min_safe_time_gap(0.6, 0.1, 3.0, 3.0) == pytest.approx(0.7)


def _collides(rng):
    """One constant-deceleration episode started just outside the safe gap."""
    d_f = rng.uniform(15.0, 30.0)
    d_l = rng.uniform(d_f, 32.0)
    v_f = rng.uniform(5.0, 110.0)
    v_l = rng.uniform(0.0, 110.0)
    tau_s = rng.choice([0.0, 0.6, 1.0])
    tau_c = 0.1
    lag_f, lag_l = v_f / d_f, v_l / d_l
    s_min = min_safe_distance_gap(v_f, tau_s, tau_c, lag_f, v_l, lag_l)
    if s_min < 0:
        return None
    gap0 = s_min + 0.1
    delay = tau_s + tau_c
    stop_l = v_l / d_l
    stop_f = delay + v_f / d_f
    horizon = max(stop_l, stop_f)
    t = np.union1d(np.linspace(0.0, horizon, 2001), [stop_l, delay, stop_f])

    tl = np.minimum(t, stop_l)
    x_l = gap0 + v_l * tl - d_l * tl ** 2 / 2.0
    braking = np.clip(t - delay, 0.0, v_f / d_f)
    x_f = v_f * np.minimum(t, delay) + v_f * braking - d_f * braking ** 2 / 2.0
    return bool(np.min(x_l - x_f) <= 0.0)


def test_episodes_started_at_safe_gap_never_collide():
    rng = np.random.default_rng(2024)
    checked = []
    while len(checked) < 1000:
        outcome = _collides(rng)
        if outcome is not None:
            checked.append(outcome)
    assert not any(checked)
