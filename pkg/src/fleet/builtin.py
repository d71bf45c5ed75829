"""Built-in fleet: fourteen vehicle models and ten driver types.

Physical, engine, transmission and drivetrain figures are published values.
Torque curves are synthetic (see ``torque_map``) and the centre-of-gravity
height ratios are calibrated so that maximum deceleration at 80 ft/s matches
the published peak deceleration of each model.
"""
from functools import lru_cache
from typing import List

try:
    from .catalog import (DriverType, Drivetrain, EngineSpec, FleetType, Gear,
                          TransmissionSpec, VehicleSpec)
    from .torque_map import synthetic_torque_map
except ImportError:
    from fleet.catalog import (DriverType, Drivetrain, EngineSpec, FleetType, Gear,
                               TransmissionSpec, VehicleSpec)
    from fleet.torque_map import synthetic_torque_map

CAR_TAIL = 0.85

# engine_id: (displacement L, idle rpm, max rpm, peak rpm, peak torque ft-lb, tail fraction)
ENGINES = {
    'E01': (2.0, 1000, 8000, 6100, 140.0, CAR_TAIL),
    'E02': (4.0, 1000, 6400, 4800, 220.0, CAR_TAIL),
    'E03': (3.0, 700, 5800, 4000, 185.0, CAR_TAIL),
    'E04': (5.0, 1000, 5600, 4000, 330.0, CAR_TAIL),
    'E05': (5.0, 1000, 5650, 4000, 325.0, CAR_TAIL),
    'E06': (4.0, 1000, 4800, 2800, 250.0, CAR_TAIL),
    'E07': (5.0, 1500, 6000, 4250, 380.0, CAR_TAIL),
    'E08': (2.0, 1000, 6800, 4300, 128.0, CAR_TAIL),
    'E09': (2.0, 1000, 6500, 4000, 200.0, CAR_TAIL),
    'E10': (3.0, 1000, 6400, 4000, 205.0, CAR_TAIL),
    # 300 hp / 660 lb-ft and 485 hp / 1650 lb-ft ratings
    'PX-7': (7.0, 700, 2600, 1400, 660.0, 0.92),
    'MX-13': (12.0, 800, 2200, 1200, 1650.0, 0.576),
}

# (ratio, downshift below mi/h, upshift above mi/h)
CAR_4SPEED = [(3.06, 0, 20), (1.63, 18, 36), (1.00, 32, 58), (0.70, 52, 110)]
HEAVY_10SPEED = [
    (11.06, 0, 5), (8.20, 3, 7), (6.06, 5, 10), (4.49, 7, 14), (3.32, 10, 19),
    (2.46, 13, 25), (1.82, 20, 34), (1.35, 30, 43), (1.00, 38, 55), (0.74, 50, 110),
]
GEARBOXES = {
    1: [(3.27, 0, 15), (2.13, 10, 25), (1.52, 20, 35), (1.15, 30, 45), (0.92, 40, 55), (0.66, 50, 110)],
    2: [(2.92, 0, 20), (1.57, 18, 36), (1.00, 32, 56), (0.71, 52, 110)],
    3: [(2.92, 0, 20), (1.57, 18, 40), (1.00, 36, 65), (0.71, 52, 110)],
    4: CAR_4SPEED,
    5: CAR_4SPEED,
    6: CAR_4SPEED,
    7: [(4.17, 0, 15), (2.34, 12, 30), (1.52, 26, 45), (1.14, 40, 55), (0.86, 50, 65), (0.69, 60, 110)],
    8: [(2.67, 0, 22), (1.53, 18, 38), (1.02, 34, 50), (0.72, 46, 65), (0.53, 60, 110)],
    9: [(2.82, 0, 18), (1.50, 15, 36), (1.00, 32, 52), (0.73, 46, 110)],
    10: [(2.96, 0, 20), (1.62, 16, 38), (1.00, 34, 54), (0.68, 50, 110)],
    11: [(7.59, 0, 9), (5.06, 6, 13), (3.38, 10, 20), (2.25, 17, 26), (1.50, 22, 40), (1.00, 35, 60), (0.75, 55, 110)],
    12: HEAVY_10SPEED,
    13: HEAVY_10SPEED,
    14: HEAVY_10SPEED,
}

# id, name, fleet type, FHWA class, length, width, height, weight, wheel radius, C_D,
# engine, slippage, drivetrain efficiency, differential ratio, calibrated h/L
VEHICLES = [
    (1, '2006 Honda Civic Si', 'small-auto', 2, 14.57, 5.740, 4.460, 3060, 1.03, 0.33, 'E01', 0.05, 0.92, 4.770, 0.3276),
    (2, '2008 Chevy Impala', 'small-auto', 2, 16.70, 6.100, 4.900, 3756, 1.11, 0.33, 'E02', 0.05, 0.92, 2.860, 0.3153),
    (3, '1998 Buick Century', 'small-auto', 2, 16.22, 6.060, 4.720, 3553, 1.10, 0.32, 'E03', 0.05, 0.90, 3.290, 0.3123),
    (4, '2004 Chevy Tahoe', 'large-auto', 3, 16.40, 6.575, 6.358, 7000, 1.28, 0.43, 'E04', 0.05, 0.90, 3.230, 0.4062),
    (5, '2002 Chevy Silverado', 'large-auto', 3, 18.98, 6.540, 5.930, 5100, 1.24, 0.52, 'E05', 0.05, 0.90, 3.230, 0.3350),
    (6, '1998 Chevy S10 Blazer', 'large-auto', 2, 16.94, 6.658, 5.275, 4800, 1.13, 0.42, 'E06', 0.05, 0.90, 3.420, 0.3285),
    (7, '2011 Ford F150', 'large-auto', 3, 19.31, 6.575, 6.350, 5200, 1.29, 0.50, 'E07', 0.05, 0.92, 3.550, 0.3580),
    (8, '2009 Honda Civic', 'small-auto', 2, 14.78, 5.750, 4.708, 3020, 1.04, 0.32, 'E08', 0.03, 0.94, 4.437, 0.3402),
    (9, '2005 Mazda 6', 'small-auto', 2, 15.57, 5.840, 4.725, 3521, 1.06, 0.31, 'E09', 0.03, 0.94, 4.147, 0.3235),
    (10, '2004 Pontiac Grand Am', 'small-auto', 2, 15.53, 5.870, 4.592, 3300, 1.04, 0.36, 'E10', 0.04, 0.93, 3.750, 0.3195),
    (11, 'single-unit truck', 'small-truck', 5, 29.00, 7.0, 10.0, 25000, 1.66, 0.55, 'PX-7', 0.05, 0.80, 4.400, 0.3574),
    (12, 'intermediate semi-trailer', 'large-truck', 8, 55.00, 8.0, 10.0, 37000, 1.66, 0.66, 'MX-13', 0.05, 0.80, 3.500, 0.1941),
    (13, 'interstate semi-trailer', 'large-truck', 9, 68.50, 8.0, 10.0, 53000, 1.66, 0.66, 'MX-13', 0.05, 0.80, 3.500, 0.1539),
    (14, 'double semi-trailer', 'large-truck', 12, 74.60, 8.0, 10.0, 55000, 1.66, 0.66, 'MX-13', 0.05, 0.80, 3.500, 0.1408),
]

WHEELBASE_RATIO = 0.55

# id, w, n, q, share (%)
DRIVERS = [
    (1, 0.910, 0.875, 0.950, 5),
    (2, 0.930, 0.900, 0.960, 8),
    (3, 0.950, 0.925, 0.970, 10),
    (4, 0.970, 0.950, 0.980, 12),
    (5, 1.000, 0.975, 0.990, 15),
    (6, 1.025, 1.000, 1.000, 15),
    (7, 1.050, 1.050, 1.010, 12),
    (8, 1.075, 1.075, 1.020, 10),
    (9, 1.100, 1.100, 1.030, 8),
    (10, 1.120, 1.125, 1.040, 5),
]


def build_engine(engine_id: str) -> EngineSpec:
    displacement, idle, top, peak_rpm, peak_torque, tail = ENGINES[engine_id]
    return EngineSpec(
        engine_id=engine_id,
        displacement=float(displacement),
        idle_speed=float(idle),
        max_speed=float(top),
        torque_map=synthetic_torque_map(idle, top, peak_rpm, peak_torque, tail_fraction=tail),
    )


def build_gears(vehicle_id: int):
    return tuple(Gear(ratio=float(ratio), shift_up=float(high), shift_down=float(low))
                 for ratio, low, high in GEARBOXES[vehicle_id])


@lru_cache(maxsize=1)
def _fleet():
    engines = {engine_id: build_engine(engine_id) for engine_id in ENGINES}
    fleet = []
    for (vehicle_id, name, fleet_type, fhwa, length, width, height, weight, radius, drag,
         engine_id, slippage, efficiency, diff_ratio, cg_ratio) in VEHICLES:
        fleet.append(VehicleSpec(
            vehicle_id=vehicle_id,
            name=name,
            fleet_type=FleetType(fleet_type),
            fhwa_class=fhwa,
            length=float(length),
            width=float(width),
            height=float(height),
            weight=float(weight),
            wheel_radius=float(radius),
            drag_coefficient=float(drag),
            drivetrain=Drivetrain.FRONT_WHEEL,
            engine=engines[engine_id],
            transmission=TransmissionSpec(
                slippage=float(slippage),
                efficiency=float(efficiency),
                differential_ratio=float(diff_ratio),
                gears=build_gears(vehicle_id),
            ),
            wheelbase_ratio=WHEELBASE_RATIO,
            cg_height_ratio=cg_ratio,
        ))
    return tuple(fleet)


def build_fleet() -> List[VehicleSpec]:
    return list(_fleet())


def build_drivers() -> List[DriverType]:
    return [DriverType(driver_id=i, speed_multiplier=w, acceleration_multiplier=n,
                       deceleration_multiplier=q, traffic_share=float(share))
            for i, w, n, q, share in DRIVERS]
