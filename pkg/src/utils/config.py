import os
from typing import Any, Dict, Optional

class Config:
    BASE_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    DATA_DIR = os.path.join(BASE_DIR, 'data')
    SCHEDULES_DIR = os.path.join(DATA_DIR, 'schedules')
    SCENARIOS_DIR = os.path.join(DATA_DIR, 'scenarios')
    OUTPUTS_DIR = os.path.join(DATA_DIR, 'outputs')
    SCENARIO_SCHEMA_PATH = os.path.join(DATA_DIR, 'scenario.schema.json')

    FLEET_PATH_ENV = 'LONGSIM_FLEET_PATH'

    # Units (US customary throughout)
    GRAVITY = 32.174                 # ft/s^2
    MPH_TO_FPS = 5280.0 / 3600.0
    FT_PER_MILE = 5280.0
    FT_PER_METER = 1.0 / 0.3048

    # Environment
    AIR_DENSITY = 0.002378           # slug/ft^3, sea level, 59 F
    GRADE = 0.0
    ADHESION = 1.0                   # good, dry pavement
    BRAKING_EFFICIENCY = 0.95
    BRAKE_MASS_FACTOR = 1.04
    MAX_GRADE = 0.25

    # Rolling resistance coefficient 0.01 * (1 + v / 147)
    ROLLING_BASE = 0.01
    ROLLING_SPEED_SCALE = 147.0

    # Scenario
    TIME_STEP = 0.1
    INITIAL_SPACING = 100.0          # front bumper to front bumper, ft
    STANDSTILL_GAP = 5.0
    DRIVER_TYPE = 5
    LEADER_VEHICLE_ID = 1
    FREE_FLOW_SPEED = 110.0
    ALPHA = 2.0
    BETA = 4.0
    DETECTION_RANGE_M = 300.0
    DETECTION_RANGE = DETECTION_RANGE_M * FT_PER_METER
    COMMUNICATION_DELAY = 0.1

    DRIVING_MODES = ['manual', 'autonomous', 'cooperative']
    SENSING_DELAY = {
        'manual': 1.0,
        'autonomous': 0.6,
        'cooperative': 0.0,
    }
    PRESET_TIME_GAP = {
        'autonomous': 1.1,
        'cooperative': 0.6,
    }

    INITIAL_GAINS = {
        'kp1': 1.0,
        'kp2': -1.0,
        'kp3': 1.0,
        'ki1': -1.0,
        'kd1': 1.0,
        'kd2': 1.0,
    }
    GAIN_LIMIT = 100.0

    # Gain tuning
    KD_MARGIN = 0.9
    BACKOFF_FACTOR = 0.8
    MAX_BACKOFF_STEPS = 10
    KP_FLOOR = 0.05
    KD_FLOOR = 0.0
    PHASE_THRESHOLD = 0.01           # ft/s^2

    # Sensor vs V2V gap discrepancy
    DISCREPANCY_RATIO = 0.1
    DISCREPANCY_FLOOR = 3.0

    # Reporting
    STARTUP_EXCLUSION = 30.0         # s
    MOVING_SPEED = 5.0 * MPH_TO_FPS

    # Catalog defaults for rows that omit geometry
    DEFAULT_WHEELBASE_RATIO = 0.55
    DEFAULT_CG_HEIGHT_RATIO = 0.35

    TRACE_FILE = 'trace.csv'
    SUMMARY_FILE = 'summary.json'
    PLOT_FILE_PATTERN = 'plot_{vehicle_id}.csv'

    @classmethod
    def fleet_path(cls) -> Optional[str]:
        path = os.environ.get(cls.FLEET_PATH_ENV, '').strip()
        return path or None

    @classmethod
    def defaults(cls) -> Dict[str, Any]:
        return {
            'environment': {
                'air_density': cls.AIR_DENSITY,
                'grade': cls.GRADE,
                'adhesion': cls.ADHESION,
                'braking_efficiency': cls.BRAKING_EFFICIENCY,
                'brake_mass_factor': cls.BRAKE_MASS_FACTOR,
                'gravity': cls.GRAVITY,
            },
            'dt': cls.TIME_STEP,
            'initial_spacing_ft': cls.INITIAL_SPACING,
            'standstill_gap_ft': cls.STANDSTILL_GAP,
            'driver_type': cls.DRIVER_TYPE,
            'free_flow_speed_fps': cls.FREE_FLOW_SPEED,
            'alpha': cls.ALPHA,
            'beta': cls.BETA,
            'detection_range_m': cls.DETECTION_RANGE_M,
            'sensing_delay_s': dict(cls.SENSING_DELAY),
            'communication_delay_s': cls.COMMUNICATION_DELAY,
            'broadcast_period_s': None,
            'preset_time_gap_s': dict(cls.PRESET_TIME_GAP),
            'initial_gains': dict(cls.INITIAL_GAINS),
            'drivetrain': 'front-wheel',
            'l_r': 'L/2',
        }
