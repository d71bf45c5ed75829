import logging
import os
from typing import Dict, List

try:
    from ..core.sim_engine import SweepResult, Trace, VehicleSummary, summary_payload
    from ..utils.config import Config
    from ..utils.exceptions import ConfigurationError
    from ..utils.file_handler import FileHandler
except ImportError:
    from core.sim_engine import SweepResult, Trace, VehicleSummary, summary_payload
    from utils.config import Config
    from utils.exceptions import ConfigurationError
    from utils.file_handler import FileHandler

logger = logging.getLogger(__name__)

SWEEP_FILES = {
    'deceleration': 'peak_deceleration.csv',
    'acceleration': 'peak_acceleration.csv',
    'time_gap': 'peak_time_gap.csv',
}


def _checked(ok: bool, path: str) -> str:
    if not ok:
        raise ConfigurationError(f"cannot write {path}")
    return path


def write_trace(trace: Trace, path: str) -> str:
    return _checked(FileHandler.write_csv_file(path, trace.to_frame()), path)


def write_summary(summaries: Dict[int, VehicleSummary], path: str) -> str:
    return _checked(FileHandler.write_json_file(path, summary_payload(summaries)), path)


def write_plots(trace: Trace, out_dir: str) -> List[str]:
    paths = []
    for vehicle_id in trace.vehicle_ids:
        path = os.path.join(out_dir, Config.PLOT_FILE_PATTERN.format(vehicle_id=vehicle_id))
        paths.append(_checked(FileHandler.write_csv_file(path, trace.plot_frame(vehicle_id)), path))
    return paths


def write_run_outputs(trace: Trace, summaries: Dict[int, VehicleSummary], out_dir: str,
                      plots: bool = True) -> List[str]:
    written = [
        write_trace(trace, os.path.join(out_dir, Config.TRACE_FILE)),
        write_summary(summaries, os.path.join(out_dir, Config.SUMMARY_FILE)),
    ]
    if plots:
        written.extend(write_plots(trace, out_dir))
    logger.info("Wrote %d files to %s", len(written), out_dir)
    return written


def write_sweep_outputs(result: SweepResult, out_dir: str) -> List[str]:
    tables = {
        'deceleration': result.deceleration_table(),
        'acceleration': result.acceleration_table(),
        'time_gap': result.time_gap_table(),
    }
    written = []
    for key, frame in tables.items():
        path = os.path.join(out_dir, SWEEP_FILES[key])
        written.append(_checked(FileHandler.write_csv_file(path, frame, float_format='%.4f'), path))
    logger.info("Wrote sweep tables to %s", out_dir)
    return written
