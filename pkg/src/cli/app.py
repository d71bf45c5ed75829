"""Command-line front end: ``run``, ``catalog``, ``schedule-stats`` and ``sweep``."""
import json
import logging
import os
import sys
from typing import Optional, Sequence

import click
from rich.console import Console
from rich.table import Table

try:
    from ..core.sim_engine import run, run_sweep, summarize
    from ..fleet.catalog import find_vehicle, load_fleet
    from ..fleet.torque_map import rated_power
    from ..schedule.driving_schedule import load_schedule, stats_payload
    from ..utils.config import Config
    from ..utils.exceptions import LongSimError
    from ..utils.log import setup_logging
    from .scenario_config import load_scenario_config
    from .writers import write_run_outputs, write_sweep_outputs
except ImportError:
    from core.sim_engine import run, run_sweep, summarize
    from fleet.catalog import find_vehicle, load_fleet
    from fleet.torque_map import rated_power
    from schedule.driving_schedule import load_schedule, stats_payload
    from utils.config import Config
    from utils.exceptions import LongSimError
    from utils.log import setup_logging
    from cli.scenario_config import load_scenario_config
    from cli.writers import write_run_outputs, write_sweep_outputs

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_COLLISION = 2

DEFAULT_SWEEP_SCHEDULES = ('us06.csv', 'hd_udds.csv')


def _stdout() -> Console:
    return Console(width=None if sys.stdout.isatty() else 160)


def _fail(ctx: click.Context, error: Exception):
    click.echo(f"error: {error}", err=True)
    ctx.exit(EXIT_CONFIG)


def _fmt(value: Optional[float], digits: int = 2) -> str:
    return '-' if value is None else f"{value:.{digits}f}"


@click.group(invoke_without_command=True)
@click.option('-v', '--verbose', is_flag=True, help='Log per-step detail.')
@click.option('--print-defaults', is_flag=True, help='Print every built-in default as JSON and exit.')
@click.pass_context
def cli(ctx: click.Context, verbose: bool, print_defaults: bool):
    """Longitudinal vehicle-string simulator."""
    setup_logging(verbose)
    if print_defaults:
        click.echo(json.dumps(Config.defaults(), indent=2))
        ctx.exit(EXIT_OK)
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


@cli.command('run')
@click.argument('config_path', type=click.Path(dir_okay=False))
@click.option('--out-dir', type=click.Path(file_okay=False), help='Directory for trace, summary and plot data.')
@click.option('--continue-on-collision', is_flag=True, default=None, help='Keep simulating after a collision.')
@click.option('--threads', type=click.IntRange(min=1), default=1, show_default=True)
@click.pass_context
def run_command(ctx: click.Context, config_path: str, out_dir: Optional[str],
                continue_on_collision: Optional[bool], threads: int):
    """Simulate the scenario in CONFIG_PATH and write its outputs."""
    try:
        config = load_scenario_config(config_path, out_dir=out_dir,
                                      continue_on_collision=continue_on_collision or None)
        trace = run(config.scenario, threads=threads)
        summaries = summarize(trace)
        write_run_outputs(trace, summaries, config.output_dir, plots=config.write_plots)
    except LongSimError as e:
        _fail(ctx, e)

    table = Table(title=f"{config.scenario.name} ({config.output_dir})")
    for column in ('vehicle', 'model', 'mode', 'peak a_max', 'peak d_max', 'peak T_gap', 'collisions'):
        table.add_column(column)
    for vehicle_id, s in summaries.items():
        table.add_row(str(vehicle_id), s.name, s.mode, _fmt(s.peak_a_max), _fmt(s.peak_d_max),
                      _fmt(s.peak_T_gap), str(s.collision_count))
    _stdout().print(table)

    if trace.collisions:
        first = trace.collisions[0]
        click.echo(f"collision: vehicle {first.vehicle_id} at step {first.step} (t={first.t:.1f} s)", err=True)
        ctx.exit(EXIT_COLLISION)
    ctx.exit(EXIT_OK)


@cli.group('catalog')
def catalog_group():
    """Inspect the vehicle catalog (built-in or $LONGSIM_FLEET_PATH)."""


@catalog_group.command('list')
@click.pass_context
def catalog_list(ctx: click.Context):
    try:
        fleet = load_fleet(Config.fleet_path())
    except LongSimError as e:
        _fail(ctx, e)
    table = Table(title=f"{len(fleet)} vehicles")
    for column in ('id', 'name', 'fleet type', 'FHWA', 'weight (lb)', 'length (ft)', 'engine', 'gears'):
        table.add_column(column)
    for spec in fleet:
        table.add_row(str(spec.vehicle_id), spec.name, spec.fleet_type.value, str(spec.fhwa_class),
                      f"{spec.weight:g}", f"{spec.length:g}", spec.engine.engine_id,
                      str(spec.transmission.gear_count))
    _stdout().print(table)


@catalog_group.command('show')
@click.argument('vehicle_id', type=int)
@click.pass_context
def catalog_show(ctx: click.Context, vehicle_id: int):
    try:
        spec = find_vehicle(load_fleet(Config.fleet_path()), vehicle_id)
    except LongSimError as e:
        _fail(ctx, e)
    if spec is None:
        _fail(ctx, f"unknown vehicle id {vehicle_id}")

    power, power_rpm = rated_power(spec.engine)
    rows = [
        ('name', spec.name),
        ('fleet_type', spec.fleet_type.value),
        ('fhwa_class', spec.fhwa_class),
        ('length_ft', f"{spec.length:g}"),
        ('width_ft', f"{spec.width:g}"),
        ('height_ft', f"{spec.height:g}"),
        ('weight_lb', f"{spec.weight:g}"),
        ('wheel_radius_ft', f"{spec.wheel_radius:g}"),
        ('drag_coeff', f"{spec.drag_coefficient:g}"),
        ('frontal_area_ft2', f"{spec.frontal_area:.2f}"),
        ('drivetrain', spec.drivetrain.value),
        ('wheelbase_ft', f"{spec.wheelbase:.2f}"),
        ('cg_height_ft', f"{spec.cg_height:.2f}"),
        ('engine', f"{spec.engine.engine_id} ({spec.engine.displacement:g} L, "
                   f"{spec.engine.idle_speed:g}-{spec.engine.max_speed:g} rpm)"),
        ('rated_power_hp', f"{power:.1f} @ {power_rpm:.0f} rpm"),
        ('slippage', f"{spec.transmission.slippage:g}"),
        ('efficiency', f"{spec.transmission.efficiency:g}"),
        ('diff_ratio', f"{spec.transmission.differential_ratio:g}"),
    ]
    for index, gear in enumerate(spec.transmission.gears, start=1):
        rows.append((f"gear_{index}", f"{gear.ratio:g} (down < {gear.shift_down:g} mph, up > {gear.shift_up:g} mph)"))

    table = Table(title=f"vehicle {spec.vehicle_id}")
    table.add_column('field')
    table.add_column('value')
    for key, value in rows:
        table.add_row(key, str(value))
    _stdout().print(table)


@cli.command('schedule-stats')
@click.argument('path', type=click.Path(dir_okay=False))
@click.option('--units', type=click.Choice(['mph', 'fps']), default='mph', show_default=True,
              help='Units of the speed column.')
@click.pass_context
def schedule_stats_command(ctx: click.Context, path: str, units: str):
    """Print duration, distance, speed and acceleration extremes of a schedule as JSON."""
    try:
        payload = stats_payload(load_schedule(path, units=units))
    except LongSimError as e:
        _fail(ctx, e)
    click.echo(json.dumps(payload, indent=2))


@cli.command('sweep')
@click.option('--schedule', 'schedule_paths', multiple=True, type=click.Path(dir_okay=False),
              help='Schedule CSV (repeatable); defaults to the vendored US06 and heavy-duty UDDS.')
@click.option('--units', type=click.Choice(['mph', 'fps']), default='mph', show_default=True)
@click.option('--mode', 'modes', multiple=True, type=click.Choice(Config.DRIVING_MODES))
@click.option('--vehicle', 'vehicle_ids', multiple=True, type=int, help='Restrict followers to these ids.')
@click.option('--dt', type=float, default=Config.TIME_STEP, show_default=True)
@click.option('--out-dir', type=click.Path(file_okay=False), default=None)
@click.option('--threads', type=click.IntRange(min=1), default=1, show_default=True)
@click.pass_context
def sweep_command(ctx: click.Context, schedule_paths: Sequence[str], units: str, modes: Sequence[str],
                  vehicle_ids: Sequence[int], dt: float, out_dir: Optional[str], threads: int):
    """Every catalog vehicle behind the leader model, per driving mode and schedule."""
    if not dt > 0:
        _fail(ctx, "dt must be positive")
    paths = schedule_paths or [os.path.join(Config.SCHEDULES_DIR, name) for name in DEFAULT_SWEEP_SCHEDULES]
    out_dir = out_dir or os.path.join(Config.OUTPUTS_DIR, 'sweep')
    try:
        schedules = [load_schedule(p, units=units) for p in paths]
        fleet = load_fleet(Config.fleet_path())
        followers = [s for s in fleet if not vehicle_ids or s.vehicle_id in vehicle_ids]
        if not followers:
            raise LongSimError(f"no catalog vehicle matches {list(vehicle_ids)}")
        result = run_sweep(schedules, modes=list(modes) or None, fleet=fleet, followers=followers,
                           dt=dt, threads=threads)
        write_sweep_outputs(result, out_dir)
    except LongSimError as e:
        _fail(ctx, e)

    ranking = result.acceleration_table()
    table = Table(title=f"peak maximum acceleration ({out_dir})")
    for column in ranking.columns:
        table.add_column(str(column))
    for row in ranking.itertuples(index=False):
        table.add_row(*(f"{v:.2f}" if isinstance(v, float) else str(v) for v in row))
    _stdout().print(table)
    ctx.exit(EXIT_COLLISION if result.collided else EXIT_OK)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; maps usage errors to the configuration exit code."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name='longsim',
                          standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_CONFIG
    except click.Abort:
        return EXIT_CONFIG
    return result if isinstance(result, int) else EXIT_OK
