import os
import argparse
import logging
from typing import List, Optional

import numpy as np

from utils.config import DWELL_THREADS, RunConfig, load_run_config, validate_config
from utils.engine import engine
from utils.errors import ConfigError, DomainError, NumericalError, PlotError, ResultIOError
from utils.helpers import d_label
from utils.model import potential_value, quartic_from_well
from utils.observables import SERIES_COLUMNS, eigenfunction_on_grid, wavefunction_on_grid
from utils.svg_plot import read_columns, render_plot
from utils.writer import ResultWriter, columns_to_rows

logger = logging.getLogger(__name__)

COMMANDS = ("eigen", "evolve", "scan", "classical", "plot")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dwell",
        description="Wavepacket dynamics and tunneling in asymmetric quartic double wells",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, summary in (
        ("eigen", "spectrum, gaps and stationary points for each scan.d value"),
        ("evolve", "time series of the observables for well.d"),
        ("scan", "maximum right-well probability for each scan.d value"),
        ("classical", "classical and quantum phase-space paths for well.d"),
    ):
        cmd = sub.add_parser(name, help=summary)
        cmd.add_argument("--config", help="INI run configuration")
        cmd.add_argument("--set", dest="overrides", action="append", default=[],
                         metavar="SECTION.KEY=VALUE", help="override one configuration key (repeatable)")
        cmd.add_argument("--out", help="output directory")
        cmd.add_argument("--format", choices=("csv", "json", "both"), help="result file format")

    plot = sub.add_parser("plot", help="render CSV columns as an SVG line plot")
    plot.add_argument("csv", help="input CSV file")
    plot.add_argument("--x", default="t")
    plot.add_argument("--y", required=True)
    plot.add_argument("--y2")
    plot.add_argument("--hline", type=float)
    plot.add_argument("--svg", required=True, help="output SVG path")
    return parser


def resolve_config(args, need_scan: bool = False) -> RunConfig:
    run = load_run_config(args.config, args.overrides)
    if args.out:
        run.output.directory = args.out
    if args.format:
        run.output.formats = ["csv", "json"] if args.format == "both" else [args.format]
    return validate_config(run, need_scan=need_scan)


async def cmd_eigen(run: RunConfig) -> ResultWriter:
    writer = ResultWriter(run.output.directory)
    rows = []
    for d in run.scan.d:
        rows.append(engine.spectrum_row(run, d))
        logger.info(f"📊 d={d:g}: delta={rows[-1]['delta']:.6f}, delta'={rows[-1]['delta_prime']:.6f}")
    header = list(rows[0].keys())
    await writer.write_table("spectrum", header, [[row.get(k) for k in header] for row in rows],
                             run.output.formats)

    params = run.params()
    x = run.spatial_grid().x
    potential = {"x": x}
    for d in run.scan.d:
        potential[f"U_{d_label(d)}"] = potential_value(quartic_from_well(params, run.well_shape(d)), x)
    await writer.write_csv("potential.csv", list(potential), columns_to_rows(potential))

    if run.output.eigenfunctions:
        grid = run.spatial_grid()
        for d in run.scan.d:
            _, _, _, _, es = engine.spectrum(run, d)
            columns = {"x": grid.x}
            for nu in range(min(run.output.levels, es.dim)):
                columns[f"psi_{nu}"] = eigenfunction_on_grid(es, nu, params, grid)
            await writer.write_csv(f"eigenfunctions_{d_label(d)}.csv", list(columns), columns_to_rows(columns))

    await writer.write_manifest("eigen", run.to_dict())
    return writer


async def cmd_evolve(run: RunConfig) -> ResultWriter:
    writer = ResultWriter(run.output.directory)
    d = run.well.d
    result = engine.evolve(run, d)
    pipeline = result.pipeline

    columns = result.series.columns()
    await writer.write_table("series", list(SERIES_COLUMNS), columns_to_rows(columns), run.output.formats)
    await writer.write_csv("amplitudes.csv", ["nu", "energy", "weight"], engine.amplitude_rows(pipeline))

    if run.output.wavefunction:
        grid = run.spatial_grid()
        rows = []
        for state in result.states[::run.output.wavefunction_stride]:
            psi = wavefunction_on_grid(state, pipeline.params, grid)
            rows.extend([state.t, xv, pv.real, pv.imag, abs(pv) ** 2] for xv, pv in zip(grid.x, psi))
        await writer.write_csv("wavefunction.csv", ["t", "x", "re", "im", "abs2"], rows)

    dominant = engine.dominant(pipeline)
    logger.info(f"📊 Dominant levels {dominant}, period of <x>: {result.period}")
    await writer.write_manifest("evolve", run.to_dict(), pipeline.captured_norm, {
        "period_x_mean": result.period,
        "p_r_max": result.maximum.p_max,
        "t_argmax": result.maximum.t_at,
        "horizon": result.maximum.horizon,
        "step": result.maximum.step,
        "dominant_levels": dominant,
    })
    return writer


async def cmd_scan(run: RunConfig) -> ResultWriter:
    writer = ResultWriter(run.output.directory)
    results = await engine.scan(run, DWELL_THREADS)
    succeeded = [r for r in results if r['success']]
    failures = [{'d': r['d'], 'error': r['error']} for r in results if not r['success']]
    if not succeeded:
        raise NumericalError(f"every scan point failed: {failures[0]['error']}")

    header = ["d", "delta_u", "p_r_max", "t_argmax"]
    await writer.write_table("scan", header, [[r[k] for k in header] for r in succeeded], run.output.formats)
    await writer.write_manifest("scan", run.to_dict(), min(r['captured_norm'] for r in succeeded), {
        "horizon": succeeded[0]['horizon'],
        "step": succeeded[0]['step'],
        "failures": failures,
    })
    return writer


async def cmd_classical(run: RunConfig) -> ResultWriter:
    writer = ResultWriter(run.output.directory)
    quantum, trajectory, energy = engine.classical(run, run.well.d)
    series = quantum.series
    header = ["t", "x_classical", "p_classical", "energy_classical", "x_mean", "p_mean"]
    rows = [[s.t, s.x, s.p, e, xm, pm]
            for s, e, xm, pm in zip(trajectory, energy, series.x_mean, series.p_mean)]
    await writer.write_table("classical", header, rows, run.output.formats)

    x_classical = np.array([s.x for s in trajectory])
    await writer.write_manifest("classical", run.to_dict(), quantum.pipeline.captured_norm, {
        "x_mean_range": [float(series.x_mean.min()), float(series.x_mean.max())],
        "x_classical_range": [float(x_classical.min()), float(x_classical.max())],
    })
    return writer


async def cmd_plot(args) -> str:
    columns = read_columns(args.csv)
    svg = render_plot(columns, args.x, args.y, args.y2, args.hline)
    directory, name = os.path.split(os.path.abspath(args.svg))
    return await ResultWriter(directory).write_text(name, svg)


HANDLERS = {
    "eigen": (cmd_eigen, True),
    "evolve": (cmd_evolve, False),
    "scan": (cmd_scan, True),
    "classical": (cmd_classical, False),
}


def exit_code_for(error: Exception) -> int:
    if isinstance(error, (ConfigError, DomainError, PlotError)):
        return 2
    if isinstance(error, NumericalError):
        return 3
    if isinstance(error, (ResultIOError, OSError)):
        return 4
    return 1


async def run_command(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and map failures to exit codes"""
    args = build_parser().parse_args(argv)
    try:
        logger.info(f"🚀 dwell {args.command}")
        if args.command == "plot":
            await cmd_plot(args)
        else:
            handler, need_scan = HANDLERS[args.command]
            await handler(resolve_config(args, need_scan))
        return 0
    except Exception as e:
        code = exit_code_for(e)
        logger.error(f"❌ {args.command} failed: {e}")
        if code == 1:
            raise
        return code
