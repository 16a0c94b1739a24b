import time
import asyncio
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
from tqdm import tqdm

from .app_setup import create_executor
from .config import RunConfig
from .dynamics import (
    CoefficientState,
    EigenAmplitudes,
    EvolutionSettings,
    classical_energy,
    classical_trajectory,
    evolve,
    initial_coefficients,
    to_eigen_amplitudes,
    two_level_state,
)
from .hamiltonian import EigenSystem, EnergyMatrix, build_matrix, diagonalize, spectral_gaps
from .helpers import get_readable_time
from .model import PhysicalParams, QuarticCoefficients, WellShape, quartic_from_well, stationary_points
from .observables import (
    ObservableSeries,
    OverlapMatrix,
    TunnelingMaximum,
    dominant_levels,
    half_line_overlaps,
    level_weights,
    max_tunneling,
    observable_series,
    oscillation_period,
    position_matrix,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Pipeline:
    """Everything derived from one d value before time evolution"""
    d: float
    params: PhysicalParams
    well: WellShape
    coeffs: QuarticCoefficients
    h: EnergyMatrix
    es: EigenSystem
    overlaps: OverlapMatrix
    initial: CoefficientState
    amplitudes: EigenAmplitudes

    @property
    def captured_norm(self) -> float:
        return self.initial.norm


@dataclass(frozen=True, eq=False)
class EvolveResult:
    pipeline: Pipeline
    states: List[CoefficientState]
    series: ObservableSeries
    maximum: TunnelingMaximum
    period: Optional[float]


class SimulationEngine:
    def spectrum(self, run: RunConfig, d: float):
        params = run.params()
        well = run.well_shape(d)
        coeffs = quartic_from_well(params, well)
        h = build_matrix(coeffs, params, run.basis_spec())
        return params, well, coeffs, h, diagonalize(h)

    def spectrum_row(self, run: RunConfig, d: float) -> Dict[str, Any]:
        """E_nu for the reported levels, gaps and the stationary-point table"""
        params, well, _, _, es = self.spectrum(run, d)
        gaps = spectral_gaps(es)
        points = stationary_points(params, well)
        row = {"d": d}
        for nu in range(min(run.output.levels, es.dim)):
            row[f"E_{nu}"] = float(es.values[nu])
        row.update({
            "delta": gaps.delta,
            "delta_prime": gaps.delta_prime,
            "u_minus": points.u_minus,
            "u_plus": points.u_plus,
            "x_u": points.x_u,
            "u_barrier": points.u_barrier,
            "delta_u": points.delta_u,
        })
        return row

    def _two_level_initial(self, run: RunConfig, params: PhysicalParams, es: EigenSystem) -> CoefficientState:
        packet = run.packet
        i, j, a_i, a_j = packet.level_i, packet.level_j, packet.a_i, packet.a_j
        x_matrix = position_matrix(es, params)
        center = a_i ** 2 * x_matrix[i, i] + a_j ** 2 * x_matrix[j, j] + 2.0 * a_i * a_j * x_matrix[i, j]
        # eigenvector signs are a convention, so the relative sign is chosen from the packet side
        if packet.x0 != 0.0 and np.sign(center) != np.sign(packet.x0):
            a_j = -a_j
            logger.info(f"📊 Flipped a_{j} so the two-level packet starts on the x0 side")
        return two_level_state(es, i, j, a_i, a_j)

    def prepare(self, run: RunConfig, d: float) -> Pipeline:
        params, well, coeffs, h, es = self.spectrum(run, d)
        if run.packet.kind == "two_level":
            initial = self._two_level_initial(run, params, es)
        else:
            initial = initial_coefficients(run.packet_spec(), params, run.basis_spec(), well.x_s)
        return Pipeline(
            d=d,
            params=params,
            well=well,
            coeffs=coeffs,
            h=h,
            es=es,
            overlaps=half_line_overlaps(es, params, well.x_s),
            initial=initial,
            amplitudes=to_eigen_amplitudes(initial, es),
        )

    def evolve(self, run: RunConfig, d: float, times=None) -> EvolveResult:
        start = time.time()
        pipeline = self.prepare(run, d)
        settings = run.settings()
        states = evolve(pipeline.initial, pipeline.h, pipeline.es, settings, times)
        series = observable_series(states, pipeline.params, pipeline.h, pipeline.es,
                                   pipeline.overlaps, pipeline.initial)
        maximum = max_tunneling(series.t, series.p_right)
        period = oscillation_period(series.t, series.x_mean)
        logger.info(f"✅ d={d:g}: P_r^max={maximum.p_max:.6f} at t={maximum.t_at:g}, "
                    f"method {settings.method}, {get_readable_time(time.time() - start)}")
        return EvolveResult(pipeline=pipeline, states=states, series=series,
                            maximum=maximum, period=period)

    def dominant(self, pipeline: Pipeline, k: int = 2) -> List[int]:
        return dominant_levels(pipeline.amplitudes, k)

    def amplitude_rows(self, pipeline: Pipeline) -> List[List[float]]:
        weights = level_weights(pipeline.amplitudes)
        return [[nu, float(pipeline.es.values[nu]), float(weights[nu])] for nu in range(pipeline.es.dim)]

    def scan_point(self, run: RunConfig, d: float) -> Dict[str, Any]:
        """One scan row; failures come back as a result dict instead of raising"""
        try:
            result = self.evolve(run, d)
            return {
                'success': True,
                'd': d,
                'delta_u': stationary_points(result.pipeline.params, result.pipeline.well).delta_u,
                'p_r_max': result.maximum.p_max,
                't_argmax': result.maximum.t_at,
                'horizon': result.maximum.horizon,
                'step': result.maximum.step,
                'captured_norm': result.pipeline.captured_norm,
            }
        except Exception as e:
            logger.error(f"❌ Scan point d={d:g} failed: {e}")
            return {
                'success': False,
                'd': d,
                'error': f"{type(e).__name__}: {e}",
            }

    async def scan(self, run: RunConfig, cap: int = None) -> List[Dict[str, Any]]:
        """Every d value through the full pipeline, concurrently; results in input order"""
        values = list(run.scan.d)
        loop = asyncio.get_running_loop()
        executor = create_executor(len(values), cap)
        try:
            futures = [loop.run_in_executor(executor, self.scan_point, run, d) for d in values]
            with tqdm(total=len(futures), desc="scan", unit="d") as progress:
                for future in futures:
                    future.add_done_callback(lambda _: progress.update(1))
                results = await asyncio.gather(*futures)
        finally:
            executor.shutdown(wait=True)
        failed = sum(1 for r in results if not r['success'])
        logger.info(f"📊 Scan finished: {len(results) - failed} ok, {failed} failed")
        return list(results)

    def classical(self, run: RunConfig, d: float):
        """Classical (x, p) and quantum (<x>, <p>) on the same time grid"""
        dt = run.output.classical_dt
        settings = run.settings()
        count = int(np.floor(settings.t_max / dt + 1e-9))
        times = dt * np.arange(count + 1)
        quantum = self.evolve(run, d, times)
        pipeline = quantum.pipeline
        trajectory = classical_trajectory(
            run.packet.x0, run.packet.p0, pipeline.coeffs, pipeline.params,
            EvolutionSettings(t_max=settings.t_max, dt_out=dt, rel_tol=settings.rel_tol,
                              abs_tol=settings.abs_tol, integrator=settings.integrator),
            times,
        )
        energy = [classical_energy(s, pipeline.coeffs, pipeline.params) for s in trajectory]
        return quantum, trajectory, energy


engine = SimulationEngine()
