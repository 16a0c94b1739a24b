"""
Measured quantities of a double-well state.

All observables are evaluated from oscillator-basis coefficients c_n(t); states
produced by the eigen-expansion are converted to coefficients first. Ladder
operator identities give every moment in O(N):

    x = sqrt(g/2) (a^+ + a),    p = i hbar / sqrt(2g) (a^+ - a)

Averages are normalized by the state norm; P_r is the raw probability mass.
"""
import math
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .dynamics import CoefficientState, EigenAmplitudes
from .errors import DomainError
from .hamiltonian import EigenSystem, EnergyMatrix
from .model import DEFAULT_X_S, PhysicalParams, SpatialGrid, oscillator_basis
from .quadrature import half_line_rule

logger = logging.getLogger(__name__)

SERIES_COLUMNS = (
    "t", "x_mean", "p_mean", "x_var", "p_var", "xp_sym",
    "autocorr_re", "autocorr_im", "autocorr_abs2",
    "uncertainty", "p_right", "norm", "energy",
)


@dataclass(frozen=True)
class ObservableSample:
    t: float
    x_mean: float
    p_mean: float
    x2_mean: float
    p2_mean: float
    xp_sym: float
    norm: float
    energy: Optional[float] = None

    @property
    def x_var(self) -> float:
        return self.x2_mean - self.x_mean ** 2

    @property
    def p_var(self) -> float:
        return self.p2_mean - self.p_mean ** 2

    @property
    def uncertainty(self) -> float:
        return self.x_var * self.p_var


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    t: np.ndarray
    x_mean: np.ndarray
    p_mean: np.ndarray
    x2_mean: np.ndarray
    p2_mean: np.ndarray
    xp_sym: np.ndarray
    norm: np.ndarray
    autocorr: np.ndarray
    energy: np.ndarray
    p_right: np.ndarray

    @property
    def x_var(self) -> np.ndarray:
        return self.x2_mean - self.x_mean ** 2

    @property
    def p_var(self) -> np.ndarray:
        return self.p2_mean - self.p_mean ** 2

    @property
    def uncertainty(self) -> np.ndarray:
        return self.x_var * self.p_var

    def columns(self) -> Dict[str, np.ndarray]:
        """Columns in the order of the series.csv header"""
        return {
            "t": self.t,
            "x_mean": self.x_mean,
            "p_mean": self.p_mean,
            "x_var": self.x_var,
            "p_var": self.p_var,
            "xp_sym": self.xp_sym,
            "autocorr_re": self.autocorr.real,
            "autocorr_im": self.autocorr.imag,
            "autocorr_abs2": np.abs(self.autocorr) ** 2,
            "uncertainty": self.uncertainty,
            "p_right": self.p_right,
            "norm": self.norm,
            "energy": self.energy,
        }


@dataclass(frozen=True, eq=False)
class OverlapMatrix:
    D: np.ndarray


@dataclass(frozen=True)
class TwoLevelModel:
    i: int
    j: int
    a_i: float
    a_j: float

    def __post_init__(self):
        if not math.isclose(self.a_i ** 2 + self.a_j ** 2, 1.0, rel_tol=1e-9):
            raise DomainError(f"two-level model needs a_i^2 + a_j^2 = 1, got {self.a_i}, {self.a_j}")
        if self.i == self.j:
            raise DomainError("two-level model needs two distinct levels")


@dataclass(frozen=True)
class TunnelingMaximum:
    p_max: float
    t_at: float
    horizon: float
    step: float


def coefficient_matrix(states: Sequence[CoefficientState]):
    """Stack a state sequence into (times, C) with C of shape (T, N)"""
    times = np.array([s.t for s in states], dtype=float)
    return times, np.vstack([np.asarray(s.c, dtype=complex) for s in states])


def _ladder_moments(c: np.ndarray):
    """<a>, <a^2>, <a^+ a> and the norm over the last axis"""
    n = np.arange(c.shape[-1])
    conj = np.conj(c)
    norm = np.sum(np.abs(c) ** 2, axis=-1)
    lower = np.sum(np.sqrt(n[1:]) * conj[..., :-1] * c[..., 1:], axis=-1)
    lower2 = np.sum(np.sqrt(n[2:] * (n[2:] - 1)) * conj[..., :-2] * c[..., 2:], axis=-1)
    number = np.sum(n * np.abs(c) ** 2, axis=-1)
    return lower, lower2, number, norm


def _moments(c: np.ndarray, params: PhysicalParams):
    g, hbar = params.g, params.hbar
    a1, a2, number, norm = _ladder_moments(c)
    x_mean = math.sqrt(2.0 * g) * a1.real / norm
    p_mean = hbar * math.sqrt(2.0 / g) * a1.imag / norm
    x2_mean = 0.5 * g * (2.0 * a2.real + 2.0 * number + norm) / norm
    p2_mean = hbar ** 2 / (2.0 * g) * (2.0 * number + norm - 2.0 * a2.real) / norm
    xp_sym = 2.0 * hbar * a2.imag / norm
    return x_mean, p_mean, x2_mean, p2_mean, xp_sym, norm


def energy_expectation(c: np.ndarray, h: EnergyMatrix) -> np.ndarray:
    """c^+ H c over the last axis (unnormalized)"""
    hc = c @ np.asarray(h.h).T
    return np.real(np.sum(np.conj(c) * hc, axis=-1))


def expectations(state: CoefficientState, params: PhysicalParams,
                 h: Optional[EnergyMatrix] = None) -> ObservableSample:
    if state.dim < 3:
        raise DomainError(f"expectations need at least 3 coefficients, got {state.dim}")
    c = np.asarray(state.c, dtype=complex)
    x_mean, p_mean, x2_mean, p2_mean, xp_sym, norm = _moments(c, params)
    return ObservableSample(
        t=state.t,
        x_mean=float(x_mean),
        p_mean=float(p_mean),
        x2_mean=float(x2_mean),
        p2_mean=float(p2_mean),
        xp_sym=float(xp_sym),
        norm=float(norm),
        energy=None if h is None else float(energy_expectation(c, h)),
    )


def autocorrelation(state: CoefficientState, initial: CoefficientState) -> complex:
    if state.dim != initial.dim:
        raise DomainError(f"basis size mismatch: {state.dim} vs {initial.dim}")
    return complex(np.vdot(state.c, initial.c))


def wavefunction_on_grid(state: CoefficientState, params: PhysicalParams, grid: SpatialGrid) -> np.ndarray:
    phi = oscillator_basis(state.dim - 1, params, grid.x)
    return np.asarray(state.c, dtype=complex) @ phi


def eigenfunction_on_grid(es: EigenSystem, nu: int, params: PhysicalParams, grid: SpatialGrid) -> np.ndarray:
    phi = oscillator_basis(es.dim - 1, params, grid.x)
    return es.vectors[:, nu] @ phi


def half_line_overlaps(es: EigenSystem, params: PhysicalParams, x_s: float = DEFAULT_X_S) -> OverlapMatrix:
    """D_nu,lambda = integral over x > 0 of Psi_nu Psi_lambda"""
    rule = half_line_rule(params, x_s, es.dim - 1)
    phi = oscillator_basis(es.dim - 1, params, rule.nodes)
    gram = (phi * rule.weights) @ phi.T
    overlaps = es.vectors.T @ gram @ es.vectors
    overlaps = 0.5 * (overlaps + overlaps.T)
    return OverlapMatrix(D=overlaps)


def _right_probability(c: np.ndarray, es: EigenSystem, overlaps: OverlapMatrix) -> np.ndarray:
    if c.shape[-1] != es.dim or overlaps.D.shape[0] != es.dim:
        raise DomainError("state, eigensystem and overlap matrix dimensions differ")
    amplitudes = c @ es.vectors
    value = np.einsum("...i,ij,...j->...", np.conj(amplitudes), overlaps.D, amplitudes)
    residue = np.max(np.abs(np.imag(value))) if np.size(value) else 0.0
    if residue > 1e-10:
        logger.warning(f"⚠️ P_r has imaginary residue {residue:.2e}")
    return np.real(value)


def tunneling_probability(state: CoefficientState, es: EigenSystem, overlaps: OverlapMatrix) -> float:
    """
    P_r = sum a_nu^* a_lambda D_nu,lambda exp(i dE t / hbar); a(t) = V^T c(t)
    already carries the phases, so the double sum is a quadratic form in a(t).
    """
    return float(_right_probability(np.asarray(state.c, dtype=complex), es, overlaps))


def right_well_probability(state: CoefficientState, params: PhysicalParams,
                           x_max: float = 14.0, n_points: int = 4001) -> float:
    """Direct integral of |Psi(x, t)|^2 over x > 0 on a uniform grid (cross-check path)"""
    grid = SpatialGrid(0.0, x_max, n_points)
    psi = wavefunction_on_grid(state, params, grid)
    return float(simpson(np.abs(psi) ** 2, x=grid.x))


def max_tunneling(times: Sequence[float], p_right: Sequence[float]) -> TunnelingMaximum:
    times = np.asarray(times, dtype=float)
    p_right = np.asarray(p_right, dtype=float)
    if p_right.size == 0:
        raise DomainError("max_tunneling needs a non-empty series")
    k = int(np.argmax(p_right))
    step = float(times[1] - times[0]) if times.size > 1 else 0.0
    return TunnelingMaximum(p_max=float(p_right[k]), t_at=float(times[k]),
                            horizon=float(times[-1]), step=step)


def two_level_probability(model: TwoLevelModel, es: EigenSystem, overlaps: OverlapMatrix, t):
    """a_i^2 D_ii + a_j^2 D_jj + 2 Re[a_i a_j D_ij exp(i dE_ij t / hbar)]"""
    t = np.asarray(t, dtype=float)
    i, j = model.i, model.j
    d = overlaps.D
    delta_e = es.values[i] - es.values[j]
    value = (model.a_i ** 2 * d[i, i] + model.a_j ** 2 * d[j, j]
             + 2.0 * np.real(model.a_i * model.a_j * d[i, j] * np.exp(1j * delta_e * t / es.hbar)))
    return value if value.ndim else float(value)


def cd_probability(model: TwoLevelModel, es: EigenSystem, t):
    """Generalized two-level closed form 2 a_i^2 a_j^2 [1 - cos(dE_ij t / hbar)]"""
    t = np.asarray(t, dtype=float)
    delta_e = es.values[model.i] - es.values[model.j]
    value = 2.0 * model.a_i ** 2 * model.a_j ** 2 * (1.0 - np.cos(delta_e * t / es.hbar))
    return value if value.ndim else float(value)


def level_weights(a: EigenAmplitudes) -> np.ndarray:
    return np.abs(a.a) ** 2


def dominant_levels(a: EigenAmplitudes, k: int = 2) -> List[int]:
    """Indices of the k largest |a_nu|^2, largest first"""
    order = np.argsort(-level_weights(a), kind="stable")
    return [int(nu) for nu in order[:k]]


def position_matrix(es: EigenSystem, params: PhysicalParams) -> np.ndarray:
    """X_nu,lambda = <Psi_nu| x |Psi_lambda>"""
    n = np.arange(1, es.dim)
    x_osc = np.diag(math.sqrt(params.g / 2.0) * np.sqrt(n), 1)
    x_osc = x_osc + x_osc.T
    return es.vectors.T @ x_osc @ es.vectors


def position_from_amplitudes(a: EigenAmplitudes, es: EigenSystem, x_matrix: np.ndarray, t):
    """<x(t)> = sum a_nu^* a_lambda X_nu,lambda exp(i (E_nu - E_lambda) t / hbar)"""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    phased = a.a[None, :] * np.exp(-1j * np.outer(t, es.values) / es.hbar)
    value = np.real(np.einsum("ti,ij,tj->t", np.conj(phased), x_matrix, phased)) / a.norm
    return value if value.size > 1 else float(value[0])


def observable_series(states: Sequence[CoefficientState], params: PhysicalParams,
                      h: EnergyMatrix, es: EigenSystem, overlaps: OverlapMatrix,
                      initial: Optional[CoefficientState] = None) -> ObservableSeries:
    """Evaluate every observable over a state sequence, vectorized over time"""
    times, c = coefficient_matrix(states)
    reference = np.asarray((initial or states[0]).c, dtype=complex)
    x_mean, p_mean, x2_mean, p2_mean, xp_sym, norm = _moments(c, params)
    return ObservableSeries(
        t=times,
        x_mean=x_mean,
        p_mean=p_mean,
        x2_mean=x2_mean,
        p2_mean=p2_mean,
        xp_sym=xp_sym,
        norm=norm,
        autocorr=np.conj(c) @ reference,
        energy=energy_expectation(c, h),
        p_right=_right_probability(c, es, overlaps),
    )


def oscillation_period(times: Sequence[float], values: Sequence[float],
                       hysteresis: float = 0.5) -> Optional[float]:
    """
    Mean spacing of upward crossings through the series midpoint, linearly
    interpolated. A crossing only counts after the signal has dropped below the
    midpoint by `hysteresis` times the half-amplitude, so fine-structure wiggles
    near the midpoint are counted once. Returns None with fewer than two crossings.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    top, bottom = float(values.max()), float(values.min())
    mid = 0.5 * (top + bottom)
    band = hysteresis * 0.5 * (top - bottom)

    crossings = []
    armed = False
    for k in range(1, values.size):
        if values[k - 1] < mid - band:
            armed = True
        if armed and values[k - 1] < mid <= values[k]:
            fraction = (mid - values[k - 1]) / (values[k] - values[k - 1])
            crossings.append(times[k - 1] + fraction * (times[k] - times[k - 1]))
            armed = False
    if len(crossings) < 2:
        return None
    return (crossings[-1] - crossings[0]) / (len(crossings) - 1)
