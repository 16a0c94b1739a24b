"""
Time evolution of the double-well state.

Method A integrates i hbar dc/dt = H c with an adaptive embedded Runge-Kutta pair.
Method B expands the state in Hamiltonian eigenstates and attaches exact phases.
The Crank-Nicolson grid propagator is an independent oracle for tests, and the
classical trajectory is the Newtonian reference for the same initial point.
"""
import math
import logging
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import splu

from .errors import BoundaryLeakageError, DomainError, IntegrationError, PoorBasisWarning
from .hamiltonian import BasisSpec, EigenSystem, EnergyMatrix
from .model import (
    DEFAULT_X_S,
    GaussianPacketSpec,
    PhysicalParams,
    QuarticCoefficients,
    SpatialGrid,
    oscillator_basis,
    packet_value,
    potential_derivative,
    potential_value,
)
from .quadrature import line_rule

logger = logging.getLogger(__name__)

CAPTURED_NORM_FLOOR = 0.999
METHODS = ("A", "B")
INTEGRATORS = ("RK45", "DOP853")
# solve_ivp runs at the requested tolerances times these factors
SOLVER_TOLERANCE_SCALE = {"DOP853": 1e-2, "RK45": 1e-3}
SOLVER_TOLERANCE_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class CoefficientState:
    t: float
    c: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.vdot(self.c, self.c).real)

    @property
    def dim(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True, eq=False)
class EigenAmplitudes:
    a: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.vdot(self.a, self.a).real)


@dataclass(frozen=True)
class EvolutionSettings:
    t_max: float = 1000.0
    dt_out: float = 0.25
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    method: str = "B"
    integrator: str = "DOP853"

    def __post_init__(self):
        problems = []
        if not self.t_max > 0:
            problems.append(f"t_max must be positive, got {self.t_max}")
        if not self.dt_out > 0:
            problems.append(f"dt_out must be positive, got {self.dt_out}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            problems.append("integrator tolerances must be positive")
        if self.method not in METHODS:
            problems.append(f"method must be one of {METHODS}, got {self.method!r}")
        if self.integrator not in INTEGRATORS:
            problems.append(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if problems:
            raise DomainError("; ".join(problems))

    def output_times(self) -> np.ndarray:
        count = int(math.floor(self.t_max / self.dt_out + 1e-9))
        return self.dt_out * np.arange(count + 1)

    def solver_tolerances(self):
        """(rtol, atol) handed to the adaptive integrator"""
        scale = SOLVER_TOLERANCE_SCALE[self.integrator]
        return (max(self.rel_tol * scale, SOLVER_TOLERANCE_FLOOR),
                max(self.abs_tol * scale, SOLVER_TOLERANCE_FLOOR))


@dataclass(frozen=True)
class ClassicalState:
    x: float
    p: float
    t: float


@dataclass(frozen=True)
class ReferenceGrid:
    """Crank-Nicolson discretization; reflecting (hard-wall) edges"""
    x_min: float = -10.0
    x_max: float = 10.0
    dx: float = 0.02
    dt: float = 0.001
    stencil_order: int = 4
    edge_fraction: float = 0.05
    leak_tolerance: float = 1e-4

    def __post_init__(self):
        if self.stencil_order not in (2, 4):
            raise DomainError(f"stencil_order must be 2 or 4, got {self.stencil_order}")
        if not (self.dx > 0 and self.dt > 0):
            raise DomainError("grid spacing and time step must be positive")

    @property
    def spatial(self) -> SpatialGrid:
        return SpatialGrid.from_spacing(self.x_min, self.x_max, self.dx)


@dataclass(frozen=True, eq=False)
class GridEvolution:
    x: np.ndarray
    times: np.ndarray
    psi: np.ndarray  # shape (len(times), len(x))

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.psi) ** 2, axis=1) * self.dx

    def position_means(self) -> np.ndarray:
        density = np.abs(self.psi) ** 2
        return density @ self.x * self.dx / self.norms()


def initial_coefficients(spec: GaussianPacketSpec, params: PhysicalParams, basis: BasisSpec,
                         x_s: float = DEFAULT_X_S) -> CoefficientState:
    """c_n(0) = integral of phi_n(x) Psi_G(x, 0); the basis functions are real"""
    rule = line_rule(params, x_s, spec, basis.n_max)
    phi = oscillator_basis(basis.n_max, params, rule.nodes)
    packet = packet_value(spec, rule.nodes)
    c = phi @ (rule.weights * packet)
    state = CoefficientState(t=0.0, c=c)

    captured = state.norm
    if captured < CAPTURED_NORM_FLOOR:
        message = (f"only {captured:.6f} of the packet norm is captured by {basis.dim} "
                   f"basis functions; raise n_max")
        logger.warning(f"⚠️ {message}")
        warnings.warn(message, PoorBasisWarning, stacklevel=2)
    else:
        logger.debug(f"✅ Packet projected, captured norm {captured:.12f}")
    return state


def two_level_state(es: EigenSystem, i: int = 0, j: int = 1,
                    a_i: float = 1.0 / math.sqrt(2.0), a_j: float = -1.0 / math.sqrt(2.0)) -> CoefficientState:
    """Psi(x, 0) = a_i Psi_i + a_j Psi_j, the conventional two-level wavepacket"""
    if not math.isclose(a_i ** 2 + a_j ** 2, 1.0, rel_tol=1e-12):
        raise DomainError(f"two-level amplitudes must satisfy a_i^2 + a_j^2 = 1, got {a_i}, {a_j}")
    if i == j or not (0 <= i < es.dim and 0 <= j < es.dim):
        raise DomainError(f"invalid level pair ({i}, {j})")
    c = a_i * es.vectors[:, i] + a_j * es.vectors[:, j]
    return CoefficientState(t=0.0, c=c.astype(complex))


def to_eigen_amplitudes(c0: CoefficientState, es: EigenSystem) -> EigenAmplitudes:
    if c0.t != 0.0:
        raise DomainError(f"eigen amplitudes are defined from the t=0 state, got t={c0.t}")
    if c0.dim != es.vectors.shape[0]:
        raise DomainError(f"dimension mismatch: state has {c0.dim} coefficients, "
                          f"eigensystem has {es.vectors.shape[0]}")
    return EigenAmplitudes(a=es.vectors.T @ c0.c)


def evolve_spectral_a(c0: CoefficientState, h: EnergyMatrix, settings: EvolutionSettings,
                      times: Optional[Sequence[float]] = None) -> List[CoefficientState]:
    if c0.dim != h.dim:
        raise DomainError(f"dimension mismatch: state {c0.dim}, matrix {h.dim}")
    times = settings.output_times() if times is None else np.asarray(times, dtype=float)
    if float(times[-1]) <= c0.t:
        return [CoefficientState(t=c0.t, c=np.asarray(c0.c, dtype=complex))]
    generator = -1j / h.hbar * np.asarray(h.h)
    rtol, atol = settings.solver_tolerances()

    def rhs(t, c):
        return generator @ c

    solution = solve_ivp(
        rhs,
        (c0.t, float(times[-1])),
        np.asarray(c0.c, dtype=complex),
        method=settings.integrator,
        t_eval=times,
        rtol=rtol,
        atol=atol,
        first_step=settings.dt_out / 100.0,
    )
    if solution.status != 0:
        raise IntegrationError(f"method A stopped at t={solution.t[-1] if solution.t.size else c0.t}: "
                               f"{solution.message}")
    logger.debug(f"✅ Method A: {solution.nfev} rhs evaluations up to t={times[-1]}")
    return [CoefficientState(t=float(t), c=solution.y[:, k]) for k, t in enumerate(solution.t)]


def evolve_spectral_b(a: EigenAmplitudes, es: EigenSystem, settings: EvolutionSettings,
                      times: Optional[Sequence[float]] = None) -> List[CoefficientState]:
    """c_n(t) = sum_nu a_nu c_{nu,n} exp(-i E_nu t / hbar), exact at every sample"""
    if a.a.shape[0] != es.dim:
        raise DomainError(f"dimension mismatch: {a.a.shape[0]} amplitudes, {es.dim} levels")
    times = settings.output_times() if times is None else np.asarray(times, dtype=float)
    phases = np.exp(-1j * np.outer(times, es.values) / es.hbar)
    coefficients = (phases * a.a[None, :]) @ es.vectors.T
    return [CoefficientState(t=float(t), c=coefficients[k]) for k, t in enumerate(times)]


def evolve(c0: CoefficientState, h: EnergyMatrix, es: EigenSystem, settings: EvolutionSettings,
           times: Optional[Sequence[float]] = None) -> List[CoefficientState]:
    """Propagate with the method named in the settings"""
    if settings.method == "A":
        return evolve_spectral_a(c0, h, settings, times)
    return evolve_spectral_b(to_eigen_amplitudes(c0, es), es, settings, times)


def _laplacian(n_points: int, dx: float, order: int) -> sparse.csc_matrix:
    if order == 2:
        stencil = {0: -2.0, 1: 1.0}
        scale = 1.0
    else:
        stencil = {0: -30.0, 1: 16.0, 2: -1.0}
        scale = 12.0
    diagonals, offsets = [], []
    for offset, weight in stencil.items():
        for sign in ((1,) if offset == 0 else (1, -1)):
            diagonals.append(np.full(n_points - offset, weight))
            offsets.append(sign * offset)
    return sparse.diags(diagonals, offsets, format="csc") / (scale * dx ** 2)


def _edge_mass(psi: np.ndarray, dx: float, edge: int) -> float:
    density = np.abs(psi) ** 2
    return float((density[:edge].sum() + density[-edge:].sum()) * dx)


def evolve_reference_grid(spec: GaussianPacketSpec, coeffs: QuarticCoefficients,
                          settings: EvolutionSettings, grid: ReferenceGrid = ReferenceGrid(),
                          times: Optional[Sequence[float]] = None) -> GridEvolution:
    """
    Crank-Nicolson propagation of the discretized Schrodinger equation.

    The discrete Hamiltonian is real symmetric, so each Cayley step is unitary.
    Output times must be multiples of grid.dt.
    """
    params = spec.params
    x = grid.spatial.x
    dx = float(x[1] - x[0])
    kinetic = -(params.hbar ** 2) / (2.0 * params.m) * _laplacian(x.size, dx, grid.stencil_order)
    hamiltonian = kinetic + sparse.diags(potential_value(coeffs, x), 0, format="csc")
    identity = sparse.identity(x.size, dtype=complex, format="csc")
    factor = 0.5j * grid.dt / params.hbar
    implicit = splu((identity + factor * hamiltonian).tocsc())
    explicit = (identity - factor * hamiltonian).tocsr()

    times = settings.output_times() if times is None else np.asarray(times, dtype=float)
    steps = np.rint(times / grid.dt).astype(int)
    if np.any(np.abs(steps * grid.dt - times) > 1e-9 * max(1.0, float(times[-1]))):
        raise DomainError(f"output times must be multiples of the grid time step {grid.dt}")

    edge = max(1, int(round(grid.edge_fraction * x.size)))
    psi = np.asarray(packet_value(spec, x), dtype=complex)
    if _edge_mass(psi, dx, edge) > grid.leak_tolerance:
        raise BoundaryLeakageError(f"initial packet already reaches the grid edges [{grid.x_min}, {grid.x_max}]")

    snapshots = np.empty((times.size, x.size), dtype=complex)
    done = 0
    for k, target in enumerate(steps):
        while done < target:
            psi = implicit.solve(explicit @ psi)
            done += 1
        leak = _edge_mass(psi, dx, edge)
        if leak > grid.leak_tolerance:
            raise BoundaryLeakageError(f"edge mass {leak:.2e} at t={done * grid.dt:g} exceeds "
                                       f"{grid.leak_tolerance:g}; widen the grid")
        snapshots[k] = psi
    logger.debug(f"✅ Crank-Nicolson: {done} steps on {x.size} points")
    return GridEvolution(x=x, times=times, psi=snapshots)


def classical_energy(state: ClassicalState, coeffs: QuarticCoefficients, params: PhysicalParams) -> float:
    return state.p ** 2 / (2.0 * params.m) + potential_value(coeffs, state.x)


def classical_trajectory(x0: float, p0: float, coeffs: QuarticCoefficients, params: PhysicalParams,
                         settings: EvolutionSettings,
                         times: Optional[Sequence[float]] = None) -> List[ClassicalState]:
    """Newtonian motion dx/dt = p/m, dp/dt = -U'(x) with the method-A integrator"""
    times = settings.output_times() if times is None else np.asarray(times, dtype=float)
    rtol, atol = settings.solver_tolerances()

    def rhs(t, y):
        return np.array([y[1] / params.m, -potential_derivative(coeffs, y[0])])

    solution = solve_ivp(
        rhs,
        (0.0, float(times[-1])),
        np.array([x0, p0], dtype=float),
        method=settings.integrator,
        t_eval=times,
        rtol=rtol,
        atol=atol,
        first_step=settings.dt_out / 100.0,
    )
    if solution.status != 0:
        raise IntegrationError(f"classical trajectory stopped: {solution.message}")
    return [ClassicalState(x=float(xv), p=float(pv), t=float(t))
            for xv, pv, t in zip(solution.y[0], solution.y[1], solution.t)]
