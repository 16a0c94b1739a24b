import math
import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .model import N_MAX_SUPPORTED, PhysicalParams, QuarticCoefficients

logger = logging.getLogger(__name__)

BAND_HALF_WIDTH = 4
DEFAULT_N_MAX = 30


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class BasisSpec:
    n_max: int = DEFAULT_N_MAX
    g: float = 1.0

    def __post_init__(self):
        if not BAND_HALF_WIDTH <= self.n_max <= N_MAX_SUPPORTED:
            raise DomainError(f"n_max must be within {BAND_HALF_WIDTH}..{N_MAX_SUPPORTED}, got {self.n_max}")
        if not self.g > 0:
            raise DomainError(f"g must be positive, got {self.g}")

    @classmethod
    def for_params(cls, params: PhysicalParams, n_max: int = DEFAULT_N_MAX) -> "BasisSpec":
        return cls(n_max=n_max, g=params.g)

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True, eq=False)
class EnergyMatrix:
    h: np.ndarray
    band: int = BAND_HALF_WIDTH
    hbar: float = 1.0

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    @property
    def n_max(self) -> int:
        return self.dim - 1


@dataclass(frozen=True, eq=False)
class EigenSystem:
    values: np.ndarray
    vectors: np.ndarray  # column nu holds the basis coefficients of Psi_nu
    hbar: float = 1.0

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SpectralGaps:
    delta: float
    delta_prime: float


def build_matrix(coeffs: QuarticCoefficients, params: PhysicalParams, basis: BasisSpec) -> EnergyMatrix:
    """
    Hamiltonian H_nk = E_0n delta_nk + <phi_n|V|phi_k> in the oscillator basis,
    V = U - m w^2 x^2 / 2. Only n >= k is evaluated, the upper triangle is mirrored.
    """
    if not math.isclose(basis.g, params.g, rel_tol=1e-12):
        raise DomainError(f"basis g={basis.g} does not match hbar/(m w)={params.g}")

    g = basis.g
    hw = params.hbar * params.omega
    a4, a3, a1, a0 = coeffs.a4, coeffs.a3, coeffs.a1, coeffs.a0
    a2p = coeffs.a2 - params.m * params.omega ** 2
    half_g32 = (g / 2.0) ** 1.5
    half_g12 = (g / 2.0) ** 0.5

    h = np.zeros((basis.dim, basis.dim))
    for n in range(basis.dim):
        h[n, n] = ((n + 0.5) * hw
                   + 3.0 * a4 * g ** 2 / 16.0 * (2 * n * n + 2 * n + 1)
                   + a2p * g / 2.0 * (n + 0.5)
                   + a0)
        if n >= 1:
            h[n, n - 1] = a3 * half_g32 * n * math.sqrt(n) + a1 * half_g12 * math.sqrt(n)
        if n >= 2:
            root = math.sqrt(n * (n - 1))
            # <n|x^4|n-2> = (g/2)^2 (4n - 2) sqrt(n(n-1))
            h[n, n - 2] = a4 * g ** 2 / 8.0 * (2 * n - 1) * root + a2p * g / 4.0 * root
        if n >= 3:
            h[n, n - 3] = a3 / 3.0 * half_g32 * math.sqrt(n * (n - 1) * (n - 2))
        if n >= 4:
            h[n, n - 4] = a4 * g ** 2 / 16.0 * math.sqrt(n * (n - 1) * (n - 2) * (n - 3))

    lower = np.tril(h, -1)
    h = h + lower.T
    return EnergyMatrix(h=_frozen(h), hbar=params.hbar)


def harmonic_coefficients(params: PhysicalParams) -> QuarticCoefficients:
    """Pure oscillator U = m w^2 x^2 / 2, the exactly solvable limit"""
    return QuarticCoefficients(a4=0.0, a3=0.0, a2=params.m * params.omega ** 2, a1=0.0, a0=0.0)


def diagonalize(h: EnergyMatrix) -> EigenSystem:
    matrix = np.asarray(h.h)
    if not np.all(np.isfinite(matrix)):
        raise ConvergenceError("energy matrix contains non-finite entries")
    try:
        values, vectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"symmetric eigensolver did not converge: {e}") from e

    # fix the phase: largest-magnitude component of every vector is positive
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors = vectors * signs[None, :]

    logger.debug(f"📊 Diagonalized {h.dim}x{h.dim} matrix, E_0={values[0]:.6f}")
    return EigenSystem(values=_frozen(values), vectors=_frozen(vectors), hbar=h.hbar)


def spectral_gaps(es: EigenSystem) -> SpectralGaps:
    if es.dim < 3:
        raise DomainError(f"need at least 3 levels for gaps, got {es.dim}")
    return SpectralGaps(
        delta=float(es.values[1] - es.values[0]),
        delta_prime=float(es.values[2] - es.values[1]),
    )
