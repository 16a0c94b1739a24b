"""
Asymmetric quartic double-well model.

U(x) = C (x^2 - x_s^2)^2 - d (x^3/3 - x_s^2 x),   C = m w^2 / (8 x_s^2)

together with the harmonic-oscillator basis functions it is expanded in and the
squeezed coherent Gaussian packet used as initial state. Everything here is a
pure function of immutable value objects.
"""
import math
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)

DEFAULT_X_S = 2.0 * math.sqrt(2.0)
N_MAX_SUPPORTED = 64


@dataclass(frozen=True)
class PhysicalParams:
    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "omega", "hbar"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def g(self) -> float:
        """Oscillator length squared, hbar / (m w)"""
        return self.hbar / (self.m * self.omega)


@dataclass(frozen=True)
class WellShape:
    x_s: float = DEFAULT_X_S
    d: float = 0.0

    def __post_init__(self):
        if not self.x_s > 0:
            raise DomainError(f"x_s must be positive, got {self.x_s}")


@dataclass(frozen=True)
class QuarticCoefficients:
    """U(x) = a4 x^4/4 + a3 x^3/3 + a2 x^2/2 + a1 x + a0"""
    a4: float
    a3: float
    a2: float
    a1: float
    a0: float


@dataclass(frozen=True)
class StationaryPoints:
    x_minus: float
    x_u: float
    x_plus: float
    u_minus: float
    u_barrier: float
    u_plus: float

    @property
    def delta_u(self) -> float:
        return self.u_plus - self.u_minus


@dataclass(frozen=True)
class GaussianPacketSpec:
    x0: float = -DEFAULT_X_S
    p0: float = 0.0
    mu: float = 0.1
    alpha: float = 0.0
    params: PhysicalParams = field(default_factory=PhysicalParams)

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"packet variance mu must be positive, got {self.mu}")


def critical_asymmetry(params: PhysicalParams, well: WellShape) -> float:
    """d_c = m w^2 / (2 x_s); beyond it the barrier top leaves (-x_s, x_s)"""
    return params.m * params.omega ** 2 / (2.0 * well.x_s)


def check_asymmetry(params: PhysicalParams, well: WellShape) -> None:
    d_c = critical_asymmetry(params, well)
    if not abs(well.d) < d_c:
        raise DomainError(f"asymmetry |d|={abs(well.d):g} must stay below d_c={d_c:.4f}")


def quartic_from_well(params: PhysicalParams, well: WellShape) -> QuarticCoefficients:
    check_asymmetry(params, well)
    mw2 = params.m * params.omega ** 2
    x_s2 = well.x_s ** 2
    return QuarticCoefficients(
        a4=mw2 / (2.0 * x_s2),
        a3=-well.d,
        a2=-mw2 / 2.0,
        a1=well.d * x_s2,
        a0=mw2 * x_s2 / 8.0,
    )


def potential_value(coeffs: QuarticCoefficients, x):
    x = np.asarray(x, dtype=float)
    # Horner on the expanded form
    value = ((coeffs.a4 / 4.0 * x + coeffs.a3 / 3.0) * x + coeffs.a2 / 2.0) * x + coeffs.a1
    value = value * x + coeffs.a0
    return value if value.ndim else float(value)


def factored_potential(params: PhysicalParams, well: WellShape, x):
    """The same potential written as C (x^2 - x_s^2)^2 - d (x^3/3 - x_s^2 x)"""
    x = np.asarray(x, dtype=float)
    c = params.m * params.omega ** 2 / (8.0 * well.x_s ** 2)
    value = c * (x ** 2 - well.x_s ** 2) ** 2 - well.d * (x ** 3 / 3.0 - well.x_s ** 2 * x)
    return value if value.ndim else float(value)


def potential_derivative(coeffs: QuarticCoefficients, x):
    x = np.asarray(x, dtype=float)
    value = ((coeffs.a4 * x + coeffs.a3) * x + coeffs.a2) * x + coeffs.a1
    return value if value.ndim else float(value)


def stationary_points(params: PhysicalParams, well: WellShape) -> StationaryPoints:
    coeffs = quartic_from_well(params, well)
    x_u = 2.0 * well.d * well.x_s ** 2 / (params.m * params.omega ** 2)
    # U(+-x_s) = +-2 d x_s^3 / 3 exactly, so delta_u is exactly 4 d x_s^3 / 3
    u_plus = 2.0 * well.d * well.x_s ** 3 / 3.0
    return StationaryPoints(
        x_minus=-well.x_s,
        x_u=x_u,
        x_plus=well.x_s,
        u_minus=-u_plus,
        u_barrier=potential_value(coeffs, x_u),
        u_plus=u_plus,
    )


def oscillator_basis(n_max: int, params: PhysicalParams, x) -> np.ndarray:
    """
    Harmonic-oscillator eigenfunctions phi_0..phi_{n_max} sampled at x.

    Uses the three-term recurrence on normalized Hermite functions, so nothing
    overflows for the supported range. Returns shape (n_max + 1,) + x.shape.
    """
    if n_max < 0 or n_max > N_MAX_SUPPORTED:
        raise DomainError(f"basis index must be within 0..{N_MAX_SUPPORTED}, got {n_max}")
    x = np.asarray(x, dtype=float)
    scale = math.sqrt(params.m * params.omega / params.hbar)
    xi = scale * x

    phi = np.empty((n_max + 1,) + xi.shape)
    phi[0] = math.pi ** -0.25 * np.exp(-0.5 * xi ** 2)
    if n_max >= 1:
        phi[1] = math.sqrt(2.0) * xi * phi[0]
    for n in range(1, n_max):
        phi[n + 1] = (math.sqrt(2.0 / (n + 1)) * xi * phi[n]
                      - math.sqrt(n / (n + 1)) * phi[n - 1])
    # normalization in x rather than xi
    return phi * math.sqrt(scale)


def oscillator_eigenfunction(n: int, params: PhysicalParams, x):
    value = oscillator_basis(n, params, x)[n]
    return value if value.ndim else float(value)


def packet_value(spec: GaussianPacketSpec, x):
    x = np.asarray(x, dtype=float)
    shift = x - spec.x0
    exponent = (-(1.0 - 1j * spec.alpha) / (4.0 * spec.mu) * shift ** 2
                + 1j * spec.p0 * shift / spec.params.hbar)
    value = (2.0 * math.pi * spec.mu) ** -0.25 * np.exp(exponent)
    return value if value.ndim else complex(value)


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform sampling grid in x, both ends included"""
    x_min: float = -8.0
    x_max: float = 8.0
    n_points: int = 401

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise DomainError(f"grid needs x_max > x_min, got [{self.x_min}, {self.x_max}]")
        if self.n_points < 2:
            raise DomainError(f"grid needs at least 2 points, got {self.n_points}")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @classmethod
    def from_spacing(cls, x_min: float, x_max: float, dx: float) -> "SpatialGrid":
        return cls(x_min=x_min, x_max=x_max, n_points=int(round((x_max - x_min) / dx)) + 1)
