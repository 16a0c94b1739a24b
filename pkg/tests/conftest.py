from functools import lru_cache

import pytest

from utils.config import RunConfig, apply_value
from utils.hamiltonian import BasisSpec, build_matrix, diagonalize
from utils.model import DEFAULT_X_S, GaussianPacketSpec, PhysicalParams, WellShape, quartic_from_well

X_S = DEFAULT_X_S
UNIT = PhysicalParams()


@lru_cache(maxsize=None)
def _spectrum(d: float, n_max: int):
    coeffs = quartic_from_well(UNIT, WellShape(X_S, d))
    h = build_matrix(coeffs, UNIT, BasisSpec(n_max=n_max, g=UNIT.g))
    return coeffs, h, diagonalize(h)


@pytest.fixture
def params():
    return UNIT


@pytest.fixture
def spectrum():
    """(coeffs, h, es) for the default well at asymmetry d"""
    def build(d: float = 0.0, n_max: int = 30):
        return _spectrum(float(d), n_max)
    return build


@pytest.fixture
def left_packet():
    def build(mu: float = 0.1, x0: float = -X_S, p0: float = 0.0, alpha: float = 0.0):
        return GaussianPacketSpec(x0=x0, p0=p0, mu=mu, alpha=alpha, params=UNIT)
    return build


@pytest.fixture
def run_config():
    """RunConfig with `section.key=value` overrides applied"""
    def build(**overrides):
        run = RunConfig()
        for key, value in overrides.items():
            apply_value(run, key.replace("__", "."), str(value))
        return run
    return build
