import math

import numpy as np
import pytest

from utils.errors import DomainError
from utils.model import (
    DEFAULT_X_S,
    GaussianPacketSpec,
    PhysicalParams,
    SpatialGrid,
    WellShape,
    critical_asymmetry,
    factored_potential,
    oscillator_basis,
    oscillator_eigenfunction,
    packet_value,
    potential_derivative,
    potential_value,
    quartic_from_well,
    stationary_points,
)
from utils.quadrature import line_rule

X_S = DEFAULT_X_S
UNIT = PhysicalParams()


def test_quartic_symmetric_well():
    c = quartic_from_well(UNIT, WellShape(X_S, 0.0))
    assert c.a4 == pytest.approx(1.0 / 16.0)
    assert c.a3 == 0.0
    assert c.a2 == pytest.approx(-0.5)
    assert c.a1 == 0.0
    assert c.a0 == pytest.approx(1.0)


def test_quartic_asymmetric_terms():
    c = quartic_from_well(UNIT, WellShape(X_S, -0.01))
    assert c.a3 == pytest.approx(0.01)
    assert c.a1 == pytest.approx(-0.08)


def test_quartic_rejects_asymmetry_beyond_critical():
    assert critical_asymmetry(UNIT, WellShape(X_S, 0.0)) == pytest.approx(0.1768, abs=1e-4)
    with pytest.raises(DomainError):
        quartic_from_well(UNIT, WellShape(X_S, 0.2))
    with pytest.raises(DomainError):
        quartic_from_well(UNIT, WellShape(X_S, -0.2))


def test_invalid_parameters():
    with pytest.raises(DomainError):
        PhysicalParams(m=0.0)
    with pytest.raises(DomainError):
        WellShape(x_s=-1.0)
    with pytest.raises(DomainError):
        GaussianPacketSpec(mu=0.0)


@pytest.mark.parametrize("x, expected", [(X_S, 0.0), (-X_S, 0.0), (0.0, 1.0)])
def test_symmetric_potential_values(x, expected):
    c = quartic_from_well(UNIT, WellShape(X_S, 0.0))
    assert potential_value(c, x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("d", [0.01, -0.01])
def test_potential_at_minima(d):
    c = quartic_from_well(UNIT, WellShape(X_S, d))
    assert potential_value(c, X_S) == pytest.approx(math.copysign(0.150849, d), abs=1e-6)
    assert potential_value(c, -X_S) == pytest.approx(-math.copysign(0.150849, d), abs=1e-6)


def test_expanded_and_factored_forms_agree():
    x = np.linspace(-6, 6, 241)
    for d in (0.0, 0.033, -0.066):
        well = WellShape(X_S, d)
        np.testing.assert_allclose(potential_value(quartic_from_well(UNIT, well), x),
                                   factored_potential(UNIT, well, x), rtol=1e-12, atol=1e-12)


def test_mirror_antisymmetry():
    x = np.linspace(-7, 7, 281)
    for d in (0.01, 0.05):
        plus = quartic_from_well(UNIT, WellShape(X_S, d))
        minus = quartic_from_well(UNIT, WellShape(X_S, -d))
        np.testing.assert_allclose(potential_value(plus, x), potential_value(minus, -x), atol=1e-12)


def test_derivative_vanishes_at_stationary_points():
    well = WellShape(X_S, -0.033)
    c = quartic_from_well(UNIT, well)
    points = stationary_points(UNIT, well)
    for x in (points.x_minus, points.x_u, points.x_plus):
        assert potential_derivative(c, x) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("d, delta_u", [(0.02, 0.603398), (-0.02, -0.603398), (0.066, 1.99121), (-0.066, -1.99121)])
def test_stationary_points_table(d, delta_u):
    points = stationary_points(UNIT, WellShape(X_S, d))
    assert points.delta_u == pytest.approx(delta_u, abs=1.5e-6 if abs(d) < 0.05 else 1.5e-5)
    assert points.delta_u == pytest.approx(4.0 * d * X_S ** 3 / 3.0, rel=1e-14)
    assert math.copysign(1.0, points.delta_u) == math.copysign(1.0, d)
    assert points.x_minus < points.x_u < points.x_plus


@pytest.mark.parametrize("d, barrier", [(0.0, 1.0), (0.01, 1.0064), (0.02, 1.02555), (-0.033, 1.06929),
                                        (0.04, 1.10153), (-0.05, 1.15787), (0.066, 1.27231), (-0.066, 1.27231)])
def test_barrier_height(d, barrier):
    points = stationary_points(UNIT, WellShape(X_S, d))
    decimals = len(str(barrier).split(".")[1])
    assert points.u_barrier == pytest.approx(barrier, abs=1.5 * 10.0 ** -max(decimals, 4))


def test_symmetric_stationary_points():
    points = stationary_points(UNIT, WellShape(X_S, 0.0))
    assert points.x_u == 0.0
    assert points.delta_u == 0.0


def test_ground_function_at_origin():
    assert oscillator_eigenfunction(0, UNIT, 0.0) == pytest.approx(math.pi ** -0.25, abs=1e-7)


def test_odd_functions_vanish_at_origin():
    values = oscillator_basis(31, UNIT, 0.0)
    assert np.all(values[1::2] == 0.0)


def test_basis_index_range():
    with pytest.raises(DomainError):
        oscillator_basis(65, UNIT, 0.0)
    oscillator_basis(64, UNIT, np.linspace(-12, 12, 5))


def test_basis_orthonormal_on_quadrature():
    rule = line_rule(UNIT, X_S, n_max=30)
    phi = oscillator_basis(30, UNIT, rule.nodes)
    gram = (phi * rule.weights) @ phi.T
    np.testing.assert_allclose(gram, np.eye(31), atol=1e-10)


def test_basis_orthonormal_with_other_units():
    params = PhysicalParams(m=2.0, omega=0.5, hbar=1.0)
    rule = line_rule(params, X_S, n_max=20)
    phi = oscillator_basis(20, params, rule.nodes)
    np.testing.assert_allclose((phi * rule.weights) @ phi.T, np.eye(21), atol=1e-10)


@pytest.mark.parametrize("params", [PhysicalParams(hbar=4.0), PhysicalParams(m=1.0, omega=2.0, hbar=0.5)])
def test_basis_orthonormal_when_length_scale_differs(params):
    assert params.g != 1.0
    rule = line_rule(params, X_S, n_max=30)
    phi = oscillator_basis(30, params, rule.nodes)
    np.testing.assert_allclose((phi * rule.weights) @ phi.T, np.eye(31), atol=1e-10)
    assert rule.nodes.max() >= math.sqrt(params.g * 61.0)


def test_ladder_recurrence_pointwise():
    x = np.linspace(-6, 6, 97)
    phi = oscillator_basis(31, UNIT, x)
    g = UNIT.g
    for n in range(1, 31):
        rhs = math.sqrt(g / 2.0) * (math.sqrt(n + 1) * phi[n + 1] + math.sqrt(n) * phi[n - 1])
        np.testing.assert_allclose(x * phi[n], rhs, atol=1e-9)


def test_packet_reduces_to_ground_state():
    spec = GaussianPacketSpec(x0=0.0, p0=0.0, mu=0.5, alpha=0.0)
    x = np.linspace(-5, 5, 41)
    np.testing.assert_allclose(packet_value(spec, x), oscillator_basis(0, UNIT, x)[0], atol=1e-14)


def test_packet_peak_and_norm():
    spec = GaussianPacketSpec(x0=-X_S, p0=0.0, mu=0.1, alpha=0.0)
    assert abs(packet_value(spec, spec.x0)) == pytest.approx((2 * math.pi * 0.1) ** -0.25)
    rule = line_rule(UNIT, X_S, spec)
    assert rule.integrate(np.abs(packet_value(spec, rule.nodes)) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_packet_modulus_symmetric_about_center():
    spec = GaussianPacketSpec(x0=1.3, p0=0.7, mu=0.3, alpha=0.0)
    s = np.linspace(0, 3, 31)
    np.testing.assert_allclose(np.abs(packet_value(spec, spec.x0 + s)),
                               np.abs(packet_value(spec, spec.x0 - s)), atol=1e-14)


def test_spatial_grid():
    grid = SpatialGrid.from_spacing(-10.0, 10.0, 0.02)
    assert grid.n_points == 1001
    assert grid.dx == pytest.approx(0.02)
    with pytest.raises(DomainError):
        SpatialGrid(1.0, 0.0, 10)
