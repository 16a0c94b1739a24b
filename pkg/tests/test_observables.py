import math
from dataclasses import fields

import numpy as np
import pytest
from scipy.integrate import simpson

from utils.dynamics import (
    CoefficientState,
    EvolutionSettings,
    evolve_spectral_b,
    initial_coefficients,
    to_eigen_amplitudes,
)
from utils.errors import DomainError
from utils.hamiltonian import BasisSpec, build_matrix, diagonalize
from utils.model import (
    DEFAULT_X_S,
    GaussianPacketSpec,
    PhysicalParams,
    SpatialGrid,
    WellShape,
    packet_value,
    quartic_from_well,
)
from utils.observables import (
    SERIES_COLUMNS,
    TwoLevelModel,
    autocorrelation,
    cd_probability,
    dominant_levels,
    eigenfunction_on_grid,
    expectations,
    half_line_overlaps,
    level_weights,
    max_tunneling,
    observable_series,
    oscillation_period,
    position_from_amplitudes,
    position_matrix,
    right_well_probability,
    tunneling_probability,
    two_level_probability,
    wavefunction_on_grid,
)

X_S = DEFAULT_X_S
UNIT = PhysicalParams()
BASIS = BasisSpec(n_max=30)
WIDE = BasisSpec(n_max=60)


def _series(spectrum, d, mu=0.1, t_max=1000.0, dt=0.25, x0=-X_S):
    _, h, es = spectrum(d)
    c0 = initial_coefficients(GaussianPacketSpec(x0=x0, mu=mu), UNIT, BASIS)
    states = evolve_spectral_b(to_eigen_amplitudes(c0, es), es, EvolutionSettings(t_max=t_max, dt_out=dt))
    return states, observable_series(states, UNIT, h, es, half_line_overlaps(es, UNIT), c0)


def test_initial_packet_moments():
    c0 = initial_coefficients(GaussianPacketSpec(x0=-X_S, mu=0.1), UNIT, WIDE)
    sample = expectations(c0, UNIT)
    assert sample.x_mean == pytest.approx(-X_S, abs=1e-6)
    assert sample.p_mean == pytest.approx(0.0, abs=1e-8)
    assert sample.x_var == pytest.approx(0.1, abs=1e-6)
    assert sample.p_var == pytest.approx(2.5, abs=1e-5)
    assert sample.xp_sym == pytest.approx(2.0 * sample.x_mean * sample.p_mean, abs=1e-8)
    assert sample.uncertainty == pytest.approx(0.25, abs=1e-6)


def test_squeezed_packet_covariance():
    spec = GaussianPacketSpec(x0=-1.0, p0=0.4, mu=0.3, alpha=0.5)
    sample = expectations(initial_coefficients(spec, UNIT, WIDE), UNIT)
    assert sample.x_mean == pytest.approx(-1.0, abs=1e-8)
    assert sample.p_mean == pytest.approx(0.4, abs=1e-8)
    assert sample.x_var == pytest.approx(0.3, abs=1e-8)
    covariance = sample.xp_sym - 2.0 * sample.x_mean * sample.p_mean
    assert covariance == pytest.approx(0.5, abs=1e-8)
    assert sample.uncertainty >= 0.25 - 1e-9


def test_expectations_need_three_coefficients():
    with pytest.raises(DomainError):
        expectations(CoefficientState(t=0.0, c=np.ones(2, dtype=complex)), UNIT)


def test_energy_of_eigenstate(spectrum):
    _, h, es = spectrum(-0.01)
    sample = expectations(CoefficientState(t=0.0, c=es.vectors[:, 2].astype(complex)), UNIT, h)
    assert sample.energy == pytest.approx(es.values[2], abs=1e-12)
    assert expectations(CoefficientState(t=0.0, c=es.vectors[:, 2].astype(complex)), UNIT).energy is None
    # autocorrelation and P_r need a reference state and overlaps; they live on the series only
    assert [f.name for f in fields(sample)] == ["t", "x_mean", "p_mean", "x2_mean", "p2_mean", "xp_sym", "norm", "energy"]


def test_stationary_state_moments(spectrum):
    _, _, es = spectrum(0.033)
    a = to_eigen_amplitudes(CoefficientState(t=0.0, c=es.vectors[:, 4].astype(complex)), es)
    samples = [expectations(s, UNIT) for s in evolve_spectral_b(a, es, EvolutionSettings(), [0.0, 50.0, 333.0])]
    for sample in samples:
        assert sample.p_mean == pytest.approx(0.0, abs=1e-12)
        assert sample.x_mean == pytest.approx(samples[0].x_mean, abs=1e-12)


def test_autocorrelation_at_zero(left_packet):
    c0 = initial_coefficients(left_packet(0.1), UNIT, BASIS)
    assert autocorrelation(c0, c0) == pytest.approx(c0.norm, abs=1e-14)
    with pytest.raises(DomainError):
        autocorrelation(c0, CoefficientState(t=0.0, c=np.ones(5, dtype=complex)))


def test_wavefunction_reproduces_packet():
    spec = GaussianPacketSpec(x0=-X_S, mu=0.5)
    c0 = initial_coefficients(spec, UNIT, BASIS)
    grid = SpatialGrid(-8.0, 8.0, 321)
    np.testing.assert_allclose(wavefunction_on_grid(c0, UNIT, grid), packet_value(spec, grid.x), atol=1e-6)


def test_wavefunction_norm_on_grid(left_packet):
    c0 = initial_coefficients(left_packet(0.1), UNIT, BASIS)
    grid = SpatialGrid(-12.0, 12.0, 4801)
    density = np.abs(wavefunction_on_grid(c0, UNIT, grid)) ** 2
    assert simpson(density, x=grid.x) == pytest.approx(c0.norm, abs=1e-6)


def test_symmetric_eigenfunction_parity(spectrum):
    _, _, es = spectrum(0.0)
    grid = SpatialGrid(-7.0, 7.0, 281)
    for nu in range(6):
        density = np.abs(eigenfunction_on_grid(es, nu, UNIT, grid)) ** 2
        np.testing.assert_allclose(density, density[::-1], atol=1e-8)


def test_overlaps_symmetric_well(spectrum):
    _, _, es = spectrum(0.0)
    overlaps = half_line_overlaps(es, UNIT)
    np.testing.assert_array_equal(overlaps.D, overlaps.D.T)
    np.testing.assert_allclose(np.diag(overlaps.D)[:20], 0.5, atol=1e-8)


@pytest.mark.parametrize("hbar", [2.0, 4.0])
def test_overlaps_symmetric_well_other_units(hbar):
    params = PhysicalParams(hbar=hbar)
    coeffs = quartic_from_well(params, WellShape(X_S, 0.0))
    es = diagonalize(build_matrix(coeffs, params, BasisSpec.for_params(params, 30)))
    overlaps = half_line_overlaps(es, params)
    np.testing.assert_allclose(np.diag(overlaps.D)[:20], 0.5, atol=1e-8)


@pytest.mark.parametrize("d", [0.01, 0.033, 0.066])
def test_overlaps_mirror_complement(spectrum, d):
    plus = np.diag(half_line_overlaps(spectrum(d)[2], UNIT).D)
    minus = np.diag(half_line_overlaps(spectrum(-d)[2], UNIT).D)
    np.testing.assert_allclose((plus + minus)[:20], 1.0, atol=1e-8)
    assert np.all((plus[:20] >= 0) & (plus[:20] <= 1))


def test_ground_state_sits_in_lower_well(spectrum):
    overlaps = half_line_overlaps(spectrum(-0.033)[2], UNIT)
    assert overlaps.D[0, 0] > 0.9


def test_tunneling_probability_starts_left(spectrum, left_packet):
    _, _, es = spectrum(0.0)
    c0 = initial_coefficients(left_packet(0.1), UNIT, BASIS)
    assert tunneling_probability(c0, es, half_line_overlaps(es, UNIT)) < 0.01


@pytest.mark.parametrize("d", [0.0, -0.033])
def test_eigenbasis_and_grid_probability_agree(spectrum, left_packet, d):
    _, _, es = spectrum(d)
    overlaps = half_line_overlaps(es, UNIT)
    c0 = initial_coefficients(left_packet(0.1), UNIT, BASIS)
    states = evolve_spectral_b(to_eigen_amplitudes(c0, es), es, EvolutionSettings(), [0.0, 31.0, 131.0, 400.0])
    for state in states:
        direct = right_well_probability(state, UNIT)
        assert tunneling_probability(state, es, overlaps) == pytest.approx(direct, abs=1e-6)


def test_density_transferred_at_half_period(spectrum, left_packet):
    _, _, es = spectrum(0.0)
    c0 = initial_coefficients(left_packet(0.1), UNIT, BASIS)
    state = evolve_spectral_b(to_eigen_amplitudes(c0, es), es, EvolutionSettings(), [131.0])[0]
    assert tunneling_probability(state, es, half_line_overlaps(es, UNIT)) > 0.5


def test_max_tunneling():
    maximum = max_tunneling([0.0, 0.5, 1.0], [0.3, 0.3, 0.3])
    assert maximum.p_max == 0.3
    maximum = max_tunneling([0.0, 0.5, 1.0, 1.5], [0.1, 0.7, 0.2, 0.6])
    assert (maximum.p_max, maximum.t_at, maximum.horizon, maximum.step) == (0.7, 0.5, 1.5, 0.5)
    with pytest.raises(DomainError):
        max_tunneling([], [])


def test_two_level_one_level_limits(spectrum):
    _, _, es = spectrum(-0.01)
    overlaps = half_line_overlaps(es, UNIT)
    model = TwoLevelModel(i=1, j=0, a_i=1.0, a_j=0.0)
    t = np.linspace(0.0, 500.0, 201)
    np.testing.assert_allclose(two_level_probability(model, es, overlaps, t), overlaps.D[1, 1], atol=1e-15)
    assert np.all(cd_probability(model, es, t) == 0.0)
    assert overlaps.D[1, 1] > 1e-6


def test_two_level_model_validation():
    with pytest.raises(DomainError):
        TwoLevelModel(i=0, j=1, a_i=1.0, a_j=1.0)
    with pytest.raises(DomainError):
        TwoLevelModel(i=1, j=1, a_i=1.0, a_j=0.0)


def test_two_level_periods(spectrum):
    t = np.arange(0.0, 1000.25, 0.25)
    _, _, es = spectrum(0.0)
    half = 1.0 / math.sqrt(2.0)
    p = two_level_probability(TwoLevelModel(0, 1, half, half), es, half_line_overlaps(es, UNIT), t)
    assert oscillation_period(t, p) == pytest.approx(262.0, rel=0.03)

    _, _, es = spectrum(-0.033)
    p = two_level_probability(TwoLevelModel(1, 2, half, half), es, half_line_overlaps(es, UNIT), t)
    assert oscillation_period(t, p) == pytest.approx(59.382, rel=0.01)


def test_cordes_das_form(spectrum):
    _, _, es = spectrum(0.0)
    half = 1.0 / math.sqrt(2.0)
    model = TwoLevelModel(0, 1, half, half)
    assert cd_probability(model, es, 0.0) == 0.0
    delta = es.values[1] - es.values[0]
    assert cd_probability(model, es, math.pi / delta) == pytest.approx(1.0, abs=1e-12)


def test_level_weights_and_dominance(spectrum, left_packet):
    for d, expected in ((0.0, {0, 1}), (-0.033, {1, 2})):
        _, _, es = spectrum(d)
        a = to_eigen_amplitudes(initial_coefficients(left_packet(0.5), UNIT, BASIS), es)
        assert set(dominant_levels(a, 2)) == expected
        assert level_weights(a).sum() == pytest.approx(a.norm, abs=1e-14)
    _, _, es = spectrum(-0.01)
    a = to_eigen_amplitudes(initial_coefficients(left_packet(0.5), UNIT, BASIS), es)
    assert dominant_levels(a, 1) == [1]
    _, _, es = spectrum(0.033)
    a = to_eigen_amplitudes(initial_coefficients(left_packet(0.5), UNIT, BASIS), es)
    assert dominant_levels(a, 1) == [0]


def test_position_from_amplitudes_matches_coefficient_route(spectrum, left_packet):
    _, _, es = spectrum(-0.02)
    c0 = initial_coefficients(left_packet(0.3), UNIT, BASIS)
    a = to_eigen_amplitudes(c0, es)
    times = [0.0, 12.5, 80.0]
    states = evolve_spectral_b(a, es, EvolutionSettings(), times)
    via_eigenbasis = position_from_amplitudes(a, es, position_matrix(es, UNIT), times)
    via_coefficients = [expectations(s, UNIT).x_mean for s in states]
    np.testing.assert_allclose(via_eigenbasis, via_coefficients, atol=1e-10)


def test_period_extraction_ignores_wiggles():
    t = np.arange(0.0, 1000.0, 0.25)
    signal = np.cos(2 * math.pi * t / 100.0) + 0.2 * np.sin(2 * math.pi * t / 3.1)
    assert oscillation_period(t, signal) == pytest.approx(100.0, rel=0.02)
    assert oscillation_period(t[:100], np.cos(2 * math.pi * t[:100] / 100.0)) is None


def test_series_columns(spectrum):
    _, series = _series(spectrum, 0.0, t_max=10.0)
    columns = series.columns()
    assert tuple(columns) == SERIES_COLUMNS
    assert all(len(v) == 41 for v in columns.values())
    assert columns["autocorr_abs2"][0] == pytest.approx(series.norm[0] ** 2, abs=1e-14)


@pytest.fixture(scope="module")
def symmetric_run():
    coeffs = quartic_from_well(UNIT, WellShape(X_S, 0.0))
    h = build_matrix(coeffs, UNIT, BASIS)
    es = diagonalize(h)
    c0 = initial_coefficients(GaussianPacketSpec(x0=-X_S, mu=0.1), UNIT, BASIS)
    states = evolve_spectral_b(to_eigen_amplitudes(c0, es), es, EvolutionSettings())
    return observable_series(states, UNIT, h, es, half_line_overlaps(es, UNIT), c0)


def test_series_invariants(symmetric_run):
    s = symmetric_run
    assert np.all(s.x2_mean >= s.x_mean ** 2)
    assert np.all(s.p2_mean >= s.p_mean ** 2)
    assert np.all(s.uncertainty >= 0.25 - 1e-9)
    assert np.all((s.p_right >= -1e-12) & (s.p_right <= s.norm + 1e-12))
    assert np.all(np.abs(s.autocorr) <= 1.0 + 1e-12)
    assert np.abs(s.energy - s.energy[0]).max() <= 1e-10
    assert np.abs(s.norm - s.norm[0]).max() <= 1e-12


def test_autocorrelation_revival(symmetric_run):
    s = symmetric_run
    overlap = np.abs(s.autocorr) ** 2
    revival = overlap[(s.t > 230) & (s.t < 290)].max()
    transferred = overlap[(s.t > 100) & (s.t < 160)].max()
    assert revival > 0.4
    assert revival > 3.0 * transferred
    assert oscillation_period(s.t, s.x_mean) == pytest.approx(262.0, rel=0.03)


def test_uncertainty_oscillates_at_twice_the_tunneling_frequency(symmetric_run):
    s = symmetric_run
    window = 80  # 20 time units smooths the intra-well breathing
    smooth = np.convolve(s.uncertainty, np.ones(window) / window, mode="valid")
    t = s.t[window // 2: window // 2 + smooth.size]
    period = oscillation_period(t, smooth)
    delta = 0.023923
    assert 2 * math.pi / period == pytest.approx(2 * delta, rel=0.05)


def test_mirrored_packet_mirrors_position(spectrum):
    _, left = _series(spectrum, 0.0, t_max=200.0, dt=1.0)
    _, right = _series(spectrum, 0.0, t_max=200.0, dt=1.0, x0=X_S)
    np.testing.assert_allclose(right.x_mean, -left.x_mean, atol=1e-6)


def test_resonant_state_has_larger_uncertainty(spectrum):
    _, resonant = _series(spectrum, -0.033)
    _, detuned = _series(spectrum, -0.01)
    assert resonant.uncertainty.mean() > detuned.uncertainty.mean()
