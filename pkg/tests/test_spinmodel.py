import math

import numpy as np
import pytest

from physics.errors import DegenerateStateError, DomainError
from physics.spinmodel import (
    CONSTANTS, FieldConfiguration, GTensor,
    electron_eigenpair, electron_hamiltonian, ghz_to_ueV, lande_g, roth_g,
    spin_eigenpair, spin_expectation, trion_hamiltonian, ueV_to_ghz, zeeman_splitting,
    bloch_vector,
)


def _random_configs(n, seed=1):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        g = GTensor(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 0.5))
        field = FieldConfiguration(rng.uniform(0.1, 12), rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        yield g, field


def test_splitting_matches_hamiltonian_gap():
    for g, field in _random_configs(1000):
        evals = np.linalg.eigvalsh(electron_hamiltonian(g, field))
        gap = evals[1] - evals[0]
        assert gap == pytest.approx(zeeman_splitting(g, field), rel=1e-10)


def test_example_splittings_at_5p8_tesla():
    field = FieldConfiguration.voigt(5.8)
    assert zeeman_splitting(GTensor(-0.1, 0.08), field) == pytest.approx(26.86, abs=0.01)
    assert zeeman_splitting(GTensor(0.2, 0.13), field) == pytest.approx(43.65, abs=0.01)


def test_eigenvectors_solve_hamiltonian():
    for g, field in _random_configs(200, seed=2):
        H = electron_hamiltonian(g, field)
        for state in electron_eigenpair(g, field):
            v = state.coefficients()
            np.testing.assert_allclose(H @ v, state.energy * v, atol=1e-9)


def test_electron_phase_follows_field_angle():
    for phi in np.linspace(0, 2 * math.pi, 9, endpoint=False):
        field = FieldConfiguration.voigt(5.0, phi)
        plus, _ = electron_eigenpair(GTensor(0.1, 0.08), field)
        assert math.cos(plus.theta - phi) == pytest.approx(1.0)
        assert plus.alpha == pytest.approx(1 / math.sqrt(2))
        # negative in-plane g shifts the phase by pi
        plus, _ = electron_eigenpair(GTensor(0.1, -0.08), field)
        assert math.cos(plus.theta - phi) == pytest.approx(-1.0)


def test_trion_phase_is_opposite():
    for phi in np.linspace(0, 2 * math.pi, 9, endpoint=False):
        field = FieldConfiguration.voigt(5.0, phi)
        plus, _ = spin_eigenpair(bloch_vector(trion_hamiltonian(GTensor(0.2, 0.13), field)))
        assert math.cos(plus.theta + phi) == pytest.approx(1.0)


def test_upper_level_spin_follows_g_sign():
    field = FieldConfiguration.voigt(5.8, 0.3)
    plus, minus = electron_eigenpair(GTensor(0.0, 0.08), field)
    assert spin_expectation(plus, field) == pytest.approx(1.0)
    assert spin_expectation(minus, field) == pytest.approx(-1.0)
    plus, _ = electron_eigenpair(GTensor(0.0, -0.08), field)
    assert spin_expectation(plus, field) == pytest.approx(-1.0)


def test_faraday_eigenstates_are_pure():
    plus, minus = electron_eigenpair(GTensor(0.1, 0.08), FieldConfiguration.faraday(5.0))
    assert plus.alpha == pytest.approx(1.0)
    assert plus.beta == pytest.approx(0.0)
    assert minus.energy == pytest.approx(-plus.energy)


def test_zero_field_is_degenerate():
    with pytest.raises(DegenerateStateError):
        electron_eigenpair(GTensor(0.1, 0.08), FieldConfiguration(0.0))
    with pytest.raises(DegenerateStateError):
        spin_expectation(electron_eigenpair(GTensor(0.1, 0.08), FieldConfiguration.faraday(1.0))[0],
                         FieldConfiguration(0.0))


def test_anisotropy_extrema_on_diagonals():
    g = GTensor(0.0, 0.1, 0.04)
    assert g.g_perp(math.pi / 4) == pytest.approx(0.12)
    assert g.g_perp(3 * math.pi / 4) == pytest.approx(0.08)


def test_field_validation():
    with pytest.raises(DomainError):
        FieldConfiguration(-1.0)
    with pytest.raises(DomainError):
        FieldConfiguration(1.0, chi=4.0)
    assert FieldConfiguration(1.0, 0.0, 3 * math.pi).phi == pytest.approx(math.pi)
    with pytest.raises(DomainError):
        GTensor(0.1, 0.1, -0.01)


def test_lande_factors():
    assert lande_g(0.5, 1, 1.5, 1.5) == pytest.approx(4.0)
    assert lande_g(0.5, 1, 1.5, 0.5) == pytest.approx(4.0 / 3.0)
    assert lande_g(0.5, 0, 0.5, 0.5) == pytest.approx(2.0)


@pytest.mark.parametrize("args", [
    (0.5, 1, 2.5, 0.5),     # J outside |L-S|..L+S
    (0.5, 1, 1.5, 0.3),     # m_J not a half-integer
    (0.5, 1, 1.5, 2.5),     # |m_J| > J
    (0.5, 1.5, 1.0, 0.0),   # non-integer L
])
def test_lande_rejects_invalid_numbers(args):
    with pytest.raises(DomainError):
        lande_g(*args)


def test_roth_gaas_value():
    assert roth_g(28.8, 1.519, 0.341) == pytest.approx(-0.317, abs=1e-3)
    with pytest.raises(DomainError):
        roth_g(28.8, 0.0, 0.341)


def test_frequency_conversion():
    assert ghz_to_ueV(1.0) == pytest.approx(4.1357, rel=1e-4)
    assert ueV_to_ghz(ghz_to_ueV(3.0)) == pytest.approx(3.0)
    assert CONSTANTS.mu_B == pytest.approx(57.88, rel=1e-4)
