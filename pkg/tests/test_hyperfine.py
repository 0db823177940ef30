import math

import numpy as np
import pytest

from physics.errors import DomainError, InconsistencyError, NumericalError
from physics.hyperfine import (
    DEFAULT_BATH, DEFAULT_SWEEP, Lineshape, MagnitudeOrder, NuclearBathParameters, SweepSettings,
    classify_lineshape, drag_sweep, fit_lorentzian_width, infer_signs, manifold_spacing,
    overhauser_shift, scan_pair, sideband_balance, simulate_labels, tdm_signs_agree,
)
from physics.optics import DOWN, UP, build_transition_set, stokes_angle
from physics.spinmodel import FieldConfiguration, GTensor


def _label(bath, spin, sweep=DEFAULT_SWEEP):
    return classify_lineshape(*scan_pair(bath, spin, sweep))


def _axis_distance(a, b):
    d = (a - b) % math.pi
    return min(d, math.pi - d)


def test_spin_along_field_drags():
    assert _label(DEFAULT_BATH, UP) is Lineshape.DRAG
    up, down = scan_pair(DEFAULT_BATH, UP)
    # locked plateau spans several linewidths
    assert np.sum(up.intensity > 0.8) * DEFAULT_SWEEP.step >= 3 * DEFAULT_BATH.optical_linewidth


def test_spin_against_field_anti_drags_with_hysteresis():
    up, down = scan_pair(DEFAULT_BATH, DOWN)
    assert classify_lineshape(up, down) is Lineshape.ANTI_DRAG
    assert not np.allclose(up.intensity[::-1], down.intensity, atol=0.1)


def test_negative_hyperfine_constant_swaps_labels():
    flipped = DEFAULT_BATH.with_a(-DEFAULT_BATH.a)
    assert _label(flipped, UP) is Lineshape.ANTI_DRAG
    assert _label(flipped, DOWN) is Lineshape.DRAG


def test_zero_feedback_is_bare_lorentzian():
    bath = DEFAULT_BATH.with_a(0.0)
    up, down = scan_pair(bath, UP)
    assert classify_lineshape(up, down) is Lineshape.NEUTRAL
    center, fwhm = fit_lorentzian_width(up)
    assert center == pytest.approx(0.0, abs=1e-6)
    assert fwhm == pytest.approx(bath.optical_linewidth, rel=0.02)


def test_up_and_down_sweeps_mirror():
    for spin in (UP, DOWN):
        up = drag_sweep(DEFAULT_BATH, spin, DEFAULT_SWEEP, "up")
        down = drag_sweep(DEFAULT_BATH, spin, DEFAULT_SWEEP, "down")
        np.testing.assert_allclose(down.omega_L, -up.omega_L)
        np.testing.assert_allclose(down.I_x_trace, -up.I_x_trace, atol=1e-12)
        np.testing.assert_allclose(down.intensity, up.intensity, atol=1e-12)


def test_sweep_is_deterministic():
    a = drag_sweep(DEFAULT_BATH, DOWN)
    b = drag_sweep(DEFAULT_BATH, DOWN)
    assert np.array_equal(a.intensity, b.intensity)
    assert np.array_equal(a.I_x_trace, b.I_x_trace)


def test_non_finite_polarization_is_reported():
    with pytest.raises(NumericalError) as err:
        drag_sweep(DEFAULT_BATH, UP, SweepSettings(initial_polarization=float('inf')))
    assert 'omega_L' in err.value.diagnostics


def test_energetics():
    assert manifold_spacing(0.5, 0.5, 0.1) == pytest.approx(0.45)
    assert manifold_spacing(-0.5, 0.5, 0.1) == pytest.approx(0.55)
    assert manifold_spacing(0.5, 0.5, 0.1, signed=True) == pytest.approx(-0.45)
    assert overhauser_shift(100.0, 0.1, UP) == pytest.approx(-5.0)
    assert overhauser_shift(100.0, 0.1, DOWN) == pytest.approx(5.0)
    # net flip rate vanishes on resonance and is odd in detuning
    assert sideband_balance(0.0, DEFAULT_BATH, UP) == pytest.approx(0.0)
    d = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(sideband_balance(d, DEFAULT_BATH, UP), -sideband_balance(-d, DEFAULT_BATH, UP))


def test_bath_validation():
    with pytest.raises(DomainError):
        NuclearBathParameters(a=-0.1)
    with pytest.raises(DomainError):
        SweepSettings(rate=0.0)
    with pytest.raises(DomainError):
        drag_sweep(DEFAULT_BATH, "sideways")
    with pytest.raises(DomainError):
        drag_sweep(DEFAULT_BATH, UP, direction="left")


@pytest.mark.parametrize("sign_e", [1, -1])
@pytest.mark.parametrize("sign_t", [1, -1])
@pytest.mark.parametrize("g_e_abs,order", [
    (0.08, MagnitudeOrder.ELECTRON_SMALLER),
    (0.2, MagnitudeOrder.ELECTRON_LARGER),
])
@pytest.mark.parametrize("phi_deg", [0.0, 45.0, 135.0])
def test_simulate_then_infer_recovers_signs(sign_e, sign_t, g_e_abs, order, phi_deg):
    phi = math.radians(phi_deg)
    g_e = GTensor(-0.1, sign_e * g_e_abs)
    g_t = GTensor(0.2, sign_t * 0.13)
    tset = build_transition_set(g_e, FieldConfiguration.voigt(5.8, phi), g_t)
    labels = simulate_labels(tset)
    angle = stokes_angle(tset.stokes[0], phi)
    # E1 축을 B 와 직접 비교한 값
    parallel = _axis_distance(angle, phi) < 1e-6
    assert infer_signs(parallel, labels, order, phi=phi) == (sign_e, sign_t)
    assert infer_signs(parallel, labels, order, phi=phi, tdm_14_angle=angle) == (sign_e, sign_t)


@pytest.mark.parametrize("phi_deg", [45.0, 135.0])
def test_dipoles_counter_rotate_with_field(phi_deg):
    phi = math.radians(phi_deg)
    # equal signs put E1 at -phi, which is perpendicular to B at these angles
    assert infer_signs(False, "DADA", phi=phi) == (1, 1)
    assert infer_signs(True, "DADA", phi=phi) == (1, -1)
    assert infer_signs(False, "ADAD", phi=phi) == (-1, -1)
    assert tdm_signs_agree(-phi, phi)
    assert not tdm_signs_agree(-phi + math.pi / 2, phi)


def test_oblique_field_leaves_relation_open():
    with pytest.raises(DomainError):
        infer_signs(True, "DADA", phi=math.radians(22.5))
    # a measured axis still decides
    assert infer_signs(True, "DADA", phi=math.radians(22.5), tdm_14_angle=math.radians(-22.5)) == (1, 1)


def test_infer_with_negative_hyperfine_constant():
    tset = build_transition_set(GTensor(-0.1, 0.08), FieldConfiguration.voigt(5.8), GTensor(0.2, 0.13))
    labels = simulate_labels(tset, DEFAULT_BATH.with_a(-0.1))
    assert labels == ("A", "D", "A", "D")
    assert infer_signs(True, labels, hyperfine_sign=-1) == (1, 1)


def test_infer_truth_table():
    assert infer_signs(True, "DADA") == (1, 1)
    assert infer_signs(False, "DADA") == (1, -1)
    assert infer_signs(True, "ADAD") == (-1, -1)
    assert infer_signs(False, "ADAD") == (-1, 1)
    assert infer_signs(True, "DDAA", MagnitudeOrder.ELECTRON_LARGER) == (1, 1)
    assert infer_signs(False, "AADD", MagnitudeOrder.ELECTRON_LARGER) == (-1, 1)


@pytest.mark.parametrize("labels,order", [
    ("DDDA", MagnitudeOrder.ELECTRON_SMALLER),
    ("DDAA", MagnitudeOrder.ELECTRON_SMALLER),
    ("DADA", MagnitudeOrder.ELECTRON_LARGER),
    ("DAD", MagnitudeOrder.ELECTRON_SMALLER),
    ("DAXA", MagnitudeOrder.ELECTRON_SMALLER),
])
def test_inconsistent_labels(labels, order):
    with pytest.raises(InconsistencyError):
        infer_signs(True, labels, order)
