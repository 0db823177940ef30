import math
from dataclasses import fields

import numpy as np
import pandas as pd
import pytest

from physics.errors import ConfigError, DomainError
from physics.envelope import (
    ALAS, CONDUCTION, DEFAULT_MATERIALS, GAAS, VALENCE, GridSettings, MaterialRecord, MaterialTable,
    NanoholeProfile, PotentialGrid, QDGeometry,
    build_potential, default_h_values, default_nanohole, design_sweep, hole_mass, load_nanohole_csv,
    material_interp, save_nanohole_csv, solve_ground_state, zero_crossing,
)
from physics.spinmodel import CONSTANTS

M_E = 0.0665


def _box_energy(n, length=10.0):
    step = length / (n + 1)
    sol = solve_ground_state(PotentialGrid.uniform((n, n, n), step, M_E))
    return sol.energy


def _box_exact(length=10.0):
    return 3 * CONSTANTS.hbar2_over_2m0 / M_E * (math.pi / length) ** 2


def test_box_oracle():
    assert _box_exact() == pytest.approx(169.64, abs=0.05)
    assert _box_energy(39) == pytest.approx(_box_exact(), rel=0.01)


def test_box_energy_converges_with_step_squared():
    # step halves: 1.0, 0.5, 0.25 nm
    energies = [_box_energy(n) for n in (9, 19, 39)]
    errors = [abs(_box_exact() - e) for e in energies]
    assert errors[0] > errors[1] > errors[2]
    assert 3.5 < errors[0] / errors[1] < 4.5
    assert 3.5 < errors[1] / errors[2] < 4.5


@pytest.mark.slow
def test_harmonic_oracle():
    hw = 50.0
    n, step = 64, 0.7
    c = (np.arange(n) - (n - 1) / 2) * step
    Z, Y, X = np.meshgrid(c, c, c, indexing='ij')
    k = hw ** 2 / (4 * CONSTANTS.hbar2_over_2m0 / M_E)
    assert k == pytest.approx(1.091, abs=1e-3)
    pot = PotentialGrid.uniform((n, n, n), step, M_E, potential=k * (X ** 2 + Y ** 2 + Z ** 2))
    sol = solve_ground_state(pot, tolerance=1e-8)
    assert sol.energy == pytest.approx(1.5 * hw, rel=0.01)


def test_solver_is_seeded_and_normalized():
    pot = PotentialGrid.uniform((12, 12, 12), 0.8, M_E)
    a = solve_ground_state(pot, seed=3)
    b = solve_ground_state(pot, seed=3)
    assert a.energy == b.energy
    assert np.sum(a.wavefunction ** 2) == pytest.approx(1.0)
    assert a.barrier_occupancy == 0.0
    with pytest.raises(DomainError):
        solve_ground_state(pot, tolerance=0.0)


def test_material_interpolation():
    assert material_interp(0.0) == GAAS
    assert material_interp(1.0) == ALAS
    rec = material_interp(0.25)
    bowing = 0.25 * 0.75 * (-0.13 + 1.31 * 0.25)
    assert rec.E_g == pytest.approx(0.75 * 1.519 + 0.25 * 3.099 - bowing)
    assert rec.m_e == pytest.approx(0.75 * 0.0665 + 0.25 * 0.15)
    assert hole_mass(GAAS) == pytest.approx(1 / 2.86)
    with pytest.raises(DomainError):
        material_interp(1.2)


def test_material_table_from_csv(tmp_path):
    names = [f.name for f in fields(MaterialRecord)]
    df = pd.DataFrame({
        'parameter': names,
        'GaAs': [getattr(GAAS, n) for n in names],
        'AlAs': [getattr(ALAS, n) for n in names],
    })
    path = tmp_path / "materials.csv"
    df.to_csv(path, index=False)
    assert MaterialTable.from_csv(str(path)) == DEFAULT_MATERIALS
    with pytest.raises(ConfigError):
        MaterialTable.from_csv(str(tmp_path / "missing.csv"))
    df.iloc[:-1].to_csv(path, index=False)
    with pytest.raises(ConfigError):
        MaterialTable.from_csv(str(path))


def test_default_nanohole_shape():
    profile = default_nanohole()
    assert profile.depth.shape == (101, 101)
    assert profile.max_depth == pytest.approx(10.0)
    assert profile.depth[50, 50] == pytest.approx(10.0)
    # rim at 35 nm from the center
    assert profile.depth[50, 50 + 35] == pytest.approx(0.0)
    with pytest.raises(DomainError):
        NanoholeProfile(np.zeros((4, 4)), 1.0)


def test_nanohole_csv(tmp_path):
    profile = default_nanohole(size=40.0, diameter=30.0)
    path = tmp_path / "hole.csv"
    save_nanohole_csv(profile, str(path))
    loaded = load_nanohole_csv(str(path))
    np.testing.assert_allclose(loaded.depth, profile.depth)
    assert loaded.pitch == pytest.approx(profile.pitch)
    with pytest.raises(ConfigError):
        load_nanohole_csv(str(tmp_path / "nope.csv"))
    pd.DataFrame({'a': [1], 'b': [2], 'c': [3]}).to_csv(path, index=False)
    with pytest.raises(ConfigError):
        load_nanohole_csv(str(path))


def test_potential_offsets():
    geom = QDGeometry(default_nanohole(), 6.0, 0.25)
    cb = build_potential(geom, CONDUCTION)
    vb = build_potential(geom, VALENCE)
    offset_c = ((-0.93 + material_interp(0.25).E_g) - (-0.80 + 1.519)) * 1e3
    # smoothing leaks a little Al into the dot center
    assert -1e-9 <= cb.potential.min() < 0.1 * offset_c
    assert cb.potential.max() == pytest.approx(offset_c, rel=1e-6)
    assert vb.potential.max() == pytest.approx(130.0, rel=1e-6)
    assert cb.steps == (0.5, 2.0, 2.0)
    assert 0.0 <= cb.barrier_weight.min() and cb.barrier_weight.max() <= 1.0
    with pytest.raises(DomainError):
        build_potential(geom, "phonon")
    with pytest.raises(DomainError):
        QDGeometry(default_nanohole(), -1.0, 0.25)


def test_failed_cells_are_recorded():
    result = design_sweep(default_nanohole(), [-1.0], [0.25])
    assert result.table.empty
    assert len(result.failures) == 1
    assert result.failures[0].is_error
    assert result.failures[0].error.startswith("DOMAIN_ERROR")


def test_zero_crossing_interpolates():
    table = pd.DataFrame({'lambda_nm': [760.0, 750.0], 'g_e_estimate': [-0.01, 0.01]})
    assert zero_crossing(table) == pytest.approx(755.0)
    with pytest.raises(DomainError):
        zero_crossing(pd.DataFrame({'lambda_nm': [750.0, 760.0], 'g_e_estimate': [0.1, 0.2]}))


def test_default_heights():
    h = default_h_values()
    assert h[0] == pytest.approx(3.0)
    assert h[-1] == pytest.approx(8.5)
    assert len(h) == 12


@pytest.mark.slow
def test_design_sweep_trends_and_zero_crossing():
    result = design_sweep(default_nanohole(), default_h_values(), [0.25], GridSettings(), workers=4)
    table = result.table
    assert not result.failures
    assert len(table) == 12
    # taller fill -> weaker confinement -> redder emission and more negative g
    assert np.all(np.diff(table['lambda_nm'].values) > 0)
    ordered = table.sort_values('lambda_nm')
    assert np.all(np.diff(ordered['g_e_estimate'].values) < 0)
    assert 745.0 <= zero_crossing(table) <= 795.0
