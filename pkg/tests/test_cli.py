import math

import numpy as np
import pandas as pd
import pytest

from qd_cli import run


def _read(path):
    return pd.read_csv(path, comment='#')


def _run(tmp_path, *argv):
    return run(list(argv) + ['--out', str(tmp_path), '--quiet'])


def test_transitions_example(tmp_path):
    code = _run(tmp_path, 'transitions', '--B', '5.8', '--chi-deg', '90', '--phi-deg', '0',
                '--ge', '0.08', '--gt', '0.13')
    assert code == 0
    df = _read(tmp_path / 'transitions.csv')
    assert list(df['transition']) == ['E1', 'E2', 'E3', 'E4']
    e = df['energy_ueV'].values
    assert e[1] - e[0] == pytest.approx(26.86, abs=0.01)
    assert e[2] - e[0] == pytest.approx(43.65, abs=0.01)
    first = (tmp_path / 'transitions.csv').read_text(encoding='utf-8').splitlines()[0]
    assert first.startswith('# qd-spin-optics 0.1.0 config=')


def test_help_exits_zero(capsys):
    assert run(['--help']) == 0
    assert 'usage' in capsys.readouterr().out


def test_usage_errors_exit_two(capsys):
    assert run(['teleport']) == 2
    assert run(['transitions', '--B', 'lots']) == 2


def test_missing_config_exits_two(tmp_path, capsys):
    missing = str(tmp_path / 'absent.env')
    assert _run(tmp_path, 'transitions', '--config', missing) == 2
    err = capsys.readouterr().err
    assert 'CONFIG_ERROR' in err
    assert missing in err


def test_model_failure_exits_one(tmp_path, capsys):
    assert _run(tmp_path, 'infer-signs', '--labels', 'D,D,D,A', '--tdm14', 'parallel') == 1
    assert 'INCONSISTENT_LABELS' in capsys.readouterr().err
    # zero field has no defined eigenstates
    assert _run(tmp_path, 'transitions', '--B', '0') == 1


def test_infer_signs_from_labels(tmp_path):
    assert _run(tmp_path, 'infer-signs', '--labels', 'A,D,A,D', '--tdm14', 'perpendicular') == 0
    row = _read(tmp_path / 'infer_signs.csv').iloc[0]
    assert (row['sign_g_e'], row['sign_g_t']) == (-1, 1)


def test_infer_signs_simulated(tmp_path):
    assert _run(tmp_path, 'infer-signs', '--ge', '-0.08', '--gt', '0.13') == 0
    row = _read(tmp_path / 'infer_signs.csv').iloc[0]
    assert row['labels'] == 'ADAD'
    assert (row['sign_g_e'], row['sign_g_t']) == (-1, 1)


def test_infer_signs_at_45_degrees(tmp_path):
    # E1 sits at -45° for equal signs, perpendicular to B at +45°
    assert _run(tmp_path, 'infer-signs', '--phi-deg', '45', '--ge', '0.08', '--gt', '0.13') == 0
    row = _read(tmp_path / 'infer_signs.csv').iloc[0]
    assert not row['tdm14_parallel']
    assert (row['sign_g_e'], row['sign_g_t']) == (1, 1)
    assert _run(tmp_path, 'infer-signs', '--phi-deg', '135', '--labels', 'D,A,D,A', '--tdm14', 'perpendicular') == 0
    row = _read(tmp_path / 'infer_signs.csv').iloc[0]
    assert (row['sign_g_e'], row['sign_g_t']) == (1, 1)


def test_infer_signs_oblique_flag_fails(tmp_path, capsys):
    assert _run(tmp_path, 'infer-signs', '--phi-deg', '22.5', '--labels', 'D,A,D,A', '--tdm14', 'parallel') == 1
    assert 'DOMAIN_ERROR' in capsys.readouterr().err
    assert _run(tmp_path, 'infer-signs', '--phi-deg', '22.5', '--labels', 'D,A,D,A',
                '--tdm14-angle-deg', '-22.5') == 0


def test_polmap(tmp_path):
    assert _run(tmp_path, 'polmap', '--alpha-step-deg', '10', '--phi-step-deg', '45') == 0
    df = _read(tmp_path / 'polmap.csv')
    assert len(df) == 4 * 4 * 18
    assert df['rate_norm'].max() == pytest.approx(1.0)


def test_dragscan(tmp_path, capsys):
    assert _run(tmp_path, 'dragscan', '--transition', '1') == 0
    assert 'lineshape D' in capsys.readouterr().out
    df = _read(tmp_path / 'dragscan_E1.csv')
    assert set(df['direction']) == {'up', 'down'}


def test_stokes_areas(tmp_path):
    assert _run(tmp_path, 'stokes-areas', '--a1', '17', '--a2', '3') == 0
    row = _read(tmp_path / 'stokes_areas.csv').iloc[0]
    assert row['s_lower_bound'] == pytest.approx(0.85)


def test_fss_from_file(tmp_path):
    beta = np.arange(0, 180, 5.0)
    series = tmp_path / 'series.csv'
    pd.DataFrame({'angle_deg': beta, 'value': 6.2 * np.cos(2 * np.radians(beta - 30))}).to_csv(series, index=False)
    assert _run(tmp_path, 'fss', '--series', str(series)) == 0
    row = _read(tmp_path / 'fss.csv').iloc[0]
    assert row['fss_ueV'] == pytest.approx(12.4)
    assert row['eta_deg'] == pytest.approx(30.0)


def test_extract_synthetic(tmp_path):
    assert _run(tmp_path, 'extract', '--synthetic', '--seed', '7', '--ge', '0.08', '--gt', '0.13') == 0
    assert (tmp_path / 'extract.json').exists()
    df = _read(tmp_path / 'extract.csv')
    assert len(df) == 2


def test_extract_needs_input(tmp_path):
    assert _run(tmp_path, 'extract') == 2


def test_outputs_are_byte_identical(tmp_path):
    first, second = tmp_path / 'one', tmp_path / 'two'
    for out in (first, second):
        assert run(['extract', '--synthetic', '--seed', '3', '--out', str(out), '--quiet']) == 0
        assert run(['polmap', '--out', str(out), '--quiet']) == 0
    for name in ('extract.csv', 'extract.json', 'polmap.csv'):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_config_file_drives_run(tmp_path):
    config = tmp_path / 'qd.env'
    config.write_text("FIELD_B=6.0\nFIELD_PHI_DEG=30\nELECTRON_GPERP=0.1\nTRION_GPERP=0.2\n", encoding='utf-8')
    assert _run(tmp_path, 'transitions', '--config', str(config)) == 0
    e = _read(tmp_path / 'transitions.csv')['energy_ueV'].values
    assert e[3] - e[0] == pytest.approx(0.3 * 57.88 * 6.0, rel=1e-3)
    assert not math.isnan(_read(tmp_path / 'transitions.csv')['lab_angle_rad'].iloc[0])
