import math

import pandas as pd
import pytest

from physics.errors import ConfigError
from utils.config import RunConfig, load_config
from utils.report import header_line, write_csv, write_json


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_precedence_flag_file_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("QDSPIN_FIELD_B", "3.0")
    monkeypatch.setenv("QDSPIN_BATH_A", "0.2")
    path = _write(tmp_path / "run.env", "# 자기장\nFIELD_B=4.0\nFIELD_PHI_DEG=45\n")

    assert load_config().B == 3.0
    config = load_config(path)
    assert config.B == 4.0
    assert config.bath_a == 0.2
    assert config.chi_deg == RunConfig().chi_deg
    assert load_config(path, {'B': 5.0, 'phi_deg': None}).B == 5.0
    assert load_config(path, {'phi_deg': None}).phi_deg == 45.0


def test_angles_become_radians(tmp_path):
    path = _write(tmp_path / "run.env", "FIELD_CHI_DEG=90\nFIELD_PHI_DEG=45\n")
    field = load_config(path, use_environment=False).field_configuration()
    assert field.chi == pytest.approx(math.pi / 2)
    assert field.phi == pytest.approx(math.pi / 4)


def test_builders(tmp_path):
    path = _write(tmp_path / "run.env",
                  "TRION_MODEL=holemix\nHOLEMIX_Q=0.1\nHOLEMIX_TERMS=non_zeeman_q\n"
                  "BATH_LINEWIDTH_GHZ=1.0\nGEOMETRY_H_MIN=4\nGEOMETRY_H_MAX=5\nGEOMETRY_H_STEP=0.5\n")
    config = load_config(path, use_environment=False)
    assert config.hole_mixing().q_eff == 0.1
    assert [k.value for k in config.enabled_terms()] == ['non_zeeman_q']
    assert config.bath().optical_linewidth == pytest.approx(4.1357, rel=1e-4)
    assert list(config.h_values()) == [4.0, 4.5, 5.0]


def test_missing_file_names_path(tmp_path):
    missing = str(tmp_path / "nope.env")
    with pytest.raises(ConfigError) as err:
        load_config(missing, use_environment=False)
    assert err.value.path == missing
    assert missing in str(err.value)


@pytest.mark.parametrize("text", [
    "FIELD_BB=1\n",
    "FIELD_B=strong\n",
    "TRION_MODEL=magic\n",
    "GEOMETRY_NANOHOLE=/no/such/file.csv\n",
    "GEOMETRY_WORKERS=0\n",
    "BATH_ENFORCE_POSITIVE_A=maybe\n",
])
def test_bad_config_values(tmp_path, text):
    path = _write(tmp_path / "bad.env", text)
    with pytest.raises(ConfigError):
        load_config(path, use_environment=False)


def test_hash_tracks_physics_not_output_dir():
    base = RunConfig()
    assert base.config_hash() == RunConfig(out_dir="elsewhere").config_hash()
    assert base.config_hash() != RunConfig(B=6.0).config_hash()
    assert len(base.config_hash()) == 12


def test_csv_header_and_stability(tmp_path):
    df = pd.DataFrame({'x': [0.1, 1 / 3], 'label': ['a', 'b']})
    config = RunConfig()
    first = write_csv(df, str(tmp_path / "a" / "t.csv"), config)
    second = write_csv(df, str(tmp_path / "b" / "t.csv"), config)
    text = open(first, encoding="utf-8").read()
    assert text.splitlines()[0] == header_line(config).strip()
    assert text.splitlines()[1] == "x,label"
    assert "0.3333333333" in text
    assert open(first, 'rb').read() == open(second, 'rb').read()


def test_json_report(tmp_path):
    path = write_json({'g': 0.1234, 'nan': float('nan'), 'items': (1, 2)}, str(tmp_path / "r.json"))
    text = open(path, encoding="utf-8").read()
    assert '"g": 0.1234' in text
    assert '"nan": null' in text
