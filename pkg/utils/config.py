"""
Run configuration.

Config files are flat KEY=value text (dotenv syntax) with section prefixes:

    # 자기장
    FIELD_B=5.8
    FIELD_CHI_DEG=90
    FIELD_PHI_DEG=0
    # 전자 / 트라이온 g-텐서
    ELECTRON_GPERP=0.08
    TRION_GPERP=0.13
    BATH_A=0.1

Every key can also come from the environment as QDSPIN_<KEY> (a .env file in the
working directory is loaded first). Precedence: CLI flag > config file >
environment > built-in default.
"""

import os
import math
import hashlib
import logging
from dataclasses import dataclass, asdict, fields, replace
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from dotenv import load_dotenv, dotenv_values

from physics.errors import ConfigError
from physics.spinmodel import FieldConfiguration, GTensor, ghz_to_ueV
from physics.holemix import HoleMixingParameters, parse_kinds
from physics.hyperfine import NuclearBathParameters, SweepSettings
from physics.envelope import (
    GridSettings, MaterialTable, NanoholeProfile, DEFAULT_MATERIALS,
    default_nanohole, load_nanohole_csv,
)

logger = logging.getLogger(__name__)

ENV_PREFIX = "QDSPIN_"


def _bool(value: str) -> bool:
    v = str(value).strip().lower()
    if v in ('1', 'true', 'yes', 'on'):
        return True
    if v in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"not a boolean: {value!r}")


@dataclass(frozen=True)
class RunConfig:
    # field
    B: float = 5.8
    chi_deg: float = 90.0
    phi_deg: float = 0.0
    # electron g-tensor
    ge_z: float = -0.1
    ge_perp: float = 0.08
    dge_perp: float = 0.0
    # trion: 'gtensor' uses the TRION_* values, 'holemix' the HOLEMIX_* ones
    trion_model: str = "gtensor"
    gt_z: float = 0.2
    gt_perp: float = 0.13
    dgt_perp: float = 0.0
    kappa: float = 1.28
    q_eff: float = 0.12
    t_eff: float = 0.0
    delta_lh_ghz: float = 750.0
    mixing_terms: str = "third_order_zeeman,non_zeeman_q,hh_lh_t"
    omega_center: float = 0.0
    # nuclear bath and laser sweep
    bath_a: float = 0.1
    bath_gamma_n_b: float = 0.5
    bath_relax_rate: float = 1.5
    bath_sideband_rate: float = 800.0
    bath_linewidth_ghz: float = 0.72
    bath_enforce_positive_a: bool = True
    sweep_range: float = 35.0
    sweep_rate: float = 1.0
    sweep_step: float = 0.02
    # envelope sweep
    nanohole_path: str = ""
    materials_path: str = ""
    al_fraction: float = 0.25
    h_min: float = 3.0
    h_max: float = 8.5
    h_step: float = 0.5
    interface_sigma: float = 1.5
    lateral_step: float = 2.0
    vertical_step: float = 0.5
    binding_mev: float = 0.0
    workers: int = 1
    # output
    out_dir: str = "out"
    seed: int = 0

    def config_hash(self) -> str:
        # the output location does not change results
        lines = sorted(f"{k}={v!r}" for k, v in asdict(self).items() if k != 'out_dir')
        return hashlib.sha256("\n".join(lines).encode('utf-8')).hexdigest()[:12]

    # builders ---------------------------------------------------------------

    def field_configuration(self) -> FieldConfiguration:
        return FieldConfiguration.from_degrees(self.B, self.chi_deg, self.phi_deg)

    def electron_g(self) -> GTensor:
        return GTensor(self.ge_z, self.ge_perp, self.dge_perp)

    def trion_g(self) -> GTensor:
        return GTensor(self.gt_z, self.gt_perp, self.dgt_perp)

    def hole_mixing(self) -> HoleMixingParameters:
        return HoleMixingParameters(self.kappa, self.q_eff, self.t_eff, ghz_to_ueV(self.delta_lh_ghz))

    def enabled_terms(self):
        return parse_kinds([t for t in self.mixing_terms.split(',') if t.strip()])

    def bath(self) -> NuclearBathParameters:
        return NuclearBathParameters(
            a=self.bath_a, gamma_n_B=self.bath_gamma_n_b, relax_rate=self.bath_relax_rate,
            sideband_rate=self.bath_sideband_rate, optical_linewidth=ghz_to_ueV(self.bath_linewidth_ghz),
            enforce_positive_a=self.bath_enforce_positive_a,
        )

    def sweep(self) -> SweepSettings:
        return SweepSettings(self.sweep_range, self.sweep_rate, self.sweep_step)

    def grid(self) -> GridSettings:
        return GridSettings(self.lateral_step, self.vertical_step)

    def h_values(self) -> np.ndarray:
        if self.h_step <= 0 or self.h_max < self.h_min:
            raise ConfigError(f"invalid h range {self.h_min}..{self.h_max} step {self.h_step}")
        n = int(math.floor((self.h_max - self.h_min) / self.h_step + 1e-9)) + 1
        return self.h_min + self.h_step * np.arange(n)

    def materials(self) -> MaterialTable:
        return MaterialTable.from_csv(self.materials_path) if self.materials_path else DEFAULT_MATERIALS

    def nanohole(self) -> NanoholeProfile:
        return load_nanohole_csv(self.nanohole_path) if self.nanohole_path else default_nanohole()


# config key -> RunConfig attribute
CONFIG_KEYS: Dict[str, str] = {
    'FIELD_B': 'B',
    'FIELD_CHI_DEG': 'chi_deg',
    'FIELD_PHI_DEG': 'phi_deg',
    'ELECTRON_GZ': 'ge_z',
    'ELECTRON_GPERP': 'ge_perp',
    'ELECTRON_DGPERP': 'dge_perp',
    'TRION_MODEL': 'trion_model',
    'TRION_GZ': 'gt_z',
    'TRION_GPERP': 'gt_perp',
    'TRION_DGPERP': 'dgt_perp',
    'TRION_OMEGA_CENTER': 'omega_center',
    'HOLEMIX_KAPPA': 'kappa',
    'HOLEMIX_Q': 'q_eff',
    'HOLEMIX_T': 't_eff',
    'HOLEMIX_DELTA_LH_GHZ': 'delta_lh_ghz',
    'HOLEMIX_TERMS': 'mixing_terms',
    'BATH_A': 'bath_a',
    'BATH_GAMMA_N_B': 'bath_gamma_n_b',
    'BATH_RELAX_RATE': 'bath_relax_rate',
    'BATH_SIDEBAND_RATE': 'bath_sideband_rate',
    'BATH_LINEWIDTH_GHZ': 'bath_linewidth_ghz',
    'BATH_ENFORCE_POSITIVE_A': 'bath_enforce_positive_a',
    'SWEEP_RANGE': 'sweep_range',
    'SWEEP_RATE': 'sweep_rate',
    'SWEEP_STEP': 'sweep_step',
    'GEOMETRY_NANOHOLE': 'nanohole_path',
    'GEOMETRY_MATERIALS': 'materials_path',
    'GEOMETRY_R': 'al_fraction',
    'GEOMETRY_H_MIN': 'h_min',
    'GEOMETRY_H_MAX': 'h_max',
    'GEOMETRY_H_STEP': 'h_step',
    'GEOMETRY_SIGMA': 'interface_sigma',
    'GEOMETRY_LATERAL_STEP': 'lateral_step',
    'GEOMETRY_VERTICAL_STEP': 'vertical_step',
    'GEOMETRY_BINDING_MEV': 'binding_mev',
    'GEOMETRY_WORKERS': 'workers',
    'OUTPUT_DIR': 'out_dir',
    'OUTPUT_SEED': 'seed',
}

_CASTS: Dict[str, Callable[[str], Any]] = {
    f.name: (_bool if f.type is bool else f.type) for f in fields(RunConfig)
}


def _convert(key: str, raw: Any, source: str) -> Tuple[str, Any]:
    attr = CONFIG_KEYS[key]
    try:
        return attr, _CASTS[attr](raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{source}: cannot parse {key}={raw!r}", path=source)


def _from_environment() -> Dict[str, Any]:
    load_dotenv()
    values = {}
    for name, raw in os.environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):]
        if key not in CONFIG_KEYS:
            logger.warning(f"ignoring unknown environment key {name}")
            continue
        attr, value = _convert(key, raw, "environment")
        values[attr] = value
    return values


def _from_file(path: str) -> Dict[str, Any]:
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}", path=path)
    values = {}
    for key, raw in dotenv_values(path).items():
        key = key.strip().upper()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}: unknown config key {key}", path=path)
        if raw is None:
            raise ConfigError(f"{path}: {key} has no value", path=path)
        attr, value = _convert(key, raw, path)
        values[attr] = value
    return values


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None,
                use_environment: bool = True) -> RunConfig:
    """Resolve defaults, environment, file and CLI overrides (None entries are skipped)"""
    resolved: Dict[str, Any] = {}
    if use_environment:
        resolved.update(_from_environment())
    if path:
        resolved.update(_from_file(path))
    for attr, value in (overrides or {}).items():
        if value is not None:
            resolved[attr] = value
    try:
        config = replace(RunConfig(), **resolved)
    except TypeError as e:
        raise ConfigError(f"invalid configuration: {e}")
    validate(config)
    logger.debug(f"config resolved, hash={config.config_hash()}")
    return config


def validate(config: RunConfig) -> None:
    if config.trion_model not in ('gtensor', 'holemix'):
        raise ConfigError(f"TRION_MODEL must be 'gtensor' or 'holemix', got {config.trion_model!r}")
    for attr in ('nanohole_path', 'materials_path'):
        path = getattr(config, attr)
        if path and not os.path.isfile(path):
            raise ConfigError(f"referenced file not found: {path}", path=path)
    if config.workers < 1:
        raise ConfigError(f"GEOMETRY_WORKERS must be >= 1, got {config.workers}")


def sample_usage():
    config = load_config(overrides={'B': 6.0})
    print(config)
    print("hash:", config.config_hash())


if __name__ == "__main__":
    sample_usage()
