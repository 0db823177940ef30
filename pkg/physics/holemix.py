"""
Voigt 면내 헤비홀 의사스핀

헤비홀에 작용하는 세 가지 면내 결합: 3차 제만 항, non-Zeeman q 항, t 를 통한
HH-LH 혼합. 이들의 합이 트리온 면내 g-인자와 위상 θ(φ)를 정하고, optics 모듈이
이를 편광 선택 규칙으로 바꾼다.
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple, FrozenSet

import numpy as np
import pandas as pd

from physics.errors import DomainError, DegenerateStateError
from physics.spinmodel import (
    CONSTANTS, DEGENERACY_THRESHOLD, FieldConfiguration, SpinEigenpair,
    SIGMA_X, SIGMA_Y, SIGMA_Z, bloch_vector, ghz_to_ueV, spin_eigenpair,
)

logger = logging.getLogger(__name__)


class MixingKind(Enum):
    THIRD_ORDER_ZEEMAN = "third_order_zeeman"
    NON_ZEEMAN_Q = "non_zeeman_q"
    HH_LH_T = "hh_lh_t"


# regime_classify 동률 처리 순서
KIND_ORDER = (MixingKind.THIRD_ORDER_ZEEMAN, MixingKind.NON_ZEEMAN_Q, MixingKind.HH_LH_T)
ALL_KINDS: FrozenSet[MixingKind] = frozenset(KIND_ORDER)


@dataclass(frozen=True)
class HoleMixingParameters:
    kappa: float = 1.28
    q_eff: float = 0.12
    t_eff: float = 0.0
    Delta_LH: float = ghz_to_ueV(750.0)   # μeV

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.kappa, self.q_eff, self.t_eff, self.Delta_LH)):
            raise DomainError(f"Non-finite hole-mixing parameter: {self}")
        if self.Delta_LH <= 0:
            raise DomainError(f"Delta_LH must be positive, got {self.Delta_LH}")


DEFAULT_HOLE_MIXING = HoleMixingParameters()


def parse_kinds(kinds: Optional[Iterable]) -> FrozenSet[MixingKind]:
    """Accepts MixingKind members or their string values; None means all terms"""
    if kinds is None:
        return ALL_KINDS
    parsed = set()
    for kind in kinds:
        try:
            parsed.add(kind if isinstance(kind, MixingKind) else MixingKind(str(kind).strip()))
        except ValueError:
            raise DomainError(f"Unknown mixing term '{kind}'")
    return frozenset(parsed)


def mixing_term(kind: MixingKind, B: float, phi: float, p: HoleMixingParameters) -> np.ndarray:
    if B < 0:
        raise DomainError(f"B must be >= 0, got {B}")
    kind = next(iter(parse_kinds([kind])))
    mu_b = CONSTANTS.mu_B
    if kind is MixingKind.THIRD_ORDER_ZEEMAN:
        amp = 1.5 * (mu_b * p.kappa * B) ** 3 / p.Delta_LH ** 2
        return amp * (math.cos(3 * phi) * SIGMA_X + math.sin(3 * phi) * SIGMA_Y)
    if kind is MixingKind.NON_ZEEMAN_Q:
        amp = -0.75 * p.q_eff * mu_b * B
        return amp * (math.cos(phi) * SIGMA_X - math.sin(phi) * SIGMA_Y)
    amp = -1.5 * mu_b * B * p.t_eff
    return amp * (math.sin(phi) * SIGMA_X - math.cos(phi) * SIGMA_Y)


def hole_effective_hamiltonian(B: float, phi: float, p: HoleMixingParameters,
                               enabled: Optional[Iterable] = None) -> np.ndarray:
    H = np.zeros((2, 2), dtype=complex)
    for kind in parse_kinds(enabled):
        H += mixing_term(kind, B, phi, p)
    return H


def trion_mixing_hamiltonian(field: FieldConfiguration, p: HoleMixingParameters,
                             enabled: Optional[Iterable] = None, g_z_t: float = 0.0) -> np.ndarray:
    """
    Trion pseudo-spin built from the hole terms.

    The unpaired hole of the trion responds with the opposite energy sign, so the
    in-plane part is -H_hole evaluated at B_perp. The out-of-plane response is a
    plain Zeeman term with the user-supplied g_z_t.
    """
    H = -hole_effective_hamiltonian(field.b_perp, field.phi, p, enabled)
    H = H + 0.5 * CONSTANTS.mu_B * g_z_t * field.b_z * SIGMA_Z
    return H


def trion_eigenpair(field: FieldConfiguration, p: HoleMixingParameters,
                    enabled: Optional[Iterable] = None,
                    g_z_t: float = 0.0) -> Tuple[SpinEigenpair, SpinEigenpair]:
    H = trion_mixing_hamiltonian(field, p, enabled, g_z_t)
    return spin_eigenpair(bloch_vector(H), theta_hint=-field.phi)


def trion_inplane_response(B: float, phi: float, p: HoleMixingParameters,
                           enabled: Optional[Iterable] = None) -> Tuple[float, float]:
    """
    (g_t, theta) for an in-plane field; theta from the alpha-real upper eigenvector

    theta는 트리온 프레임(-H_hole)에서 읽는다. 단일 항이면 q 는 -φ, t 는 φ - π/2,
    3차 항은 3φ + π 이다. 홀 프레임(H_hole)에서는 각각 π - φ, φ + π/2, 3φ 이고,
    두 프레임 모두에서 세 항을 한꺼번에 -φ, φ + π/2, 3φ 로 맞출 수는 없다
    (q 항의 계수 부호가 반대). 축 방향(mod π)은 어느 프레임이든 같다.
    """
    if B <= 0:
        raise DegenerateStateError("In-plane response undefined at B = 0")
    field = FieldConfiguration.voigt(B, phi)
    H = trion_mixing_hamiltonian(field, p, enabled)
    m = bloch_vector(H)
    gap = 2 * float(np.linalg.norm(m))
    if gap < DEGENERACY_THRESHOLD:
        raise DegenerateStateError(f"Hole gap {gap:.3e} μeV below degeneracy threshold at phi={phi:.4f}")
    plus, _ = spin_eigenpair(m, theta_hint=-phi)
    return gap / (CONSTANTS.mu_B * B), plus.theta


def closed_form_gap(B: float, phi: float, p: HoleMixingParameters) -> float:
    """Eigen-gap in μeV for the q + t combination (no third-order term)"""
    q, t = p.q_eff, p.t_eff
    radicand = 9 / 16 * q ** 2 + 9 / 4 * t ** 2 + 9 / 4 * q * t * math.sin(2 * phi)
    return 2 * CONSTANTS.mu_B * B * math.sqrt(max(radicand, 0.0))


@dataclass
class AnisotropyScan:
    table: pd.DataFrame
    g_max: float
    g_min: float
    phi_max: float
    phi_min: float

    @property
    def delta_g(self) -> float:
        return self.g_max - self.g_min

    @property
    def g_mean(self) -> float:
        return float(self.table['g_t'].mean())


def anisotropy_scan(B: float, p: HoleMixingParameters, enabled: Optional[Iterable] = None,
                    n_phi: int = 360) -> AnisotropyScan:
    if n_phi < 8:
        raise DomainError(f"n_phi must be >= 8, got {n_phi}")
    phis = np.linspace(0.0, 2 * math.pi, n_phi, endpoint=False)
    rows = []
    for phi in phis:
        g_t, theta = trion_inplane_response(B, float(phi), p, enabled)
        rows.append({'phi': float(phi), 'g_t': g_t, 'theta': theta})
    df = pd.DataFrame(rows)
    i_max = int(df['g_t'].values.argmax())
    i_min = int(df['g_t'].values.argmin())
    scan = AnisotropyScan(
        table=df,
        g_max=float(df['g_t'].iloc[i_max]),
        g_min=float(df['g_t'].iloc[i_min]),
        phi_max=float(df['phi'].iloc[i_max]),
        phi_min=float(df['phi'].iloc[i_min]),
    )
    logger.debug(f"anisotropy scan B={B} T: g_max={scan.g_max:.4f} g_min={scan.g_min:.4f}")
    return scan


def fit_mixing_to_band(mean_g: float, delta_g: float,
                       base: HoleMixingParameters = DEFAULT_HOLE_MIXING) -> HoleMixingParameters:
    """
    (q_eff, t_eff) reproducing a mean in-plane trion g and its [110]/[1-10] spread.

    Uses g(π/4) = 1.5(q+2t) and g(3π/4) = 1.5(q-2t) on the q > 2t branch.
    """
    if mean_g <= 0 or delta_g < 0:
        raise DomainError(f"Need mean_g > 0 and delta_g >= 0, got {mean_g}, {delta_g}")
    if delta_g >= 2 * mean_g:
        raise DomainError("delta_g must stay below 2*mean_g for the q > 2t branch")
    return HoleMixingParameters(kappa=base.kappa, q_eff=mean_g / 1.5,
                                t_eff=delta_g / 6.0, Delta_LH=base.Delta_LH)


def term_g_factors(B: float, p: HoleMixingParameters) -> dict:
    """Effective g contributed by each term alone"""
    mu_b = CONSTANTS.mu_B
    return {
        MixingKind.THIRD_ORDER_ZEEMAN: 3 * mu_b ** 2 * abs(p.kappa) ** 3 * B ** 2 / p.Delta_LH ** 2,
        MixingKind.NON_ZEEMAN_Q: 1.5 * abs(p.q_eff),
        MixingKind.HH_LH_T: 3 * abs(p.t_eff),
    }


def regime_classify(B: float, p: HoleMixingParameters) -> MixingKind:
    if B <= 0:
        raise DomainError(f"regime_classify needs B > 0, got {B}")
    g = term_g_factors(B, p)
    best = KIND_ORDER[0]
    for kind in KIND_ORDER[1:]:
        if g[kind] > g[best]:
            best = kind
    return best


def regime_map(B_values: Iterable[float], p: HoleMixingParameters) -> pd.DataFrame:
    rows = []
    for B in B_values:
        g = term_g_factors(B, p)
        rows.append({
            'B': float(B),
            'g_third_order': g[MixingKind.THIRD_ORDER_ZEEMAN],
            'g_q': g[MixingKind.NON_ZEEMAN_Q],
            'g_t': g[MixingKind.HH_LH_T],
            'dominant': regime_classify(B, p).value,
        })
    return pd.DataFrame(rows)


def sample_usage():
    p = HoleMixingParameters(kappa=1.28, q_eff=0.1, t_eff=0.01)
    for phi_deg in (0, 45, 90, 135):
        g_t, theta = trion_inplane_response(4.0, math.radians(phi_deg), p)
        print(f"phi={phi_deg:3d}°  g_t={g_t:.4f}  theta={math.degrees(theta):8.2f}°")
    scan = anisotropy_scan(4.0, p, enabled=[MixingKind.NON_ZEEMAN_Q, MixingKind.HH_LH_T])
    print(f"delta_g = {scan.delta_g:.4f}")
    print(regime_map([2, 4, 8, 12], HoleMixingParameters(q_eff=0.03)))


if __name__ == "__main__":
    sample_usage()
