"""
Trion transition dipoles, rates and Stokes vectors.

Conventions
-----------
* analyzer angle ``alpha`` is measured from the in-plane field direction, so the
  lab-frame angle is ``phi + alpha``
* dipole operator V = p_x cos(φ+α) - p_y sin(φ+α) with ⟨S|p_x|X⟩ = ⟨S|p_y|Y⟩ = 1
* heavy-hole spinor basis h1 = |↑⟩(X - iY), h2 = -|↓⟩(X + iY)
* s3 = +1 is σ⁺, the e^{+i(φ+α)} component of the dipole
* transition (i, k) connects electron branch i to trion branch k; labels E1..E4
  follow ascending energy
"""

import math
import logging
from dataclasses import dataclass, field as dc_field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from physics.errors import DomainError
from physics.spinmodel import (
    FieldConfiguration, GTensor, SpinEigenpair,
    electron_eigenpair, spin_eigenpair, spin_expectation, trion_hamiltonian, bloch_vector,
)
from physics.holemix import HoleMixingParameters, trion_eigenpair

logger = logging.getLogger(__name__)

# 가장 밝은 선 대비 이 비율 미만이면 dark 로 처리
DARK_THRESHOLD = 1e-12

UP = "up"
DOWN = "down"

# omega_e <= omega_t 일 때 E1..E4 의 (전자 branch, 트리온 branch)
_PAIRS_TRION_WIDER = ((1, -1), (-1, -1), (1, 1), (-1, 1))
_PAIRS_ELECTRON_WIDER = ((1, -1), (1, 1), (-1, -1), (-1, 1))


@dataclass(frozen=True)
class StokesVector:
    s0: float
    s1: float
    s2: float
    s3: float

    def __post_init__(self):
        if self.s0 < 0:
            raise DomainError(f"s0 must be >= 0, got {self.s0}")
        if self.s1 ** 2 + self.s2 ** 2 + self.s3 ** 2 > self.s0 ** 2 * (1 + 1e-10) + 1e-300:
            raise DomainError(f"Stokes vector exceeds full polarization: {self}")

    @property
    def is_dark(self) -> bool:
        return self.s0 == 0.0

    def normalized(self) -> Tuple[float, float, float]:
        if self.is_dark:
            return 0.0, 0.0, 0.0
        return self.s1 / self.s0, self.s2 / self.s0, self.s3 / self.s0


@dataclass(frozen=True)
class TransitionSet:
    omega_center: float
    omega_e: float
    omega_t: float
    phi: float
    energies: Tuple[float, float, float, float]
    stokes: Tuple[StokesVector, ...]
    ground_spin: Tuple[str, ...]
    pairs: Tuple[Tuple[int, int], ...]
    amplitudes: Tuple[Tuple[complex, complex], ...] = dc_field(default=())

    def __post_init__(self):
        e = self.energies
        if any(e[n] > e[n + 1] + 1e-10 for n in range(3)):
            raise DomainError(f"Energies not ascending: {e}")
        if abs((e[0] + e[3]) - (e[1] + e[2])) > 1e-10 * max(1.0, abs(self.omega_center)):
            raise DomainError(f"E1+E4 != E2+E3 for {e}")
        if sorted(self.ground_spin) != [DOWN, DOWN, UP, UP]:
            raise DomainError(f"Ground spins must be two up and two down, got {self.ground_spin}")

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for n in range(4):
            s = self.stokes[n]
            rows.append({
                'transition': f"E{n + 1}",
                'energy_ueV': self.energies[n],
                'electron_branch': self.pairs[n][0],
                'trion_branch': self.pairs[n][1],
                'ground_spin': self.ground_spin[n],
                's0': s.s0, 's1': s.s1, 's2': s.s2, 's3': s.s3,
                'lab_angle_rad': stokes_angle(s, self.phi) if not s.is_dark else float('nan'),
            })
        return pd.DataFrame(rows)


def dipole_matrix_element(e_state: SpinEigenpair, h_state: SpinEigenpair,
                          phi: float, alpha_pol: float) -> complex:
    ce = e_state.coefficients()
    ch = h_state.coefficients()
    beta = phi + alpha_pol
    return complex(np.conj(ce[0]) * ch[0] * np.exp(1j * beta) - np.conj(ce[1]) * ch[1] * np.exp(-1j * beta))


def transition_rates(e_pair: Tuple[SpinEigenpair, SpinEigenpair],
                     h_pair: Tuple[SpinEigenpair, SpinEigenpair],
                     phi: float, alpha_pol: float) -> Dict[Tuple[int, int], float]:
    """|M|² for every (electron branch, trion branch) combination"""
    rates = {}
    for e_state in e_pair:
        for h_state in h_pair:
            m = dipole_matrix_element(e_state, h_state, phi, alpha_pol)
            rates[(e_state.branch, h_state.branch)] = abs(m) ** 2
    return rates


def closed_form_rates(phi: float, alpha: float, theta: float) -> Tuple[float, float]:
    """(same-branch, cross-branch) Voigt rates for an electron at θ = φ and a trion at θ"""
    arg = 1.5 * phi + alpha - 0.5 * theta
    return math.sin(arg) ** 2, math.cos(arg) ** 2


def fixed_phase_rates(phi: float, alpha_lab: float) -> Tuple[float, float]:
    """Closed form for θ = −φ; alpha_lab is the analyzer angle from [100]"""
    arg = phi + alpha_lab
    return math.sin(arg) ** 2, math.cos(arg) ** 2


def stokes_from_amplitudes(m0: complex, m90: complex) -> StokesVector:
    p0 = abs(m0) ** 2
    p90 = abs(m90) ** 2
    cross = m0 * np.conj(m90)
    if p0 + p90 == 0.0:
        return StokesVector(0.0, 0.0, 0.0, 0.0)
    return StokesVector(p0 + p90, p0 - p90, 2 * float(np.real(cross)), -2 * float(np.imag(cross)))


def stokes_angle(stokes: StokesVector, phi: float) -> float:
    """Lab-frame angle of the linear-polarization axis, in [0, π)"""
    return (phi + 0.5 * math.atan2(stokes.s2, stokes.s1)) % math.pi


def degree_of_polarization(stokes: StokesVector) -> float:
    if stokes.is_dark:
        return 0.0
    return math.sqrt(stokes.s1 ** 2 + stokes.s2 ** 2 + stokes.s3 ** 2) / stokes.s0


def degree_of_circular_polarization(stokes: StokesVector) -> float:
    if stokes.is_dark:
        return 0.0
    return stokes.s3 / stokes.s0


def ellipticity_from_docp(docp: float) -> float:
    """Minor/major axis ratio of the polarization ellipse for a pure state"""
    if not 0.0 <= abs(docp) <= 1.0:
        raise DomainError(f"DOCP must lie in [-1, 1], got {docp}")
    return math.tan(0.5 * math.asin(abs(docp)))


def _ordered_pairs(omega_e: float, omega_t: float) -> Tuple[Tuple[int, int], ...]:
    return _PAIRS_ELECTRON_WIDER if omega_e > omega_t else _PAIRS_TRION_WIDER


def transition_energies(omega_center: float, omega_e: float, omega_t: float,
                        upper_electron_spin: str = UP) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """
    Four transition energies in ascending order with the ground spin of each.

    upper_electron_spin names the spin of the upper electron level (up for a
    positive electron g).
    """
    if omega_e < 0 or omega_t < 0:
        raise DomainError(f"Splittings must be >= 0, got omega_e={omega_e}, omega_t={omega_t}")
    if upper_electron_spin not in (UP, DOWN):
        raise DomainError(f"upper_electron_spin must be '{UP}' or '{DOWN}'")
    lower = DOWN if upper_electron_spin == UP else UP
    pairs = _ordered_pairs(omega_e, omega_t)
    energies = np.array([omega_center + 0.5 * (k * omega_t - i * omega_e) for i, k in pairs])
    spins = tuple(upper_electron_spin if i > 0 else lower for i, _ in pairs)
    return energies, spins


def voigt_tdm_angles(sign_e: int, sign_t: int, phi: float) -> Tuple[float, float]:
    """(angle of s1/s4, angle of s2/s3) in the lab frame, mod π"""
    if sign_e == 0 or sign_t == 0:
        raise DomainError("g-factor signs must be nonzero")
    along = (-phi) % math.pi
    across = (-phi + 0.5 * math.pi) % math.pi
    if (sign_e > 0) == (sign_t > 0):
        return along, across
    return across, along


def faraday_bright_pair(sign_gz_e: int, sign_gz_t: int) -> Tuple[Tuple[str, str], Tuple[str, str]]:
    """
    Dipole-allowed lines in Faraday geometry and their handedness.

    Labels follow the ordering for omega_e <= omega_t.
    """
    if sign_gz_e == 0 or sign_gz_t == 0:
        raise DomainError("g-factor signs must be nonzero")
    if (sign_gz_e > 0) == (sign_gz_t > 0):
        # E3 는 두 위쪽 준위를 잇는다
        upper = "sigma+" if sign_gz_e > 0 else "sigma-"
        lower = "sigma-" if upper == "sigma+" else "sigma+"
        return ("E2", "E3"), (lower, upper)
    first = "sigma+" if sign_gz_e > 0 else "sigma-"
    last = "sigma-" if first == "sigma+" else "sigma+"
    return ("E1", "E4"), (first, last)


def visible_lh_bound(epsilon: float) -> float:
    """Upper bound on the optically visible LH fraction from the emission axis ratio"""
    if not 0.0 < epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    r = math.sqrt(epsilon)
    return 3 * (1 - r) ** 2 / (1 + r) ** 2


def cyclicity_and_dark_fraction(T_pump: float, T_1: float) -> Tuple[float, float]:
    if T_pump <= 0 or T_1 <= 0:
        raise DomainError(f"T_pump and T_1 must be positive, got {T_pump}, {T_1}")
    c = T_pump / T_1
    dark = math.sqrt(3.0 / c)
    if dark > 1.0:
        # c < 3 이면 √(3/c) > 1: 비율로 해석할 수 없는 입력
        logger.warning(f"dark fraction sqrt(3/c)={dark:.4f} exceeds 1 at cyclicity c={c:.4g}; capped at 1")
        return c, 1.0
    return c, dark


HoleModel = Union[GTensor, HoleMixingParameters]


def trion_pair(hole: HoleModel, field: FieldConfiguration, enabled: Optional[Iterable] = None,
               g_z_t: float = 0.0) -> Tuple[SpinEigenpair, SpinEigenpair]:
    if isinstance(hole, GTensor):
        return spin_eigenpair(bloch_vector(trion_hamiltonian(hole, field)), theta_hint=-field.phi)
    return trion_eigenpair(field, hole, enabled, g_z_t)


def build_transition_set(g_e: GTensor, field: FieldConfiguration, hole: HoleModel,
                         omega_center: float = 0.0, enabled: Optional[Iterable] = None,
                         g_z_t: float = 0.0) -> TransitionSet:
    e_pair = electron_eigenpair(g_e, field)
    t_pair = trion_pair(hole, field, enabled, g_z_t)
    e_by_branch = {s.branch: s for s in e_pair}
    t_by_branch = {s.branch: s for s in t_pair}
    omega_e, omega_t = e_pair[0].splitting, t_pair[0].splitting

    upper_spin = UP if spin_expectation(e_by_branch[1], field) > 0 else DOWN
    energies, spins = transition_energies(omega_center, omega_e, omega_t, upper_spin)
    pairs = _ordered_pairs(omega_e, omega_t)

    stokes, amplitudes = [], []
    for i, k in pairs:
        m0 = dipole_matrix_element(e_by_branch[i], t_by_branch[k], field.phi, 0.0)
        m90 = dipole_matrix_element(e_by_branch[i], t_by_branch[k], field.phi, 0.5 * math.pi)
        amplitudes.append((m0, m90))
        stokes.append(stokes_from_amplitudes(m0, m90))

    # 수치적으로 어두운 선은 정확히 0 으로
    brightest = max(s.s0 for s in stokes)
    stokes = [s if s.s0 >= DARK_THRESHOLD * brightest else StokesVector(0.0, 0.0, 0.0, 0.0) for s in stokes]

    tset = TransitionSet(
        omega_center=omega_center, omega_e=omega_e, omega_t=omega_t, phi=field.phi,
        energies=tuple(float(e) for e in energies), stokes=tuple(stokes),
        ground_spin=spins, pairs=pairs, amplitudes=tuple(amplitudes),
    )
    logger.debug(f"transition set at B={field.B} T chi={field.chi:.3f} phi={field.phi:.3f}: "
                 f"omega_e={omega_e:.3f} μeV omega_t={omega_t:.3f} μeV")
    return tset


def rate_at(tset: TransitionSet, transition: int, alpha: float) -> float:
    """Rate of line E<transition> (1..4) through an analyzer at alpha"""
    if transition not in (1, 2, 3, 4):
        raise DomainError(f"transition must be 1..4, got {transition}")
    m0, m90 = tset.amplitudes[transition - 1]
    if tset.stokes[transition - 1].is_dark:
        return 0.0
    return abs(math.cos(alpha) * m0 + math.sin(alpha) * m90) ** 2


TransitionSource = Union[TransitionSet, Callable[[float], TransitionSet]]


def polarization_map(source: TransitionSource, alphas: Sequence[float],
                     phis: Optional[Sequence[float]] = None) -> pd.DataFrame:
    """
    Rows of (phi_rad, alpha_rad, transition, rate_norm).

    source is either a fixed TransitionSet or a callable phi -> TransitionSet;
    rates are normalized to the brightest line at each phi.
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size == 0:
        raise DomainError("alpha grid is empty")
    if isinstance(source, TransitionSet):
        sets = [source]
    else:
        if phis is None or len(phis) == 0:
            raise DomainError("phi grid is empty")
        sets = [source(float(phi)) for phi in phis]

    rows: List[dict] = []
    for tset in sets:
        norm = max(s.s0 for s in tset.stokes)
        for n in range(1, 5):
            for alpha in alphas:
                rows.append({
                    'phi_rad': tset.phi,
                    'alpha_rad': float(alpha),
                    'transition': n,
                    'rate_norm': rate_at(tset, n, float(alpha)) / norm,
                })
    return pd.DataFrame(rows, columns=['phi_rad', 'alpha_rad', 'transition', 'rate_norm'])


def sample_usage():
    g_e = GTensor(g_z=-0.1, g_perp_mean=0.08)
    g_t = GTensor(g_z=0.2, g_perp_mean=0.18)
    tset = build_transition_set(g_e, FieldConfiguration.voigt(5.8, 0.0), g_t)
    print(tset.to_frame())
    print("Faraday (+,+):", faraday_bright_pair(1, 1))
    print("visible LH bound at 0.92:", visible_lh_bound(0.92))
    print("cyclicity:", cyclicity_and_dark_fraction(460.0, 0.230))


if __name__ == "__main__":
    sample_usage()
