"""
Signed g-tensors, Zeeman Hamiltonians and their pseudo-spin eigenstates.

Energies are in μeV throughout; frequency conversions use h (not ħ), so a value
quoted as "GHz" is ω/2π.

sample_usage:
    g_e = GTensor(g_z=-0.1, g_perp_mean=0.08)
    field = FieldConfiguration.voigt(5.8, phi=0.0)
    print(zeeman_splitting(g_e, field))          # 26.86 μeV
    plus, minus = electron_eigenpair(g_e, field)
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import constants

from physics.errors import DomainError, DegenerateStateError

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# 이 분리(μeV) 미만에서는 고유벡터 위상 규약이 의미 없음
DEGENERACY_THRESHOLD = 1e-9


@dataclass(frozen=True)
class PhysicalConstants:
    mu_B: float = constants.physical_constants['Bohr magneton in eV/T'][0] * 1e6   # μeV/T
    planck_h: float = constants.h / constants.e * 1e6 * 1e9                      # μeV/GHz
    hc: float = constants.h * constants.c / constants.e * 1e9                     # eV·nm
    # ħ²/2m₀ in meV·nm², used by the envelope solver
    hbar2_over_2m0: float = constants.hbar ** 2 / (2 * constants.m_e) / constants.e * 1e18 * 1e3

    def __post_init__(self):
        for name in ('mu_B', 'planck_h', 'hc', 'hbar2_over_2m0'):
            if not getattr(self, name) > 0:
                raise DomainError(f"Physical constant {name} must be positive")


CONSTANTS = PhysicalConstants()


def ghz_to_ueV(value_ghz: float) -> float:
    return value_ghz * CONSTANTS.planck_h


def ueV_to_ghz(value_ueV: float) -> float:
    return value_ueV / CONSTANTS.planck_h


@dataclass(frozen=True)
class GTensor:
    g_z: float
    g_perp_mean: float
    delta_g_perp: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.g_z, self.g_perp_mean, self.delta_g_perp)):
            raise DomainError(f"Non-finite g-tensor component: {self}")
        if self.delta_g_perp < 0:
            raise DomainError(f"delta_g_perp must be >= 0, got {self.delta_g_perp}")

    @classmethod
    def isotropic(cls, g: float) -> "GTensor":
        return cls(g_z=g, g_perp_mean=g)

    def g_perp(self, phi: float) -> float:
        """In-plane g at azimuth phi; extrema on [110] (φ=π/4) and [1-10] (φ=3π/4)"""
        return self.g_perp_mean + 0.5 * self.delta_g_perp * math.sin(2 * phi)

    def with_signs(self, sign_z: int, sign_perp: int) -> "GTensor":
        return GTensor(sign_z * abs(self.g_z), sign_perp * abs(self.g_perp_mean), self.delta_g_perp)


@dataclass(frozen=True)
class FieldConfiguration:
    B: float
    chi: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.B) or self.B < 0:
            raise DomainError(f"B must be a finite non-negative field, got {self.B}")
        if not 0.0 <= self.chi <= math.pi:
            raise DomainError(f"chi must lie in [0, pi], got {self.chi}")
        object.__setattr__(self, 'phi', self.phi % (2 * math.pi))

    @classmethod
    def faraday(cls, B: float) -> "FieldConfiguration":
        return cls(B=B, chi=0.0, phi=0.0)

    @classmethod
    def voigt(cls, B: float, phi: float = 0.0) -> "FieldConfiguration":
        return cls(B=B, chi=math.pi / 2, phi=phi)

    @classmethod
    def from_degrees(cls, B: float, chi_deg: float, phi_deg: float) -> "FieldConfiguration":
        return cls(B=B, chi=math.radians(chi_deg), phi=math.radians(phi_deg))

    @property
    def components(self) -> np.ndarray:
        s = math.sin(self.chi)
        return self.B * np.array([s * math.cos(self.phi), s * math.sin(self.phi), math.cos(self.chi)])

    @property
    def b_perp(self) -> float:
        return self.B * math.sin(self.chi)

    @property
    def b_z(self) -> float:
        return self.B * math.cos(self.chi)


@dataclass(frozen=True)
class SpinEigenpair:
    alpha: float
    beta: float
    theta: float
    splitting: float
    branch: int = 1

    def __post_init__(self):
        if abs(self.alpha ** 2 + self.beta ** 2 - 1.0) > 1e-12:
            raise DomainError(f"Eigenpair not normalized: alpha={self.alpha}, beta={self.beta}")
        if self.splitting < 0:
            raise DomainError(f"Negative splitting {self.splitting}")

    def coefficients(self) -> np.ndarray:
        """Spinor components on (|ψ1⟩, |ψ2⟩) following the e^{∓iθ/2} placement"""
        lo = np.exp(-0.5j * self.theta)
        hi = np.exp(0.5j * self.theta)
        if self.branch > 0:
            return np.array([self.alpha * lo, self.beta * hi])
        return np.array([-self.beta * lo, self.alpha * hi])

    @property
    def energy(self) -> float:
        return 0.5 * self.branch * self.splitting


def zeeman_splitting(g: GTensor, field: FieldConfiguration, g_perp: Optional[float] = None) -> float:
    """Zeeman splitting in μeV; signs of the g components never enter"""
    gp = g.g_perp(field.phi) if g_perp is None else g_perp
    return CONSTANTS.mu_B * field.B * math.hypot(g.g_z * math.cos(field.chi), gp * math.sin(field.chi))


def _is_half_integer(x: float) -> bool:
    return abs(2 * x - round(2 * x)) < 1e-12


def lande_g(S: float, L: float, J: float, m_J: float) -> float:
    for name, value in (('S', S), ('L', L), ('J', J), ('m_J', m_J)):
        if not _is_half_integer(value):
            raise DomainError(f"{name}={value} is not a multiple of 1/2")
    if S < 0 or L < 0 or abs(L - round(L)) > 1e-12:
        raise DomainError(f"Invalid spin/orbital numbers S={S}, L={L}")
    if J < abs(L - S) - 1e-12 or J > L + S + 1e-12 or not _is_half_integer(J - abs(L - S)) \
            or abs((J - abs(L - S)) - round(J - abs(L - S))) > 1e-12:
        raise DomainError(f"J={J} not in |L-S|..L+S for L={L}, S={S}")
    if J <= 0:
        raise DomainError("J must be positive for a Landé factor")
    if abs(m_J) > J + 1e-12 or abs((J - m_J) - round(J - m_J)) > 1e-12:
        raise DomainError(f"m_J={m_J} incompatible with J={J}")
    jj = J * (J + 1)
    return 2 * m_J * (1 + (jj + S * (S + 1) - L * (L + 1)) / (2 * jj))


def roth_g(E_p: float, E_g: float, Delta_SO: float) -> float:
    if E_g <= 0:
        raise DomainError(f"Band gap must be positive, got {E_g}")
    if Delta_SO < 0:
        raise DomainError(f"Spin-orbit splitting must be >= 0, got {Delta_SO}")
    return 2 - 2 * E_p * Delta_SO / (3 * E_g * (E_g + Delta_SO))


def _pauli_matrix(m: np.ndarray) -> np.ndarray:
    return m[0] * SIGMA_X + m[1] * SIGMA_Y + m[2] * SIGMA_Z


def bloch_vector(H: np.ndarray) -> np.ndarray:
    """Real (m_x, m_y, m_z) such that the traceless part of H equals m·σ"""
    return np.array([H[0, 1].real, -H[0, 1].imag, 0.5 * (H[0, 0] - H[1, 1]).real])


def electron_hamiltonian(g: GTensor, field: FieldConfiguration) -> np.ndarray:
    bx, by, bz = field.components
    gp = g.g_perp(field.phi)
    m = 0.5 * CONSTANTS.mu_B * np.array([gp * bx, gp * by, g.g_z * bz])
    return _pauli_matrix(m)


def trion_hamiltonian(g_t: GTensor, field: FieldConfiguration) -> np.ndarray:
    """D2d trion pseudo-spin: Zeeman-like in-plane response with the opposite phase (θ = −φ)"""
    gp = g_t.g_perp(field.phi)
    m = 0.5 * CONSTANTS.mu_B * np.array([
        gp * field.b_perp * math.cos(field.phi),
        -gp * field.b_perp * math.sin(field.phi),
        g_t.g_z * field.b_z,
    ])
    return _pauli_matrix(m)


def spin_eigenpair(m: np.ndarray, theta_hint: float = 0.0) -> Tuple[SpinEigenpair, SpinEigenpair]:
    """Upper and lower eigenstates of m·σ in the alpha-real form"""
    c = float(np.linalg.norm(m))
    splitting = 2 * c
    if splitting < DEGENERACY_THRESHOLD:
        raise DegenerateStateError(f"Splitting {splitting:.3e} μeV below degeneracy threshold")
    # stable form of α = (m_z + c)/N, β = m_perp/N
    alpha = math.sqrt(max(0.0, (c + m[2]) / (2 * c)))
    beta = math.sqrt(max(0.0, (c - m[2]) / (2 * c)))
    norm = math.hypot(alpha, beta)
    alpha, beta = alpha / norm, beta / norm
    m_perp = math.hypot(m[0], m[1])
    theta = math.atan2(m[1], m[0]) if m_perp > 1e-15 * c else theta_hint
    plus = SpinEigenpair(alpha, beta, theta, splitting, branch=1)
    minus = SpinEigenpair(alpha, beta, theta, splitting, branch=-1)
    return plus, minus


def electron_eigenpair(g: GTensor, field: FieldConfiguration) -> Tuple[SpinEigenpair, SpinEigenpair]:
    """
    (|e+⟩, |e−⟩) with |e+⟩ the upper Zeeman level.

    theta is φ when g_⊥ sinχ ≥ 0; a negative in-plane g is absorbed as θ = φ + π
    so that alpha and beta stay non-negative.
    """
    return spin_eigenpair(bloch_vector(electron_hamiltonian(g, field)), theta_hint=field.phi)


def spin_expectation(pair: SpinEigenpair, field: FieldConfiguration) -> float:
    """⟨σ·b̂⟩ along the field direction; +1 means spin up along B"""
    if field.B == 0:
        raise DegenerateStateError("Spin direction along B is undefined at B = 0")
    v = pair.coefficients()
    b_hat = field.components / field.B
    op = _pauli_matrix(b_hat)
    return float(np.real(np.conj(v) @ op @ v))


def sample_usage():
    g_e = GTensor(g_z=-0.1, g_perp_mean=0.08)
    field = FieldConfiguration.voigt(5.8, phi=0.0)
    print(f"splitting: {zeeman_splitting(g_e, field):.2f} μeV "
          f"({ueV_to_ghz(zeeman_splitting(g_e, field)):.2f} GHz)")
    plus, minus = electron_eigenpair(g_e, field)
    print("e+", plus)
    print("e-", minus)
    print("Landé HH/LH:", lande_g(0.5, 1, 1.5, 1.5), lande_g(0.5, 1, 1.5, 0.5))
    print("Roth GaAs:", roth_g(28.8, 1.519, 0.341))


if __name__ == "__main__":
    sample_usage()
