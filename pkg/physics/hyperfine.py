"""
Hyperfine energetics and the dragging / anti-dragging sweep simulator.

The nuclear bath is a scalar mean-field polarization I_x. A resonant laser drives
two weak sidebands that flip one nuclear spin up or down; their imbalance pushes
I_x, which in turn shifts the optical resonance by the Overhauser field. Whether
the resonance follows the laser (D) or runs away from it (A) depends only on the
sign of a·S_x, so sweeping every line of a transition set and classifying the
traces pins the g-factor signs.
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.optimize import curve_fit

from physics.errors import DomainError, InconsistencyError, NumericalError, ConvergenceError
from physics.optics import TransitionSet, UP, DOWN, voigt_tdm_angles
from physics.spinmodel import ghz_to_ueV

logger = logging.getLogger(__name__)


class Lineshape(Enum):
    DRAG = "D"
    ANTI_DRAG = "A"
    NEUTRAL = "neutral"


class MagnitudeOrder(Enum):
    ELECTRON_SMALLER = "e<t"
    ELECTRON_LARGER = "e>t"


@dataclass(frozen=True)
class NuclearBathParameters:
    a: float = 0.1                                  # μeV per flip
    gamma_n_B: float = 0.5                          # μeV
    relax_rate: float = 1.5                         # 1/s
    sideband_rate: float = 800.0                    # 1/s
    optical_linewidth: float = ghz_to_ueV(0.72)     # μeV
    enforce_positive_a: bool = True

    def __post_init__(self):
        for name in ('a', 'gamma_n_B', 'relax_rate', 'sideband_rate', 'optical_linewidth'):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.enforce_positive_a and self.a <= 0:
            raise DomainError(f"hyperfine constant a must be > 0 for Ga/As nuclei, got {self.a}")
        if self.relax_rate < 0 or self.sideband_rate < 0:
            raise DomainError("rates must be >= 0")
        if self.optical_linewidth <= 0:
            raise DomainError(f"optical_linewidth must be > 0, got {self.optical_linewidth}")

    def with_a(self, a: float) -> "NuclearBathParameters":
        return NuclearBathParameters(a, self.gamma_n_B, self.relax_rate, self.sideband_rate,
                                     self.optical_linewidth, enforce_positive_a=False)


@dataclass(frozen=True)
class SweepSettings:
    range_ueV: float = 35.0       # sweep covers [-range, +range] around the bare line
    rate: float = 1.0             # μeV/s
    step: float = 0.02            # μeV between recorded points
    initial_polarization: float = 0.0

    def __post_init__(self):
        if self.rate <= 0:
            raise DomainError(f"sweep rate must be > 0, got {self.rate}")
        if self.range_ueV <= 0 or self.step <= 0:
            raise DomainError("sweep range and step must be > 0")


DEFAULT_BATH = NuclearBathParameters()
DEFAULT_SWEEP = SweepSettings()


@dataclass
class DragScan:
    direction: str
    omega_L: np.ndarray
    intensity: np.ndarray
    I_x_trace: np.ndarray
    linewidth: float
    center: float = 0.0

    def __post_init__(self):
        if not len(self.omega_L) == len(self.intensity) == len(self.I_x_trace):
            raise DomainError("DragScan arrays must have equal length")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'omega_L_ueV': self.omega_L,
            'intensity': self.intensity,
            'I_x': self.I_x_trace,
            'direction': self.direction,
        })


def spin_projection(ground_spin: str) -> float:
    if ground_spin == UP:
        return 0.5
    if ground_spin == DOWN:
        return -0.5
    raise DomainError(f"ground_spin must be '{UP}' or '{DOWN}', got {ground_spin!r}")


def manifold_spacing(S_x: float, gamma_n_B: float, a: float, signed: bool = False) -> float:
    """Energy of one nuclear flip in the electron-spin manifold S_x"""
    value = -gamma_n_B + a * S_x
    return value if signed else abs(value)


def overhauser_shift(I_x: float, a: float, ground_spin: str) -> float:
    """Optical shift of a transition whose ground electron has the given spin"""
    return -a * spin_projection(ground_spin) * I_x


def _lorentzian(y, linewidth):
    return 1.0 / (1.0 + (2.0 * y / linewidth) ** 2)


def sideband_balance(detuning, bath: NuclearBathParameters, ground_spin: str):
    """W+ − W− as a function of laser detuning from the shifted resonance (1/s)"""
    eps = manifold_spacing(spin_projection(ground_spin), bath.gamma_n_B, bath.a, signed=True)
    d = np.asarray(detuning, dtype=float)
    return bath.sideband_rate * (_lorentzian(d - eps, bath.optical_linewidth)
                                 - _lorentzian(d + eps, bath.optical_linewidth))


def feedback_stiffness(bath: NuclearBathParameters) -> float:
    """Upper bound on |∂(dI/dt)/∂I|; sets the explicit step size"""
    return bath.relax_rate + abs(bath.a) * bath.sideband_rate * 1.299 / bath.optical_linewidth


def drag_sweep(bath: NuclearBathParameters, ground_spin: str,
               sweep: SweepSettings = DEFAULT_SWEEP, direction: str = "up",
               center: float = 0.0) -> DragScan:
    if direction not in ("up", "down"):
        raise DomainError(f"direction must be 'up' or 'down', got {direction!r}")
    n_points = int(round(2 * sweep.range_ueV / sweep.step)) + 1
    grid = np.linspace(-sweep.range_ueV, sweep.range_ueV, n_points)
    if direction == "down":
        grid = -grid

    s_x = spin_projection(ground_spin)
    a_s = bath.a * s_x
    eps = -bath.gamma_n_B + a_s
    gamma = bath.optical_linewidth
    w0, gd = bath.sideband_rate, bath.relax_rate

    cell_time = sweep.step / sweep.rate
    n_sub = max(1, math.ceil(cell_time * 10 * feedback_stiffness(bath)))
    dt = cell_time / n_sub

    intensity = np.empty(n_points)
    trace = np.empty(n_points)
    I = sweep.initial_polarization
    for n in range(n_points):
        x = grid[n]
        # Δ = x − shift(I) with shift(I) = −a·S_x·I
        intensity[n] = _lorentzian(x + a_s * I, gamma)
        trace[n] = I
        if n == n_points - 1:
            break
        dx = (grid[n + 1] - x) / n_sub
        for j in range(n_sub):
            delta = x + j * dx + a_s * I
            flow = w0 * (_lorentzian(delta - eps, gamma) - _lorentzian(delta + eps, gamma))
            I = I + dt * (flow - gd * I)
        if not math.isfinite(I):
            raise NumericalError(
                f"non-finite polarization at omega_L={x:.4f} μeV",
                diagnostics={'index': n, 'omega_L': float(x), 'dt': dt, 'substeps': n_sub},
            )

    logger.debug(f"drag sweep {direction} spin={ground_spin}: {n_points} points, {n_sub} substeps/cell")
    return DragScan(direction=direction, omega_L=center + grid, intensity=intensity,
                    I_x_trace=trace, linewidth=gamma, center=center)


def _core(scan: DragScan, fraction: float = 0.8) -> Tuple[float, float]:
    """(width, area) of the contiguous >= fraction·max run holding the maximum"""
    y = scan.intensity
    peak = int(np.argmax(y))
    level = fraction * y[peak]
    lo = peak
    while lo > 0 and y[lo - 1] >= level:
        lo -= 1
    hi = peak
    while hi < len(y) - 1 and y[hi + 1] >= level:
        hi += 1
    w = scan.omega_L[lo:hi + 1]
    width = float(abs(w[-1] - w[0]))
    area = float(abs(trapezoid(y[lo:hi + 1], w))) if hi > lo else 0.0
    return width, area


def _ascending(scan: DragScan) -> Tuple[np.ndarray, np.ndarray]:
    if scan.omega_L[0] > scan.omega_L[-1]:
        return scan.omega_L[::-1], scan.intensity[::-1]
    return scan.omega_L, scan.intensity


def classify_lineshape(scan_up: DragScan, scan_down: DragScan,
                       width_factor: float = 3.0, area_ratio: float = 0.6,
                       hysteresis_tol: float = 0.1) -> Lineshape:
    if len(scan_up.omega_L) != len(scan_down.omega_L):
        raise DomainError("up and down scans must share a grid")
    gamma = scan_up.linewidth
    w_up, area_up = _core(scan_up)
    w_down, area_down = _core(scan_down)
    if w_up >= width_factor * gamma and w_down >= width_factor * gamma:
        return Lineshape.DRAG

    # 순수 로렌츠 선형에서 최대값 80% 이상 구간의 면적
    reference = gamma * math.atan(0.5)
    x_up, y_up = _ascending(scan_up)
    x_down, y_down = _ascending(scan_down)
    hysteresis = float(np.max(np.abs(y_up - np.interp(x_up, x_down, y_down))))
    if area_up < area_ratio * reference and area_down < area_ratio * reference \
            and hysteresis > hysteresis_tol:
        return Lineshape.ANTI_DRAG
    return Lineshape.NEUTRAL


def fit_lorentzian_width(scan: DragScan) -> Tuple[float, float]:
    """(center, FWHM) in μeV from a least-squares Lorentzian fit"""
    x, y = _ascending(scan)

    def model(w, amp, x0, fwhm):
        return amp / (1.0 + (2.0 * (w - x0) / fwhm) ** 2)

    p0 = [float(y.max()), float(x[np.argmax(y)]), scan.linewidth]
    try:
        popt, _ = curve_fit(model, x, y, p0=p0)
    except RuntimeError as e:
        raise ConvergenceError(f"Lorentzian fit failed: {e}")
    return float(popt[1]), float(abs(popt[2]))


def scan_pair(bath: NuclearBathParameters, ground_spin: str,
              sweep: SweepSettings = DEFAULT_SWEEP, center: float = 0.0) -> Tuple[DragScan, DragScan]:
    return (drag_sweep(bath, ground_spin, sweep, "up", center),
            drag_sweep(bath, ground_spin, sweep, "down", center))


def simulate_labels(tset: TransitionSet, bath: NuclearBathParameters = DEFAULT_BATH,
                    sweep: SweepSettings = DEFAULT_SWEEP) -> Tuple[str, str, str, str]:
    """D/A/neutral label for E1..E4"""
    by_spin: Dict[str, Lineshape] = {}
    labels = []
    for spin in tset.ground_spin:
        if spin not in by_spin:
            # 선형 분류는 바닥 스핀에만 의존 (선 중심과 무관)
            by_spin[spin] = classify_lineshape(*scan_pair(bath, spin, sweep))
        labels.append(by_spin[spin].value)
    logger.info(f"simulated lineshape labels: {labels}")
    return tuple(labels)


_PATTERNS = {
    MagnitudeOrder.ELECTRON_SMALLER: {("D", "A", "D", "A"): 1, ("A", "D", "A", "D"): -1},
    MagnitudeOrder.ELECTRON_LARGER: {("D", "D", "A", "A"): 1, ("A", "A", "D", "D"): -1},
}


# 필드가 두 쌍극자 축 사이 한가운데 있으면 parallel/perpendicular 로는 판단 불가
OBLIQUE_TOLERANCE = math.radians(5.0)


def _axis_distance(a: float, b: float) -> float:
    d = (a - b) % math.pi
    return min(d, math.pi - d)


def tdm_signs_agree(tdm_14_angle: float, phi: float) -> bool:
    """
    E1/E4 쌍극자 축(실험실 각, mod π)으로 g_⊥ 부호가 같은지 판단

    같은 부호면 축이 -φ, 다른 부호면 -φ + π/2 에 놓인다.
    """
    along, _ = voigt_tdm_angles(1, 1, phi)
    distance = _axis_distance(tdm_14_angle, along)
    if abs(distance - math.pi / 4) < OBLIQUE_TOLERANCE:
        raise DomainError(
            f"E1/E4 axis {math.degrees(tdm_14_angle):.1f}° is oblique to both dipole axes at "
            f"phi={math.degrees(phi):.1f}°; the sign relation is undetermined"
        )
    return distance < math.pi / 4


def infer_signs(tdm_14_parallel_B: bool, labels: Sequence[str],
                magnitude_order: MagnitudeOrder = MagnitudeOrder.ELECTRON_SMALLER,
                hyperfine_sign: int = 1, phi: float = 0.0,
                tdm_14_angle: Optional[float] = None) -> Tuple[int, int]:
    """
    Signs of the in-plane electron and trion g-factors.

    D marks a line whose ground electron spin points along B (for a > 0). The
    E1/E4 dipole orientation fixes whether the two signs agree; the dipoles
    counter-rotate with the field, so the parallel/perpendicular flag is read
    against B at the in-plane angle phi. A measured axis in tdm_14_angle takes
    precedence over the flag.

    sample_usage:
        infer_signs(False, "DADA", phi=math.pi / 4)    # (1, 1)
    """
    labels = tuple(str(label).strip().upper() for label in labels)
    if len(labels) != 4:
        raise InconsistencyError(f"need four labels, got {len(labels)}", constraint="four transitions")
    if any(label not in ("D", "A") for label in labels):
        raise InconsistencyError(f"labels must be D or A, got {labels}", constraint="D/A only")
    if labels.count("D") != 2:
        raise InconsistencyError(f"labels {labels} do not split into two D and two A",
                                 constraint="two spin manifolds")
    order = MagnitudeOrder(magnitude_order)
    if hyperfine_sign < 0:
        labels = tuple("A" if label == "D" else "D" for label in labels)
    try:
        sign_e = _PATTERNS[order][labels]
    except KeyError:
        raise InconsistencyError(
            f"label pattern {labels} is not a level-scheme pattern for |g_e| {order.value[1]} |g_t|",
            constraint=f"ground-spin pattern for {order.value}",
        )
    if tdm_14_angle is None:
        tdm_14_angle = phi if tdm_14_parallel_B else phi + 0.5 * math.pi
    sign_t = sign_e if tdm_signs_agree(tdm_14_angle, phi) else -sign_e
    return sign_e, sign_t


def sample_usage():
    up, down = scan_pair(DEFAULT_BATH, UP)
    print("spin up:", classify_lineshape(up, down).value)
    up, down = scan_pair(DEFAULT_BATH, DOWN)
    print("spin down:", classify_lineshape(up, down).value)
    print(infer_signs(True, ["D", "A", "D", "A"]))
    print("phi=45°, E1 perpendicular to B:", infer_signs(False, ["D", "A", "D", "A"], phi=math.pi / 4))


if __name__ == "__main__":
    sample_usage()
