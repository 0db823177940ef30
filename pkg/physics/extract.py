"""
Spectral analysis: doublet fitting, g-factors from line centers, rectilinear
Stokes estimates, FSS cosine fits, plus synthetic spectra and gate-voltage maps
for closing the loop against the forward model.

Energies are canonicalized to μeV on load.
"""

import math
import logging
from dataclasses import dataclass, field as dc_field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from physics.errors import ConfigError, DomainError, UnresolvedDoubletError
from physics.optics import TransitionSet, rate_at
from physics.spinmodel import CONSTANTS, ghz_to_ueV, ueV_to_ghz

logger = logging.getLogger(__name__)

_UNIT_SCALE = {'eV': 1e6, 'meV': 1e3, 'ueV': 1.0}


@dataclass
class Spectrum:
    energy: np.ndarray    # μeV
    counts: np.ndarray

    def __post_init__(self):
        self.energy = np.asarray(self.energy, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.energy.shape != self.counts.shape or self.energy.ndim != 1:
            raise DomainError("energy and counts must be 1D arrays of equal length")
        if len(self.energy) < 2 or np.any(np.diff(self.energy) <= 0):
            raise DomainError("energy grid must be strictly increasing")
        if np.any(self.counts < 0):
            raise DomainError("counts must be non-negative")


@dataclass
class PolarizationSeries:
    angle: np.ndarray     # rad
    value: np.ndarray

    def __post_init__(self):
        self.angle = np.asarray(self.angle, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        if self.angle.shape != self.value.shape or self.angle.ndim != 1:
            raise DomainError("angle and value must be 1D arrays of equal length")


@dataclass
class DoubletFit:
    centers: Tuple[float, float]
    sigma: float
    amplitudes: Tuple[float, float]
    baseline: float
    residual: float
    uncertainties: Dict[str, float] = dc_field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            'center1_ueV': self.centers[0],
            'center2_ueV': self.centers[1],
            'sigma_ueV': self.sigma,
            'amplitude1': self.amplitudes[0],
            'amplitude2': self.amplitudes[1],
            'baseline': self.baseline,
            'residual': self.residual,
            'uncertainties': self.uncertainties,
        }


@dataclass
class FSSResult:
    fss_ueV: float
    eta: float          # rad in [0, π); nan when is_zero
    offset: float
    residual_rms: float
    is_zero: bool = False

    @property
    def fss_GHz(self) -> float:
        return ueV_to_ghz(self.fss_ueV)

    @property
    def eta_deg(self) -> float:
        return math.degrees(self.eta)


def _double_gaussian(E, c1, c2, sigma, a1, a2, b):
    return (a1 * np.exp(-0.5 * ((E - c1) / sigma) ** 2)
            + a2 * np.exp(-0.5 * ((E - c2) / sigma) ** 2) + b)


def guess_doublet_centers(s: Spectrum) -> Tuple[float, float]:
    """Two strongest local maxima, or the weight quartiles when only one is visible"""
    peaks, props = find_peaks(s.counts, prominence=0.05 * float(s.counts.max()))
    if len(peaks) >= 2:
        best = peaks[np.argsort(props['prominences'])[-2:]]
        c1, c2 = sorted(float(s.energy[i]) for i in best)
        return c1, c2
    weight = np.cumsum(s.counts)
    weight = weight / weight[-1]
    return float(np.interp(0.25, weight, s.energy)), float(np.interp(0.75, weight, s.energy))


def fit_double_gaussian(s: Spectrum, init: Optional[Tuple[float, float]] = None,
                        sigma0: Optional[float] = None) -> DoubletFit:
    """Least-squares doublet with a shared width and a flat baseline"""
    if init is None:
        init = guess_doublet_centers(s)
    lo, hi = s.energy[0], s.energy[-1]
    if not all(lo <= c <= hi for c in init):
        raise DomainError(f"initial centers {init} outside the spectrum [{lo}, {hi}]")

    # 평균 에너지 기준 좌표로 피팅 (조건수)
    ref = float(s.energy.mean())
    E = s.energy - ref
    c1, c2 = sorted(init)
    step = float(np.median(np.diff(s.energy)))
    if sigma0 is None:
        sigma0 = max(0.5 * (c2 - c1), 3 * step)
    peak = float(s.counts.max())
    p0 = [c1 - ref, c2 - ref, sigma0,
          float(np.interp(c1, s.energy, s.counts)), float(np.interp(c2, s.energy, s.counts)),
          float(s.counts.min())]
    try:
        popt, pcov = curve_fit(_double_gaussian, E, s.counts, p0=p0, maxfev=20000)
    except (RuntimeError, ValueError) as e:
        raise UnresolvedDoubletError(f"double-Gaussian fit did not converge: {e}")

    f1, f2, sigma, a1, a2, b = popt
    sigma = abs(sigma)
    if f1 > f2:
        f1, f2, a1, a2 = f2, f1, a2, a1
    if abs(f2 - f1) < 0.25 * sigma:
        raise UnresolvedDoubletError(f"centers {f1 + ref:.3f}/{f2 + ref:.3f} μeV merge below sigma/4")
    strong = max(a1, a2)
    if strong <= 0 or min(a1, a2) < 0.02 * strong:
        raise UnresolvedDoubletError(f"one component vanishes: amplitudes {a1:.4g}, {a2:.4g}")

    model = _double_gaussian(E, *popt)
    residual = float(np.sqrt(np.mean((s.counts - model) ** 2)) / peak)
    perr = np.sqrt(np.abs(np.diag(pcov))) if np.all(np.isfinite(pcov)) else np.full(6, np.nan)
    fit = DoubletFit(
        centers=(float(f1 + ref), float(f2 + ref)),
        sigma=float(sigma),
        amplitudes=(float(a1), float(a2)),
        baseline=float(b),
        residual=residual,
        uncertainties={'center1': float(perr[0]), 'center2': float(perr[1]), 'sigma': float(perr[2])},
    )
    logger.debug(f"doublet fit: centers={fit.centers} sigma={fit.sigma:.3f} μeV residual={residual:.2e}")
    return fit


def g_from_centers(w1: float, w2: float, w3: float, w4: float, B: float,
                   unit: str = 'eV') -> Tuple[float, float]:
    """
    (|g_e|, |g_t|) from the four ascending line centers.

    The assignment assumes |g_e| < |g_t|; for the opposite ordering the two
    returned values are exchanged. Signs are not recoverable from positions.
    """
    if B <= 0:
        raise DomainError(f"B must be > 0, got {B}")
    if unit not in _UNIT_SCALE:
        raise DomainError(f"unknown energy unit {unit!r}")
    scale = _UNIT_SCALE[unit]
    omega_e = ((w2 - w1) / 2 + (w4 - w3) / 2) * scale
    omega_t = ((w1 + w2) / 2 - (w3 + w4) / 2) * scale
    mu_b_B = CONSTANTS.mu_B * B
    return abs(omega_e) / mu_b_B, abs(omega_t) / mu_b_B


def rectilinear_stokes_from_areas(A1: float, A2: float) -> float:
    """
    Lower bound on the rectilinear Stokes component from two line areas, A1/(A1+A2).

    The orthogonal analyzer set carries the negative of this value. See
    rectilinear_stokes_conventional for the (A1-A2)/(A1+A2) estimate.
    """
    if A1 < 0 or A2 < 0:
        raise DomainError(f"areas must be non-negative, got {A1}, {A2}")
    if A1 + A2 == 0:
        raise DomainError("both areas are zero")
    return A1 / (A1 + A2)


def rectilinear_stokes_conventional(A1: float, A2: float) -> float:
    if A1 < 0 or A2 < 0:
        raise DomainError(f"areas must be non-negative, got {A1}, {A2}")
    if A1 + A2 == 0:
        raise DomainError("both areas are zero")
    return (A1 - A2) / (A1 + A2)


def fss_fit(series: PolarizationSeries, noise_sigma: float = 3.0) -> FSSResult:
    """value(β) = offset + (fss/2)·cos(2(β − η)) by linear least squares"""
    beta = series.angle
    n = len(beta)
    if n < 8:
        raise DomainError(f"need at least 8 samples, got {n}")
    span = float(beta.max() - beta.min())
    if span + span / (n - 1) < math.pi - 1e-9:
        raise DomainError(f"angles must cover half a turn, span is {math.degrees(span):.1f}°")

    A = np.column_stack([np.ones(n), np.cos(2 * beta), np.sin(2 * beta)])
    coef, _, _, _ = np.linalg.lstsq(A, series.value, rcond=None)
    offset, a, b = (float(c) for c in coef)
    amp = math.hypot(a, b)
    rms = float(np.sqrt(np.mean((series.value - A @ coef) ** 2)))
    # n 개 샘플 코사인 피팅의 진폭 표준오차
    floor = max(noise_sigma * rms * math.sqrt(2.0 / n), 1e-12 * max(1.0, abs(offset)))
    if amp <= floor:
        logger.warning(f"FSS amplitude {2 * amp:.3g} below noise floor {2 * floor:.3g}")
        return FSSResult(0.0, float('nan'), offset, rms, is_zero=True)
    eta = (0.5 * math.atan2(b, a)) % math.pi
    return FSSResult(2 * amp, eta, offset, rms)


def synth_spectrum(tset: TransitionSet, alpha: float, sigma: float, energies: Sequence[float],
                   noise: float = 0.0, seed: int = 0, amplitude: float = 1.0,
                   baseline: float = 0.0) -> Spectrum:
    """Spectrometer-limited Gaussian lines weighted by the rate through the analyzer"""
    if sigma <= 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    E = np.asarray(energies, dtype=float)
    counts = np.full_like(E, baseline)
    for n in range(1, 5):
        weight = rate_at(tset, n, alpha)
        counts += amplitude * weight * np.exp(-0.5 * ((E - tset.energies[n - 1]) / sigma) ** 2)
    if noise > 0:
        counts += noise * amplitude * np.random.default_rng(seed).standard_normal(E.shape)
    return Spectrum(E, np.clip(counts, 0.0, None))


def synth_rf_map(tset: TransitionSet, stark_slope: float, windows: Sequence[Tuple[float, float]],
                 gate_voltages: Sequence[float], laser_energies: Sequence[float],
                 linewidth_GHz: float = 0.72, laser_alpha: Optional[float] = None) -> pd.DataFrame:
    """
    Resonance-fluorescence intensity vs gate voltage and laser energy (long format).

    Lines shift by stark_slope (GHz/V) and only appear inside the bright gate windows.
    """
    if len(windows) == 0:
        raise DomainError("at least one bright gate window is required")
    if linewidth_GHz <= 0:
        raise DomainError(f"linewidth must be > 0, got {linewidth_GHz}")
    fwhm = ghz_to_ueV(linewidth_GHz)
    V = np.asarray(gate_voltages, dtype=float)
    L = np.asarray(laser_energies, dtype=float)
    VV, LL = np.meshgrid(V, L, indexing='ij')
    bright = np.zeros_like(VV, dtype=bool)
    for v0, v1 in windows:
        bright |= (VV >= min(v0, v1)) & (VV <= max(v0, v1))

    intensity = np.zeros_like(VV)
    for n in range(1, 5):
        s = tset.stokes[n - 1]
        weight = s.s0 if laser_alpha is None else rate_at(tset, n, laser_alpha)
        if weight == 0:
            continue
        center = tset.energies[n - 1] + ghz_to_ueV(stark_slope * VV)
        intensity += weight / (1.0 + (2.0 * (LL - center) / fwhm) ** 2)
    intensity = np.where(bright, intensity, 0.0)
    return pd.DataFrame({'gate_V': VV.ravel(), 'laser_ueV': LL.ravel(), 'intensity': intensity.ravel()})


def load_spectrum_csv(path: str) -> Spectrum:
    """energy_eV,counts / energy_meV,counts / energy_ueV,counts"""
    try:
        df = pd.read_csv(path, comment='#')
    except FileNotFoundError:
        raise ConfigError(f"spectrum file not found: {path}", path=path)
    unit = None
    for candidate in _UNIT_SCALE:
        if f"energy_{candidate}" in df.columns:
            unit = candidate
    if unit is None or 'counts' not in df.columns:
        raise ConfigError(f"{path}: expected header energy_<eV|meV|ueV>,counts", path=path)
    return Spectrum(df[f"energy_{unit}"].values * _UNIT_SCALE[unit], df['counts'].values)


def load_series_csv(path: str) -> PolarizationSeries:
    """angle_deg,value or angle_rad,value"""
    try:
        df = pd.read_csv(path, comment='#')
    except FileNotFoundError:
        raise ConfigError(f"series file not found: {path}", path=path)
    if 'value' not in df.columns:
        raise ConfigError(f"{path}: missing 'value' column", path=path)
    if 'angle_deg' in df.columns:
        return PolarizationSeries(np.radians(df['angle_deg'].values), df['value'].values)
    if 'angle_rad' in df.columns:
        return PolarizationSeries(df['angle_rad'].values, df['value'].values)
    raise ConfigError(f"{path}: expected angle_deg or angle_rad column", path=path)


def sample_usage():
    print("line centers:", g_from_centers(1.687580, 1.687660, 1.687710, 1.687720, 6.0))
    print("Stokes areas:", rectilinear_stokes_from_areas(17, 3))
    beta = np.linspace(0, math.pi, 36, endpoint=False)
    result = fss_fit(PolarizationSeries(beta, 6.2 * np.cos(2 * (beta - math.radians(71)))))
    print(f"FSS {result.fss_ueV:.2f} μeV = {result.fss_GHz:.2f} GHz, eta {result.eta_deg:.1f}°")


if __name__ == "__main__":
    sample_usage()
