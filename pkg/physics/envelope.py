"""
Single-band effective-mass envelope solver for droplet-etched GaAs dots.

This is a design surrogate, not a multi-band k·p calculation: it turns a nanohole
profile plus filling height h and barrier Al fraction r into electron and hole
confinement energies, an emission wavelength and an electron g estimate. Trends
in (h, r) and the g = 0 wavelength window are what it is meant to reproduce.

Units: lengths nm, confinement energies meV, band parameters eV.
"""

import math
import logging
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, fields
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.ndimage import gaussian_filter
from scipy.sparse.linalg import eigsh, ArpackNoConvergence

from physics.errors import DomainError, ConvergenceError, ConfigError, QDModelError
from physics.spinmodel import CONSTANTS, roth_g

logger = logging.getLogger(__name__)

CONDUCTION = "conduction"
VALENCE = "valence"

SWEEP_COLUMNS = ['h_nm', 'r', 'lambda_nm', 'g_e_estimate', 'barrier_occupancy']


@dataclass(frozen=True)
class MaterialRecord:
    lattice_constant: float     # Å
    E_g: float                  # eV
    VBO: float                  # eV
    E_p: float                  # eV
    m_e: float                  # m0
    Delta_SO: float             # eV
    gamma1: float
    gamma2: float
    gamma3: float
    e14: float                  # C/m²
    B114: float
    B124: float
    B156: float
    C_k: float                  # eV·Å
    a_c: float                  # eV
    a_v: float
    b_v: float
    d_v: float
    c11: float                  # GPa
    c12: float
    c44: float
    eps_r: float
    g: float
    kappa: float
    q: float

    @property
    def conduction_edge(self) -> float:
        return self.VBO + self.E_g

    @property
    def hole_mass(self) -> float:
        return hole_mass(self)


# 물질 표를 온전히 두기 위한 값 - 단일 밴드 계산에서는 읽지 않음
STORED_ONLY = frozenset({
    'lattice_constant', 'gamma3', 'e14', 'B114', 'B124', 'B156', 'C_k',
    'a_c', 'a_v', 'b_v', 'd_v', 'c11', 'c12', 'c44', 'eps_r', 'kappa', 'q',
})

GAAS = MaterialRecord(
    lattice_constant=5.642, E_g=1.519, VBO=-0.80, E_p=28.8, m_e=0.0665, Delta_SO=0.341,
    gamma1=6.98, gamma2=2.06, gamma3=2.93, e14=-0.205, B114=-0.99, B124=-3.21, B156=-1.28,
    C_k=-0.0034, a_c=-7.17, a_v=1.16, b_v=-2.0, d_v=-4.8, c11=1211, c12=566, c44=600,
    eps_r=12.4, g=-0.44, kappa=1.28, q=0.04,
)

ALAS = MaterialRecord(
    lattice_constant=5.652, E_g=3.099, VBO=-1.32, E_p=21.1, m_e=0.15, Delta_SO=0.28,
    gamma1=3.76, gamma2=0.82, gamma3=1.42, e14=-0.055, B114=-1.61, B124=-2.59, B156=-1.32,
    C_k=0.002, a_c=-5.64, a_v=2.47, b_v=-2.3, d_v=-3.4, c11=1250, c12=534, c44=542,
    eps_r=10.06, g=1.52, kappa=0.12, q=0.04,
)


@dataclass(frozen=True)
class MaterialTable:
    gaas: MaterialRecord = GAAS
    alas: MaterialRecord = ALAS
    # E_g bowing C(x) = c0 + c1·x
    bowing_c0: float = -0.13
    bowing_c1: float = 1.31

    @classmethod
    def from_csv(cls, path: str) -> "MaterialTable":
        """CSV with columns parameter,GaAs,AlAs plus optional bowing_c0/bowing_c1 rows"""
        try:
            df = pd.read_csv(path, comment='#').set_index('parameter')
        except FileNotFoundError:
            raise ConfigError(f"material table not found: {path}", path=path)
        except (KeyError, ValueError) as e:
            raise ConfigError(f"malformed material table {path}: {e}", path=path)
        names = [f.name for f in fields(MaterialRecord)]
        missing = [n for n in names if n not in df.index]
        if missing:
            raise ConfigError(f"material table {path} lacks {missing}", path=path)
        gaas = MaterialRecord(**{n: float(df.loc[n, 'GaAs']) for n in names})
        alas = MaterialRecord(**{n: float(df.loc[n, 'AlAs']) for n in names})
        c0 = float(df.loc['bowing_c0', 'GaAs']) if 'bowing_c0' in df.index else -0.13
        c1 = float(df.loc['bowing_c1', 'GaAs']) if 'bowing_c1' in df.index else 1.31
        return cls(gaas, alas, c0, c1)


DEFAULT_MATERIALS = MaterialTable()


def material_interp(x: float, table: MaterialTable = DEFAULT_MATERIALS) -> MaterialRecord:
    """Al_x Ga_(1-x) As by linear interpolation, with band-gap bowing"""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"Al fraction must lie in [0, 1], got {x}")
    if x == 0.0:
        return table.gaas
    if x == 1.0:
        return table.alas
    values = {}
    for f in fields(MaterialRecord):
        values[f.name] = (1 - x) * getattr(table.gaas, f.name) + x * getattr(table.alas, f.name)
    values['E_g'] -= x * (1 - x) * (table.bowing_c0 + table.bowing_c1 * x)
    return MaterialRecord(**values)


def hole_mass(record: MaterialRecord) -> float:
    """Heavy-hole mass along growth, used isotropically"""
    denom = record.gamma1 - 2 * record.gamma2
    if denom <= 0:
        raise DomainError(f"gamma1 - 2*gamma2 must be positive, got {denom}")
    return 1.0 / denom


def _band_fields(x: np.ndarray, table: MaterialTable) -> Dict[str, np.ndarray]:
    """Vectorized interpolation of the parameters the solver needs"""
    g, a = table.gaas, table.alas
    lin = lambda name: (1 - x) * getattr(g, name) + x * getattr(a, name)
    E_g = lin('E_g') - x * (1 - x) * (table.bowing_c0 + table.bowing_c1 * x)
    VBO = lin('VBO')
    return {
        'conduction_edge': VBO + E_g,
        'valence_edge': VBO,
        'm_e': lin('m_e'),
        'm_h': 1.0 / (lin('gamma1') - 2 * lin('gamma2')),
    }


@dataclass
class NanoholeProfile:
    depth: np.ndarray    # (ny, nx), nm below the surface
    pitch: float         # nm

    def __post_init__(self):
        self.depth = np.asarray(self.depth, dtype=float)
        if self.depth.ndim != 2 or min(self.depth.shape) < 16:
            raise DomainError(f"nanohole grid must be at least 16x16, got {self.depth.shape}")
        if np.any(self.depth < 0) or not np.all(np.isfinite(self.depth)):
            raise DomainError("nanohole depths must be finite and non-negative")
        if self.pitch <= 0:
            raise DomainError(f"pitch must be positive, got {self.pitch}")

    @property
    def x(self) -> np.ndarray:
        nx = self.depth.shape[1]
        return (np.arange(nx) - (nx - 1) / 2) * self.pitch

    @property
    def y(self) -> np.ndarray:
        ny = self.depth.shape[0]
        return (np.arange(ny) - (ny - 1) / 2) * self.pitch

    @property
    def max_depth(self) -> float:
        return float(self.depth.max())


def default_nanohole(diameter: float = 70.0, depth: float = 10.0, pitch: float = 1.0,
                     size: float = 100.0) -> NanoholeProfile:
    """Paraboloidal nanohole standing in for an AFM scan"""
    n = int(round(size / pitch)) + 1
    c = (np.arange(n) - (n - 1) / 2) * pitch
    X, Y = np.meshgrid(c, c)
    rho2 = (X ** 2 + Y ** 2) / (0.5 * diameter) ** 2
    return NanoholeProfile(depth * np.clip(1.0 - rho2, 0.0, None), pitch)


def load_nanohole_csv(path: str) -> NanoholeProfile:
    try:
        df = pd.read_csv(path, comment='#')
    except FileNotFoundError:
        raise ConfigError(f"nanohole file not found: {path}", path=path)
    if list(df.columns[:3]) != ['x_nm', 'y_nm', 'depth_nm']:
        raise ConfigError(f"{path}: expected header x_nm,y_nm,depth_nm", path=path)
    xs = np.unique(df['x_nm'].values)
    ys = np.unique(df['y_nm'].values)
    if len(xs) * len(ys) != len(df):
        raise ConfigError(f"{path}: heightmap is not a full grid", path=path)
    dx, dy = np.diff(xs), np.diff(ys)
    pitch = float(dx[0]) if len(dx) else 0.0
    if not (np.allclose(dx, pitch) and np.allclose(dy, pitch)):
        raise ConfigError(f"{path}: heightmap grid must be uniform with equal pitch", path=path)
    grid = df.pivot(index='y_nm', columns='x_nm', values='depth_nm').values
    return NanoholeProfile(grid, pitch)


def save_nanohole_csv(profile: NanoholeProfile, path: str) -> None:
    X, Y = np.meshgrid(profile.x, profile.y)
    pd.DataFrame({'x_nm': X.ravel(), 'y_nm': Y.ravel(), 'depth_nm': profile.depth.ravel()}) \
        .to_csv(path, index=False, float_format='%.10g', lineterminator='\n')


@dataclass(frozen=True)
class QDGeometry:
    profile: NanoholeProfile
    fill_height: float            # h, nm of GaAs above the hole bottom
    al_fraction: float            # r
    interface_sigma: float = 1.5  # nm

    def __post_init__(self):
        if self.fill_height <= 0:
            raise DomainError(f"fill height must be > 0, got {self.fill_height}")
        if not 0.0 <= self.al_fraction <= 1.0:
            raise DomainError(f"Al fraction must lie in [0, 1], got {self.al_fraction}")
        if self.interface_sigma < 0:
            raise DomainError(f"interface_sigma must be >= 0, got {self.interface_sigma}")


@dataclass(frozen=True)
class GridSettings:
    lateral_step: float = 2.0     # nm
    vertical_step: float = 0.5    # nm
    padding: float = 15.0         # nm of barrier around the dot


DEFAULT_GRID = GridSettings()


@dataclass
class PotentialGrid:
    potential: np.ndarray         # meV, (nz, ny, nx)
    mass: np.ndarray              # m0
    steps: Tuple[float, float, float]
    barrier_weight: np.ndarray    # local Al fraction / nominal r, 0 inside pure GaAs
    band: str = CONDUCTION

    @classmethod
    def uniform(cls, shape: Tuple[int, int, int], step: float, mass: float,
                potential: Optional[np.ndarray] = None) -> "PotentialGrid":
        V = np.zeros(shape) if potential is None else np.asarray(potential, dtype=float)
        return cls(V, np.full(shape, float(mass)), (step, step, step), np.zeros(shape))

    @property
    def size(self) -> int:
        return self.potential.size


def _gaas_indicator(geom: QDGeometry, grid: GridSettings):
    profile = geom.profile
    z_top = min(-profile.max_depth + geom.fill_height, 0.0)
    fill = profile.depth >= (-z_top)
    rows, cols = np.nonzero(fill)
    stride = max(1, int(round(grid.lateral_step / profile.pitch)))
    pad = int(math.ceil(grid.padding / profile.pitch))
    ny, nx = profile.depth.shape
    r0, r1 = max(rows.min() - pad, 0), min(rows.max() + pad, ny - 1)
    c0, c1 = max(cols.min() - pad, 0), min(cols.max() + pad, nx - 1)
    row_idx = np.arange(r0, r1 + 1, stride)
    col_idx = np.arange(c0, c1 + 1, stride)
    depth = profile.depth[np.ix_(row_idx, col_idx)]

    z = np.arange(-profile.max_depth - grid.padding, z_top + grid.padding + 1e-9, grid.vertical_step)
    Z = z[:, None, None]
    inside = (Z >= -depth[None, :, :]) & (Z <= z_top)
    dy = stride * profile.pitch
    return inside.astype(float), (grid.vertical_step, dy, dy)


def build_potential(geom: QDGeometry, band: str = CONDUCTION, grid: GridSettings = DEFAULT_GRID,
                    table: MaterialTable = DEFAULT_MATERIALS) -> PotentialGrid:
    if band not in (CONDUCTION, VALENCE):
        raise DomainError(f"band must be '{CONDUCTION}' or '{VALENCE}', got {band!r}")
    indicator, steps = _gaas_indicator(geom, grid)
    x = geom.al_fraction * (1.0 - indicator)
    if geom.interface_sigma > 0 and geom.al_fraction > 0:
        x = gaussian_filter(x, sigma=[geom.interface_sigma / s for s in steps], mode='nearest')
        x = np.clip(x, 0.0, geom.al_fraction)

    bands = _band_fields(x, table)
    ref = _band_fields(np.zeros(1), table)
    if band == CONDUCTION:
        V = (bands['conduction_edge'] - ref['conduction_edge'][0]) * 1e3
        m = bands['m_e']
    else:
        # 홀 에너지는 GaAs 가전자대 끝에서 아래쪽으로 잰다
        V = (ref['valence_edge'][0] - bands['valence_edge']) * 1e3
        m = bands['m_h']
    weight = x / geom.al_fraction if geom.al_fraction > 0 else np.zeros_like(x)
    logger.debug(f"{band} potential h={geom.fill_height} r={geom.al_fraction}: grid {V.shape}, "
                 f"offset {V.max():.1f} meV")
    return PotentialGrid(V, m, steps, weight, band)


def hamiltonian_matrix(pot: PotentialGrid) -> sparse.csr_matrix:
    """BenDaniel-Duke finite differences with hard walls one step outside the grid"""
    inv_m = 1.0 / pot.mass
    shape = inv_m.shape
    n = inv_m.size
    idx = np.arange(n).reshape(shape)
    diag = np.array(pot.potential, dtype=float, copy=True)
    rows, cols, vals = [], [], []
    for axis, h in enumerate(pot.steps):
        c = CONSTANTS.hbar2_over_2m0 / h ** 2
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        face = 0.5 * (inv_m[lo] + inv_m[hi])
        diag[lo] += c * face
        diag[hi] += c * face
        first = [slice(None)] * 3
        last = [slice(None)] * 3
        first[axis] = 0
        last[axis] = -1
        diag[tuple(first)] += c * inv_m[tuple(first)]
        diag[tuple(last)] += c * inv_m[tuple(last)]
        off = -c * face.ravel()
        rows += [idx[lo].ravel(), idx[hi].ravel()]
        cols += [idx[hi].ravel(), idx[lo].ravel()]
        vals += [off, off]
    H = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return (H + sparse.diags(diag.ravel())).tocsr()


@dataclass
class EnvelopeSolution:
    energy: float                   # meV above the GaAs band edge
    wavefunction: np.ndarray        # Σ|ψ|² = 1 on the grid
    barrier_occupancy: float
    residual: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.barrier_occupancy <= 1.0 + 1e-12:
            raise DomainError(f"barrier occupancy {self.barrier_occupancy} outside [0, 1]")


def solve_ground_state(pot: PotentialGrid, tolerance: float = 1e-9, seed: int = 0,
                       maxiter: Optional[int] = None, sigma: Optional[float] = None) -> EnvelopeSolution:
    """
    Lowest eigenpair by Lanczos iteration.

    The three-point kinetic stencil underestimates curvature, so the discrete
    ground energy is not an upper bound: on a refining grid it rises toward the
    continuum value and the error shrinks roughly as step².

    sigma switches to shift-invert around that energy (meV); only worth it on
    small grids where the sparse factorization fits in memory.
    """
    if tolerance <= 0:
        raise DomainError(f"tolerance must be > 0, got {tolerance}")
    H = hamiltonian_matrix(pot)
    n = H.shape[0]
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        if sigma is None:
            vals, vecs = eigsh(H, k=1, which='SA', v0=v0, tol=tolerance, maxiter=maxiter,
                               ncv=min(n - 1, 40))
        else:
            vals, vecs = eigsh(H, k=1, sigma=sigma, which='LM', v0=v0, tol=tolerance, maxiter=maxiter)
    except ArpackNoConvergence as e:
        residual = None
        if len(e.eigenvalues):
            v = e.eigenvectors[:, 0]
            residual = float(np.linalg.norm(H @ v - e.eigenvalues[0] * v))
        raise ConvergenceError(f"eigensolver did not converge on {n} unknowns", residual=residual)

    energy = float(vals[0])
    psi = vecs[:, 0]
    psi = psi / np.linalg.norm(psi)
    # 전체 부호 고정 - 반복 계산 결과를 같게
    if psi.sum() < 0:
        psi = -psi
    residual = float(np.linalg.norm(H @ psi - energy * psi))
    density = psi ** 2
    occupancy = float(np.clip(np.sum(density * pot.barrier_weight.ravel()), 0.0, 1.0))
    logger.debug(f"{pot.band} ground state: E={energy:.4f} meV, residual={residual:.2e}, P_b={occupancy:.4f}")
    return EnvelopeSolution(energy, psi.reshape(pot.potential.shape), occupancy, residual)


def emission_energy(e_sol: EnvelopeSolution, h_sol: EnvelopeSolution, geom: Optional[QDGeometry] = None,
                    binding_energy: float = 0.0,
                    table: MaterialTable = DEFAULT_MATERIALS) -> Tuple[float, float]:
    """(E_X in eV, wavelength in nm); binding_energy in meV"""
    E_X = table.gaas.E_g + (e_sol.energy + h_sol.energy - binding_energy) * 1e-3
    return E_X, CONSTANTS.hc / E_X


def electron_g_surrogate(e_sol: EnvelopeSolution, h_sol: EnvelopeSolution, geom: QDGeometry,
                         table: MaterialTable = DEFAULT_MATERIALS) -> float:
    gaas = table.gaas
    g_dot = roth_g(gaas.E_p, gaas.E_g + (e_sol.energy + h_sol.energy) * 1e-3, gaas.Delta_SO)
    # g 는 x 에 선형, 보잉 없음
    g_barrier = (1 - geom.al_fraction) * gaas.g + geom.al_fraction * table.alas.g
    p_b = e_sol.barrier_occupancy
    return (1 - p_b) * g_dot + p_b * g_barrier


@dataclass
class SweepCell:
    h: float
    r: float
    lambda_nm: float = float('nan')
    g_e_estimate: float = float('nan')
    barrier_occupancy: float = float('nan')
    error: Optional[str] = None

    @property
    def is_success(self) -> bool:
        return self.error is None

    @property
    def is_error(self) -> bool:
        return self.error is not None


@dataclass
class SweepResult:
    table: pd.DataFrame
    failures: List[SweepCell] = dc_field(default_factory=list)


def evaluate_cell(profile: NanoholeProfile, h: float, r: float, grid: GridSettings = DEFAULT_GRID,
                  tolerance: float = 1e-9, seed: int = 0, binding_energy: float = 0.0,
                  interface_sigma: float = 1.5, table: MaterialTable = DEFAULT_MATERIALS) -> SweepCell:
    try:
        geom = QDGeometry(profile, h, r, interface_sigma)
        e_sol = solve_ground_state(build_potential(geom, CONDUCTION, grid, table), tolerance, seed)
        h_sol = solve_ground_state(build_potential(geom, VALENCE, grid, table), tolerance, seed)
        _, lam = emission_energy(e_sol, h_sol, geom, binding_energy, table)
        g = electron_g_surrogate(e_sol, h_sol, geom, table)
    except QDModelError as e:
        logger.warning(f"sweep cell h={h} r={r} failed: {e}")
        return SweepCell(h, r, error=f"{e.code.name}: {e}")
    logger.info(f"sweep cell h={h:.2f} nm r={r:.3f}: lambda={lam:.2f} nm g={g:+.4f}")
    return SweepCell(h, r, lam, g, e_sol.barrier_occupancy)


def design_sweep(profile: NanoholeProfile, h_values: Sequence[float], r_values: Sequence[float],
                 grid: GridSettings = DEFAULT_GRID, tolerance: float = 1e-9, seed: int = 0,
                 workers: Optional[int] = None, binding_energy: float = 0.0,
                 interface_sigma: float = 1.5, table: MaterialTable = DEFAULT_MATERIALS) -> SweepResult:
    """Evaluate every (h, r) cell; rows come back in (h, r) order"""
    if len(h_values) == 0 or len(r_values) == 0:
        raise DomainError("sweep ranges must be non-empty")
    cells = list(itertools.product([float(h) for h in h_values], [float(r) for r in r_values]))
    run = lambda hr: evaluate_cell(profile, hr[0], hr[1], grid, tolerance, seed,
                                   binding_energy, interface_sigma, table)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(hr) for hr in cells]

    rows = [{
        'h_nm': c.h, 'r': c.r, 'lambda_nm': c.lambda_nm,
        'g_e_estimate': c.g_e_estimate, 'barrier_occupancy': c.barrier_occupancy,
    } for c in results if c.is_success]
    failures = [c for c in results if c.is_error]
    if failures:
        logger.warning(f"{len(failures)} of {len(cells)} sweep cells failed")
    return SweepResult(pd.DataFrame(rows, columns=SWEEP_COLUMNS), failures)


def default_h_values() -> np.ndarray:
    return np.arange(3.0, 8.5 + 1e-9, 0.5)


def zero_crossing(table: pd.DataFrame) -> float:
    """Wavelength (nm) where g_e_estimate changes sign, by linear interpolation"""
    df = table.dropna(subset=['lambda_nm', 'g_e_estimate']).sort_values('lambda_nm')
    lam = df['lambda_nm'].values
    g = df['g_e_estimate'].values
    for i in range(len(g) - 1):
        if g[i] == 0.0:
            return float(lam[i])
        if g[i] * g[i + 1] < 0:
            return float(lam[i] + (lam[i + 1] - lam[i]) * g[i] / (g[i] - g[i + 1]))
    raise DomainError("g_e_estimate does not change sign over the sweep")


def sample_usage():
    profile = default_nanohole()
    result = design_sweep(profile, [4.0, 6.0, 8.0], [0.25])
    print(result.table)
    print(f"Eg(Al0.25GaAs) = {material_interp(0.25).E_g:.4f} eV")


if __name__ == "__main__":
    sample_usage()
