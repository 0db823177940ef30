"""
qd-spin-optics 명령행 진입점

sample_usage:
    python qd_cli.py transitions --B 5.8 --chi-deg 90 --phi-deg 0 --ge 0.08 --gt 0.13
    python qd_cli.py polmap --config qd.env --phi-step-deg 15
    python qd_cli.py dragscan --transition 1
    python qd_cli.py infer-signs --labels D,A,D,A --tdm14 parallel
    python qd_cli.py sweep --r 0.25 --h-min 3 --h-max 8.5
    python qd_cli.py extract --synthetic --sigma 5 --seed 7
    python qd_cli.py fss --series fss.csv
    python qd_cli.py stokes-areas --a1 17 --a2 3

Every subcommand prints its table and writes CSV under --out (default ./out).
Exit codes: 0 success, 1 model/numerical failure, 2 usage or configuration error.
"""

import os
import sys
import math
import logging
import argparse
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from physics import __version__
from physics.errors import QDModelError, ConfigError, DomainError, NumericalError
from physics.spinmodel import FieldConfiguration
from physics.optics import TransitionSet, build_transition_set, polarization_map, stokes_angle
from physics.hyperfine import (
    MagnitudeOrder, classify_lineshape, fit_lorentzian_width, infer_signs, scan_pair, simulate_labels,
)
from physics.envelope import design_sweep, zero_crossing
from physics.extract import (
    fit_double_gaussian, fss_fit, g_from_centers, load_series_csv, load_spectrum_csv,
    rectilinear_stokes_conventional, rectilinear_stokes_from_areas, synth_spectrum,
)
from utils.config import RunConfig, load_config
from utils.report import print_frame, write_csv, write_json

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

# CLI flag dest -> RunConfig attribute
_OVERRIDES = {
    'B': 'B', 'chi_deg': 'chi_deg', 'phi_deg': 'phi_deg',
    'ge': 'ge_perp', 'ge_z': 'ge_z', 'dge': 'dge_perp',
    'gt': 'gt_perp', 'gt_z': 'gt_z', 'dgt': 'dgt_perp',
    'trion_model': 'trion_model', 'omega_center': 'omega_center',
    'out': 'out_dir', 'seed': 'seed',
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="KEY=value config file")
    common.add_argument('--B', type=float, help="field magnitude (T)")
    common.add_argument('--chi-deg', type=float, help="polar angle from the growth axis (deg)")
    common.add_argument('--phi-deg', type=float, help="in-plane azimuth from [100] (deg)")
    common.add_argument('--ge', type=float, help="electron in-plane g")
    common.add_argument('--ge-z', type=float, help="electron out-of-plane g")
    common.add_argument('--dge', type=float, help="electron in-plane anisotropy")
    common.add_argument('--gt', type=float, help="trion in-plane g")
    common.add_argument('--gt-z', type=float, help="trion out-of-plane g")
    common.add_argument('--dgt', type=float, help="trion in-plane anisotropy")
    common.add_argument('--trion-model', choices=['gtensor', 'holemix'])
    common.add_argument('--omega-center', type=float, help="trion line center (μeV)")
    common.add_argument('--out', help="output directory")
    common.add_argument('--seed', type=int)
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true')
    verbosity.add_argument('--quiet', action='store_true')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog='qd_cli.py', description="GaAs quantum-dot spin and optics toolkit")
    parser.add_argument('--version', action='version', version=f"qd-spin-optics {__version__}")
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('transitions', parents=[common], help="four trion lines with Stokes vectors")

    p = sub.add_parser('polmap', parents=[common], help="normalized rates vs analyzer angle")
    p.add_argument('--alpha-step-deg', type=float, default=5.0)
    p.add_argument('--phi-step-deg', type=float, default=None,
                   help="also scan the in-plane field angle over [0, 180)")

    p = sub.add_parser('dragscan', parents=[common], help="up/down laser sweeps over one line")
    p.add_argument('--transition', type=int, default=1, choices=[1, 2, 3, 4])
    p.add_argument('--a', type=float, default=None, help="hyperfine constant override (μeV)")

    p = sub.add_parser('infer-signs', parents=[common], help="g-factor signs from D/A labels")
    p.add_argument('--labels', help="comma-separated D/A labels for E1..E4; simulated when omitted")
    p.add_argument('--tdm14', choices=['parallel', 'perpendicular'],
                   help="E1/E4 dipole orientation relative to B; taken from the model when omitted")
    p.add_argument('--tdm14-angle-deg', type=float, default=None,
                   help="measured E1/E4 dipole axis in the lab frame (deg); overrides --tdm14")
    p.add_argument('--order', choices=[m.value for m in MagnitudeOrder])
    p.add_argument('--a', type=float, default=None, help="hyperfine constant override (μeV)")

    p = sub.add_parser('sweep', parents=[common], help="envelope design sweep over fill height")
    p.add_argument('--r', type=float, nargs='+', help="Al fractions")
    p.add_argument('--h-min', type=float)
    p.add_argument('--h-max', type=float)
    p.add_argument('--h-step', type=float)
    p.add_argument('--workers', type=int)

    p = sub.add_parser('extract', parents=[common], help="doublet fits and g-factors from spectra")
    p.add_argument('--spectrum', action='append', default=[], help="CSV spectrum (repeatable)")
    p.add_argument('--synthetic', action='store_true', help="fit spectra synthesized from the model")
    p.add_argument('--sigma', type=float, default=5.0, help="synthetic spectrometer width (μeV)")
    p.add_argument('--noise', type=float, default=0.01, help="synthetic noise relative to peak")

    p = sub.add_parser('fss', parents=[common], help="fine-structure splitting from an angle series")
    p.add_argument('--series', required=True, help="CSV with angle_deg,value")
    p.add_argument('--noise-sigma', type=float, default=3.0)

    p = sub.add_parser('stokes-areas', parents=[common], help="rectilinear Stokes from two line areas")
    p.add_argument('--a1', type=float, required=True)
    p.add_argument('--a2', type=float, required=True)
    return parser


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    overrides = {attr: getattr(args, dest, None) for dest, attr in _OVERRIDES.items()}
    if args.command == 'sweep':
        overrides.update({'h_min': args.h_min, 'h_max': args.h_max, 'h_step': args.h_step,
                          'workers': args.workers})
    if getattr(args, 'a', None) is not None:
        overrides['bath_a'] = args.a
        overrides['bath_enforce_positive_a'] = False
    return load_config(args.config, overrides)


def transition_set(config: RunConfig, phi: Optional[float] = None) -> TransitionSet:
    field = config.field_configuration()
    if phi is not None:
        field = FieldConfiguration(field.B, field.chi, phi)
    if config.trion_model == 'holemix':
        return build_transition_set(config.electron_g(), field, config.hole_mixing(), config.omega_center,
                                    enabled=config.enabled_terms(), g_z_t=config.gt_z)
    return build_transition_set(config.electron_g(), field, config.trion_g(), config.omega_center)


def _out(config: RunConfig, name: str) -> str:
    return os.path.join(config.out_dir, name)


# subcommands -----------------------------------------------------------------

def cmd_transitions(args, config: RunConfig) -> int:
    tset = transition_set(config)
    df = tset.to_frame()
    print(f"omega_e = {tset.omega_e:.2f} μeV, omega_t = {tset.omega_t:.2f} μeV")
    print_frame("transitions", df)
    write_csv(df, _out(config, 'transitions.csv'), config)
    return 0


def cmd_polmap(args, config: RunConfig) -> int:
    if args.alpha_step_deg <= 0:
        raise DomainError(f"--alpha-step-deg must be > 0, got {args.alpha_step_deg}")
    alphas = np.radians(np.arange(0.0, 180.0, args.alpha_step_deg))
    if args.phi_step_deg is None:
        df = polarization_map(transition_set(config), alphas)
    else:
        if args.phi_step_deg <= 0:
            raise DomainError(f"--phi-step-deg must be > 0, got {args.phi_step_deg}")
        phis = np.radians(np.arange(0.0, 180.0, args.phi_step_deg))
        df = polarization_map(lambda phi: transition_set(config, phi), alphas, phis)
    print_frame("polarization map", df.groupby('transition')['rate_norm'].agg(['min', 'max']).reset_index())
    write_csv(df, _out(config, 'polmap.csv'), config)
    return 0


def cmd_dragscan(args, config: RunConfig) -> int:
    tset = transition_set(config)
    n = args.transition
    spin = tset.ground_spin[n - 1]
    up, down = scan_pair(config.bath(), spin, config.sweep(), center=tset.energies[n - 1])
    label = classify_lineshape(up, down)
    print(f"E{n}: ground spin {spin}, lineshape {label.value}")
    if label.value == "neutral":
        center, fwhm = fit_lorentzian_width(up)
        print(f"Lorentzian fit: center {center:.3f} μeV, FWHM {fwhm:.3f} μeV")
    df = pd.concat([up.to_frame(), down.to_frame()], ignore_index=True)
    write_csv(df, _out(config, f'dragscan_E{n}.csv'), config)
    return 0


def _tdm14_parallel(angle: float, phi: float) -> bool:
    """E1 쌍극자 축이 B 방향(φ, mod π)에 더 가까우면 parallel"""
    diff = (angle - phi) % math.pi
    return min(diff, math.pi - diff) < math.pi / 4


def cmd_infer_signs(args, config: RunConfig) -> int:
    tset = None
    phi = config.field_configuration().phi
    if args.labels:
        labels = [label.strip() for label in args.labels.split(',')]
    else:
        tset = transition_set(config)
        labels = list(simulate_labels(tset, config.bath(), config.sweep()))
    if args.tdm14_angle_deg is not None:
        angle = math.radians(args.tdm14_angle_deg)
        parallel = _tdm14_parallel(angle, phi)
    elif args.tdm14:
        angle = None
        parallel = args.tdm14 == 'parallel'
    else:
        tset = tset or transition_set(config)
        angle = stokes_angle(tset.stokes[0], tset.phi)
        parallel = _tdm14_parallel(angle, phi)
    if args.order:
        order = MagnitudeOrder(args.order)
    else:
        tset = tset or transition_set(config)
        order = MagnitudeOrder.ELECTRON_LARGER if tset.omega_e > tset.omega_t else MagnitudeOrder.ELECTRON_SMALLER
    hyperfine_sign = 1 if config.bath_a > 0 else -1
    sign_e, sign_t = infer_signs(parallel, labels, order, hyperfine_sign, phi=phi, tdm_14_angle=angle)
    df = pd.DataFrame([{
        'labels': ''.join(labels), 'phi_deg': math.degrees(phi), 'tdm14_parallel': parallel,
        'order': order.value, 'sign_g_e': sign_e, 'sign_g_t': sign_t,
    }])
    print_frame("g-factor signs", df)
    write_csv(df, _out(config, 'infer_signs.csv'), config)
    return 0


def cmd_sweep(args, config: RunConfig) -> int:
    r_values = args.r if args.r else [config.al_fraction]
    result = design_sweep(
        config.nanohole(), config.h_values(), r_values, config.grid(),
        seed=config.seed, workers=config.workers, binding_energy=config.binding_mev,
        interface_sigma=config.interface_sigma, table=config.materials(),
    )
    print_frame("envelope sweep", result.table)
    write_csv(result.table, _out(config, 'sweep.csv'), config)
    if result.failures:
        failures = pd.DataFrame([{'h_nm': c.h, 'r': c.r, 'error': c.error} for c in result.failures])
        write_csv(failures, _out(config, 'sweep_failures.csv'), config)
    if result.table.empty:
        raise NumericalError("every sweep cell failed", diagnostics={'cells': len(result.failures)})
    try:
        print(f"g_e zero crossing at {zero_crossing(result.table):.2f} nm")
    except DomainError as e:
        logger.info(f"no zero crossing: {e}")
    return 0


def _synthetic_spectra(config: RunConfig, sigma: float, noise: float) -> List:
    tset = transition_set(config)
    span = 0.5 * (tset.omega_e + tset.omega_t) + 6 * sigma
    energies = np.arange(tset.omega_center - span, tset.omega_center + span, 0.1)
    return [
        synth_spectrum(tset, alpha, sigma, energies, noise=noise, seed=config.seed + k)
        for k, alpha in enumerate((0.0, 0.5 * math.pi))
    ]


def cmd_extract(args, config: RunConfig) -> int:
    if args.synthetic:
        spectra = _synthetic_spectra(config, args.sigma, args.noise)
    elif args.spectrum:
        spectra = [load_spectrum_csv(path) for path in args.spectrum]
    else:
        raise ConfigError("extract needs --spectrum FILE or --synthetic")

    fits = [fit_double_gaussian(s) for s in spectra]
    df = pd.DataFrame([{k: v for k, v in f.to_record().items() if k != 'uncertainties'} for f in fits])
    print_frame("doublet fits", df)
    write_csv(df, _out(config, 'extract.csv'), config)

    record = {'doublets': [f.to_record() for f in fits]}
    if len(fits) == 2:
        centers = sorted(fits[0].centers + fits[1].centers)
        g_e, g_t = g_from_centers(*centers, B=config.B, unit='ueV')
        print(f"|g_e| = {g_e:.4f}, |g_t| = {g_t:.4f}")
        record.update({'centers_ueV': centers, 'g_e_abs': g_e, 'g_t_abs': g_t})
    write_json(record, _out(config, 'extract.json'), config)
    return 0


def cmd_fss(args, config: RunConfig) -> int:
    result = fss_fit(load_series_csv(args.series), args.noise_sigma)
    df = pd.DataFrame([{
        'fss_ueV': result.fss_ueV, 'fss_GHz': result.fss_GHz, 'eta_deg': result.eta_deg,
        'offset': result.offset, 'residual_rms': result.residual_rms, 'is_zero': result.is_zero,
    }])
    print_frame("fine structure splitting", df)
    write_csv(df, _out(config, 'fss.csv'), config)
    return 0


def cmd_stokes_areas(args, config: RunConfig) -> int:
    df = pd.DataFrame([{
        'A1': args.a1, 'A2': args.a2,
        's_lower_bound': rectilinear_stokes_from_areas(args.a1, args.a2),
        's_conventional': rectilinear_stokes_conventional(args.a1, args.a2),
    }])
    print_frame("rectilinear Stokes", df)
    write_csv(df, _out(config, 'stokes_areas.csv'), config)
    return 0


COMMANDS = {
    'transitions': cmd_transitions,
    'polmap': cmd_polmap,
    'dragscan': cmd_dragscan,
    'infer-signs': cmd_infer_signs,
    'sweep': cmd_sweep,
    'extract': cmd_extract,
    'fss': cmd_fss,
    'stokes-areas': cmd_stokes_areas,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help / --version exit 0, usage errors exit 2
        return int(e.code) if isinstance(e.code, int) else (0 if e.code is None else 2)

    configure_logging(args)
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](args, config)
    except ConfigError as e:
        logger.error(f"configuration error: {e}")
        print(f"error: {e.code.name}: {e}", file=sys.stderr)
        return 2
    except QDModelError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e.code.name}: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
