import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import argparse
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config.config import Config
from src.cfrac import eval_cf_fixed, string_of, u_to_sfraction
from src.errors import (
    DomainError, ExcursionError, MomentDivergenceError, NotAnSFractionError, NumericalFailureError,
    ValidationError, exit_code_for,
)
from src.expansion import check_expansion, closed_fraction, expand_numeric, expand_symbolic_zoo
from src.measures import (
    laplace_exponent, levy_from_spectral, mean_duration_from_coefficients, mean_local_time, moment_n,
    spectral_measure, zoo_evaluator,
)
from src.models import (
    BoundaryBehavior, DiffusionSpec, bessel, brownian_drift, identify_zoo, riccati_at_zero, spec_from_json,
    spec_to_json, zoo_riccati,
)
from src.reporting import RunPipeline
from src.sim import (
    ABSORB, REFLECT_FOLD, PathConfig, SDEConfig, correlation, fokker_planck_residual, gamma_law,
    gig_cdf_quadrature, hitting_time, histogram_export, ks_one_sample, ks_two_sample, laplace_closed_form,
    laplace_estimate, occupation_below, sample_random_cfrac, simulate_U, simulate_hierarchy,
)
from src.transforms import check_grid, ct_pair, h_transform, image_table_rows, krein_dual, t_h

logger = logging.getLogger(__name__)

LEVY_DECAY = 40.0  # y_min * z_max
LEVY_POINTS = 40  # grid points per unit of sqrt(z)


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise ValidationError(f"expected a comma-separated list of numbers, got {text!r}")


def _spec(args) -> DiffusionSpec:
    if args.spec:
        with open(args.spec) as handle:
            return spec_from_json(handle.read())
    if args.model == 'bm':
        return brownian_drift(args.mu, x0=0.0 if args.x0 is None else args.x0).spec
    zero = None if args.zero_boundary == 'none' else BoundaryBehavior(args.zero_boundary)
    return bessel(args.p, x0=1.0 if args.x0 is None else args.x0, zero_boundary=zero).spec


def _point(args, spec: DiffusionSpec) -> float:
    return spec.x0 if args.x is None else args.x


def _coefficients(spec: DiffusionSpec, branch: str, depth: int, x: float):
    model = identify_zoo(spec)
    if model is not None:
        return expand_symbolic_zoo(model, branch, depth, x)
    return expand_numeric(spec, branch, depth, [x]).coefficients_at(x)


def _riccati(spec: DiffusionSpec, branch: str, x: float, depth: int):
    """Complex-lambda evaluator of U(x, .): closed form on the zoo, closed fraction otherwise."""
    model = identify_zoo(spec)
    if model is not None:
        return zoo_evaluator(model, branch, x)
    coeffs = _coefficients(spec, branch, depth, x)
    return lambda lam: closed_fraction(coeffs, np.asarray(lam, dtype=complex))


def _z_grid(args) -> np.ndarray:
    if args.z_grid:
        return np.asarray(_floats(args.z_grid))
    t = np.linspace(0.0, math.sqrt(args.z_max), args.z_points + 1)[1:]
    return t * t


def _arguments(args) -> Dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ('handler',)}


# Subcommands

def cmd_expand(args, pipeline: RunPipeline) -> None:
    spec = _spec(args)
    x = _point(args, spec)
    coeffs = _coefficients(spec, args.branch, args.depth, x)
    document = {'coefficients': coeffs.to_json(), 'spec': spec_to_json(spec), 'sfraction': None}
    if coeffs.depth:
        try:
            document['sfraction'] = u_to_sfraction(coeffs).to_json()
            krein = string_of(coeffs)
            document['string'] = {'positions': krein.positions, 'masses': krein.masses, 'length': krein.length}
        except NotAnSFractionError as e:
            document['not_an_sfraction'] = {'index': e.index, 'reason': str(e)}
    lam_grid = np.asarray(_floats(args.lambda_grid))
    if coeffs.depth:
        document['closed_fraction_residual'] = check_expansion(spec, coeffs, lam_grid, x)
    pipeline.save_json(document, 'coefficients')

    model = identify_zoo(spec)
    rows = []
    for lam in lam_grid:
        reference = float(zoo_riccati(model, args.branch, x, lam)) if model is not None else float('nan')
        for n in range(coeffs.depth + 1):
            rows.append({'lambda': lam, 'n': n, 'convergent': float(eval_cf_fixed(coeffs, lam, n)),
                         'reference': reference})
    pipeline.save_table(pd.DataFrame(rows), 'convergents')
    print(f"u0 = {coeffs.u0!r}")
    print("u  = [" + ", ".join(repr(float(v)) for v in coeffs.u) + "]")


def _sigma(args, spec, z_grid: Optional[np.ndarray] = None):
    x = _point(args, spec)
    U = _riccati(spec, args.branch, x, args.depth)
    window = tuple(_floats(args.atom_window)) if args.atom_window else None
    z = _z_grid(args) if z_grid is None else z_grid
    return spectral_measure(U, args.branch, z, x=x, atom_window=window, k_max=args.k_max)


def _levy_z_grid(args, y_min: float) -> np.ndarray:
    """Default z grid reaching far enough that e^{-y z} has decayed at the shortest duration."""
    if args.z_grid:
        return _z_grid(args)
    z_max = max(args.z_max, LEVY_DECAY / y_min)
    points = max(args.z_points, int(LEVY_POINTS * math.sqrt(z_max)))
    t = np.linspace(0.0, math.sqrt(z_max), points + 1)[1:]
    return t * t


def cmd_invert(args, pipeline: RunPipeline) -> None:
    spec = _spec(args)
    sigma = _sigma(args, spec)
    pipeline.save_json(sigma.to_json(), 'spectral')
    pipeline.save_table(sigma.to_frame(), 'sigma_density')
    print(f"atom0 = {sigma.atom0!r}, atoms = {len(sigma.atoms)}, density samples = {sigma.z.size}")


def cmd_levy(args, pipeline: RunPipeline) -> None:
    spec = _spec(args)
    y_grid = np.asarray(_floats(args.y_grid)) if args.y_grid else np.geomspace(1e-3, 10.0, 60)
    if y_grid.size == 0 or np.any(y_grid <= 0):
        raise ValidationError("--y-grid needs positive durations")
    sigma = _sigma(args, spec, _levy_z_grid(args, float(y_grid.min())))
    nu = levy_from_spectral(sigma, y_grid, extrapolate=args.extrapolate)
    x = _point(args, spec)
    summary = dict(nu.to_json())
    try:
        summary['mean_duration'] = moment_n(sigma, 1)
    except MomentDivergenceError as e:
        logger.info(f"Mean excursion duration is infinite: {e}")
        summary['mean_duration'] = math.inf
    try:
        coeffs = _coefficients(spec, args.branch, 1, x)
    except DomainError as e:
        logger.info(f"No first coefficient at x = {x:g}: {e}")
        coeffs = None
    if coeffs is not None and coeffs.depth and coeffs.u[0] > 0:
        summary['mean_duration_from_coefficients'] = mean_duration_from_coefficients(coeffs)
    model = identify_zoo(spec)
    if model is not None:
        summary['mean_local_time'] = mean_local_time(riccati_at_zero(model, 'minus', x),
                                                     riccati_at_zero(model, 'plus', x))
    exponents = {}
    for lam in _floats(args.lambda_grid):
        exponents[repr(lam)] = {
            'from_U': float(np.real(laplace_exponent(zoo_riccati(model, args.branch, x, lam), args.branch)))
            if model is not None else None,
            'from_sigma': sigma.exponent(lam),
            'from_nu': nu.exponent(lam),
        }
    summary['exponent'] = exponents
    pipeline.save_json(summary, 'levy')
    pipeline.save_table(nu.to_frame(), 'nu_density')
    print(f"atom_inf = {nu.atom_inf!r}, mean duration = {summary['mean_duration']!r}")


def cmd_transform(args, pipeline: RunPipeline) -> int:
    if args.check_table:
        rows = image_table_rows()
        pipeline.save_table(pd.DataFrame(rows), 'image_table')
        mismatches = [r for r in rows if not r['match']]
        for row in mismatches:
            print(f"mismatch: {row['model']} {row['map']}: expected {row['expected']}, got {row['obtained']}")
        print(f"{len(rows) - len(mismatches)}/{len(rows)} images match")
        return 0 if not mismatches else 3
    spec = _spec(args)
    if args.map == 'dual':
        record = krein_dual(spec)
    elif args.map == 'h':
        record = h_transform(spec, args.branch)
    else:
        record = t_h(spec, args.branch)
    pipeline.save_json(record.to_json(check_grid(spec)), 'transform')
    print(f"{spec.label} -> {record.output.label} ({record.output.left.value}, {record.output.right.value})")
    return 0


def cmd_ct_pair(args, pipeline: RunPipeline) -> None:
    spec = _spec(args)
    z, note = ct_pair(spec, renormalize=not args.literal)
    pipeline.save_json(note, 'ct_pair')
    print(f"{spec.label} -> {z.label}")


def _sde_config(args, depth: int = 1) -> SDEConfig:
    return SDEConfig(mu=args.mu, depth=depth, step=args.step, burn_in=args.burn_in, n_samples=args.samples,
                     thin=args.thin, seed=args.seed, chains=args.chains)


def cmd_simulate_env(args, pipeline: RunPipeline) -> None:
    cfg = _sde_config(args, args.depth)
    pool = simulate_hierarchy(cfg, threads=args.threads)
    law = gamma_law(args.mu)
    report = {'config': cfg.to_json(), 'config_hash': pool.config_hash,
              'ks': [ks_one_sample(pool, law.cdf, column=i) for i in range(args.depth)],
              'correlation': {f"u{i + 1},u{j + 1}": correlation(pool, i, j)
                              for i in range(args.depth) for j in range(i + 1, args.depth)},
              'fokker_planck_residual': fokker_planck_residual(args.mu, min(args.depth, 2))}
    pipeline.save_pool(pool, 'hierarchy')
    edges = np.linspace(0.0, float(law.ppf(0.999)), 41)
    pipeline.save_table(histogram_export(pool, edges), 'histogram_u1')
    pipeline.save_json(report, 'report')
    print("KS: " + ", ".join(f"{v:.4f}" for v in report['ks']))


def cmd_simulate_u(args, pipeline: RunPipeline) -> None:
    if args.method == 'cfrac':
        pool = sample_random_cfrac(args.mu, args.lam, args.cf_depth, args.samples, args.seed, threads=args.threads)
    else:
        pool = simulate_U(_sde_config(args), args.lam, threads=args.threads)
    cdf = gig_cdf_quadrature(args.mu, args.lam)
    report = {'method': args.method, 'config_hash': pool.config_hash,
              'ks': ks_one_sample(pool, cdf), 'median': float(np.median(pool.values))}
    pipeline.save_pool(pool, 'riccati')
    pipeline.save_json(report, 'report')
    print(f"KS = {report['ks']:.4f}")


def _path_config(args, spec: DiffusionSpec) -> PathConfig:
    return PathConfig(spec=spec, horizon=args.horizon, step=args.path_step, n_paths=args.paths, seed=args.seed,
                      boundary_rule=args.boundary_rule, antithetic=args.antithetic)


def cmd_verify_ct(args, pipeline: RunPipeline) -> None:
    spec = _spec(args)
    partner, note = ct_pair(spec)
    start = spec.x0 if args.start is None else args.start
    occupation = occupation_below(_path_config(args, spec), args.level, start=start, threads=args.threads)
    hitting = hitting_time(_path_config(args, partner), start, args.level, threads=args.threads)
    report = {'note': note, 'ks': ks_two_sample(occupation, hitting),
              'mean_occupation': float(np.mean(occupation.values)),
              'mean_hitting': float(np.mean(hitting.values)),
              'censored': {'occupation': occupation.censored_fraction, 'hitting': hitting.censored_fraction}}
    pipeline.save_pool(occupation, 'occupation')
    pipeline.save_pool(hitting, 'hitting')
    pipeline.save_json(report, 'report')
    print(f"two-sample KS = {report['ks']:.4f}")


def cmd_hitting(args, pipeline: RunPipeline) -> None:
    spec = _spec(args)
    start = spec.x0 if args.start is None else args.start
    pool = hitting_time(_path_config(args, spec), start, args.target, threads=args.threads)
    estimate, error = laplace_estimate(pool, args.lam)
    report = {'lambda': args.lam, 'estimate': estimate, 'standard_error': error,
              'censored_fraction': pool.censored_fraction}
    if identify_zoo(spec) is not None:
        exact = laplace_closed_form(spec, start, args.target, args.lam)
        report['closed_form'] = exact
        report['z_score'] = (estimate - exact) / error if error > 0 else 0.0
    pipeline.save_pool(pool, 'hitting')
    pipeline.save_json(report, 'report')
    print(f"E[exp(-lambda H)] = {estimate:.6f} +/- {error:.6f}"
          + (f" (closed form {report['closed_form']:.6f})" if 'closed_form' in report else ""))


# Parser

def _model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--model', choices=('bm', 'bessel'), default='bm')
    parser.add_argument('--spec', help="DiffusionSpec JSON file (overrides --model)")
    parser.add_argument('--mu', type=float, default=1.0)
    parser.add_argument('--p', type=float, default=0.5)
    parser.add_argument('--zero-boundary', choices=('none', 'killing', 'reflecting'), default='none')
    parser.add_argument('--x0', type=float)


def _measure_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--branch', choices=('plus', 'minus'), default='minus')
    parser.add_argument('--x', type=float)
    parser.add_argument('--depth', type=int, default=20, help="fraction depth for custom specs")
    parser.add_argument('--z-grid')
    parser.add_argument('--z-max', type=float, default=50.0)
    parser.add_argument('--z-points', type=int, default=400)
    parser.add_argument('--atom-window')
    parser.add_argument('--k-max', type=int, default=0)


def _path_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--start', type=float)
    parser.add_argument('--paths', type=int, default=10_000)
    parser.add_argument('--path-step', type=float, default=Config.PATH_STEP)
    parser.add_argument('--horizon', type=float, default=Config.PATH_HORIZON)
    parser.add_argument('--boundary-rule', choices=(ABSORB, REFLECT_FOLD), default=ABSORB)
    parser.add_argument('--antithetic', action='store_true')


def _sde_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--mu', type=float, default=1.0)
    parser.add_argument('--samples', type=int, default=100_000)
    parser.add_argument('--step', type=float, default=Config.SDE_STEP)
    parser.add_argument('--burn-in', type=float, default=Config.SDE_BURN_IN)
    parser.add_argument('--thin', type=float, default=Config.SDE_THIN)
    parser.add_argument('--chains', type=int, default=Config.SDE_CHAINS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='excursions',
                                     description="Continued-fraction expansions of diffusion excursion laws")
    parser.add_argument('--seed', type=int, default=Config.DEFAULT_SEED)
    parser.add_argument('--threads', type=int, default=Config.DEFAULT_THREADS)
    parser.add_argument('--out', help="run directory (default: OUTPUT_DIR/<command>_<timestamp>)")
    parser.add_argument('--format', choices=('json', 'csv'), default='json')
    parser.add_argument('--log-level', default=Config.LOG_LEVEL)
    commands = parser.add_subparsers(dest='command', required=True)

    expand = commands.add_parser('expand', help="continued-fraction coefficients at a point")
    _model_args(expand)
    expand.add_argument('--branch', choices=('plus', 'minus'), default='minus')
    expand.add_argument('--depth', type=int, default=10)
    expand.add_argument('--x', type=float)
    expand.add_argument('--lambda-grid', default="0.1,1,10")
    expand.set_defaults(handler=cmd_expand)

    invert = commands.add_parser('invert', help="spectral measure by Stieltjes-Perron inversion")
    _model_args(invert)
    _measure_args(invert)
    invert.set_defaults(handler=cmd_invert)

    levy = commands.add_parser('levy', help="Levy measure of excursion durations")
    _model_args(levy)
    _measure_args(levy)
    levy.add_argument('--y-grid')
    levy.add_argument('--lambda-grid', default="0.5,1,2")
    levy.add_argument('--extrapolate', action='store_true')
    levy.set_defaults(handler=cmd_levy)

    transform = commands.add_parser('transform', help="h-transform, Krein dual or T_h of a spec")
    _model_args(transform)
    transform.add_argument('--map', choices=('h', 'dual', 'T_h'), default='T_h')
    transform.add_argument('--branch', choices=('plus', 'minus'), default='minus')
    transform.add_argument('--check-table', action='store_true', help="check every transform image of the zoo")
    transform.set_defaults(handler=cmd_transform)

    pair = commands.add_parser('ct-pair', help="partner diffusion for the occupation/hitting identity")
    _model_args(pair)
    pair.add_argument('--literal', action='store_true', help="require s(r) = 0 without renormalizing")
    pair.set_defaults(handler=cmd_ct_pair)

    env = commands.add_parser('simulate-env', help="coefficient hierarchy in a Brownian environment")
    _sde_args(env)
    env.add_argument('--depth', type=int, default=1)
    env.set_defaults(handler=cmd_simulate_env)

    riccati = commands.add_parser('simulate-u', help="stationary Riccati variable in a Brownian environment")
    _sde_args(riccati)
    riccati.add_argument('--lam', type=float, default=1.0)
    riccati.add_argument('--method', choices=('sde', 'cfrac'), default='sde')
    riccati.add_argument('--cf-depth', type=int, default=40)
    riccati.set_defaults(handler=cmd_simulate_u)

    verify = commands.add_parser('verify-ct', help="occupation below a level against its partner's hitting time")
    _model_args(verify)
    _path_args(verify)
    verify.add_argument('--level', type=float, default=1.0)
    verify.set_defaults(handler=cmd_verify_ct, model='bessel')

    hitting = commands.add_parser('hitting', help="Laplace transform of a hitting time, simulated")
    _model_args(hitting)
    _path_args(hitting)
    hitting.add_argument('--target', type=float, default=1.0)
    hitting.add_argument('--lam', type=float, default=1.0)
    hitting.set_defaults(handler=cmd_hitting)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        pipeline = RunPipeline(args.command, _arguments(args), seed=args.seed, out_dir=args.out, fmt=args.format)
        code = args.handler(args, pipeline) or 0
        pipeline.finish()
        return code
    except ExcursionError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return exit_code_for(e)
    except (OverflowError, ZeroDivisionError, FloatingPointError) as e:
        error = NumericalFailureError(f"{type(e).__name__}: {e}")
        logger.debug("Arithmetic failure", exc_info=True)
        print(f"{type(error).__name__}: {error}", file=sys.stderr)
        return exit_code_for(error)
    except ValueError as e:
        error = DomainError(f"{type(e).__name__}: {e}")
        logger.debug("Invalid value", exc_info=True)
        print(f"{type(error).__name__}: {error}", file=sys.stderr)
        return exit_code_for(error)


if __name__ == '__main__':
    sys.exit(main())
