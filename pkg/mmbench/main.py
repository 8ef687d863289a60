"""Main CLI entry point for mmbench."""

import json
import logging
import sys
from pathlib import Path
from typing import Optional, Tuple

import click

from .concentration import alpha_ball_profile, alpha_profile, breakpoint_radii, default_radii
from .config import FORMATS, RunConfig, load_config, save_config
from .enlargement import doubling_report
from .errors import DisconnectedGraph, MMError
from .expansion import exp_gromov, exp_ledoux
from .export import render_json, render_reports_csv, render_rows_csv, write_output
from .generators import generate as generate_space
from .lipschitz import LipschitzFunction
from .observable import (
    ORACLE_LIMIT,
    ORACLE_MAX_LATTICE,
    laplace_oracle,
    laplace_profile,
    lattice_size,
    obsdiam_oracle,
    obsdiam_sandwich,
)
from .reports import count_failures
from .space import SpaceIO, diameter
from .spectral import lambda1_graph
from .verify import VerifyParams, default_rho_grid, sweep as run_sweep, verify_all

logger = logging.getLogger(__name__)

DOUBLING_REPORT_LIMIT = 512


def run_options(command):
    """Options shared by report, check and sweep; unset flags keep the config file value."""
    options = [
        click.option('-c', '--config', 'config_file', type=click.Path(exists=True, path_type=Path),
                     help='Optional TOML configuration file'),
        click.option('--epsilon', type=float, help='Mass level eps in (0, 1)'),
        click.option('--kappa', type=float, help='Discarded mass kappa in (0, 1)'),
        click.option('--rho', 'rho_grid', type=float, multiple=True,
                     help='Enlargement radius (repeatable; default: distances up to diam/2)'),
        click.option('--lambda', 'lambda_grid', type=float, multiple=True,
                     help='Laplace parameter (repeatable)'),
        click.option('--seed', type=int, help='Seed for every randomized procedure'),
        click.option('--exact-limit', type=int, help='Largest n for exact subset enumeration'),
        click.option('--oracle-step', type=float, help='Lattice step of the n <= 5 oracles'),
        click.option('--budget', 'ascent_budget', type=int, help='Coordinate-ascent restarts'),
        click.option('--threads', type=int, help='Worker threads (default: logical cores)'),
        click.option('--format', 'format', type=click.Choice(FORMATS), help='Output format'),
        click.option('--tau', type=float, help='Advanced: diameter bound parameter in (0, 1/3]'),
        click.option('--graph-rule', help='unit, threshold:<t> or knn:<k>; enables spectral output'),
        click.option('--fault-injection', is_flag=True, hidden=True, help='Inflate alpha to exercise the failure path'),
        click.option('-o', '--output', type=click.Path(path_type=Path), help='Output file (default: stdout)'),
        click.option('-v', '--verbose', is_flag=True, help='Enable verbose output'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_config(config_file: Optional[Path], **flags) -> RunConfig:
    """Config file (or defaults) with command-line flags applied on top."""
    config = load_config(config_file) if config_file else RunConfig()
    if not flags.get('fault_injection'):
        flags['fault_injection'] = None
    for grid in ('rho_grid', 'lambda_grid'):
        if grid in flags:
            flags[grid] = list(flags[grid]) or None
    config = config.with_overrides(**flags)
    config.validate()
    return config


def _setup_logging(verbose: bool) -> None:
    if verbose:
        logging.basicConfig(level=logging.DEBUG, format="%(levelname)s %(name)s: %(message)s")


def _fail(error: Exception, verbose: bool) -> None:
    """Domain errors exit 1 with the error document on stderr; IO problems exit 2."""
    if verbose:
        raise error
    if isinstance(error, MMError):
        click.echo(json.dumps(error.to_dict()), err=True)
        sys.exit(1)
    click.echo(f"Error: {error}", err=True)
    sys.exit(2)


@click.group()
@click.version_option(package_name="mmbench")
def main():
    """Concentration of measure on finite metric measure spaces."""


@main.command()
@click.argument('path', type=click.Path(exists=True, path_type=Path))
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose output')
def validate(path: Path, verbose: bool):
    """Validate a space document."""
    _setup_logging(verbose)
    try:
        space = SpaceIO.load(path)
    except (MMError, OSError) as e:
        _fail(e, verbose)
    click.echo(f"Valid space: {space.n} points, diameter {diameter(space)!r}")


@main.command()
@click.argument('kind')
@click.option('--seed', type=int, default=0, help='Seed for random spaces')
@click.option('-c', '--config', 'config_file', type=click.Path(exists=True, path_type=Path),
              help='Optional TOML configuration file')
@click.option('--max-points', type=int, default=None, help='Refuse spaces larger than this')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Output file (default: stdout)')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose output')
def generate(kind: str, seed: int, config_file: Optional[Path], max_points: Optional[int],
             output: Optional[Path], verbose: bool):
    """Generate a space: cycle:N, path:N, hypercube:D, sphere:N,DELTA,COUNT or random:N."""
    _setup_logging(verbose)
    try:
        config = build_config(config_file, max_points=max_points)
        space = generate_space(kind, seed, config.max_points)
        write_output(SpaceIO.dumps(space), output)
    except (MMError, OSError) as e:
        _fail(e, verbose)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="KIND")
    if output and verbose:
        click.echo(f"Generated {kind} with {space.n} points: {output}")


def build_report(space, config: RunConfig, witness_path: Optional[Path] = None) -> dict:
    """Every quantity the library can compute on the space, exact ones only within the limit."""
    exact = space.n <= config.exact_limit
    too_large = f"skipped: TooLargeForExact ({space.n} > {config.exact_limit})"
    report = {'n': space.n, 'diameter': diameter(space), 'config': config.to_dict()}

    if space.n <= DOUBLING_REPORT_LIMIT:
        report['doubling'] = doubling_report(space).to_dict()
    else:
        report['doubling'] = f"skipped: more than {DOUBLING_REPORT_LIMIT} points"

    if exact:
        report['alpha_profile'] = alpha_profile(space, config.epsilon, breakpoint_radii(space),
                                                config.exact_limit).to_dict()
        rhos = config.rho_grid if config.rho_grid is not None else default_rho_grid(space)
        report['expansion'] = [
            {'rho': rho,
             'gromov': exp_gromov(space, config.epsilon, rho, config.exact_limit).to_dict(),
             'ledoux': exp_ledoux(space, config.epsilon, rho, config.exact_limit).to_dict(),
             'ledoux_complement': exp_ledoux(space, 1.0 - config.epsilon, rho, config.exact_limit).to_dict()}
            for rho in rhos
        ]
    else:
        report['alpha_profile'] = too_large
        report['alpha_ball_estimate'] = alpha_ball_profile(space, config.epsilon,
                                                           default_radii(space)).to_dict()
        report['expansion'] = too_large

    obsdiam = obsdiam_sandwich(space, config.kappa, min(config.epsilon, 1.0 - config.epsilon),
                               config.ascent_budget, config.seed, config.workers, config.exact_limit)
    report['obsdiam'] = obsdiam.to_dict()
    if witness_path is not None:
        obsdiam.witness.save(witness_path)
    report['laplace'] = [e.to_dict() for e in laplace_profile(space, config.lambda_grid, config.ascent_budget,
                                                              config.seed, config.workers)]
    h = config.oracle_step
    if space.n <= ORACLE_LIMIT and lattice_size(space, h) <= ORACLE_MAX_LATTICE:
        report['oracle'] = {
            'h': h,
            'obsdiam': obsdiam_oracle(space, config.kappa, h),
            'laplace': [{'lambda': lam, 'value': laplace_oracle(space, lam, h)}
                        for lam in sorted(config.lambda_grid)],
        }
    if config.graph_rule:
        try:
            report['spectral'] = lambda1_graph(space, config.graph_rule).to_dict()
        except DisconnectedGraph as e:
            report['spectral'] = f"skipped: {e}"
    return report


@main.command()
@click.argument('path', type=click.Path(exists=True, path_type=Path))
@run_options
@click.option('--save-witness', type=click.Path(path_type=Path),
              help='Write the ObsDiam witness function as {"f": [...], "lip": ...}')
def report(path: Path, config_file: Optional[Path], output: Optional[Path], verbose: bool,
           save_witness: Optional[Path], **flags):
    """Report diameter, doubling constant, concentration, expansion, ObsDiam and Laplace estimates."""
    _setup_logging(verbose)
    try:
        config = build_config(config_file, **flags)
        space = SpaceIO.load(path)
        document = build_report(space, config, save_witness)
        if config.format == "csv":
            profile = document['alpha_profile']
            if isinstance(profile, str):
                profile = document['alpha_ball_estimate']
            rows = zip(profile['radii'], profile['values'], profile['witnesses'])
            content = render_rows_csv(['r', 'alpha', 'witness_mask_hex'], rows)
        else:
            content = render_json(document)
        write_output(content, output)
    except (MMError, OSError) as e:
        _fail(e, verbose)


@main.command()
@click.argument('path', type=click.Path(exists=True, path_type=Path))
@run_options
@click.option('--function', 'function_files', type=click.Path(exists=True, path_type=Path), multiple=True,
              help='Extra function document to run the concentration checks on (repeatable)')
def check(path: Path, config_file: Optional[Path], output: Optional[Path], verbose: bool,
          function_files: Tuple[Path, ...], **flags):
    """Run every inequality check; exit 1 iff a check that applies fails."""
    _setup_logging(verbose)
    try:
        config = build_config(config_file, **flags)
        space = SpaceIO.load(path)
        params = VerifyParams.from_config(config)
        params.functions = [LipschitzFunction.load(space, f) for f in function_files]
        reports = verify_all(space, params)
        if config.format == "csv":
            write_output(render_reports_csv(reports), output)
        else:
            write_output(render_json([r.to_dict() for r in reports]), output)
    except (MMError, OSError) as e:
        _fail(e, verbose)
    failures = count_failures(reports)
    if verbose:
        click.echo(f"{len(reports)} checks, {failures} failed", err=True)
    if failures:
        sys.exit(1)


@main.command()
@click.option('--count', type=int, default=100, help='Number of random spaces')
@click.option('--min-n', type=int, default=4, help='Smallest space size')
@click.option('--max-n', type=int, default=10, help='Largest space size')
@run_options
def sweep(count: int, min_n: int, max_n: int, config_file: Optional[Path], output: Optional[Path],
          verbose: bool, **flags):
    """Run the check suite over seeded random spaces and print a tally."""
    _setup_logging(verbose)
    try:
        config = build_config(config_file, **flags)
        if not 1 <= min_n <= max_n:
            raise click.BadParameter(f"need 1 <= min-n <= max-n, got {min_n}, {max_n}")
        summary = run_sweep(count, VerifyParams.from_config(config), (min_n, max_n), config.seed)
        write_output(render_json(summary.to_dict()), output)
    except (MMError, OSError) as e:
        _fail(e, verbose)
    click.echo(f"{summary.spaces} spaces: {summary.passed} passed, {summary.failed} failed, "
               f"{summary.skipped} skipped", err=True)
    if summary.failed:
        sys.exit(1)


@main.command()
@click.option('--write', 'path', type=click.Path(path_type=Path), required=True,
              help='Where to write the baseline TOML configuration')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose output')
def config(path: Path, verbose: bool):
    """Generate a baseline TOML configuration file."""
    try:
        save_config(RunConfig(), path)
    except (MMError, OSError) as e:
        _fail(e, verbose)
    click.echo(f"Generated baseline configuration file: {path}")
    if verbose:
        click.echo(f"Edit it, then pass it with: mmbench check SPACE -c {path}")


if __name__ == "__main__":
    main()
