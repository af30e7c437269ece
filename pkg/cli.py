"""
Command-line front end for dimfibre

Emits CSV or JSON data for offline plotting:

    uv run main.py spectrum --n 60 --lambda 0.3 --mu 0.2
    uv run main.py capacity --lambda 0.3 --mu 0.2 --kind k --format json
    uv run main.py region --kind q --grid 0.05:0.9:50 --out region.csv
    uv run main.py converge --mode finite_m --n 8 --m-list 10,100,1000
    uv run main.py simulate --state vacuum.json --lambda 0.5 --nu 1
    uv run main.py --config sweep.json region

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

import json
import sys
import logging

import click

import config
from capacities import (GridAxis, LOWER_BOUND_RULES, SWEEP_COLUMNS, SweepConfig, capacity_sweep,
                        channel_capacity, parse_kind, parse_model, threshold_report)
from errors import InvalidParameterError, NumericalError, require
from netsim import convergence_study, finite_m_coefficients, propagate_gaussian, propagate_via_decomposition
from serialization import build_document, load_state, render, state_to_json, write_text
from spectral import SymbolModel, spectrum_rows, tail_convergence_report
from toeplitz import ChannelParams, build_dim_matrix, dump_matrix

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERIC = 2

SPECTRUM_COLUMNS = ('j', 'eta', 'eta_symbol')
CAPACITY_COLUMNS = ('value', 'lower', 'upper', 'kind', 'model', 'exact', 'nu', 'lambda', 'mu',
                    'gamma', 'quad_points', 'converged', 'lower_bound_rule')
FINITE_M_COLUMNS = ('m_steps', 'error')
TAIL_COLUMNS = ('n', 'j_start', 'max_deviation', 'outside_fraction')
THRESHOLD_COLUMNS = ('kind', 'model', 'lambda', 'nu', 'gamma', 'exact', 'sqrt_mu_necessary',
                     'sqrt_mu_sufficient', 'delay_guaranteed', 'delay_possible')


def _status(message, ok=True):
    click.echo(f"{'✓' if ok else '✗'} {message}", err=True)

# ============================================================================
# Configuration File
# ============================================================================

# Flags whose parameter name differs from the flag
CONFIG_ALIASES = {'lambda': 'lam', 'format': 'fmt', 'state': 'state_path'}


def _config_key(key):
    key = key.lstrip('-').replace('-', '_')
    return CONFIG_ALIASES.get(key, key)


def load_config_file(path):
    """
    Read a JSON config file whose keys are the long flag names

    Returns:
        dict usable as a click default_map entry (flag names mapped to parameter names)
    """
    try:
        with open(path, encoding='utf-8') as f:
            data = json.load(f)
    except OSError as e:
        raise InvalidParameterError(f"cannot read config file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InvalidParameterError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise InvalidParameterError(f"config file {path} must hold a JSON object")
    return {_config_key(key): value for key, value in data.items()}

# ============================================================================
# Command Group
# ============================================================================

class DimGroup(click.Group):
    """Maps library and usage errors onto the documented exit codes"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except NumericalError as e:
            _status(f"numerical failure: {e}", ok=False)
            ctx.exit(EXIT_NUMERIC)
        except InvalidParameterError as e:
            _status(f"invalid input: {e}", ok=False)
            ctx.exit(EXIT_INVALID)

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            result = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
            code = result if isinstance(result, int) else EXIT_OK
        except click.ClickException as e:
            e.show()
            code = EXIT_INVALID
        except click.Abort:
            _status("aborted", ok=False)
            code = EXIT_INVALID
        if standalone_mode:
            sys.exit(code)
        return code


@click.group(cls=DimGroup)
@click.version_option(config.TOOL_VERSION, prog_name=config.TOOL_NAME)
@click.option('--config', 'config_path', type=click.Path(dir_okay=False),
              help='JSON file with default values for any flag (flags still win).')
@click.option('--log-level', default=None, help='Override DIM_LOG_LEVEL.')
@click.pass_context
def cli(ctx, config_path, log_level):
    """Delocalised Interaction Model fibre toolkit."""
    config.configure_logging(log_level)
    if config_path:
        defaults = load_config_file(config_path)
        ctx.default_map = {name: defaults for name in ctx.command.commands}
        logger.info("loaded defaults from %s: %s", config_path, sorted(defaults))


def fibre_options(func):
    """--lambda --mu --nu --gamma"""
    options = [
        click.option('--lambda', 'lam', type=float, required=True, help='Transmissivity lambda.'),
        click.option('--mu', type=float, default=0.0, show_default=True, help='Memory parameter mu.'),
        click.option('--nu', type=float, default=0.0, show_default=True, help='Thermal photon number nu.'),
        click.option('--gamma', type=float, default=1.0, show_default=True,
                     help='Transversal attenuation gamma.'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def output_options(func):
    """--format --out"""
    func = click.option('--out', type=click.Path(dir_okay=False), default=None,
                        help='Output file (stdout when omitted).')(func)
    return click.option('--format', 'fmt', type=click.Choice(['csv', 'json'], case_sensitive=False),
                        default='csv', show_default=True)(func)


model_option = click.option('--model', type=click.Choice(['dim', 'lim'], case_sensitive=False),
                            default='dim', show_default=True)
kind_option = click.option('--kind', type=click.Choice(['q', 'q2', 'k'], case_sensitive=False),
                           default='k', show_default=True)


def _echo_params(ctx):
    hidden = {'fmt', 'out'}
    return {('lambda' if key == 'lam' else key): value
            for key, value in ctx.params.items() if key not in hidden}


def _emit(ctx, rows, columns, fmt, out):
    document = build_document(ctx.info_name, _echo_params(ctx), rows)
    text = render(document, columns, fmt.lower())
    if out:
        write_text(text, out)
        _status(f"{ctx.info_name}: {len(rows)} row(s) written to {out}")
    else:
        click.echo(text, nl=False)


def _parse_int_list(text, label):
    try:
        values = [int(part) for part in str(text).split(',') if part.strip()]
    except ValueError as e:
        raise InvalidParameterError(f"{label} must be a comma-separated list of integers: {e}") from e
    require(len(values) > 0, f"{label} must not be empty")
    return values

# ============================================================================
# Commands
# ============================================================================

@cli.command()
@click.option('--n', type=int, required=True, help='Number of channel uses.')
@fibre_options
@model_option
@output_options
@click.pass_context
def spectrum(ctx, n, lam, mu, nu, gamma, model, fmt, out):
    """Sorted effective transmissivities next to the sampled symbol."""
    ChannelParams(lam=lam, mu=mu, nu=nu, gamma=gamma)
    rows = spectrum_rows(n, lam, mu, parse_model(model), gamma=gamma)
    _emit(ctx, rows, SPECTRUM_COLUMNS, fmt, out)


@cli.command()
@fibre_options
@model_option
@kind_option
@click.option('--tol', type=float, default=config.DIM_TOLERANCE, show_default=True,
              help='Absolute tolerance in bits per use.')
@click.option('--lower-bound', type=click.Choice(sorted(LOWER_BOUND_RULES)), default=None,
              help='Per-mode lower bound used when nu > 0.')
@output_options
@click.pass_context
def capacity(ctx, lam, mu, nu, gamma, model, kind, tol, lower_bound, fmt, out):
    """Capacity per channel use (exact at nu = 0, a lower bound otherwise)."""
    params = ChannelParams(lam=lam, mu=mu, nu=nu, gamma=gamma)
    result = channel_capacity(params, parse_model(model), parse_kind(kind), tolerance=tol,
                              rule_name=lower_bound)
    _emit(ctx, [result.to_dict()], CAPACITY_COLUMNS, fmt, out)


@cli.command()
@model_option
@kind_option
@click.option('--grid', default=None, help='start:stop:steps used for both lambda and mu.')
@click.option('--lambda-grid', default=None, help='start:stop:steps for lambda.')
@click.option('--mu-grid', default=None, help='start:stop:steps for mu.')
@click.option('--nu', type=float, default=0.0, show_default=True)
@click.option('--gamma', type=float, default=1.0, show_default=True)
@click.option('--tol', type=float, default=config.DIM_TOLERANCE, show_default=True)
@click.option('--workers', type=int, default=config.DIM_WORKERS, show_default=True,
              help='Worker processes for the sweep.')
@output_options
@click.pass_context
def region(ctx, model, kind, grid, lambda_grid, mu_grid, nu, gamma, tol, workers, fmt, out):
    """Capacity and positivity status over a (lambda, mu) grid."""
    fallback = grid or '0.05:0.9:10'
    sweep = SweepConfig(
        model=parse_model(model),
        kind=parse_kind(kind),
        lambda_grid=GridAxis.parse(lambda_grid or fallback),
        mu_grid=GridAxis.parse(mu_grid or fallback),
        nu=nu,
        gamma=gamma,
        tolerance=tol,
        output_path=out,
        format=fmt.lower(),
    )
    rows = capacity_sweep(sweep, workers=workers)
    _emit(ctx, rows, SWEEP_COLUMNS, fmt, out)


@cli.command()
@click.option('--mode', type=click.Choice(['finite_m', 'tail']), default='tail', show_default=True)
@click.option('--lambda', 'lam', type=float, required=True)
@click.option('--mu', type=float, default=0.0, show_default=True)
@click.option('--n', type=int, default=8, show_default=True, help='Channel uses (finite_m mode).')
@click.option('--m-list', default='10,100,1000', show_default=True, help='Segment counts M (finite_m mode).')
@click.option('--n-list', default='4,10,60', show_default=True, help='Channel uses (tail mode).')
@click.option('--j-start', type=int, default=None, help='Tail window start (tail mode).')
@model_option
@output_options
@click.pass_context
def converge(ctx, mode, lam, mu, n, m_list, n_list, j_start, model, fmt, out):
    """Finite-M interferometer convergence or spectral tail convergence."""
    if mode == 'finite_m':
        study = convergence_study(n, lam, mu, _parse_int_list(m_list, 'm-list'))
        rows = [{'m_steps': m_steps, 'error': error} for m_steps, error in study]
        _emit(ctx, rows, FINITE_M_COLUMNS, fmt, out)
        return
    model = parse_model(model)
    rows = [tail_convergence_report(size, lam, mu, model, j_start=j_start).to_dict()
            for size in _parse_int_list(n_list, 'n-list')]
    _emit(ctx, rows, TAIL_COLUMNS, fmt, out)


@cli.command()
@click.option('--state', 'state_path', type=click.Path(dir_okay=False), required=True,
              help='Gaussian state JSON file {n, mean, covariance}.')
@click.option('--n', type=int, default=None, help='Channel uses (defaults to the state size).')
@fibre_options
@click.option('--route', type=click.Choice(['direct', 'decomposition']), default='direct',
              show_default=True, help='Transfer matrix or encoder/attenuators/decoder.')
@click.option('--out', type=click.Path(dir_okay=False), default=None)
def simulate(state_path, n, lam, mu, nu, gamma, route, out):
    """Propagate a Gaussian state through n uses of the fibre."""
    state = load_state(state_path)
    n = state.n if n is None else n
    params = ChannelParams(lam=lam, mu=mu, nu=nu, gamma=gamma)
    propagate = propagate_gaussian if route == 'direct' else propagate_via_decomposition
    text = state_to_json(propagate(state, n, params))
    if out:
        write_text(text, out)
        _status(f"simulate: {n}-mode state written to {out}")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option('--n', type=int, required=True)
@click.option('--lambda', 'lam', type=float, required=True)
@click.option('--mu', type=float, default=0.0, show_default=True)
@click.option('--gamma', type=float, default=1.0, show_default=True)
@model_option
@click.option('--out', type=click.Path(dir_okay=False), default=None)
def matrix(n, lam, mu, gamma, model, out):
    """Dump the transfer matrix, 17 significant digits per entry."""
    if parse_model(model) is SymbolModel.DIM:
        entries = build_dim_matrix(n, ChannelParams(lam=lam, mu=mu, gamma=gamma))
    else:
        entries = finite_m_coefficients(1, n, lam, mu, gamma=gamma).a_matrix
    text = dump_matrix(entries)
    if out:
        write_text(text, out)
        _status(f"matrix: {n}x{n} written to {out}")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option('--lambda', 'lam', type=float, required=True)
@click.option('--nu', type=float, default=0.0, show_default=True)
@click.option('--gamma', type=float, default=1.0, show_default=True)
@kind_option
@model_option
@click.option('--t-e', 't_e', type=float, default=None,
              help='Environment thermalisation time; adds critical signal separations.')
@output_options
@click.pass_context
def threshold(ctx, lam, nu, gamma, kind, model, t_e, fmt, out):
    """Memory threshold sqrt(mu*) above which the capacity is positive."""
    row = threshold_report(lam, nu, parse_kind(kind), model=model, gamma=gamma, t_E=t_e)
    _emit(ctx, [row], THRESHOLD_COLUMNS, fmt, out)


def run(argv=None):
    """Entry point returning the process exit code"""
    return cli.main(args=argv, prog_name=config.TOOL_NAME, standalone_mode=False)


if __name__ == "__main__":
    sys.exit(run())
