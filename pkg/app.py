"""
Flask backend for dimfibre - JSON API for the fibre spectra, capacities and simulations

    uv run app.py
"""

import logging
from functools import wraps

from flask import Flask, request, jsonify
from flask_cors import CORS

import config
from capacities import (GridAxis, LOWER_BOUND_RULES, SweepConfig, capacity_sweep,
                        channel_capacity, parse_kind, parse_model, threshold_report)
from errors import InvalidParameterError, NumericalError
from netsim import GaussianState, propagate_gaussian, propagate_via_decomposition
from serialization import build_document
from spectral import spectrum_rows
from toeplitz import ChannelParams

config.configure_logging()
logger = logging.getLogger(__name__)

app = Flask(__name__)
app.json.sort_keys = False

# Enable CORS for the plotting front end
CORS(app, origins=config.CORS_ORIGINS)

# Largest grids and matrices served synchronously
MAX_SPECTRUM_N = 4096
MAX_REGION_CELLS = 2500

# ============================================================================
# Request Helpers
# ============================================================================

def api_errors(f):
    """Turn library exceptions into {'success': False, 'error': ...} responses"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except InvalidParameterError as e:
            return jsonify({'success': False, 'error': str(e)}), 400
        except NumericalError as e:
            return jsonify({'success': False, 'error': str(e)}), 422
        except Exception as e:
            logger.exception("unhandled error in %s", request.path)
            return jsonify({'success': False, 'error': str(e)}), 500
    return decorated_function


def _number(source, name, default=None, cast=float):
    raw = source.get(name)
    if raw is None or raw == '':
        if default is None:
            raise InvalidParameterError(f"'{name}' is required")
        return default
    try:
        return cast(raw)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"'{name}' must be a number, got {raw!r}") from None


def _fibre_params(source):
    return ChannelParams(
        lam=_number(source, 'lambda'),
        mu=_number(source, 'mu', 0.0),
        nu=_number(source, 'nu', 0.0),
        gamma=_number(source, 'gamma', 1.0),
    )

# ============================================================================
# Endpoints
# ============================================================================

@app.route('/api/health', methods=['GET'])
def health():
    """Liveness probe with the effective numerical configuration"""
    return jsonify({
        'success': True,
        'tool': config.TOOL_NAME,
        'version': config.TOOL_VERSION,
        'config': config.as_dict(),
    })


@app.route('/api/spectrum', methods=['GET'])
@api_errors
def spectrum():
    """
    Effective transmissivities of n uses
    Query params: n, lambda, mu, gamma, model (dim|lim)
    """
    n = _number(request.args, 'n', cast=int)
    if n > MAX_SPECTRUM_N:
        raise InvalidParameterError(f"n must be at most {MAX_SPECTRUM_N} for the API")
    params = _fibre_params(request.args)
    model = parse_model(request.args.get('model', 'dim'))
    rows = spectrum_rows(n, params.lam, params.mu, model, gamma=params.gamma)
    echo = {'n': n, **params.as_dict(), 'model': model}
    return jsonify(build_document('spectrum', echo, rows))


@app.route('/api/capacity', methods=['GET'])
@api_errors
def capacity():
    """
    Capacity per channel use
    Query params: lambda, mu, nu, gamma, model, kind (q|q2|k), tol, lower_bound
    """
    params = _fibre_params(request.args)
    model = parse_model(request.args.get('model', 'dim'))
    kind = parse_kind(request.args.get('kind', 'k'))
    tolerance = _number(request.args, 'tol', config.DIM_TOLERANCE)
    rule = request.args.get('lower_bound')
    if rule is not None and rule not in LOWER_BOUND_RULES:
        raise InvalidParameterError(f"unknown lower bound {rule!r}")
    result = channel_capacity(params, model, kind, tolerance=tolerance, rule_name=rule)
    echo = {**params.as_dict(), 'model': model, 'kind': kind, 'tol': tolerance, 'lower_bound': rule}
    return jsonify(build_document('capacity', echo, [result.to_dict()]))


@app.route('/api/threshold', methods=['GET'])
@api_errors
def threshold():
    """
    Positivity threshold in sqrt(mu)
    Query params: lambda, nu, gamma, kind, model, t_e
    """
    lam = _number(request.args, 'lambda')
    nu = _number(request.args, 'nu', 0.0)
    gamma = _number(request.args, 'gamma', 1.0)
    kind = parse_kind(request.args.get('kind', 'q'))
    model = parse_model(request.args.get('model', 'dim'))
    t_e = _number(request.args, 't_e') if 't_e' in request.args else None
    row = threshold_report(lam, nu, kind, model=model, gamma=gamma, t_E=t_e)
    echo = {'lambda': lam, 'nu': nu, 'gamma': gamma, 'kind': kind, 'model': model, 't_e': t_e}
    return jsonify(build_document('threshold', echo, [row]))


@app.route('/api/region', methods=['GET'])
@api_errors
def region():
    """
    Capacity/status grid
    Query params: grid or lambda_grid + mu_grid (start:stop:steps), model, kind, nu, gamma, tol
    """
    fallback = request.args.get('grid', '0.05:0.9:10')
    sweep = SweepConfig(
        model=parse_model(request.args.get('model', 'dim')),
        kind=parse_kind(request.args.get('kind', 'q')),
        lambda_grid=GridAxis.parse(request.args.get('lambda_grid', fallback)),
        mu_grid=GridAxis.parse(request.args.get('mu_grid', fallback)),
        nu=_number(request.args, 'nu', 0.0),
        gamma=_number(request.args, 'gamma', 1.0),
        tolerance=_number(request.args, 'tol', config.DIM_TOLERANCE),
        format='json',
    )
    if sweep.lambda_grid.steps * sweep.mu_grid.steps > MAX_REGION_CELLS:
        raise InvalidParameterError(f"grid has more than {MAX_REGION_CELLS} cells")
    return jsonify(build_document('region', sweep.as_dict(), capacity_sweep(sweep)))


@app.route('/api/simulate', methods=['POST'])
@api_errors
def simulate():
    """
    Propagate a Gaussian state through the fibre
    Body: {state: {n, mean, covariance}, lambda, mu, nu, gamma, route: direct|decomposition}
    """
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise InvalidParameterError("request body must be a JSON object")
    state = GaussianState.from_dict(data.get('state')).validate()
    params = _fibre_params(data)
    route = data.get('route', 'direct')
    if route not in ('direct', 'decomposition'):
        raise InvalidParameterError(f"route must be direct or decomposition, got {route!r}")
    propagate = propagate_gaussian if route == 'direct' else propagate_via_decomposition
    output = propagate(state, state.n, params)
    return jsonify({'success': True, 'route': route, 'state': output.to_dict()})

# ============================================================================
# Main
# ============================================================================

if __name__ == '__main__':
    app.run(debug=False, host=config.DIM_API_HOST, port=config.DIM_API_PORT)
