"""
Capacities of the DIM and LIM fibres

Closed forms for the pure-loss and thermal attenuators, positivity thresholds
in the memory parameter, the nu = 0 capacity integrals over the effective
transmissivity symbol with rigorous brackets, nu > 0 lower bounds, finite-n
densities and (lambda, mu) grid sweeps.
"""

import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

import config
from errors import DivergenceError, InvalidParameterError, NumericalError, require
from quadrature import integrate_adaptive, monotone_brackets
from spectral import (AllAbove, CrossAt, NoneAbove, SymbolModel, eta_sup,
                      eta_symbol, model_spectrum, symbol_level_crossing)
from specialfn import delay_from_memory, entropy_g
from toeplitz import ChannelParams

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# ============================================================================
# Domain Types
# ============================================================================

class CapacityKind(Enum):
    Q = 'q'
    Q2 = 'q2'
    K = 'k'


class CapacityStatus(Enum):
    ZERO = 'zero'
    POSITIVE = 'positive'
    UNKNOWN = 'unknown'


def _parse_enum(enum_cls, value, label):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(str(value).lower())
    except ValueError:
        choices = ', '.join(member.value for member in enum_cls)
        raise InvalidParameterError(f"{label} must be one of {choices}, got {value!r}") from None


def parse_kind(value):
    return _parse_enum(CapacityKind, value, 'kind')


def parse_model(value):
    return _parse_enum(SymbolModel, value, 'model')


@dataclass(frozen=True)
class CapacityResult:
    """
    Capacity in bits per channel use with a bracket [lower, upper]

    For nu > 0 the value is a lower bound on the capacity and upper is +inf.
    """
    value: float
    lower: float
    upper: float
    kind: CapacityKind
    model: SymbolModel
    params: ChannelParams
    is_exact: bool
    quadrature_points: int
    converged: bool = True
    lower_bound_rule: str | None = None

    def to_dict(self):
        return {
            'value': self.value,
            'lower': self.lower,
            'upper': self.upper if math.isfinite(self.upper) else None,
            'kind': self.kind.value,
            'model': self.model.value,
            'exact': self.is_exact,
            'nu': self.params.nu,
            'lambda': self.params.lam,
            'mu': self.params.mu,
            'gamma': self.params.gamma,
            'quad_points': self.quadrature_points,
            'converged': self.converged,
            'lower_bound_rule': self.lower_bound_rule,
        }

# ============================================================================
# Per-Mode Capacities
# ============================================================================

def _log2_ratio(eta):
    with np.errstate(divide='ignore'):
        return np.log2(eta) - np.log2(1.0 - eta)


def _log2_inverse_loss(eta):
    with np.errstate(divide='ignore'):
        return -np.log2(1.0 - eta)


@dataclass(frozen=True)
class LowerBoundRule:
    """
    Per-mode rate of a thermal attenuator E_{eta,nu} as a function of eta

    The rate is nondecreasing in eta and vanishes below `onset(nu)`.
    """
    name: str
    kinds: frozenset
    rate: Callable
    onset: Callable

    def density(self, eta, nu):
        eta = np.asarray(eta, dtype=float)
        return np.maximum(0.0, self.rate(eta) - entropy_g(nu))


COHERENT_INFORMATION = LowerBoundRule(
    name='coherent_information',
    kinds=frozenset(CapacityKind),
    rate=_log2_ratio,
    onset=lambda nu: 1.0 / (1.0 + 2.0 ** -entropy_g(nu)),
)

REVERSE_COHERENT_INFORMATION = LowerBoundRule(
    name='reverse_coherent_information',
    kinds=frozenset({CapacityKind.Q2, CapacityKind.K}),
    rate=_log2_inverse_loss,
    onset=lambda nu: 1.0 - 2.0 ** -entropy_g(nu),
)

LOWER_BOUND_RULES = {rule.name: rule for rule in (COHERENT_INFORMATION, REVERSE_COHERENT_INFORMATION)}
DEFAULT_LOWER_BOUND_RULE = COHERENT_INFORMATION.name


def lower_bound_rule(name, kind):
    """Look up a registered nu > 0 lower bound and check it applies to `kind`"""
    rule = LOWER_BOUND_RULES.get(name)
    if rule is None:
        raise InvalidParameterError(
            f"unknown lower bound {name!r}; choose from {', '.join(sorted(LOWER_BOUND_RULES))}"
        )
    if kind not in rule.kinds:
        raise InvalidParameterError(f"lower bound {name!r} does not bound {kind.name}")
    return rule


def exact_rule(kind):
    """At nu = 0 the two rules are the pure-loss capacities themselves"""
    return COHERENT_INFORMATION if kind is CapacityKind.Q else REVERSE_COHERENT_INFORMATION


def pure_loss_capacity(lam, kind):
    """
    Capacity of the pure-loss channel E_{lambda,0}

    Q = max{0, log2(lambda/(1-lambda))}, Q2 = K = log2(1/(1-lambda))

    Raises:
        DivergenceError: at lambda = 1
    """
    kind = parse_kind(kind)
    require(math.isfinite(lam) and 0.0 <= lam <= 1.0, f"lambda must lie in [0, 1], got {lam!r}")
    if lam == 1.0:
        raise DivergenceError("pure-loss capacities diverge at lambda = 1")
    return float(exact_rule(kind).density(lam, 0.0))


def _positivity_levels(nu, kind):
    """(necessary, sufficient) per-mode transmissivity levels for a positive capacity"""
    require(math.isfinite(nu) and nu >= 0.0, f"nu must be nonnegative, got {nu!r}")
    if kind is CapacityKind.Q:
        if nu == 0.0:
            return 0.5, 0.5
        return (nu + 0.5) / (nu + 1.0), 1.0 / (1.0 + 2.0 ** -entropy_g(nu))
    level = nu / (nu + 1.0)
    return level, level


def _status_at(transmissivity, levels):
    necessary, sufficient = levels
    if transmissivity > sufficient:
        return CapacityStatus.POSITIVE
    if transmissivity <= necessary:
        return CapacityStatus.ZERO
    return CapacityStatus.UNKNOWN


def attenuator_capacity_status(lam, nu, kind):
    """Zero/Positive/Unknown classification of the thermal attenuator E_{lambda,nu}"""
    kind = parse_kind(kind)
    require(math.isfinite(lam) and 0.0 <= lam <= 1.0, f"lambda must lie in [0, 1], got {lam!r}")
    return _status_at(lam, _positivity_levels(nu, kind))


def capacity_status(params, kind, model=SymbolModel.DIM):
    """Classify a fibre by comparing gamma * sup eta with the attenuator levels"""
    kind = parse_kind(kind)
    model = parse_model(model)
    best = params.gamma * eta_sup(params.lam, params.mu, model)
    return _status_at(best, _positivity_levels(params.nu, kind))

# ============================================================================
# Positivity Thresholds
# ============================================================================

@dataclass(frozen=True)
class PositivityThreshold:
    """
    Thresholds on sqrt(mu) above which the capacity is positive

    `necessary` and `sufficient` coincide except for Q at nu > 0. A value of 1
    means no mu in [0, 1) reaches the level.
    """
    kind: CapacityKind
    model: SymbolModel
    lam: float
    nu: float
    gamma: float
    necessary: float
    sufficient: float

    @property
    def is_exact(self):
        return self.necessary == self.sufficient

    @property
    def sqrt_mu_star(self):
        return self.necessary if self.is_exact else None

    def to_dict(self):
        return {
            'kind': self.kind.value,
            'model': self.model.value,
            'lambda': self.lam,
            'nu': self.nu,
            'gamma': self.gamma,
            'exact': self.is_exact,
            'sqrt_mu_necessary': self.necessary,
            'sqrt_mu_sufficient': self.sufficient,
        }


def _sqrt_mu_for_level(level, lam, gamma, model):
    target = level / gamma
    if target >= 1.0:
        return 1.0
    if target <= 0.0:
        return 0.0
    if model is SymbolModel.DIM:
        loss, margin = math.log(1.0 / lam), math.log(1.0 / target)
        return max(0.0, (loss - margin) / (loss + margin))
    root_t, root_l = math.sqrt(target), math.sqrt(lam)
    return max(0.0, (root_t - root_l) / (1.0 - root_t * root_l))


def _positivity_threshold(lam, nu, kind, gamma, model):
    kind = parse_kind(kind)
    require(math.isfinite(lam) and 0.0 < lam < 1.0, f"lambda must lie in (0, 1), got {lam!r}")
    require(math.isfinite(gamma) and 0.0 < gamma <= 1.0, f"gamma must lie in (0, 1], got {gamma!r}")
    necessary_level, sufficient_level = _positivity_levels(nu, kind)
    return PositivityThreshold(
        kind=kind, model=model, lam=lam, nu=nu, gamma=gamma,
        necessary=_sqrt_mu_for_level(necessary_level, lam, gamma, model),
        sufficient=_sqrt_mu_for_level(sufficient_level, lam, gamma, model),
    )


def dim_positivity_threshold(lam, nu, kind, gamma=1.0):
    """
    sqrt(mu*) for the DIM fibre

    Q at nu = 0 gives max{0, (log2(1/lambda)-1)/(log2(1/lambda)+1)};
    Q2/K give max{0, (ln(1/lambda)-ln(1+1/nu))/(ln(1/lambda)+ln(1+1/nu))}.
    """
    return _positivity_threshold(lam, nu, kind, gamma, SymbolModel.DIM)


def lim_positivity_threshold(lam, nu, kind, gamma=1.0):
    """sqrt(mu*) for the LIM fibre, from its maximum ((sqrt mu + sqrt lambda)/(1 + sqrt(mu lambda)))^2"""
    return _positivity_threshold(lam, nu, kind, gamma, SymbolModel.LIM)


@dataclass(frozen=True)
class CriticalDelay:
    """Signal separations below which the capacity is guaranteed / possibly positive"""
    guaranteed: float
    possible: float

    @property
    def is_exact(self):
        return self.guaranteed == self.possible

    def to_dict(self):
        return {
            'guaranteed': self.guaranteed if math.isfinite(self.guaranteed) else None,
            'possible': self.possible if math.isfinite(self.possible) else None,
        }


def critical_delay(lam, nu, kind, t_E, model=SymbolModel.DIM, gamma=1.0):
    """
    Largest separation between signals that keeps the capacity positive

    Capacity is positive iff mu > mu*, i.e. iff delta_t < -t_E ln mu*.
    +inf when mu* = 0.
    """
    threshold = _positivity_threshold(lam, nu, kind, gamma, parse_model(model))
    return CriticalDelay(
        guaranteed=delay_from_memory(threshold.sufficient ** 2, t_E),
        possible=delay_from_memory(threshold.necessary ** 2, t_E),
    )


def threshold_report(lam, nu, kind, model=SymbolModel.DIM, gamma=1.0, t_E=None):
    """Threshold row for the CLI and the HTTP API, with critical delays when t_E is given"""
    model = parse_model(model)
    row = _positivity_threshold(lam, nu, kind, gamma, model).to_dict()
    if t_E is not None:
        delays = critical_delay(lam, nu, kind, t_E, model=model, gamma=gamma).to_dict()
        row['delay_guaranteed'] = delays['guaranteed']
        row['delay_possible'] = delays['possible']
    return row

# ============================================================================
# Capacity Integrals
# ============================================================================

def _select_rule(params, kind, rule_name):
    if params.nu == 0.0:
        return exact_rule(kind)
    return lower_bound_rule(rule_name or DEFAULT_LOWER_BOUND_RULE, kind)


def _integrand(params, model, rule):
    def density(x):
        return rule.density(params.gamma * eta_symbol(x, params.lam, params.mu, model), params.nu)
    return density


def _check_finite_capacity(params):
    if params.lam * params.gamma == 1.0:
        raise DivergenceError("capacities diverge when lambda * gamma = 1")


def _vanishes_identically(params, model):
    # with lambda = 0 the DIM fibre outputs pure environment
    return model is SymbolModel.DIM and params.lam == 0.0


def capacity_brackets(params, model, kind, p_blocks):
    """
    Monotone-Riemann bracket of the nu = 0 capacity integral over P blocks

    Both eta and the pure-loss capacities are nondecreasing, so the left and
    right sums on a uniform grid enclose the integral.

    Returns:
        (lower, upper) in bits per use
    """
    kind, model = parse_kind(kind), parse_model(model)
    require(params.nu == 0.0, "capacity brackets are only defined at nu = 0")
    _check_finite_capacity(params)
    if _vanishes_identically(params, model):
        return 0.0, 0.0
    integrand = _integrand(params, model, exact_rule(kind))
    lower, upper = monotone_brackets(integrand, 0.0, TWO_PI, p_blocks)
    return lower / TWO_PI, upper / TWO_PI


def channel_capacity(params, model=SymbolModel.DIM, kind=CapacityKind.K, tolerance=None,
                     rule_name=None, max_points=None, strict=True):
    """
    Capacity of the fibre per channel use

    Integrates the per-mode capacity of gamma * eta(x) over [0, 2*pi]. At nu = 0
    this is the exact capacity; for nu > 0 the per-mode rate is a registered lower
    bound (`rule_name`, coherent information by default).

    Args:
        params: ChannelParams
        model: SymbolModel.DIM or SymbolModel.LIM
        kind: CapacityKind
        tolerance: Absolute tolerance in bits per use (config default)
        rule_name: nu > 0 lower bound from LOWER_BOUND_RULES
        max_points: Quadrature point budget (config default)
        strict: Raise NumericalError instead of returning an unconverged result

    Returns:
        CapacityResult

    Raises:
        DivergenceError: lambda * gamma = 1
        NumericalError: quadrature budget exhausted (strict mode)
    """
    kind, model = parse_kind(kind), parse_model(model)
    tolerance = config.DIM_TOLERANCE if tolerance is None else tolerance
    max_points = config.DIM_MAX_QUAD_POINTS if max_points is None else max_points
    require(tolerance > 0, f"tolerance must be positive, got {tolerance!r}")
    _check_finite_capacity(params)

    is_exact = params.nu == 0.0
    rule = _select_rule(params, kind, rule_name)
    recorded_rule = None if is_exact else rule.name

    def result(value, lower, upper, points, converged=True):
        return CapacityResult(
            value=value, lower=lower, upper=upper if is_exact else math.inf,
            kind=kind, model=model, params=params, is_exact=is_exact,
            quadrature_points=points, converged=converged, lower_bound_rule=recorded_rule,
        )

    if _vanishes_identically(params, model):
        return result(0.0, 0.0, 0.0, 0)

    onset = rule.onset(params.nu)
    start = 0.0
    if onset > 0.0:
        match symbol_level_crossing(onset / params.gamma, params.lam, params.mu, model):
            case NoneAbove():
                return result(0.0, 0.0, 0.0, 0)
            case CrossAt(x=kink):
                start = kink
            case AllAbove():
                pass

    # The integrand vanishes on [0, start]; integrating from the kink keeps it smooth.
    # value +- error must fit in one tolerance, so the quadrature gets half of it.
    integrand = _integrand(params, model, rule)
    quad = integrate_adaptive(integrand, start, TWO_PI, 0.5 * tolerance * (TWO_PI - start), max_points)
    points, converged = quad.points, quad.converged

    riemann_lower, riemann_upper = monotone_brackets(integrand, 0.0, TWO_PI, config.DIM_BRACKET_BLOCKS)
    riemann_lower /= TWO_PI
    riemann_upper /= TWO_PI

    if not converged:
        message = (f"capacity quadrature did not converge within {max_points} points "
                   f"(lambda={params.lam}, mu={params.mu}, kind={kind.name})")
        if strict:
            raise NumericalError(message)
        logger.warning(message)
        value = 0.5 * (riemann_lower + riemann_upper)
        return result(value, riemann_lower, riemann_upper, points, converged=False)

    value = min(max(quad.value / TWO_PI, riemann_lower), riemann_upper)
    error = quad.error / TWO_PI
    lower = max(riemann_lower, value - error)
    upper = min(riemann_upper, value + error)
    logger.debug("capacity %s %s lambda=%g mu=%g nu=%g: %.12g [%.12g, %.12g] (%d points)",
                 model.value, kind.name, params.lam, params.mu, params.nu, value, lower, upper, points)
    return result(value, lower, upper, points)


def finite_n_capacity_density(n, params, kind, model=SymbolModel.DIM):
    """
    (1/n) sum_i C(eta_i) over the spectrum of n uses, at nu = 0

    The spectrum already carries the gamma factor.
    """
    kind, model = parse_kind(kind), parse_model(model)
    require(params.nu == 0.0, "finite-n capacity densities are only exact at nu = 0")
    _check_finite_capacity(params)
    spectrum = model_spectrum(n, params.lam, params.mu, model, gamma=params.gamma)
    densities = exact_rule(kind).density(spectrum.values, 0.0)
    if not np.all(np.isfinite(densities)):
        raise DivergenceError("a channel use has unit transmissivity")
    return float(np.mean(densities))

# ============================================================================
# Grid Sweeps
# ============================================================================

@dataclass(frozen=True)
class GridAxis:
    """Inclusive grid start..stop with `steps` points"""
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        require(isinstance(self.steps, int) and self.steps >= 1,
                f"grid steps must be a positive integer, got {self.steps!r}")
        require(math.isfinite(self.start) and math.isfinite(self.stop),
                "grid bounds must be finite")
        require(self.start <= self.stop, f"grid start {self.start} exceeds stop {self.stop}")

    @classmethod
    def parse(cls, text):
        """Parse 'start:stop:steps'"""
        parts = str(text).split(':')
        if len(parts) != 3:
            raise InvalidParameterError(f"grid must look like start:stop:steps, got {text!r}")
        try:
            return cls(start=float(parts[0]), stop=float(parts[1]), steps=int(parts[2]))
        except ValueError as e:
            raise InvalidParameterError(f"malformed grid {text!r}: {e}") from e

    def values(self):
        if self.steps == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.steps)

    def as_text(self):
        return f"{self.start!r}:{self.stop!r}:{self.steps}"


@dataclass(frozen=True)
class SweepConfig:
    model: SymbolModel
    kind: CapacityKind
    lambda_grid: GridAxis
    mu_grid: GridAxis
    nu: float = 0.0
    gamma: float = 1.0
    tolerance: float = config.DIM_TOLERANCE
    output_path: str | None = None
    format: str = 'csv'

    def __post_init__(self):
        require(0.0 <= self.lambda_grid.start and self.lambda_grid.stop <= 1.0,
                "lambda grid must stay inside [0, 1]")
        require(0.0 <= self.mu_grid.start and self.mu_grid.stop < 1.0,
                "mu grid must stay inside [0, 1)")
        require(self.format in ('csv', 'json'), f"format must be csv or json, got {self.format!r}")
        require(self.tolerance > 0, f"tolerance must be positive, got {self.tolerance!r}")
        ChannelParams(lam=self.lambda_grid.start, mu=self.mu_grid.start, nu=self.nu, gamma=self.gamma)

    def cells(self):
        """Grid points in row-major order: lambda outer, mu inner"""
        return [(float(lam), float(mu))
                for lam in self.lambda_grid.values() for mu in self.mu_grid.values()]

    def as_dict(self):
        return {
            'model': self.model.value,
            'kind': self.kind.value,
            'lambda_grid': self.lambda_grid.as_text(),
            'mu_grid': self.mu_grid.as_text(),
            'nu': self.nu,
            'gamma': self.gamma,
            'tolerance': self.tolerance,
        }


SWEEP_COLUMNS = ('lambda', 'mu', 'value', 'lower', 'upper', 'status', 'converged')


def _sweep_cell(task):
    sweep, lam, mu = task
    params = ChannelParams(lam=lam, mu=mu, nu=sweep.nu, gamma=sweep.gamma)
    capacity = channel_capacity(params, sweep.model, sweep.kind, tolerance=sweep.tolerance)
    status = capacity_status(params, sweep.kind, sweep.model)
    return {
        'lambda': lam,
        'mu': mu,
        'value': capacity.value,
        'lower': capacity.lower,
        'upper': capacity.upper,
        'status': status.value,
        'converged': capacity.converged,
    }


def capacity_sweep(sweep, workers=None):
    """
    Evaluate channel_capacity and the threshold status on every grid cell

    Rows come back in grid order whatever the number of worker processes.
    """
    workers = config.DIM_WORKERS if workers is None else workers
    require(isinstance(workers, int) and workers >= 1, f"workers must be >= 1, got {workers!r}")
    tasks = [(sweep, lam, mu) for lam, mu in sweep.cells()]
    logger.info("sweeping %d cells with %d worker(s)", len(tasks), workers)
    if workers == 1:
        return [_sweep_cell(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(_sweep_cell, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


if __name__ == "__main__":
    # Can be run as a script or imported as a module
    print("Capacities module loaded")
    params = ChannelParams(lam=0.3, mu=0.2)
    for kind in CapacityKind:
        print(f"  {kind.name}: {channel_capacity(params, kind=kind).to_dict()}")
