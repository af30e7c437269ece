"""
Effective transmissivity symbols for the DIM and LIM fibre models,
their extrema, level crossings and the tail-convergence diagnostic
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from errors import InvalidParameterError, require
from netsim import finite_m_coefficients
from toeplitz import ChannelParams, matrix_spectrum, transmissivity_spectrum

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
BAND_SLACK = 1e-12


class SymbolModel(Enum):
    DIM = 'dim'
    LIM = 'lim'


def _check_symbol_params(lam, mu):
    require(math.isfinite(lam) and 0.0 <= lam <= 1.0, f"lambda must lie in [0, 1], got {lam!r}")
    require(math.isfinite(mu) and 0.0 <= mu < 1.0, f"mu must lie in [0, 1), got {mu!r}")


def _check_frequencies(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > TWO_PI):
        raise InvalidParameterError("frequency x must lie in [0, 2*pi]")
    return x


def _scalar_or_array(values):
    return float(values) if np.ndim(values) == 0 else values

# ============================================================================
# Symbols
# ============================================================================

def eta_dim(x, lam, mu):
    """
    DIM symbol eta(x) = lambda^((1-mu)/(1+mu-2 sqrt(mu) cos(x/2)))

    Args:
        x: Frequency in [0, 2*pi], scalar or array
        lam: Transmissivity
        mu: Memory parameter

    Returns:
        float for scalar x, numpy array otherwise
    """
    x = _check_frequencies(x)
    _check_symbol_params(lam, mu)
    if lam == 0.0:
        return _scalar_or_array(np.zeros_like(x))
    exponent = (1.0 - mu) / (1.0 + mu - 2.0 * math.sqrt(mu) * np.cos(x / 2.0))
    return _scalar_or_array(np.power(lam, exponent))


def eta_lim(x, lam, mu):
    """LIM symbol (mu+lambda-2 sqrt(mu lambda) c)/(1+mu lambda-2 sqrt(mu lambda) c), c = cos(x/2)"""
    x = _check_frequencies(x)
    _check_symbol_params(lam, mu)
    cross = 2.0 * math.sqrt(mu * lam) * np.cos(x / 2.0)
    return _scalar_or_array((mu + lam - cross) / (1.0 + mu * lam - cross))


def eta_symbol(x, lam, mu, model):
    if model is SymbolModel.DIM:
        return eta_dim(x, lam, mu)
    return eta_lim(x, lam, mu)


def eta_sup(lam, mu, model):
    """Maximum of the symbol, attained at x = 2*pi"""
    _check_symbol_params(lam, mu)
    root = math.sqrt(mu)
    if model is SymbolModel.DIM:
        if lam == 0.0:
            return 0.0
        return lam ** ((1.0 - root) / (1.0 + root))
    return ((root + math.sqrt(lam)) / (1.0 + math.sqrt(mu * lam))) ** 2


def eta_inf(lam, mu, model):
    """Minimum of the symbol, attained at x = 0"""
    _check_symbol_params(lam, mu)
    root = math.sqrt(mu)
    if model is SymbolModel.DIM:
        if lam == 0.0:
            return 0.0
        return lam ** ((1.0 + root) / (1.0 - root))
    return ((root - math.sqrt(lam)) / (1.0 - math.sqrt(mu * lam))) ** 2

# ============================================================================
# Level Crossings
# ============================================================================

@dataclass(frozen=True)
class AllAbove:
    """Symbol exceeds the level on all of (0, 2*pi]"""


@dataclass(frozen=True)
class NoneAbove:
    """Symbol never exceeds the level (up to a null set)"""


@dataclass(frozen=True)
class CrossAt:
    """Symbol exceeds the level exactly on (x, 2*pi]"""
    x: float


type LevelCrossing = AllAbove | NoneAbove | CrossAt


def _classify(c):
    # eta > level  <=>  cos(x/2) < c, and cos(x/2) falls from 1 to -1 on [0, 2*pi]
    if c >= 1.0:
        return AllAbove()
    if c <= -1.0:
        return NoneAbove()
    return CrossAt(x=2.0 * math.acos(c))


def symbol_level_crossing(level, lam, mu, model):
    """
    Where the symbol rises above `level`

    Solved in closed form: for either model eta(x) > level is equivalent to
    cos(x/2) < c for a threshold c depending on (level, lambda, mu).

    Returns:
        AllAbove, NoneAbove or CrossAt(x)
    """
    _check_symbol_params(lam, mu)
    require(level > 0.0, f"level must be positive, got {level!r}")
    if level >= 1.0:
        return NoneAbove()
    if mu == 0.0 or (model is SymbolModel.DIM and lam in (0.0, 1.0)):
        constant = eta_symbol(0.0, lam, mu, model)
        return AllAbove() if constant > level else NoneAbove()
    if model is SymbolModel.DIM:
        ratio = math.log(1.0 / lam) / math.log(1.0 / level)
        c = (1.0 + mu - (1.0 - mu) * ratio) / (2.0 * math.sqrt(mu))
    else:
        if lam == 0.0:
            return AllAbove() if mu > level else NoneAbove()
        c = (mu + lam - level * (1.0 + mu * lam)) / (2.0 * math.sqrt(mu * lam) * (1.0 - level))
    return _classify(c)


def q_positive_crossing(lam, mu, model):
    """Kink of the quantum-capacity integrand: where the symbol crosses 1/2"""
    return symbol_level_crossing(0.5, lam, mu, model)

# ============================================================================
# Tail Convergence
# ============================================================================

@dataclass(frozen=True)
class TailReport:
    n: int
    j_start: int
    max_deviation: float
    outside_fraction: float

    def to_dict(self):
        return {
            'n': self.n,
            'j_start': self.j_start,
            'max_deviation': self.max_deviation,
            'outside_fraction': self.outside_fraction,
        }


def default_window_start(n):
    """j_n = ceil(n^(3/4)), computed in integers so perfect powers are exact"""
    j = max(1, round(n ** 0.75))
    while j ** 4 < n ** 3:
        j += 1
    while j > 1 and (j - 1) ** 4 >= n ** 3:
        j -= 1
    return j


def model_spectrum(n, lam, mu, model, gamma=1.0):
    """Spectrum of the n-use transfer matrix of either model"""
    if model is SymbolModel.DIM:
        return transmissivity_spectrum(n, ChannelParams(lam=lam, mu=mu, gamma=gamma))
    _check_symbol_params(lam, mu)
    # The LIM is the single-segment interferometer
    return matrix_spectrum(finite_m_coefficients(1, n, lam, mu, gamma=gamma).a_matrix)


def spectrum_rows(n, lam, mu, model, gamma=1.0):
    """Rows (j, eta_j, gamma * eta(2*pi*j/n)) for j = 1..n"""
    values = model_spectrum(n, lam, mu, model, gamma=gamma).values
    grid = np.minimum(TWO_PI * np.arange(1, n + 1) / n, TWO_PI)
    symbol = gamma * np.asarray(eta_symbol(grid, lam, mu, model))
    return [{'j': j + 1, 'eta': float(values[j]), 'eta_symbol': float(symbol[j])} for j in range(n)]


def tail_convergence_report(n, lam, mu, model, j_start=None):
    """
    Compare the sorted spectrum eta_j^(n) with the symbol sampled at 2*pi*j/n

    Args:
        n: Number of channel uses
        lam, mu: Fibre parameters
        model: SymbolModel
        j_start: First index (1-based) of the comparison window; defaults to ceil(n^(3/4))

    Returns:
        TailReport
    """
    require(isinstance(n, (int, np.integer)) and n >= 1, f"n must be a positive integer, got {n!r}")
    if j_start is None:
        j_start = default_window_start(n)
    require(isinstance(j_start, (int, np.integer)) and 1 <= j_start <= n,
            f"j_start must lie in [1, {n}], got {j_start!r}")

    values = model_spectrum(n, lam, mu, model).values
    grid = TWO_PI * np.arange(1, n + 1) / n
    symbol = eta_symbol(np.minimum(grid, TWO_PI), lam, mu, model)
    deviations = np.abs(values - symbol)[j_start - 1:]

    low = eta_inf(lam, mu, model) - BAND_SLACK
    high = eta_sup(lam, mu, model) + BAND_SLACK
    outside = np.count_nonzero((values < low) | (values > high))

    report = TailReport(n=int(n), j_start=int(j_start),
                        max_deviation=float(np.max(deviations)),
                        outside_fraction=outside / n)
    logger.info("tail report %s n=%d: %s", model.value, n, report)
    return report


if __name__ == "__main__":
    # Can be run as a script or imported as a module
    print("Spectral module loaded")
    for n in (4, 10, 60):
        print(f"  {tail_convergence_report(n, 0.3, 0.2, SymbolModel.DIM).to_dict()}")
