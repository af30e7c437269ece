"""
Scalar special functions: generalised Laguerre polynomials L_m^(-1),
the bosonic entropy function g, and the memory <-> signal-delay conversion
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from errors import InvalidParameterError, require

# ============================================================================
# Laguerre Polynomials (alpha = -1)
# ============================================================================

@dataclass(frozen=True)
class LaguerreRow:
    """values[m] = L_m^(-1)(x) for m = 0..order_max"""
    order_max: int
    x: float
    values: np.ndarray

    def __len__(self):
        return self.order_max + 1


def _check_order_and_point(m, x):
    require(isinstance(m, (int, np.integer)) and m >= 0,
            f"Laguerre order must be a nonnegative integer, got {m!r}")
    require(math.isfinite(x), f"Laguerre argument must be finite, got {x!r}")


def laguerre_row(order_max, x):
    """
    Evaluate L_0^(-1)(x), ..., L_order_max^(-1)(x) in a single recurrence pass

    Uses m L_m = (2m - 2 - x) L_{m-1} - (m - 2) L_{m-2}, the alpha = -1 case
    of the standard three-term recurrence, seeded with L_0 = 1 and L_1 = -x.
    The error is a few ulps of the largest |L_k(x)| computed so far, so values
    close to a root of L_m lose relative accuracy.

    Args:
        order_max: Highest order to evaluate
        x: Evaluation point

    Returns:
        LaguerreRow with order_max + 1 values
    """
    _check_order_and_point(order_max, x)
    x = float(x)
    values = np.empty(order_max + 1)
    values[0] = 1.0
    if order_max >= 1:
        values[1] = -x
    for m in range(2, order_max + 1):
        values[m] = ((2 * m - 2 - x) * values[m - 1] - (m - 2) * values[m - 2]) / m
    return LaguerreRow(order_max=int(order_max), x=x, values=values)


def laguerre_gen_m1(m, x):
    """Generalised Laguerre polynomial L_m^(-1)(x)"""
    return float(laguerre_row(m, x).values[m])

# ============================================================================
# Entropy Function
# ============================================================================

def entropy_g(nu):
    """
    Bosonic entropy g(nu) = (nu+1) log2(nu+1) - nu log2(nu), with g(0) = 0

    Accepts a scalar or an array; returns the same shape.
    """
    nu_arr = np.asarray(nu, dtype=float)
    if np.any(~np.isfinite(nu_arr)) or np.any(nu_arr < 0):
        raise InvalidParameterError(f"entropy_g needs nu >= 0, got {nu!r}")
    # xlogy(0, 0) = 0 gives the 0 log 0 = 0 convention
    result = (xlogy(nu_arr + 1.0, nu_arr + 1.0) - xlogy(nu_arr, nu_arr)) / math.log(2.0)
    if result.ndim == 0:
        return float(result)
    return result

# ============================================================================
# Memory Parameter <-> Signal Separation
# ============================================================================

def memory_from_delay(delta_t, t_E):
    """
    Memory parameter mu = exp(-delta_t / t_E)

    Args:
        delta_t: Time separation between consecutive signals (>= 0)
        t_E: Thermalisation timescale of the environment (> 0)
    """
    require(t_E > 0, f"t_E must be positive, got {t_E!r}")
    require(delta_t >= 0, f"delta_t must be nonnegative, got {delta_t!r}")
    return math.exp(-delta_t / t_E)


def delay_from_memory(mu, t_E):
    """Inverse of memory_from_delay: delta_t = -t_E ln(mu); mu = 0 maps to +inf"""
    require(t_E > 0, f"t_E must be positive, got {t_E!r}")
    require(0 <= mu <= 1, f"mu must lie in [0, 1], got {mu!r}")
    if mu == 0:
        return math.inf
    return -t_E * math.log(mu)


if __name__ == "__main__":
    # Can be run as a script or imported as a module
    print("Special functions module loaded")
    print(f"L_5^(-1)(ln 4) = {laguerre_gen_m1(5, math.log(4.0))}")
    print(f"g(1) = {entropy_g(1.0)}")
