"""
Tests for Laguerre polynomials, the entropy function and the delay conversion
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from errors import InvalidParameterError
from specialfn import (delay_from_memory, entropy_g, laguerre_gen_m1, laguerre_row,
                       memory_from_delay)


def exact_laguerre_m1(m, x):
    """L_m^(-1)(x) = sum_{i=1..m} (-1)^i C(m-1, i-1) x^i / i! in exact arithmetic"""
    if m == 0:
        return Fraction(1)
    x = Fraction(x)
    return sum(Fraction((-1) ** i * math.comb(m - 1, i - 1), math.factorial(i)) * x ** i
               for i in range(1, m + 1))


# ============================================================================
# Laguerre
# ============================================================================

def test_low_orders():
    x = 0.7
    row = laguerre_row(2, x).values
    assert row[0] == 1.0
    assert row[1] == -x
    assert row[2] == pytest.approx(x * x / 2 - x, abs=1e-15)


@pytest.mark.parametrize('x', [math.log(1 / 0.3), math.log(4.0), 0.05, 2.5])
def test_row_matches_exact_sum(x):
    order = 40
    row = laguerre_row(order, x).values
    scale = max(1.0, float(np.max(np.abs(row))))
    for m in range(order + 1):
        assert abs(row[m] - float(exact_laguerre_m1(m, x))) <= 1e-12 * scale


def exact_laguerre_column(order, x):
    """Exact L_0..L_order at x from the defining sum, sharing the powers x^i / i!"""
    x = Fraction(x)
    powers = [Fraction(1)]
    for i in range(1, order + 1):
        powers.append(powers[-1] * x / i)
    column = [Fraction(1)]
    for m in range(1, order + 1):
        column.append(sum((-1) ** i * math.comb(m - 1, i - 1) * powers[i] for i in range(1, m + 1)))
    return column


def test_row_accuracy_over_domain():
    # Relative 1e-12 away from roots; near a root the error floor is
    # 1e-13 times the largest |L_k(x)| for k <= m
    order = 30
    worst_relative = 0.0
    for x in np.linspace(-10.0, 10.0, 801):
        x = float(x)
        row = laguerre_row(order, x).values
        exact = exact_laguerre_column(order, x)
        scale = 0.0
        for m in range(order + 1):
            target = float(exact[m])
            scale = max(scale, abs(target))
            error = abs(float(Fraction(float(row[m])) - exact[m]))
            assert error <= 1e-12 * abs(target) + 1e-13 * scale, (m, x, row[m], target)
            if target != 0.0 and abs(target) >= 1e-2 * scale:
                worst_relative = max(worst_relative, error / abs(target))
    assert worst_relative <= 1e-12


def test_generating_function():
    x, t = math.log(1 / 0.3), 0.3
    row = laguerre_row(200, x).values
    series = float(np.sum(row * t ** np.arange(201)))
    assert series == pytest.approx(math.exp(-x * t / (1 - t)), abs=1e-12)


def test_zero_argument():
    row = laguerre_row(10, 0.0).values
    assert row[0] == 1.0
    assert np.all(row[1:] == 0.0)


def test_single_order_matches_row():
    assert laguerre_gen_m1(7, 1.3) == laguerre_row(7, 1.3).values[7]
    assert len(laguerre_row(7, 1.3)) == 8


@pytest.mark.parametrize('order, x', [(-1, 0.5), (2.5, 0.5), (3, math.nan), (3, math.inf)])
def test_laguerre_rejects_bad_input(order, x):
    with pytest.raises(InvalidParameterError):
        laguerre_row(order, x)

# ============================================================================
# Entropy
# ============================================================================

def test_entropy_values():
    assert entropy_g(0.0) == 0.0
    assert entropy_g(1.0) == pytest.approx(2.0, abs=1e-15)
    assert entropy_g(3.0) == pytest.approx(4 * 2 - 3 * math.log2(3), abs=1e-14)


def test_entropy_is_vectorised():
    values = entropy_g(np.array([0.0, 1.0, 3.0]))
    assert values.shape == (3,)
    assert values[1] == pytest.approx(2.0)


@pytest.mark.parametrize('nu', [-0.1, math.nan, math.inf])
def test_entropy_rejects_bad_input(nu):
    with pytest.raises(InvalidParameterError):
        entropy_g(nu)


@given(st.floats(min_value=0.0, max_value=50.0), st.floats(min_value=1e-3, max_value=10.0))
@settings(max_examples=200, deadline=None)
def test_entropy_increasing(nu, step):
    assert entropy_g(nu + step) > entropy_g(nu)

# ============================================================================
# Memory <-> Delay
# ============================================================================

@given(st.floats(min_value=0.0, max_value=20.0), st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=200, deadline=None)
def test_delay_round_trip(delta_t, t_E):
    mu = memory_from_delay(delta_t, t_E)
    if mu > 0:
        assert delay_from_memory(mu, t_E) == pytest.approx(delta_t, abs=1e-9)


def test_delay_edges():
    assert memory_from_delay(0.0, 1.0) == 1.0
    assert delay_from_memory(0.0, 1.0) == math.inf
    assert delay_from_memory(1.0, 2.0) == 0.0


@pytest.mark.parametrize('delta_t, t_E', [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
def test_delay_rejects_bad_input(delta_t, t_E):
    with pytest.raises(InvalidParameterError):
        memory_from_delay(delta_t, t_E)
