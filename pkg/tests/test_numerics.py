import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergman.exceptions import TermBudgetExceeded
from bergman.numerics import (
    EPS,
    Enclosure,
    LogValue,
    compose_rel,
    concave_log_sum,
    concave_tail_bound,
    log_add,
    log_factorial,
    log_factorial_error,
    log_sub,
    log_sum,
    robbins_bounds,
    robbins_log_factorial,
    stirling_log,
)

finite_logs = st.floats(min_value=-700, max_value=700, allow_nan=False)


def test_log_add_identity_and_doubling():
    x = LogValue.from_log(3.25)
    assert log_add(LogValue.zero(), x) == x
    assert log_add(x, LogValue.zero()) == x
    assert log_add(LogValue.from_log(0.0), LogValue.from_log(0.0)).log == pytest.approx(math.log(2), abs=1e-16)


def test_log_add_large_against_mpmath():
    got = log_add(LogValue.from_log(700.0), LogValue.from_log(700.0)).log
    want = float(mpmath.log(2 * mpmath.exp(700)))
    assert abs(got - want) <= 4 * EPS * want


def test_log_sum_small_cases():
    assert log_sum([]).is_zero
    assert log_sum([LogValue.from_real(1.0)] * 4).to_real() == pytest.approx(4.0, rel=1e-15)


def test_log_sum_geometric():
    terms = [LogValue.from_log(-a) for a in range(1, 101)]
    q = math.exp(-1)
    want = q * (1 - q ** 100) / (1 - q)
    assert log_sum(terms).to_real() == pytest.approx(want, rel=1e-14)


@given(finite_logs, st.integers(min_value=1, max_value=500))
def test_log_sum_of_copies(v, n):
    got = log_sum([LogValue.from_log(v)] * n).log
    # relative error of the value, not of its log
    assert abs(math.expm1(got - (v + math.log(n)))) <= 4 * n * EPS + 1e-15


@given(finite_logs, finite_logs)
def test_log_add_commutes_and_dominates(a, b):
    x, y = LogValue.from_log(a), LogValue.from_log(b)
    s = log_add(x, y)
    assert s == log_add(y, x)
    assert s.log >= max(a, b)
    assert s.log <= max(a, b) + math.log(2) + 1e-15


@given(st.floats(min_value=1e-300, max_value=1e300))
def test_logvalue_round_trip(x):
    # exp() turns the absolute rounding of log(x) into relative error |log x|*eps
    tol = (abs(math.log(x)) + 2) * EPS
    assert LogValue.from_real(x).to_real() == pytest.approx(x, rel=tol)


def test_logvalue_rejects_bad_inputs():
    with pytest.raises(ValueError):
        LogValue.from_real(-1.0)
    with pytest.raises(ValueError):
        LogValue.from_log(math.nan)
    assert LogValue.from_log(-math.inf).is_zero
    assert LogValue.from_log(1000.0).to_real() == math.inf
    assert not LogValue.from_log(1000.0).representable()


def test_logvalue_arithmetic():
    a, b = LogValue.from_real(6.0), LogValue.from_real(3.0)
    assert (a * b).to_real() == pytest.approx(18.0)
    assert (a / b).to_real() == pytest.approx(2.0)
    assert (b ** 2).to_real() == pytest.approx(9.0)
    assert (a * LogValue.zero()).is_zero
    with pytest.raises(ZeroDivisionError):
        a / LogValue.zero()


def test_log_sub():
    assert log_sub(math.log(5), math.log(3)) == pytest.approx(math.log(2))
    assert log_sub(1.0, 1.0) == -math.inf
    assert log_sub(1.0, -math.inf) == 1.0


def test_enclosure_bounds():
    e = Enclosure(LogValue.from_real(10.0), 0.1)
    lo, hi = e.log_bounds()
    assert math.exp(lo) == pytest.approx(9.0)
    assert math.exp(hi) == pytest.approx(11.0)
    assert e.contains_log(math.log(10.5))
    assert not e.contains_log(math.log(11.5))


def test_compose_rel():
    assert compose_rel() == 0.0
    assert compose_rel(0.1, 0.2) == pytest.approx(0.32)


# ---------------------------------------------------------------- factorials

def test_log_factorial_small():
    assert log_factorial(0) == 0.0
    assert log_factorial(1) == 0.0
    assert log_factorial(10) == pytest.approx(math.log(3628800), abs=1e-14)
    assert log_factorial(10) == pytest.approx(15.104412573, abs=1e-9)


@pytest.mark.parametrize("n", [21, 22, 30, 50, 100, 1000, 12345, 10 ** 6])
def test_log_factorial_against_mpmath(n):
    exact = mpmath.loggamma(n + 1)
    assert abs(log_factorial(n) - float(exact)) <= log_factorial_error(n) + 1e-300
    lo, hi = robbins_bounds(n)
    assert abs(robbins_log_factorial(n) - float(exact)) <= hi - lo


def test_robbins_n10():
    r = math.log(3628800) - stirling_log(10)
    assert 1 / 121 < r < 1 / 120


def test_log_factorial_negative():
    with pytest.raises(ValueError):
        log_factorial(-1)


# ---------------------------------------------------------------- tails

def test_concave_tail_bound_equality_case():
    assert concave_tail_bound(0.0, -1.0) == 1.0


def test_concave_tail_bound_gaussian():
    bound = concave_tail_bound(-0.5, -1.0)
    true_tail = float(mpmath.quad(lambda x: mpmath.exp(-x * x / 2), [1, mpmath.inf]))
    assert bound == pytest.approx(math.exp(-0.5))
    assert bound >= true_tail
    assert true_tail == pytest.approx(0.3976, abs=1e-3)


def test_concave_tail_bound_rejects_nonnegative_slope():
    with pytest.raises(ValueError):
        concave_tail_bound(0.0, 1.0)
    with pytest.raises(ValueError):
        concave_tail_bound(0.0, 0.0)


@pytest.mark.parametrize(
    "f,fp,x0s",
    [
        (lambda x: -x * x / 2, lambda x: -x, [0.5, 1, 2, 4]),
        (lambda x: -x ** 4, lambda x: -4 * x ** 3, [0.5, 1, 1.5]),
        (lambda x: 5 * mpmath.log(x) - x, lambda x: 5 / x - 1, [6, 8, 12]),
    ],
)
def test_concave_tail_bound_dominates_quadrature(f, fp, x0s):
    for x0 in x0s:
        tail = float(mpmath.quad(lambda x: mpmath.exp(f(x)), [x0, mpmath.inf]))
        assert concave_tail_bound(float(f(x0)), float(fp(x0))) >= tail


# ---------------------------------------------------------------- summation

def test_concave_log_sum_geometric():
    s = concave_log_sum(lambda n: -0.5 * n.astype(float), 0, lower=0, rel_tol=1e-15, max_terms=10 ** 6)
    want = 1 / (1 - math.exp(-0.5))
    assert math.exp(s.log_sum) == pytest.approx(want, rel=1e-14)
    assert s.tail_rel <= 1e-15


def test_concave_log_sum_gaussian_two_sided():
    # sum over all integers of exp(-(n - 0.3)^2 / 8)
    s = concave_log_sum(lambda n: -((n - 0.3) ** 2) / 8.0, 0, rel_tol=1e-15, max_terms=10 ** 6)
    want = float(mpmath.nsum(lambda n: mpmath.exp(-((n - 0.3) ** 2) / 8), [-mpmath.inf, mpmath.inf]))
    assert math.exp(s.log_sum) == pytest.approx(want, rel=1e-14)


def test_concave_log_sum_exclude_and_bounds():
    full = concave_log_sum(lambda n: -n.astype(float), 0, lower=0, upper=9, rel_tol=1e-15, max_terms=100)
    part = concave_log_sum(lambda n: -n.astype(float), 0, lower=0, upper=9, rel_tol=1e-15, max_terms=100,
                           exclude=[0])
    assert math.exp(full.log_sum) - math.exp(part.log_sum) == pytest.approx(1.0, rel=1e-14)
    assert full.n_terms == 10


def test_concave_log_sum_budget():
    with pytest.raises(TermBudgetExceeded):
        concave_log_sum(lambda n: -1e-9 * n.astype(float), 0, lower=0, rel_tol=1e-15, max_terms=1000)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.05, max_value=5.0), st.integers(min_value=0, max_value=40))
def test_concave_log_sum_matches_polylog(t, m):
    s = concave_log_sum(lambda a: m * np.log(a.astype(float)) - a * t,
                        max(1, round(m / t)), lower=1, rel_tol=1e-14, max_terms=10 ** 7)
    want = mpmath.polylog(-m, mpmath.exp(-t))
    assert abs(math.exp(s.log_sum - float(mpmath.log(want))) - 1) <= 1e-12
