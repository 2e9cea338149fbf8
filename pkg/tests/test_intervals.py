import math
from fractions import Fraction

import pytest

from services.intervals import Interval, log_of


def test_exact_arithmetic_stays_exact():
    iv = Interval(1.0) - Interval(0.25)
    assert (iv.lo, iv.hi) == (0.75, 0.75)
    assert (Interval(0.5) * Interval(3.0)).width == 0.0


def test_inexact_sum_is_widened():
    iv = Interval(0.1) + Interval(0.2)
    exact = Fraction(0.1) + Fraction(0.2)
    assert Fraction(iv.lo) <= exact <= Fraction(iv.hi)
    assert iv.lo < iv.hi


def test_point_encloses_rational():
    iv = Interval.point(Fraction(1, 3))
    assert Fraction(iv.lo) <= Fraction(1, 3) <= Fraction(iv.hi)
    assert Interval.point(Fraction(1, 4)).width == 0.0


def test_multiplication_with_mixed_signs():
    iv = Interval(-1.0, 2.0) * Interval(3.0, 4.0)
    assert (iv.lo, iv.hi) == (-4.0, 8.0)
    assert (Interval(-2.0, -1.0) * Interval(-3.0, 5.0)).hi == 6.0


def test_scale_and_negation():
    iv = Interval(1.0, 2.0).scale(-2)
    assert (iv.lo, iv.hi) == (-4.0, -2.0)
    assert (-iv).lo == 2.0


def test_exp_encloses_and_keeps_zero_exact():
    assert Interval(0.0).exp().lo == 1.0 == Interval(0.0).exp().hi
    iv = Interval(0.5, 1.0).exp()
    assert iv.lo < math.exp(0.5) and math.exp(1.0) < iv.hi


def test_log_of():
    assert log_of(Fraction(1)).width == 0.0
    iv = log_of(Fraction(4, 3))
    assert iv.contains(math.log(4 / 3))
    with pytest.raises(ValueError):
        log_of(Fraction(0))


def test_hull_and_intersect():
    a, b = Interval(0.0, 1.0), Interval(0.5, 2.0)
    assert (a.hull(b).lo, a.hull(b).hi) == (0.0, 2.0)
    assert (a.intersect(b).lo, a.intersect(b).hi) == (0.5, 1.0)
    with pytest.raises(ValueError):
        a.intersect(Interval(3.0, 4.0))


def test_invalid_interval():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    with pytest.raises(ValueError):
        Interval(float("nan"))
