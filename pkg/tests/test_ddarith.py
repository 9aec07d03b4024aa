from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

from catenoid_lab.ddarith import DD, dd_compare, dd_midpoint, dd_scalar, two_prod, two_sum

finite = st.floats(-1e100, 1e100, allow_nan=False, allow_infinity=False)
moderate = st.floats(-1e30, 1e30, allow_nan=False, allow_infinity=False)


@given(finite, finite)
def test_two_sum_is_exact(a, b):
    s, e = two_sum(np.float64(a), np.float64(b))
    if np.isfinite(s):
        assert Fraction(float(s)) + Fraction(float(e)) == Fraction(a) + Fraction(b)


@given(moderate, moderate)
def test_two_prod_is_exact(a, b):
    p, e = two_prod(np.float64(a), np.float64(b))
    if np.isfinite(p) and abs(float(p)) > 1e-250:
        assert Fraction(float(p)) + Fraction(float(e)) == Fraction(a) * Fraction(b)


def test_dd_resolves_below_double_epsilon():
    one = dd_scalar(1.0)
    tiny = dd_scalar(1e-20)
    s = one + tiny
    assert float(s.hi) == 1.0 and float(s.lo) == 1e-20
    assert dd_compare(s, one) == 1
    assert dd_compare(one, s) == -1
    assert dd_compare(s, s) == 0


@given(moderate, moderate)
def test_midpoint_lies_between(a, b):
    lo, hi = sorted((a, b))
    m = dd_midpoint(dd_scalar(lo), dd_scalar(hi))
    assert dd_compare(m, dd_scalar(lo)) >= 0
    assert dd_compare(dd_scalar(hi), m) >= 0


def test_array_ops_and_diff():
    x = DD.from_float(np.array([1.0, 2.0, 4.0]))
    d = x.diff()
    np.testing.assert_array_equal(d.to_float(), [1.0, 2.0])
    y = x.scale(np.array([1.0, 0.5, 0.25]))
    np.testing.assert_array_equal(y.to_float(), [1.0, 1.0, 1.0])
    z = x.mul(x)
    np.testing.assert_array_equal(z.to_float(), [1.0, 4.0, 16.0])
    x[1] = dd_scalar(7.0)
    assert x[1].to_float() == 7.0
