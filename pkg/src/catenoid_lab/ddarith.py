"""Double-double arithmetic on numpy arrays (about 32 significant digits).

Only the operations needed by the leapfrog stepper are provided: sums,
products with float64 coefficients, and differences along the grid.  The
error-free transformations are Knuth's TwoSum and Dekker's TwoProd with
Veltkamp splitting, so no fused multiply-add is required.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SPLITTER = 134217729.0  # 2^27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@dataclass
class DD:
    """Unevaluated sum hi + lo with |lo| <= ulp(hi) / 2."""

    hi: np.ndarray
    lo: np.ndarray

    @classmethod
    def from_float(cls, x) -> "DD":
        x = np.asarray(x, dtype=float)
        return cls(x.copy(), np.zeros_like(x))

    def copy(self) -> "DD":
        return DD(self.hi.copy(), self.lo.copy())

    def to_float(self) -> np.ndarray:
        return self.hi + self.lo

    def __add__(self, other: "DD") -> "DD":
        s, e = two_sum(self.hi, other.hi)
        t, f = two_sum(self.lo, other.lo)
        e = e + t
        s, e = quick_two_sum(s, e)
        e = e + f
        return DD(*quick_two_sum(s, e))

    def __neg__(self) -> "DD":
        return DD(-self.hi, -self.lo)

    def __sub__(self, other: "DD") -> "DD":
        return self + (-other)

    def scale(self, b) -> "DD":
        """Product with a float64 scalar or array."""
        p, e = two_prod(self.hi, b)
        e = e + self.lo * b
        return DD(*quick_two_sum(p, e))

    def mul(self, other: "DD") -> "DD":
        p, e = two_prod(self.hi, other.hi)
        e = e + (self.hi * other.lo + self.lo * other.hi)
        return DD(*quick_two_sum(p, e))

    def diff(self) -> "DD":
        """Forward differences x[i+1] - x[i]."""
        return DD(self.hi[1:], self.lo[1:]) - DD(self.hi[:-1], self.lo[:-1])

    def __getitem__(self, idx) -> "DD":
        return DD(self.hi[idx], self.lo[idx])

    def __setitem__(self, idx, value: "DD"):
        self.hi[idx] = value.hi
        self.lo[idx] = value.lo


def dd_scalar(hi: float, lo: float = 0.0) -> DD:
    return DD(np.float64(hi), np.float64(lo))


def dd_midpoint(a: DD, b: DD) -> DD:
    # halving is exact in binary
    s = a + b
    return DD(s.hi * 0.5, s.lo * 0.5)


def dd_compare(a: DD, b: DD) -> int:
    """Sign of a - b for scalar DD values."""
    d = a - b
    v = float(d.hi) + float(d.lo)
    return (v > 0) - (v < 0)
