"""Exact arithmetic for orbits of the base-r shift map S y = r*y mod 1.

A point y in [0,1] is represented by its base-r digit expansion, never by a
float, so deciding whether a shifted point S^n y lies in an interval with
rational endpoints is free of rounding error.  Shifting by n steps is just
reading the expansion from position n+1 onward.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapExceeded, Undecidable

DEFAULT_MAX_DIGITS = 1 << 20

# Seeded streams extend their cache in fixed-size blocks so the digit at a
# given index never depends on the access pattern.
_BLOCK = 1 << 16


@dataclass(frozen=True)
class RationalInterval:
    """Open interval (lo, hi) with exact rational endpoints, 0 <= lo < hi <= 1."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not (0 <= lo < hi <= 1):
            raise ValueError(f"need 0 <= lo < hi <= 1, got ({lo}, {hi})")

    def contains(self, x) -> bool:
        """Strict membership (both endpoints open)."""
        return self.lo < x < self.hi

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo


class DigitStream:
    """Lazily extended base-r digit expansion of a point y in [0,1].

    Digit indices start at 1.  Two flavors:

    * seeded: digits are i.i.d. uniform in {0,..,r-1}, drawn from a
      counter-based RNG, so equal (seed, base) always yields the same
      expansion.  Models a Lebesgue-random y.
    * explicit: an eventually periodic expansion, i.e. a rational y whose
      exact value is available as a Fraction.

    The cache is single-writer; clones for parallel workers are rebuilt
    from (seed, base).
    """

    def __init__(self, base, *, seed=None, preperiod=(), period=(),
                 max_digits=DEFAULT_MAX_DIGITS):
        if base < 2:
            raise ValueError("base must be >= 2")
        self.base = int(base)
        self.max_digits = int(max_digits)
        self.seed = seed
        if seed is not None:
            if preperiod or period:
                raise ValueError("give either a seed or explicit digits, not both")
            self._rng = np.random.Generator(np.random.Philox(seed))
            self._cache = np.empty(0, dtype=np.uint64)
            self.preperiod = self.period = None
        else:
            pre = tuple(int(d) for d in preperiod)
            per = tuple(int(d) for d in period)
            for d in pre + per:
                if not 0 <= d < base:
                    raise ValueError(f"digit {d} out of range for base {base}")
            if not per:
                per = (0,)
            self.preperiod, self.period = pre, per
            self._rng = None
            self._cache = None

    @classmethod
    def from_rational(cls, y, base, max_digits=DEFAULT_MAX_DIGITS):
        """Explicit stream for a rational y in [0, 1)."""
        y = Fraction(y)
        if not 0 <= y < 1:
            raise ValueError("need 0 <= y < 1")
        p, q = y.numerator, y.denominator
        # long division with cycle detection
        seen = {}
        digits = []
        rem = p
        while rem not in seen:
            seen[rem] = len(digits)
            rem *= base
            digits.append(rem // q)
            rem %= q
        start = seen[rem]
        return cls(base, preperiod=tuple(digits[:start]),
                   period=tuple(digits[start:]), max_digits=max_digits)

    @property
    def exact_value(self):
        """Exact rational value for explicit streams, None for seeded ones."""
        if self.period is None:
            return None
        r = self.base
        pre_len, per_len = len(self.preperiod), len(self.period)
        pre_val = 0
        for d in self.preperiod:
            pre_val = pre_val * r + d
        per_val = 0
        for d in self.period:
            per_val = per_val * r + d
        return (Fraction(pre_val, r ** pre_len)
                + Fraction(per_val, r ** pre_len * (r ** per_len - 1)))

    def tail_value(self, n):
        """Exact value of S^n y = r^n y mod 1 for explicit streams."""
        y = self.exact_value
        if y is None:
            raise ValueError("tail_value needs an explicit (rational) stream")
        return (y * self.base ** n) % 1

    def clone(self):
        """Fresh stream with the same digit sequence and empty cache."""
        if self.seed is not None:
            return DigitStream(self.base, seed=self.seed, max_digits=self.max_digits)
        return DigitStream(self.base, preperiod=self.preperiod,
                           period=self.period, max_digits=self.max_digits)

    def _extend_to(self, n):
        if n > self.max_digits:
            raise CapExceeded(f"digit index {n} exceeds cap {self.max_digits}")
        while len(self._cache) < n:
            block = self._rng.integers(0, self.base, size=_BLOCK, dtype=np.uint64)
            self._cache = np.concatenate([self._cache, block])

    def digit_at(self, i):
        """Digit d_i, 1-indexed.  Deterministic; extends the cache as needed."""
        if i < 1:
            raise ValueError("digit indices start at 1")
        if i > self.max_digits:
            raise CapExceeded(f"digit index {i} exceeds cap {self.max_digits}")
        if self.period is not None:
            pre = self.preperiod
            if i <= len(pre):
                return pre[i - 1]
            return self.period[(i - 1 - len(pre)) % len(self.period)]
        self._extend_to(i)
        return int(self._cache[i - 1])

    def digit_block(self, start, count):
        """Digits d_start .. d_{start+count-1} as a uint64 array (1-indexed)."""
        if start < 1 or count < 0:
            raise ValueError("bad block range")
        end = start + count - 1
        if end > self.max_digits:
            raise CapExceeded(f"digit index {end} exceeds cap {self.max_digits}")
        if self.period is not None:
            idx = np.arange(start - 1, end, dtype=np.int64)
            pre = np.array(self.preperiod, dtype=np.uint64)
            per = np.array(self.period, dtype=np.uint64)
            out = np.where(idx < len(pre),
                           pre[np.minimum(idx, len(pre) - 1)] if len(pre) else 0,
                           per[(idx - len(pre)) % len(per)])
            return out.astype(np.uint64)
        self._extend_to(end)
        return self._cache[start - 1:end].copy()


def digit_at(stream, i):
    """Module-level alias for :meth:`DigitStream.digit_at`."""
    return stream.digit_at(i)


def shifted_point_in(stream, n, target, max_extra=None):
    """Decide whether S^n y lies strictly inside ``target``.

    For explicit (rational) streams the decision is an exact rational
    comparison.  For seeded streams, digits d_{n+1}, d_{n+2}, ... are
    consumed until the prefix enclosure [v, v + r^-j] separates from both
    endpoints; raises Undecidable if that never happens within the budget
    (only possible when the tail agrees with an endpoint to full depth).
    """
    exact = stream.exact_value
    if exact is not None:
        return target.contains(stream.tail_value(n))

    r = stream.base
    if max_extra is None:
        max_extra = stream.max_digits - n
    if max_extra <= 0:
        raise CapExceeded(f"no digit budget past position {n}")

    lo_n, lo_d = target.lo.numerator, target.lo.denominator
    hi_n, hi_d = target.hi.numerator, target.hi.denominator
    v = 0          # prefix value scaled by r^j
    rj = 1
    gt_lo = None   # tail > lo ?
    lt_hi = None   # tail < hi ?
    for j in range(1, max_extra + 1):
        v = v * r + stream.digit_at(n + j)
        rj *= r
        if gt_lo is None:
            if v * lo_d > lo_n * rj:
                gt_lo = True
            elif (v + 1) * lo_d <= lo_n * rj:
                return False          # tail <= lo
        if lt_hi is None:
            if (v + 1) * hi_d < hi_n * rj:
                lt_hi = True
            elif v * hi_d >= hi_n * rj:
                return False          # tail >= hi
        if gt_lo and lt_hi:
            return True
    raise Undecidable(
        f"membership at shift {n} unresolved after {max_extra} digits")
