"""Tests for exact digit-expansion arithmetic."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinktargets.digit_orbit import (DigitStream, RationalInterval,
                                       digit_at, shifted_point_in)
from shrinktargets.errors import CapExceeded, Undecidable


def test_rational_interval_validation():
    RationalInterval(Fraction(0), Fraction(1))
    with pytest.raises(ValueError):
        RationalInterval(Fraction(1, 2), Fraction(1, 2))
    with pytest.raises(ValueError):
        RationalInterval(Fraction(-1, 2), Fraction(1, 2))
    with pytest.raises(ValueError):
        RationalInterval(Fraction(1, 3), Fraction(5, 4))


def test_interval_open_membership():
    t = RationalInterval(Fraction(0), Fraction(1, 2))
    assert not t.contains(Fraction(0))
    assert not t.contains(Fraction(1, 2))
    assert t.contains(Fraction(1, 4))
    assert t.length == Fraction(1, 2)


def test_digits_of_one_third():
    s = DigitStream.from_rational(Fraction(1, 3), 2)
    # 1/3 = 0.010101... in base 2
    assert [s.digit_at(i) for i in range(1, 7)] == [0, 1, 0, 1, 0, 1]
    assert digit_at(s, 3) == 0


def test_zero_expansion():
    s = DigitStream.from_rational(Fraction(0), 5)
    assert s.digit_at(7) == 0
    assert s.exact_value == 0


def test_seeded_determinism():
    a = DigitStream(2, seed=42)
    b = DigitStream(2, seed=42)
    assert a.digit_at(5) == b.digit_at(5)
    assert np.array_equal(a.digit_block(1, 1000), b.digit_block(1, 1000))


def test_block_order_independence():
    a = DigitStream(3, seed=9)
    b = DigitStream(3, seed=9)
    # reading far digits first must not change earlier ones
    _ = a.digit_at(70000)
    assert np.array_equal(a.digit_block(1, 100), b.digit_block(1, 100))


def test_digit_block_explicit_no_preperiod():
    s = DigitStream(2, preperiod=(), period=(1, 0))
    assert s.digit_block(1, 5).tolist() == [1, 0, 1, 0, 1]


def test_cap_exceeded():
    s = DigitStream(2, seed=1, max_digits=100)
    with pytest.raises(CapExceeded):
        s.digit_at(101)
    with pytest.raises(CapExceeded):
        s.digit_block(50, 60)


def test_exact_value_round_trip():
    for y in [Fraction(1, 3), Fraction(5, 7), Fraction(1, 4), Fraction(0)]:
        for base in (2, 3, 10):
            s = DigitStream.from_rational(y, base)
            assert s.exact_value == y


def test_tail_value():
    s = DigitStream.from_rational(Fraction(1, 3), 2)
    assert s.tail_value(2) == Fraction(1, 3)
    assert s.tail_value(1) == Fraction(2, 3)


def test_shifted_point_in_examples():
    s = DigitStream.from_rational(Fraction(1, 3), 2)
    assert shifted_point_in(s, 2, RationalInterval(Fraction(0), Fraction(1, 2)))
    z = DigitStream.from_rational(Fraction(0), 2)
    assert not shifted_point_in(z, 4, RationalInterval(Fraction(0), Fraction(3, 4)))
    half = DigitStream(2, preperiod=(1,), period=(0,))
    assert not shifted_point_in(half, 1, RationalInterval(Fraction(0), Fraction(1, 4)))


def test_shifted_point_in_seeded_matches_prefix():
    s = DigitStream(2, seed=77)
    # interval endpoints chosen well away from the tail: decision resolves fast
    assert shifted_point_in(s, 0, RationalInterval(Fraction(0), Fraction(1))) in (True, False)
    d1 = s.digit_at(1)
    lo = Fraction(d1, 2)
    hi = lo + Fraction(1, 2)
    # the tail starts inside [lo, lo+1/2); strictly-inside checks must agree
    inside = shifted_point_in(s, 0, RationalInterval(lo, hi)) if lo > 0 else None
    if inside is not None:
        assert inside


def test_undecidable_at_cap():
    s = DigitStream(2, seed=3, max_digits=24)
    prefix = 0
    for i in range(1, 25):
        prefix = prefix * 2 + s.digit_at(i)
    hi = Fraction(prefix + 1, 1 << 24)
    lo = Fraction(prefix, 1 << 24) if prefix else Fraction(0)
    fresh = DigitStream(2, seed=3, max_digits=24)
    with pytest.raises(Undecidable):
        shifted_point_in(fresh, 0, RationalInterval(lo, hi))


@settings(max_examples=60, deadline=None)
@given(num=st.integers(0, 500), den=st.integers(1, 501), n=st.integers(0, 200),
       tnum=st.integers(1, 63))
def test_tail_identity_vs_rational_oracle(num, den, n, tnum):
    y = Fraction(num % den, den)
    s = DigitStream.from_rational(y, 2)
    target = RationalInterval(Fraction(0), Fraction(tnum, 64))
    tail = (y * 2 ** n) % 1
    assert shifted_point_in(s, n, target) == (0 < tail < Fraction(tnum, 64))


def test_shift_consistency():
    y = Fraction(5, 7)
    n = 4
    s = DigitStream.from_rational(y, 2)
    shifted = DigitStream.from_rational((y * 2 ** n) % 1, 2)
    for i in range(1, 40):
        assert s.digit_at(n + i) == shifted.digit_at(i)


def test_seeded_digit_frequency():
    for base in (2, 5):
        s = DigitStream(base, seed=1234)
        d = s.digit_block(1, 10 ** 5)
        counts = np.bincount(d.astype(np.int64), minlength=base)
        p = 1 / base
        sd = np.sqrt(10 ** 5 * p * (1 - p))
        assert np.all(np.abs(counts - 10 ** 5 * p) < 5 * sd)


def test_clone_reproduces():
    s = DigitStream(2, seed=5)
    _ = s.digit_block(1, 500)
    c = s.clone()
    assert np.array_equal(c.digit_block(1, 500), s.digit_block(1, 500))
