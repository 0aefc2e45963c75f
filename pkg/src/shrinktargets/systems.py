"""Measure-preserving test systems with exactly known ergodic limits.

Rotations store their angle as a high-precision rational (irrationals are
replaced by 128-bit rational approximations carrying a symbolic tag), so
``x + n*alpha mod 1`` is computed exactly in the rational model and the
system is exactly measure preserving.  Observables are finite character
combinations (or finite tables on cyclic systems), which keeps every space
average computable in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .digit_orbit import DigitStream

_PREC_BITS = 128


def _sqrt_approx(k):
    """Fraction approximation of sqrt(k) to 128 fractional bits (lower bound)."""
    n = math.isqrt(k << (2 * _PREC_BITS))
    return Fraction(n, 1 << _PREC_BITS)


# Named irrational angles.  The tag is the ground truth for rational-
# (in)dependence decisions; the Fraction is the working approximation.
IRRATIONALS = {
    "golden": (_sqrt_approx(5) - 1) / 2,   # (sqrt(5)-1)/2
    "sqrt2": _sqrt_approx(2) - 1,          # sqrt(2)-1
    "sqrt3": _sqrt_approx(3) - 1,          # sqrt(3)-1
}

# Pairs of distinct tags below are rationally independent together with 1:
# k1*alpha + k2*beta is an integer only for k1 = k2 = 0.
_INDEPENDENT_TAGS = {"golden", "sqrt2", "sqrt3"}


@dataclass(frozen=True)
class Angle:
    """Rotation angle: exact Fraction plus a symbolic irrationality tag."""
    value: Fraction
    tag: str   # one of IRRATIONALS keys, or "rational"

    @classmethod
    def make(cls, spec):
        if isinstance(spec, Angle):
            return spec
        if isinstance(spec, str):
            if spec not in IRRATIONALS:
                raise ValueError(f"unknown angle name {spec!r}")
            return cls(IRRATIONALS[spec], spec)
        return cls(Fraction(spec), "rational")

    @property
    def irrational(self):
        return self.tag != "rational"


@dataclass(frozen=True)
class Observable:
    """Finite character combination f(x) = sum_j c_j e(k_j x), |f| <= 1.

    For cyclic systems, use kind="table" with data = tuple of q complex
    values bounded by 1.
    """
    id: str
    kind: str = "character"          # "character" | "table"
    freqs: tuple = (1,)
    coeffs: tuple = (1.0,)
    data: tuple = ()

    def __post_init__(self):
        if self.kind == "character":
            if len(self.freqs) != len(self.coeffs):
                raise ValueError("freqs and coeffs must align")
            if sum(abs(complex(c)) for c in self.coeffs) > 1 + 1e-12:
                raise ValueError("sum of |coeffs| must be <= 1 (sup norm bound)")
        elif self.kind == "table":
            if any(abs(complex(v)) > 1 + 1e-12 for v in self.data):
                raise ValueError("table values must be bounded by 1")
        else:
            raise ValueError(f"unknown observable kind {self.kind!r}")

    def eval_phases(self, phases):
        """Evaluate at points given by their fractional parts (float array)."""
        out = np.zeros(len(phases), dtype=complex)
        ph = np.asarray(phases, dtype=float)
        for k, c in zip(self.freqs, self.coeffs):
            out += complex(c) * np.exp(2j * np.pi * k * ph)
        return out

    def eval_table(self, states):
        tab = np.array([complex(v) for v in self.data])
        return tab[np.asarray(states, dtype=np.int64)]

    def mean(self, q=None):
        """Exact space average: integral over [0,1] or average of the table."""
        if self.kind == "table":
            return complex(np.mean([complex(v) for v in self.data]))
        return complex(sum(complex(c) for k, c in zip(self.freqs, self.coeffs)
                           if k == 0))


def e_k(k, label=None):
    """The character x -> e(kx)."""
    return Observable(id=label or f"e{k}", freqs=(int(k),), coeffs=(1.0,))


class MPSystem:
    """One of: circle_rotation, torus_pair, power_pair, doubling, cyclic.

    Two-transformation kinds expose phases_double; all kinds expose
    orbit evaluation of observables at prescribed iterate counts.
    """

    def __init__(self, kind, **params):
        self.kind = kind
        self.params = params
        if kind == "circle_rotation":
            self.alpha = Angle.make(params["alpha"])
        elif kind == "torus_pair":
            self.alpha = Angle.make(params["alpha"])
            self.beta = Angle.make(params["beta"])
        elif kind == "power_pair":
            self.alpha = Angle.make(params["alpha"])
            self.p1 = int(params.get("p1", 1))
            self.p2 = int(params.get("p2", 2))
        elif kind == "doubling":
            self.base = int(params.get("r", 2))
        elif kind == "cyclic":
            self.q = int(params["q"])
            self.p1 = int(params.get("p1", 1))
            self.p2 = int(params.get("p2", 1))
            if self.q < 1:
                raise ValueError("q must be >= 1")
        else:
            raise ValueError(f"unknown system kind {kind!r}")

    # -- orbit computation -------------------------------------------------

    @staticmethod
    def _rot_phases(x, angle, ns):
        """frac(x + n*alpha) for each n, exact in the rational model."""
        x = Fraction(x)
        a = angle.value
        q0, q1 = x.denominator, a.denominator
        M = q0 * q1
        A = x.numerator * q1
        B = a.numerator * q0
        return np.array([float(Fraction((A + int(n) * B) % M, M)) for n in ns])

    def iterate(self, x, n):
        """T^n x (first transformation for two-map kinds)."""
        n = int(n)
        if self.kind == "circle_rotation":
            return (Fraction(x) + n * self.alpha.value) % 1
        if self.kind == "torus_pair":
            # T_1 rotates the first coordinate only
            x1, x2 = x
            return ((Fraction(x1) + n * self.alpha.value) % 1, Fraction(x2))
        if self.kind == "power_pair":
            return (Fraction(x) + n * self.p1 * self.alpha.value) % 1
        if self.kind == "cyclic":
            return (int(x) + n * self.p1) % self.q
        if self.kind == "doubling":
            if isinstance(x, DigitStream):
                return x.tail_value(n)
            return (Fraction(x) * self.base ** n) % 1
        raise AssertionError

    def iterate2(self, x, n):
        """Second transformation T_2^n x for two-map kinds."""
        n = int(n)
        if self.kind == "torus_pair":
            # T_2 rotates the second coordinate only
            x1, x2 = x
            return (Fraction(x1), (Fraction(x2) + n * self.beta.value) % 1)
        if self.kind == "power_pair":
            return (Fraction(x) + n * self.p2 * self.alpha.value) % 1
        if self.kind == "cyclic":
            return (int(x) + n * self.p2) % self.q
        raise ValueError(f"{self.kind} has a single transformation")

    def orbit_values(self, f, x, ns, which=1):
        """f(T^n x) for an array of iterate counts n (T = T_which)."""
        ns = np.asarray(ns, dtype=np.int64)
        if self.kind == "cyclic":
            p = self.p1 if which == 1 else self.p2
            states = (int(x) + ns * p) % self.q
            return f.eval_table(states)
        if self.kind == "circle_rotation":
            ph = self._rot_phases(x, self.alpha, ns)
            return f.eval_phases(ph)
        if self.kind == "power_pair":
            p = self.p1 if which == 1 else self.p2
            scaled = Angle(self.alpha.value * p, self.alpha.tag)
            ph = self._rot_phases(x, scaled, ns)
            return f.eval_phases(ph)
        if self.kind == "torus_pair":
            x1, x2 = x
            if which == 1:
                ph = self._rot_phases(x1, self.alpha, ns)
            else:
                ph = self._rot_phases(x2, self.beta, ns)
            return f.eval_phases(ph)
        if self.kind == "doubling":
            if isinstance(x, DigitStream):
                # first 53 digits after the shift determine the phase to 2^-53
                ph = np.empty(len(ns))
                for i, n in enumerate(ns):
                    w = x.digit_block(int(n) + 1, 53)
                    v = 0
                    for d in w:
                        v = v * x.base + int(d)
                    ph[i] = v / x.base ** 53
                return f.eval_phases(ph)
            xf = Fraction(x)
            ph = np.array([float((xf * self.base ** int(n)) % 1) for n in ns])
            return f.eval_phases(ph)
        raise AssertionError

    # -- exact limits -------------------------------------------------------

    def _char_freq_in_z(self, k1, k2, which="pair"):
        """Is k1*alpha + k2*beta an integer?  Decided from symbolic tags."""
        if self.kind == "torus_pair":
            a, b = self.alpha, self.beta
            if a.irrational and b.irrational:
                if a.tag != b.tag and {a.tag, b.tag} <= _INDEPENDENT_TAGS:
                    return k1 == 0 and k2 == 0
                if a.tag == b.tag:
                    return k1 + k2 == 0
                return None
            if a.irrational != b.irrational:
                if a.irrational:
                    return k1 == 0 and (k2 * b.value) % 1 == 0
                return k2 == 0 and (k1 * a.value) % 1 == 0
            return ((k1 * a.value + k2 * b.value) % 1) == 0
        if self.kind == "power_pair":
            coef = k1 * self.p1 + k2 * self.p2
            if self.alpha.irrational:
                return coef == 0
            return (coef * self.alpha.value) % 1 == 0
        raise AssertionError

    def exact_limit_single(self, f, which=1):
        """lim (1/N) sum f(T_which^n x): the space average when declared, else None."""
        if self.kind == "cyclic":
            p = self.p1 if which == 1 else self.p2
            if p % self.q == 0:
                return None   # identity map: limit is f(x), not a space average
            if math.gcd(p, self.q) != 1:
                return None   # non-ergodic shift
            return f.mean(self.q)
        if self.kind == "circle_rotation":
            if self.alpha.irrational:
                return f.mean()
            return None
        if self.kind == "torus_pair":
            ang = self.alpha if which == 1 else self.beta
            return f.mean() if ang.irrational else None
        if self.kind == "power_pair":
            p = self.p1 if which == 1 else self.p2
            return f.mean() if self.alpha.irrational and p != 0 else None
        if self.kind == "doubling":
            return f.mean()
        return None

    def exact_limit_double(self, f1, f2, x=None):
        """Limit of (1/N) sum f1(T1^n x) f2(T2^n x), exact where decidable.

        Resonant character pairs make the limit x-dependent; those return
        None unless x is supplied.
        """
        if self.kind == "cyclic":
            # finite orbit: brute force over one period is exact
            if x is None:
                return None
            L = self.q
            ns = np.arange(L)
            v = self.orbit_values(f1, x, ns, which=1) * \
                self.orbit_values(f2, x, ns, which=2)
            return complex(np.mean(v))
        if self.kind not in ("torus_pair", "power_pair"):
            return None
        total = 0.0 + 0.0j
        x_needed = False
        for k1, c1 in zip(f1.freqs, f1.coeffs):
            for k2, c2 in zip(f2.freqs, f2.coeffs):
                hit = self._char_freq_in_z(k1, k2)
                if hit is None:
                    return None
                if not hit:
                    continue
                if k1 == 0 and k2 == 0:
                    total += complex(c1) * complex(c2)
                    continue
                if x is None:
                    x_needed = True
                    continue
                if self.kind == "torus_pair":
                    x1, x2 = x
                    ph = float((Fraction(x1) * k1 + Fraction(x2) * k2) % 1)
                else:
                    ph = float((Fraction(x) * (k1 + k2)) % 1)
                total += complex(c1) * complex(c2) * np.exp(2j * np.pi * ph)
        if x_needed:
            return None
        return complex(total)


def make_system(kind, **params):
    """Factory mirroring the config-file presets."""
    return MPSystem(kind, **params)
