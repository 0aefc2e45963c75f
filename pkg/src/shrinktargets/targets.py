"""Shrinking targets, hitting indicators, and their r-adic approximations.

Targets are the open intervals (0, n^-a).  The dyadic approximation replaces
n^-a by a slightly larger r-adic rational gamma_n with controlled denominator;
the periodic sets J_n = {y : r^n y mod 1 in (0, gamma_n)} then enjoy exact
product formulas for well-separated indices, which this module verifies with
exact rational arithmetic.

All irrational thresholds are handled through certified integer scalings
floor(r^prec * n^-a), computed with exact integer roots, so no membership
decision ever depends on floating point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np

from .digit_orbit import DigitStream, RationalInterval, shifted_point_in
from .errors import CapExceeded, SizeExceeded, Undecidable


def _window_digits(base):
    """Largest K with base**K <= 2**62 (window values fit in uint64)."""
    k = 1
    while base ** (k + 1) <= 1 << 62:
        k += 1
    return k


def _floor_scaled(n_pow_p, q, base, prec):
    """floor(base**prec * x) for x = n_pow_p**(-1/q), as a python int."""
    num = gmpy2.mpz(base) ** (prec * q) // gmpy2.mpz(n_pow_p)
    return int(gmpy2.iroot(num, q)[0])


def _ilog(value, base):
    """Largest e with base**e <= value (value >= 1)."""
    e = gmpy2.mpz(value).num_digits(base) - 1
    while base ** (e + 1) <= value:
        e += 1
    while e > 0 and base ** e > value:
        e -= 1
    return e


@dataclass(frozen=True)
class SigmaEnclosure:
    """Certified rational enclosure of n^-a; lo == hi iff the value is rational."""
    lo: Fraction
    hi: Fraction
    exact: bool


def sigma_enclosure(n, a, precision, base=2):
    """Enclosure of n^-a with width <= base**-precision.

    If n^-a is rational the enclosure collapses to the exact value.
    """
    a = Fraction(a)
    p, q = a.numerator, a.denominator
    n_p = n ** p
    root, is_exact = gmpy2.iroot(gmpy2.mpz(n_p), q)
    if is_exact:
        v = Fraction(1, int(root))
        return SigmaEnclosure(v, v, True)
    L = _floor_scaled(n_p, q, base, precision)
    scale = base ** precision
    return SigmaEnclosure(Fraction(L, scale), Fraction(L + 1, scale), False)


# --------------------------------------------------------------------------
# target families and hitting sequences
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TargetFamily:
    """Parameters of a shrinking-target experiment.

    ``sampler`` is either "identity" (Theorems on r^n y) or a Fraction c > 1,
    meaning phi(n) = floor(n^c) (phi-sampled hitting times).
    ``mode`` selects raw targets (0, n^-a) or their dyadic approximation.
    """
    a: Fraction
    base: int = 2
    sampler: object = "identity"
    mode: str = "raw"

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        if not 0 < self.a < 1:
            raise ValueError("exponent a must lie in (0,1)")
        if self.base < 2:
            raise ValueError("base must be >= 2")
        if self.mode not in ("raw", "dyadic"):
            raise ValueError("mode must be 'raw' or 'dyadic'")
        if self.sampler != "identity":
            c = Fraction(self.sampler)
            if c <= 1:
                raise ValueError("sampler exponent c must exceed 1")
            object.__setattr__(self, "sampler", c)

    def phi_values(self, N):
        """phi(1..N) as an int64 array (strictly increasing)."""
        if self.sampler == "identity":
            return np.arange(1, N + 1, dtype=np.int64)
        c = self.sampler
        u, v = c.numerator, c.denominator
        out = np.empty(N, dtype=np.int64)
        for n in range(1, N + 1):
            out[n - 1] = int(gmpy2.iroot(gmpy2.mpz(n) ** u, v)[0])
        # floor(n^c) can repeat for small n; bump to keep phi strictly increasing
        for i in range(1, N):
            if out[i] <= out[i - 1]:
                out[i] = out[i - 1] + 1
        return out


@dataclass
class HittingSequence:
    """Indicators X_n, their means, partial-mean normalizers and hit times."""
    X: np.ndarray                 # uint8, X[i] == X_{i+1}
    sigma: np.ndarray             # float64 target lengths
    W: np.ndarray                 # float64, W[i] = sigma_1 + ... + sigma_{i+1}
    a_seq: np.ndarray             # int64, indices n with X_n = 1, increasing
    undecided: list
    fam: TargetFamily

    @property
    def N(self):
        return len(self.X)

    def count_at(self, N):
        """Number of hits among n <= N."""
        return int(np.searchsorted(self.a_seq, N, side="right"))

    def to_json(self):
        """JSON dict: bit-packed X (hex), floats as shortest round-trip decimals."""
        packed = np.packbits(self.X.astype(np.uint8))
        return {
            "schema": "hitting_sequence/1",
            "N": int(self.N),
            "a": str(self.fam.a),
            "base": self.fam.base,
            "sampler": str(self.fam.sampler),
            "mode": self.fam.mode,
            "X_packed_hex": packed.tobytes().hex(),
            "sigma": [repr(float(s)) for s in self.sigma],
            "undecided": [int(u) for u in self.undecided],
        }

    @classmethod
    def from_json(cls, d):
        fam = TargetFamily(
            a=Fraction(d["a"]), base=d["base"],
            sampler=d["sampler"] if d["sampler"] == "identity" else Fraction(d["sampler"]),
            mode=d["mode"])
        N = d["N"]
        X = np.unpackbits(np.frombuffer(bytes.fromhex(d["X_packed_hex"]),
                                        dtype=np.uint8))[:N]
        sigma = np.array([float(s) for s in d["sigma"]])
        return cls(X=X, sigma=sigma, W=np.cumsum(sigma),
                   a_seq=np.flatnonzero(X).astype(np.int64) + 1,
                   undecided=list(d["undecided"]), fam=fam)


# --------------------------------------------------------------------------
# dyadic approximation
# --------------------------------------------------------------------------

@dataclass
class DyadicTarget:
    """Non-increasing r-adic lengths gamma_n > n^-a with bounded denominators.

    gamma_n = gamma_num[n-1] / base**gamma_D[n-1]; F_lo/F_hi are certified
    integer enclosures of lambda(F_n) = gamma_n - n^-a at scale base**-fprec.
    """
    base: int
    a: Fraction
    gamma_num: list
    gamma_D: list
    k: list
    fprec: int
    F_lo: list
    F_hi: list

    @property
    def N(self):
        return len(self.gamma_num)

    def gamma(self, n):
        return Fraction(self.gamma_num[n - 1], self.base ** self.gamma_D[n - 1])

    def gamma_floats(self):
        return np.array([self.gamma_num[i] / self.base ** self.gamma_D[i]
                         for i in range(self.N)])

    def f_partial_sums(self):
        """Certified enclosures of sum_{n<=N} lambda(F_n), as Fractions."""
        scale = Fraction(1, self.base ** self.fprec)
        lo = np.cumsum([0] + self.F_lo[0:0])  # placeholder to keep type checkers calm
        lo_sum, hi_sum = 0, 0
        lows, highs = [], []
        for lo_i, hi_i in zip(self.F_lo, self.F_hi):
            lo_sum += lo_i
            hi_sum += hi_i
            lows.append(lo_sum * scale)
            highs.append(hi_sum * scale)
        return lows, highs

    def to_json(self):
        return {
            "schema": "dyadic_target/1",
            "base": self.base,
            "a": str(self.a),
            "N": self.N,
            "gamma_num": [str(g) for g in self.gamma_num],
            "gamma_D": list(self.gamma_D),
            "k": list(self.k),
            "fprec": self.fprec,
            "F_lo": [str(v) for v in self.F_lo],
            "F_hi": [str(v) for v in self.F_hi],
        }

    @classmethod
    def from_json(cls, d):
        return cls(base=d["base"], a=Fraction(d["a"]),
                   gamma_num=[int(g) for g in d["gamma_num"]],
                   gamma_D=list(d["gamma_D"]), k=list(d["k"]), fprec=d["fprec"],
                   F_lo=[int(v) for v in d["F_lo"]],
                   F_hi=[int(v) for v in d["F_hi"]])


def build_dyadic(fam, N):
    """Construct gamma_1..gamma_N per the bracket rule.

    For each n, k is the integer with r^-(k+1) < n^-a <= r^-k and
    D = ceil(2k/a); gamma_n is the least multiple of r^-D strictly above
    n^-a (equal allowed only at n = 1 where n^-a = 1), then clipped to be
    non-increasing by a running minimum.
    """
    a = Fraction(fam.a)
    r = fam.base
    p, q = a.numerator, a.denominator
    gamma_num, gamma_D, ks = [], [], []
    for n in range(1, N + 1):
        n_p = gmpy2.mpz(n) ** p
        k = _ilog(n_p, r) // q          # r^(kq) <= n^p  <=>  r^-k >= n^-a
        D = -((-2 * k * q) // p)        # ceil(2k * (q/p)) = ceil(2k/a)
        if n == 1:
            m = 1
        else:
            target = gmpy2.mpz(r) ** (D * q)
            t = int(gmpy2.iroot(target // n_p, q)[0])
            m = t if gmpy2.mpz(t) ** q * n_p >= target else t + 1
            if gmpy2.mpz(m) ** q * n_p == target:
                # n^-a is exactly r-adic here; strict gamma_n > n^-a required
                m += 1
        # enforce monotonicity: gamma_n <= gamma_{n-1}
        if gamma_num:
            prev = gamma_num[-1] * r ** (D - gamma_D[-1])
            m = min(m, prev)
        gamma_num.append(m)
        gamma_D.append(D)
        ks.append(k)

    fprec = gamma_D[-1] + 8
    F_lo, F_hi = [], []
    for n in range(1, N + 1):
        g_scaled = gamma_num[n - 1] * r ** (fprec - gamma_D[n - 1])
        n_p = n ** p
        L = _floor_scaled(n_p, q, r, fprec)
        exact = gmpy2.mpz(L) ** q * n_p == gmpy2.mpz(r) ** (fprec * q)
        # sigma in [L, L+1]/r^fprec (collapsed when exact)
        F_lo.append(g_scaled - (L if exact else L + 1))
        F_hi.append(g_scaled - L)
    return DyadicTarget(base=r, a=a, gamma_num=gamma_num, gamma_D=gamma_D,
                        k=ks, fprec=fprec, F_lo=F_lo, F_hi=F_hi)


# --------------------------------------------------------------------------
# hitting-sequence construction
# --------------------------------------------------------------------------

_THRESHOLD_CACHE = {}


def _raw_thresholds(a, base, N, K):
    """(floor(n^-a * r^K), exact?) for n = 1..N, cached per parameter set."""
    key = (a, base, N, K)
    hit = _THRESHOLD_CACHE.get(key)
    if hit is not None:
        return hit
    p, q = a.numerator, a.denominator
    rKq = gmpy2.mpz(base) ** (K * q)
    s = np.empty(N, dtype=np.uint64)
    exact = np.zeros(N, dtype=bool)
    for n in range(1, N + 1):
        n_p = gmpy2.mpz(n) ** p
        L = gmpy2.iroot(rKq // n_p, q)[0]
        s[n - 1] = int(L)
        if L ** q * n_p == rKq:
            exact[n - 1] = True
    _THRESHOLD_CACHE[key] = (s, exact)
    return s, exact


def _dyadic_thresholds(dy, K):
    """(floor(gamma_n * r^K), exact?) from a DyadicTarget (memoized on dy)."""
    cache = getattr(dy, "_thr_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(dy, "_thr_cache", cache)
    if K in cache:
        return cache[K]
    r = dy.base
    N = dy.N
    s = np.empty(N, dtype=np.uint64)
    exact = np.zeros(N, dtype=bool)
    for i in range(N):
        m, D = dy.gamma_num[i], dy.gamma_D[i]
        if D <= K:
            val = m * r ** (K - D)
            s[i] = min(val, (1 << 62))
            exact[i] = val <= (1 << 62)
        else:
            div = r ** (D - K)
            s[i] = m // div
            exact[i] = m % div == 0
    cache[K] = (s, exact)
    return s, exact


def _window_values(digits, phi, K, base, identity):
    """Base-r value of digits d_{phi(n)+1} .. d_{phi(n)+K} (digits is 1-indexed)."""
    M = len(phi)
    t = np.zeros(M, dtype=np.uint64)
    b = np.uint64(base)
    if identity:
        # row j holds n = j+1, so digit d_{n+1+i} sits at index j+2+i
        for i in range(K):
            t = t * b + digits[2 + i:2 + i + M]
    else:
        idx = phi.astype(np.int64) + 1
        for i in range(K):
            t = t * b + digits[idx + i]
    return t


def _resolve_membership(stream, pos, sigma_exact, n, a):
    """Exact decision of 0 < tail(pos) < sigma for the rare unresolved cases.

    sigma_exact is the rational gamma_n in dyadic mode, or None for the raw
    target n^-a (possibly irrational).
    """
    r = stream.base
    if sigma_exact is not None:
        if sigma_exact >= 1:
            sigma_exact = Fraction(1)
        return shifted_point_in(stream, pos, RationalInterval(Fraction(0), sigma_exact))
    p, q = Fraction(a).numerator, Fraction(a).denominator
    n_p = n ** p
    root, is_exact = gmpy2.iroot(gmpy2.mpz(n_p), q)
    if is_exact:
        return shifted_point_in(stream, pos,
                                RationalInterval(Fraction(0), Fraction(1, int(root))))
    budget = stream.max_digits - pos
    if budget <= 0:
        raise CapExceeded(f"no digit budget past position {pos}")
    step = _window_digits(r)
    v = 0
    prec = 0
    below = False
    while prec < budget:
        take = min(step, budget - prec)
        for i in range(take):
            v = v * r + stream.digit_at(pos + prec + i + 1)
        prec += take
        if v > 0 and below:
            return True
        L = _floor_scaled(n_p, q, r, prec)
        if v > L:
            return False
        if v < L:
            below = True
            if v > 0:
                return True
    raise Undecidable(f"membership at position {pos} unresolved within cap")


def build_hitting(stream, fam, N, dyadic=None):
    """Hitting sequence X_n = [S^{phi(n)} y in (0, sigma_n)] for n <= N.

    Fast path: compare the uint64 window of digits after phi(n) against the
    integer threshold floor(sigma_n * r^K); the comparison is exact except
    when the window collides with the threshold cell, which falls back to an
    arbitrary-precision resolution.  Undecidable memberships are recorded
    and counted as X_n = 0.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    fam = fam if isinstance(fam, TargetFamily) else TargetFamily(**fam)
    r = fam.base
    phi = fam.phi_values(N)
    if fam.mode == "dyadic" and dyadic is None:
        dyadic = build_dyadic(fam, N)

    if fam.mode == "dyadic":
        sigma = dyadic.gamma_floats()[:N]
    else:
        sigma = np.arange(1, N + 1, dtype=np.float64) ** (-float(fam.a))
    W = np.cumsum(sigma)

    if stream.exact_value is not None:
        X, undecided = _hitting_exact(stream, fam, phi, dyadic)
    else:
        X, undecided = _hitting_seeded(stream, fam, phi, dyadic)

    return HittingSequence(X=X, sigma=sigma, W=W,
                           a_seq=np.flatnonzero(X).astype(np.int64) + 1,
                           undecided=undecided, fam=fam)


def _hitting_seeded(stream, fam, phi, dyadic):
    r = fam.base
    N = len(phi)
    K = _window_digits(r)
    need = int(phi[-1]) + K
    if need > stream.max_digits:
        raise CapExceeded(
            f"need {need} digits (phi(N) + window), cap is {stream.max_digits}")
    digits = stream.digit_block(1, need)
    digits = np.concatenate([np.zeros(1, dtype=np.uint64), digits])  # 1-indexed
    identity = fam.sampler == "identity"
    t = _window_values(digits, phi, K, r, identity)
    if fam.mode == "dyadic":
        s, exact = _dyadic_thresholds(dyadic, K)
        s, exact = s[:N], exact[:N]
    else:
        s, exact = _raw_thresholds(fam.a, r, N, K)

    X = ((t < s) & (t > 0)).astype(np.uint8)
    undecided = []
    # ties: window cell contains the (irrational) threshold
    pending = np.flatnonzero(((t == s) & ~exact) | ((t == 0) & (s > 0)))
    for i in pending:
        n = int(i) + 1
        sig = dyadic.gamma(n) if fam.mode == "dyadic" else None
        try:
            X[i] = 1 if _resolve_membership(stream, int(phi[i]), sig, n, fam.a) else 0
        except Undecidable:
            X[i] = 0
            undecided.append(n)
    return X, undecided


def _hitting_exact(stream, fam, phi, dyadic):
    r = fam.base
    N = len(phi)
    y = stream.exact_value
    num0, den = y.numerator, y.denominator
    p, q = fam.a.numerator, fam.a.denominator
    X = np.zeros(N, dtype=np.uint8)
    for i in range(N):
        n = i + 1
        tail_num = (num0 * pow(r, int(phi[i]), den)) % den
        if tail_num == 0:
            continue
        tail = Fraction(tail_num, den)
        if fam.mode == "dyadic":
            X[i] = 1 if tail < dyadic.gamma(n) else 0
        else:
            X[i] = 1 if tail ** q * n ** p < 1 else 0
    return X, []


def build_bernoulli_hitting(a, N, seed, base=2):
    """Hitting sequence of the independent random model: X_n ~ Bernoulli(n^-a).

    This is the idealized sequence (independent indicators with the raw
    means), as opposed to the single-orbit sequences from build_hitting.
    """
    a = Fraction(a)
    sigma = np.arange(1, N + 1, dtype=np.float64) ** (-float(a))
    rng = np.random.Generator(np.random.Philox(int(seed)))
    X = (rng.random(N) < sigma).astype(np.uint8)
    fam = TargetFamily(a=a, base=base)
    return HittingSequence(X=X, sigma=sigma, W=np.cumsum(sigma),
                           a_seq=np.flatnonzero(X).astype(np.int64) + 1,
                           undecided=[], fam=fam)


def symm_diff_count(stream, fam, dy, N):
    """|{n <= N : raw and dyadic indicators disagree}| for the same y."""
    raw_fam = TargetFamily(a=fam.a, base=fam.base, sampler=fam.sampler, mode="raw")
    dy_fam = TargetFamily(a=fam.a, base=fam.base, sampler=fam.sampler, mode="dyadic")
    h_raw = build_hitting(stream.clone(), raw_fam, N)
    h_dy = build_hitting(stream.clone(), dy_fam, N, dyadic=dy)
    return int(np.count_nonzero(h_raw.X != h_dy.X))


# --------------------------------------------------------------------------
# exact joint measures of the periodic sets J_n
# --------------------------------------------------------------------------

def exact_joint_measure(dy, indices, base=None, max_index=64, max_count=4):
    """lambda( intersection of J_{n_i} ) as an exact Fraction.

    Exploits that J_n is r^-n periodic with the occupied part (0, gamma_n/r^n)
    at the left of each period, so the measure within any prefix window (0, s)
    satisfies a two-term recursion over the index list.  Exact for all gaps;
    equals the product of the gamma's exactly when consecutive gaps exceed the
    denominator exponents (the independence regime).
    """
    base = base or dy.base
    idx = sorted(int(n) for n in indices)
    if len(idx) == 0:
        raise ValueError("need at least one index")
    if len(set(idx)) != len(idx):
        raise ValueError("indices must be distinct")
    if len(idx) > max_count or idx[-1] > max_index:
        raise SizeExceeded(
            f"joint measure limited to {max_count} indices <= {max_index}")
    gammas = [dy.gamma(n) for n in idx]
    periods = [Fraction(1, base ** n) for n in idx]

    def measure(i, s):
        # lambda( (0,s) ∩ ⋂_{j>=i} J_{n_j} ), s >= 0
        if i == len(idx) or s == 0:
            return s
        P = periods[i]
        full = int(s / P)
        rem = s - full * P
        cell = gammas[i] * P
        inner_full = measure(i + 1, cell) if full else Fraction(0)
        return full * inner_full + measure(i + 1, min(rem, cell))

    return measure(0, Fraction(1))


def joint_measure_bruteforce(dy, indices, base=None):
    """Independent oracle: explicit interval intersection over [0,1].

    Only feasible for small indices (cell count r^max(n)).
    """
    base = base or dy.base
    idx = sorted(int(n) for n in indices)
    if base ** idx[-1] > 1 << 16:
        raise SizeExceeded("brute force limited to r^n <= 65536")
    current = [(Fraction(0), Fraction(1))]
    for n in idx:
        g = dy.gamma(n)
        P = Fraction(1, base ** n)
        cells = [(l * P, l * P + g * P) for l in range(base ** n)]
        nxt = []
        for (a0, b0) in current:
            for (c0, d0) in cells:
                lo, hi = max(a0, c0), min(b0, d0)
                if lo < hi:
                    nxt.append((lo, hi))
        current = nxt
    return sum((b - a for a, b in current), Fraction(0))


# --------------------------------------------------------------------------
# index-set partitions
# --------------------------------------------------------------------------

def residue_classes(N):
    """Partition of [N] into residue classes mod R, R = ceil(2 ln N).

    Returns (R, classes) with classes[k-1] = {n in [N] : n ≡ k mod R}
    (k = R standing for residue 0).  Natural logarithm; R >= 1.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    R = max(1, math.ceil(2 * math.log(N))) if N > 1 else 1
    classes = [[] for _ in range(R)]
    for n in range(1, N + 1):
        k = n % R
        classes[(k - 1) % R].append(n)
    return R, classes


def lambda_sets(m, N):
    """Alternating blocks of length m: (Lambda_1, Lambda_2) partitioning [N].

    Lambda_1 collects n with 2km < n <= (2k+1)m, Lambda_2 the complement.
    """
    if m < 1 or N < 1:
        raise ValueError("m and N must be >= 1")
    n = np.arange(1, N + 1)
    block = (n - 1) // m
    lam1 = n[block % 2 == 0]
    lam2 = n[block % 2 == 1]
    return lam1, lam2


def partition_smr(m, b, N):
    """Partition of [N] by the phase offset of the two-power frequency map.

    Classes S_{m,r} = {n : floor((n+m)^{1+b} - n) - floor(n^{1+b} - n) = r},
    with all floors evaluated by exact integer roots (no precision aborts
    possible).
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    b = Fraction(b)
    if not 0 < b < 1:
        raise ValueError("b must lie in (0,1)")
    p, q = b.numerator, b.denominator
    e = p + q   # n^{1+b} = n^(e/q)

    def fl(n):
        return int(gmpy2.iroot(gmpy2.mpz(n) ** e, q)[0])

    classes = {}
    prev = {}
    for n in range(1, N + 1):
        hi = prev.get(n + m)
        if hi is None:
            hi = fl(n + m)
        lo = prev.get(n)
        if lo is None:
            lo = fl(n)
            prev[n] = lo
        prev[n + m] = hi
        r = hi - lo
        classes.setdefault(r, []).append(n)
    return classes


def serialize_json(obj):
    """Compact, key-sorted JSON for any object with a to_json method."""
    return json.dumps(obj.to_json(), sort_keys=True, separators=(",", ":"))
