"""Ergodic averages along hitting sequences.

Four schemes: single averages f(T^{a_n} x); double commuting averages
f1(T1^{a_n} x) f2(T2^{a_n} x) with a full-sequence reference trace;
semi-random averages f1(T1^n x) f2(T2^{a_n} x); and two-power averages
f(T^{a_n} x) g(T^{floor(a_n^{1+b})} x) with an L2 Cauchy proxy over an
x panel.  Everything is evaluated on a lacunary N-grid from cumulative
sums, so a full trace costs one pass over the sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np


@dataclass
class AverageTrace:
    """Per-grid-point averages for one (scheme, y-sequence, x)."""
    scheme: str
    N_grid: np.ndarray
    values: np.ndarray               # complex, one per grid point
    normalization: str               # "count" or "mean"
    reference: complex = None        # exact limit when known
    alt_values: np.ndarray = None    # scheme-specific companion trace
    params: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def csv_rows(self, seed, x_id):
        """Rows (scheme, seed, x_id, N, re, im, reference_re, reference_im)."""
        ref = self.reference
        rr = "" if ref is None else repr(float(np.real(ref)))
        ri = "" if ref is None else repr(float(np.imag(ref)))
        rows = []
        for N, v in zip(self.N_grid, self.values):
            rows.append((self.scheme, str(seed), str(x_id), str(int(N)),
                         repr(float(np.real(v))), repr(float(np.imag(v))),
                         rr, ri))
        return rows


def lacunary_grid(gamma, N_max):
    """Deduplicated floor(gamma^k) <= N_max, k = 1, 2, ...  Requires gamma > 1."""
    gamma = Fraction(gamma)
    if gamma <= 1:
        raise ValueError("lacunary ratio must exceed 1")
    if N_max < 1:
        raise ValueError("N_max must be >= 1")
    out = []
    power = Fraction(1)
    while True:
        power *= gamma
        v = int(power)   # floor for positive rationals
        if v > N_max:
            break
        if not out or v > out[-1]:
            out.append(v)
    return out


def lln_check(h, grid=None):
    """Trace of (sum_{n<=N} X_n) / W_N on the grid, plus its tail deviation.

    Tail deviation is max |ratio - 1| over the second half of the grid.
    Degenerate all-zero sequences are flagged.
    """
    if grid is None:
        grid = lacunary_grid(Fraction(12, 10), h.N)
    grid = [int(N) for N in grid if N <= h.N]
    counts = np.array([h.count_at(N) for N in grid], dtype=float)
    W = np.array([h.W[N - 1] for N in grid])
    ratios = counts / W
    flags = []
    if counts[-1] == 0:
        flags.append("degenerate")
    tail = ratios[len(ratios) // 2:]
    tail_dev = float(np.max(np.abs(tail - 1.0)))
    return AverageTrace(scheme="lln", N_grid=np.array(grid), values=ratios.astype(complex),
                        normalization="mean", reference=1.0,
                        params={"tail_dev": tail_dev}, flags=flags)


def _prefix_at(csum, counts):
    """csum[k-1] for each count k (0 -> 0)."""
    counts = np.asarray(counts, dtype=np.int64)
    out = np.zeros(len(counts), dtype=csum.dtype)
    pos = counts > 0
    out[pos] = csum[counts[pos] - 1]
    return out


def single_average(h, sys, f, x, grid):
    """Count-normalized averages of f(T^n x) over hit times n <= N.

    values[k] = (sum_{n<=N_k} X_n f(T^n x)) / (sum_{n<=N_k} X_n); the
    W_N-normalized variant is stored in alt_values.
    """
    grid = [int(N) for N in grid if N <= h.N]
    terms = sys.orbit_values(f, x, h.a_seq)
    csum = np.cumsum(terms)
    counts = np.array([h.count_at(N) for N in grid], dtype=np.int64)
    sums = _prefix_at(csum, counts)
    flags = []
    vals = np.zeros(len(grid), dtype=complex)
    nz = counts > 0
    vals[nz] = sums[nz] / counts[nz]
    if not np.all(nz):
        flags.append("empty_prefix")
    W = np.array([h.W[N - 1] for N in grid])
    alt = sums / W
    return AverageTrace(scheme="single", N_grid=np.array(grid), values=vals,
                        normalization="count", reference=sys.exact_limit_single(f),
                        alt_values=alt, flags=flags)


def double_average(h, sys, f1, f2, x, grid):
    """Averages (1/N) sum_{n<=N} f1(T1^{a_n} x) f2(T2^{a_n} x) over term count N.

    alt_values holds the full-sequence reference (1/N) sum f1(T1^n x) f2(T2^n x)
    on the same grid (there N is the raw time index).
    """
    hits = len(h.a_seq)
    grid = [int(N) for N in grid if N <= h.N]
    flags = []
    along_terms = sys.orbit_values(f1, x, h.a_seq, which=1) * \
        sys.orbit_values(f2, x, h.a_seq, which=2)
    csum_along = np.cumsum(along_terms)
    N_last = grid[-1]
    full_ns = np.arange(1, N_last + 1, dtype=np.int64)
    full_terms = sys.orbit_values(f1, x, full_ns, which=1) * \
        sys.orbit_values(f2, x, full_ns, which=2)
    csum_full = np.cumsum(full_terms)
    vals = np.zeros(len(grid), dtype=complex)
    alt = np.zeros(len(grid), dtype=complex)
    for k, N in enumerate(grid):
        m = min(N, hits)
        if m < N:
            flags.append(f"truncated@{N}")
        vals[k] = csum_along[m - 1] / m if m > 0 else 0.0
        alt[k] = csum_full[N - 1] / N
    return AverageTrace(scheme="double_commuting", N_grid=np.array(grid),
                        values=vals, normalization="count",
                        reference=sys.exact_limit_double(f1, f2, x=x),
                        alt_values=alt, flags=flags)


def semi_random_average(h, sys, f1, f2, x, grid):
    """(1/N) sum_{n<=N} f1(T1^n x) f2(T2^{a_n} x), truncated (and flagged)
    at len(a_seq) when the hitting sequence is too short."""
    hits = len(h.a_seq)
    grid = [int(N) for N in grid]
    flags = []
    N_last = min(grid[-1], hits)
    ns = np.arange(1, N_last + 1, dtype=np.int64)
    t1 = sys.orbit_values(f1, x, ns, which=1)
    t2 = sys.orbit_values(f2, x, h.a_seq[:N_last], which=2)
    csum = np.cumsum(t1 * t2)
    vals = np.zeros(len(grid), dtype=complex)
    for k, N in enumerate(grid):
        m = min(N, N_last)
        if m < N:
            flags.append(f"truncated@{N}")
        vals[k] = csum[m - 1] / m if m > 0 else 0.0
    ref = None
    r1 = sys.exact_limit_single(f1, which=1)
    r2 = sys.exact_limit_single(f2, which=2)
    if r1 is not None and r2 is not None:
        ref = r1 * r2
    return AverageTrace(scheme="semi_random", N_grid=np.array(grid),
                        values=vals, normalization="count", reference=ref,
                        flags=flags)


def _power_floor(values, b):
    """floor(v^{1+b}) for an int64 array, exact via integer roots."""
    b = Fraction(b)
    p, q = b.numerator, b.denominator
    e = p + q
    return np.array([int(gmpy2.iroot(gmpy2.mpz(int(v)) ** e, q)[0])
                     for v in values], dtype=np.int64)


def two_power_average(h, sys, f, g, x_samples, b, grid):
    """Two-power averages per x plus the RMS Cauchy proxy over the x panel.

    For term count N: A_N(x) = (1/N) sum_{n<=N} f(T^{a_n} x) g(T^{b_n} x)
    with b_n = floor(a_n^{1+b}).  Returns (traces per x, proxy array) where
    proxy[k] = RMS_x |A_{N_{k+1}}(x) - A_{N_k}(x)|.
    """
    hits = len(h.a_seq)
    grid = [int(N) for N in grid if N <= hits]
    if len(grid) < 2:
        raise ValueError("grid too short for a Cauchy proxy (need >= 2 usable points)")
    b_seq = _power_floor(h.a_seq, b)
    traces = []
    values = np.zeros((len(x_samples), len(grid)), dtype=complex)
    for xi, x in enumerate(x_samples):
        terms = sys.orbit_values(f, x, h.a_seq) * sys.orbit_values(g, x, b_seq)
        csum = np.cumsum(terms)
        vals = np.array([csum[N - 1] / N for N in grid])
        values[xi] = vals
        traces.append(AverageTrace(scheme="two_power", N_grid=np.array(grid),
                                   values=vals, normalization="count",
                                   params={"x_id": xi, "b": str(Fraction(b))}))
    diffs = np.abs(values[:, 1:] - values[:, :-1])
    proxy = np.sqrt(np.mean(diffs ** 2, axis=0))
    return traces, proxy


def interaction_sum(h, b, N):
    """(sum_{m<=floor(N^b)} sum_{n<=N} X_{n+m} X_n, same with Z = X - sigma).

    Pair-count diagnostic; requires the hitting sequence to extend to
    N + floor(N^b) (truncated sums are flagged by a ValueError)."""
    b = float(b)
    if not 0 < b < 1:
        raise ValueError("b must lie in (0,1)")
    M = int(math.floor(N ** b))
    if M < 1:
        M = 1
    if N + M > h.N:
        raise ValueError(f"need hitting sequence of length {N + M}, have {h.N}")
    X = h.X.astype(np.float64)
    Z = X - h.sigma
    tot_x = 0.0
    tot_z = 0.0
    for m in range(1, M + 1):
        tot_x += float(np.dot(X[m:N + m], X[:N]))
        tot_z += float(np.dot(Z[m:N + m], Z[:N]))
    return tot_x, tot_z


def write_trace_csv(path, rows):
    """Write average-trace rows with the canonical header."""
    header = "scheme,seed,x_id,N,re,im,reference_re,reference_im"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
