"""Trigonometric-polynomial suprema, concentration trials, and covariances.

sup_bracket certifies sup_t |sum Z_n e(s(n) t)| by an oversampled FFT grid:
the upper bound is the smaller of a Lipschitz bound (2*pi*max_s*sum|Z| / G)
and the Ehlich-Zeller bound grid_max / cos(pi*S/(2G)) for degree-S
trigonometric polynomials sampled at G > S equispaced points; the lower
bound is the grid maximum, sharpened by ternary refinement near the top
grid peaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConditionViolated, SizeExceeded
from .seeding import derive_seed


@dataclass
class ExpSumProfile:
    """Certified bracket for the sup of an exponential sum."""
    coeffs: np.ndarray
    freqs: np.ndarray
    grid_size: int
    grid_max: float
    sup_lo: float
    sup_hi: float
    scaling: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)


def _eval_direct(Z, s, t):
    """|P(t)| by direct summation (used only for local refinement)."""
    return abs(np.sum(Z * np.exp(2j * np.pi * s * t)))


def _ternary_max(Z, s, lo, hi, iters=35):
    f = lambda t: _eval_direct(Z, s, t)
    a, b = lo, hi
    for _ in range(iters):
        m1 = a + (b - a) / 3
        m2 = b - (b - a) / 3
        if f(m1) < f(m2):
            a = m1
        else:
            b = m2
    return f((a + b) / 2)


def sup_bracket(coeffs, freqs, tol, max_grid=1 << 23, refine_peaks=8):
    """Bracket [sup_lo, sup_hi] for sup_{t in [0,1]} |sum_n Z_n e(s(n) t)|.

    The grid doubles from 8*(max_s+1) until the certified width meets tol
    or max_grid is reached; an unmet tolerance is flagged, not raised.
    """
    Z = np.asarray(coeffs, dtype=np.float64)
    s = np.asarray(freqs, dtype=np.int64)
    if len(Z) != len(s):
        raise ValueError("coeffs and freqs must align")
    if len(Z) == 0 or not np.any(Z):
        return ExpSumProfile(coeffs=Z, freqs=s, grid_size=1, grid_max=0.0,
                             sup_lo=0.0, sup_hi=0.0)
    if np.max(np.abs(Z)) > 1 + 1e-12:
        raise ValueError("coefficients must be bounded by 1")
    if np.any(s < 0):
        raise ValueError("frequencies must be nonnegative")
    S = int(np.max(s))
    sum_abs = float(np.sum(np.abs(Z)))

    G = 1
    while G < 8 * (S + 1):
        G *= 2
    if G > max_grid:
        raise SizeExceeded(f"initial grid {G} exceeds budget {max_grid}")

    flags = []
    while True:
        spec = np.zeros(G, dtype=np.complex128)
        np.add.at(spec, s, Z)
        # coefficients are real, so |P| over the grid equals |fft(spec)|
        vals = np.abs(np.fft.fft(spec))
        grid_max = float(np.max(vals))
        lip = 2 * np.pi * S * sum_abs / G
        ez = grid_max / math.cos(math.pi * S / (2 * G)) - grid_max
        slack = min(lip, ez)
        if slack <= tol or 2 * G > max_grid:
            break
        G *= 2

    sup_hi = grid_max + slack
    sup_lo = grid_max
    if refine_peaks:
        top = np.argsort(vals)[-refine_peaks:]
        for j in top:
            peak = _ternary_max(Z, s, (int(j) - 1) / G, (int(j) + 1) / G)
            sup_lo = max(sup_lo, peak)
    sup_lo = min(sup_lo, sup_hi)
    if sup_hi - grid_max > tol:
        flags.append("tol_unmet")
    return ExpSumProfile(coeffs=Z, freqs=s, grid_size=G, grid_max=grid_max,
                         sup_lo=sup_lo, sup_hi=sup_hi, flags=flags)


# --------------------------------------------------------------------------
# concentration trials
# --------------------------------------------------------------------------

@dataclass
class QuantileReport:
    """Empirical quantiles of normalized sups across trials."""
    N: int
    mode: str
    q50: float
    q90: float
    q99: float
    max: float
    trials: int
    seed: int
    scale: float          # sqrt(R_N * ln N) used for normalization

    def csv_row(self):
        return (str(self.N), self.mode, repr(self.q50), repr(self.q90),
                repr(self.q99), repr(self.max), str(self.trials), str(self.seed))


def _lambda_block_mask(n, m, which):
    block = (n - 1) // m
    return (block % 2 == 0) if which == 1 else (block % 2 == 1)


def concentration_trial(mode, N, trials, seed, a=Fraction(3, 10), m=1,
                        lam_class=1, cond_const=Fraction(1, 7), tau=None):
    """Monte Carlo distribution of sup_t |P(t)| / sqrt(R_N ln N).

    mode "independent_bernoulli": coefficients Z_n = X_n - tau_n with
    X_n ~ Bernoulli(tau_n), tau_n = n^-a, frequencies s(n) = n; requires
    ln N / sum(tau) <= cond_const.

    mode "hitting_sequence_pairs": coefficients Z_n Z_{n+m} restricted to
    the alternating-block class lam_class, with rho_n = tau_n tau_{n+m}.
    """
    if N < 2 or trials < 1:
        raise ValueError("need N >= 2 and trials >= 1")
    a = Fraction(a)
    n = np.arange(1, N + 1, dtype=np.float64)
    if tau is None:
        tau = n ** (-float(a))
    else:
        tau = np.asarray(tau, dtype=np.float64)
        if len(tau) != N:
            raise ValueError("tau must have length N")
    if mode == "independent_bernoulli":
        T = float(np.sum(tau))
        if T > 0 and math.log(N) / T > float(cond_const):
            raise ConditionViolated(
                f"ln N / sum(tau) = {math.log(N) / T:.4f} exceeds {float(cond_const)}")
        R = T
        freqs = np.arange(1, N + 1, dtype=np.int64)
    elif mode == "hitting_sequence_pairs":
        ns = np.arange(1, N + 1, dtype=np.int64)
        mask = _lambda_block_mask(ns, m, lam_class)
        nf = n[mask]
        rho = nf ** (-float(a)) * (nf + m) ** (-float(a))
        R = float(np.sum(rho))
        freqs = ns[mask]
    else:
        raise ValueError(f"unknown mode {mode!r}")

    scale = math.sqrt(R * math.log(N))
    sups = np.empty(trials)
    for t_idx in range(trials):
        rng = np.random.Generator(np.random.Philox(derive_seed(seed, t_idx)))
        if mode == "independent_bernoulli":
            X = (rng.random(N) < tau).astype(np.float64)
            Z = X - tau
            prof = sup_bracket(Z, freqs, tol=max(0.01 * scale, 1e-6),
                               refine_peaks=2)
        else:
            Xall = (rng.random(N + m) < np.arange(1, N + m + 1) ** (-float(a))).astype(np.float64)
            Zall = Xall - np.arange(1, N + m + 1) ** (-float(a))
            ns = np.arange(1, N + 1, dtype=np.int64)
            mask = _lambda_block_mask(ns, m, lam_class)
            coeffs = Zall[:N][mask] * Zall[m:N + m][mask]
            prof = sup_bracket(coeffs, freqs, tol=max(0.01 * scale, 1e-6),
                               refine_peaks=2)
        sups[t_idx] = prof.sup_lo
    norm = np.sort(sups / scale) if scale > 0 else np.sort(sups)
    q = lambda p: float(np.quantile(norm, p))
    return QuantileReport(N=N, mode=mode, q50=q(0.5), q90=q(0.9), q99=q(0.99),
                          max=float(norm[-1]), trials=trials, seed=seed,
                          scale=scale)


def write_quantile_csv(path, reports):
    header = "N,mode,q50,q90,q99,max,trials,seed"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for rep in reports:
            fh.write(",".join(rep.csv_row()) + "\n")


# --------------------------------------------------------------------------
# van der Corput inequality
# --------------------------------------------------------------------------

def vdc_check(vectors, M):
    """Both sides of the autocorrelation bound for ||sum v_n||^2.

    lhs = ||sum_n v_n||^2,
    rhs = (2N/M) sum_n ||v_n||^2
        + (4N/M) sum_{m<=M} |sum_{n<=N-m} <v_{n+m}, v_n>|.
    """
    v = np.asarray(vectors, dtype=np.complex128)
    if v.ndim == 1:
        v = v[:, None]
    N = len(v)
    if not 1 <= M <= N:
        raise ValueError("need 1 <= M <= N")
    lhs = float(np.sum(np.abs(np.sum(v, axis=0)) ** 2))
    norms = float(np.sum(np.abs(v) ** 2))
    corr = 0.0
    for m in range(1, M + 1):
        inner = np.sum(v[m:] * np.conj(v[:N - m]))
        corr += abs(complex(inner))
    rhs = (2 * N / M) * norms + (4 * N / M) * corr
    return lhs, rhs


# --------------------------------------------------------------------------
# covariances under the base-r shift
# --------------------------------------------------------------------------

def exact_cov(I, J, m, r):
    """Cov(1_I, 1_J o S^m) under Lebesgue for S y = r y mod 1, exact.

    The preimage S^-m J is periodic with period r^-m, occupying the scaled
    copy of J inside each cell, so lambda(I ∩ S^-m J) reduces to a prefix
    function evaluated at the two endpoints of I.
    """
    if m < 0 or r < 2:
        raise ValueError("need m >= 0 and r >= 2")
    if m == 0:
        lo, hi = max(I.lo, J.lo), min(I.hi, J.hi)
        inter = max(Fraction(0), hi - lo)
        return inter - I.length * J.length
    P = Fraction(1, r ** m)

    def prefix(s):
        # lambda( (0,s) ∩ S^-m J )
        full, u = divmod(s, P)
        w = min(max(u - J.lo * P, Fraction(0)), J.length * P)
        return full * J.length * P + w

    inter = prefix(I.hi) - prefix(I.lo)
    return inter - I.length * J.length


def mc_cov(f, g, m, samples, seed, r=2):
    """Monte Carlo Cov(f, g o S^m) with standard error.

    Sample points are 62-bit dyadic rationals, so the m-step shift is exact
    integer arithmetic; f and g are vectorized callables on [0,1).
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    bits = 62
    u = rng.integers(0, 1 << bits, size=samples, dtype=np.int64).astype(object)
    scale = float(1 << bits)
    x = np.array([int(v) for v in u], dtype=np.float64) / scale
    shifted = np.array([(int(v) * r ** m) % (1 << bits) for v in u],
                       dtype=np.float64) / scale
    fv = np.asarray(f(x), dtype=np.float64)
    gv = np.asarray(g(shifted), dtype=np.float64)
    fbar, gbar = fv.mean(), gv.mean()
    est = float((fv * gv).mean() - fbar * gbar)
    infl = (fv - fbar) * (gv - gbar)
    stderr = float(np.std(infl, ddof=1) / math.sqrt(samples))
    return est, stderr


def indicator(interval):
    """Vectorized indicator of an open rational interval, for mc_cov."""
    lo, hi = float(interval.lo), float(interval.hi)
    return lambda x: ((x > lo) & (x < hi)).astype(np.float64)
