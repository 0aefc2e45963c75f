"""Experiment presets: one runnable scenario per headline result.

Each preset validates its parameters against the relevant hypotheses
(rejecting, never clamping), runs the trials, and returns a result dict
with named pass/fail assertions plus CSV-ready tables.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import averages, spectral, targets
from .digit_orbit import DigitStream
from .errors import ConfigInvalid
from .seeding import derive_seed
from .systems import MPSystem, Observable, e_k

TAGS = ("A", "B", "C", "D", "lemma-prop1", "lemma-prop2", "lln",
        "concentration", "vdc", "cov-decay", "interaction")


def _seed_list(params):
    seeds = params.get("seeds", 10)
    master = int(params.get("master_seed", 2024))
    if isinstance(seeds, int):
        if seeds < 1:
            raise ConfigInvalid("seed count must be positive")
        return [derive_seed(master, i) for i in range(seeds)]
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ConfigInvalid("empty seed list")
    return seeds


def _frac(params, key, default):
    return Fraction(params.get(key, default))


def validate(theorem, params):
    """Raise ConfigInvalid naming the violated hypothesis, else return None."""
    if theorem not in TAGS:
        raise ConfigInvalid(f"unknown theorem tag {theorem!r}")
    def a_of(default):
        a = _frac(params, "a", default)
        if not 0 < a < 1:
            raise ConfigInvalid("hypothesis violated: a must lie in (0,1)")
        return a
    if theorem == "A":
        a_of("3/10")
    elif theorem == "B":
        if a_of("3/10") >= Fraction(1, 2):
            raise ConfigInvalid("hypothesis violated: a < 1/2 required for double averages")
    elif theorem == "C":
        if a_of("1/20") >= Fraction(1, 14):
            raise ConfigInvalid("hypothesis violated: a < 1/14 required for semi-random averages")
        if _frac(params, "c", "3/2") <= 1:
            raise ConfigInvalid("hypothesis violated: sampler exponent c > 1 required")
    elif theorem == "D":
        a = a_of("1/5")
        b = _frac(params, "b", "1/20")
        if not 0 < b < 1:
            raise ConfigInvalid("hypothesis violated: b must lie in (0,1)")
        if b + 2 * a >= Fraction(1, 2):
            raise ConfigInvalid("hypothesis violated: b + 2a < 1/2 required for two-power averages")
    elif theorem in ("lln", "concentration", "interaction"):
        a_of("2/5")
    _seed_list(params)


# --------------------------------------------------------------------------
# per-seed trial workers (module level so process pools can pickle them)
# --------------------------------------------------------------------------

def _hitting_for_seed(seed, a, N, base=2, sampler="identity", max_digits=None):
    fam = targets.TargetFamily(a=a, base=base, sampler=sampler)
    kwargs = {}
    if max_digits is not None:
        kwargs["max_digits"] = max_digits
    stream = DigitStream(base, seed=seed, **kwargs)
    return stream, fam, targets.build_hitting(stream, fam, N)


def _lln_trial(args):
    seed, a, N, gamma = args
    grid = sorted(set(averages.lacunary_grid(gamma, N)) | {N})
    h_ind = targets.build_bernoulli_hitting(a, N, seed)
    tr_ind = averages.lln_check(h_ind, grid)
    _, _, h_orb = _hitting_for_seed(seed, a, N)
    tr_orb = averages.lln_check(h_orb, grid)
    return {"seed": seed,
            "final_dev": float(abs(tr_ind.values[-1] - 1.0)),
            "orbit_final_dev": float(abs(tr_orb.values[-1] - 1.0)),
            "tail_dev": tr_ind.params["tail_dev"],
            "undecided": len(h_orb.undecided),
            "rows": tr_ind.csv_rows(seed, 0) + tr_orb.csv_rows(seed, 1)}


def _thmA_trial(args):
    seed, a, N, gamma = args
    _, _, h = _hitting_for_seed(seed, a, N)
    sys = MPSystem("circle_rotation", alpha="golden")
    grid = averages.lacunary_grid(gamma, N)
    tr = averages.single_average(h, sys, e_k(1), Fraction(1, 3), grid)
    return {"seed": seed, "final_abs": float(abs(tr.values[-1])),
            "rows": tr.csv_rows(seed, 0)}


def _thmB_trial(args):
    seed, a, N, gamma = args
    _, _, h = _hitting_for_seed(seed, a, N)
    sys = MPSystem("torus_pair", alpha="golden", beta="sqrt2")
    grid = averages.lacunary_grid(gamma, N)
    x = (Fraction(1, 3), Fraction(1, 7))
    tr = averages.double_average(h, sys, e_k(1), e_k(1), x, grid)
    gap = float(abs(tr.values[-1] - tr.alt_values[-1]))
    return {"seed": seed, "final_gap": gap, "rows": tr.csv_rows(seed, 0)}


def _thmC_trial(args):
    seed, a, c, N, gamma = args
    # need at least N hit times, and hits thin out like M^(1-a): build past N
    M = max(2 * N, 1 << 12)
    fam = targets.TargetFamily(a=a, sampler=c)
    phi_last = int(fam.phi_values(M)[-1])
    stream = DigitStream(2, seed=seed, max_digits=phi_last + 128)
    h = targets.build_hitting(stream, fam, M)
    sys = MPSystem("torus_pair", alpha="golden", beta="sqrt2")
    grid = averages.lacunary_grid(gamma, N)
    x = (Fraction(1, 3), Fraction(1, 7))
    tr = averages.semi_random_average(h, sys, e_k(1), e_k(1), x, grid)
    err = float(abs(tr.values[-1] - (tr.reference or 0.0)))
    return {"seed": seed, "final_err": err, "truncated": bool(tr.flags),
            "rows": tr.csv_rows(seed, 0)}


def _thmD_trial(args):
    seed, a, b, N, gamma, panel = args
    _, _, h = _hitting_for_seed(seed, a, N)
    sys = MPSystem("circle_rotation", alpha="golden")
    f = Observable(id="f3", freqs=(1, 2, 5),
                   coeffs=(1 / 3, 1 / 3, 1 / 3))
    g = Observable(id="g3", freqs=(3, 10, 24),
                   coeffs=(1 / 3, 1 / 3, 1 / 3))
    grid = averages.lacunary_grid(gamma, len(h.a_seq))
    xs = [Fraction(j, panel) for j in range(panel)]
    traces, proxy = averages.two_power_average(h, sys, f, g, xs, b, grid)
    tail = proxy[-4:] if len(proxy) >= 4 else proxy
    dec = bool(np.all(np.diff(tail) < 0))
    rows = []
    for tr in traces[:4]:   # keep the CSV bounded; the proxy uses the full panel
        rows.extend(tr.csv_rows(seed, tr.params["x_id"]))
    return {"seed": seed, "proxy": [float(p) for p in proxy],
            "decreasing": dec, "rows": rows}


def _interaction_trial(args):
    seed, a, b, Ns = args
    top = max(Ns)
    M = int(math.floor(top ** float(b))) or 1
    _, _, h = _hitting_for_seed(seed, a, top + M)
    sums = []
    for N in Ns:
        sx, _ = averages.interaction_sum(h, b, N)
        sums.append(sx)
    logN = np.log(np.asarray(Ns, dtype=float))
    logS = np.log(np.maximum(np.asarray(sums), 1e-12))
    slope = float(np.polyfit(logN, logS, 1)[0])
    return {"seed": seed, "sums": sums, "slope": slope}


def _prop2_seed_trial(args):
    seed, a, Ns, dy = args
    top = max(Ns)
    fam_raw = targets.TargetFamily(a=a)
    fam_dy = targets.TargetFamily(a=a, mode="dyadic")
    stream = DigitStream(2, seed=seed)
    h_raw = targets.build_hitting(stream.clone(), fam_raw, top)
    h_dy = targets.build_hitting(stream.clone(), fam_dy, top, dyadic=dy)
    diff = np.cumsum(h_raw.X != h_dy.X)
    counts = [int(diff[N - 1]) for N in Ns]
    return {"seed": seed, "counts": counts,
            "stable": counts[-1] == counts[-2]}


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

def _pmap(fn, arglist, workers):
    if workers and workers > 1:
        import concurrent.futures as cf
        with cf.ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, arglist))
    return [fn(a) for a in arglist]


def run_lln(params, workers=1):
    a = _frac(params, "a", "2/5")
    N = int(params.get("N", 100000))
    tol = float(params.get("tol", 0.05))
    gamma = _frac(params, "gamma", "6/5")
    seeds = _seed_list(params)
    out = _pmap(_lln_trial, [(s, a, N, gamma) for s in seeds], workers)
    worst = max(r["final_dev"] for r in out)
    worst_orb = max(r["orbit_final_dev"] for r in out)
    return {
        "trials": out,
        "assertions": [{"name": "lln_final_deviation",
                        "passed": worst <= tol,
                        "detail": f"max |ratio - 1| at N={N}: {worst:.4f} vs tol {tol}"
                                  f" (single-orbit model: {worst_orb:.4f})"}],
        "csv": {"traces": [row for r in out for row in r["rows"]]},
    }


def run_thmA(params, workers=1):
    a_list = params.get("a_list")
    if a_list is None:
        a_list = [params.get("a", "3/10")]
    N = int(params.get("N", 100000))
    tol = float(params.get("tol", 0.05))
    gamma = _frac(params, "gamma", "6/5")
    seeds = _seed_list(params)
    assertions, trials, rows = [], [], []
    for a_raw in a_list:
        a = Fraction(a_raw)
        out = _pmap(_thmA_trial, [(s, a, N, gamma) for s in seeds], workers)
        mean_abs = float(np.mean([r["final_abs"] for r in out]))
        assertions.append({"name": f"single_average_limit[a={a}]",
                           "passed": mean_abs <= tol,
                           "detail": f"mean |A_N| {mean_abs:.4f} vs tol {tol}"})
        trials.extend(out)
        rows.extend(row for r in out for row in r["rows"])
    return {"trials": trials, "assertions": assertions, "csv": {"traces": rows}}


def run_thmB(params, workers=1):
    a = _frac(params, "a", "3/10")
    N = int(params.get("N", 100000))
    tol = float(params.get("tol", 0.05))
    gamma = _frac(params, "gamma", "6/5")
    seeds = _seed_list(params)
    out = _pmap(_thmB_trial, [(s, a, N, gamma) for s in seeds], workers)
    mean_gap = float(np.mean([r["final_gap"] for r in out]))
    return {
        "trials": out,
        "assertions": [{"name": "double_average_coincidence",
                        "passed": mean_gap <= tol,
                        "detail": f"mean trace gap {mean_gap:.4f} vs tol {tol}"}],
        "csv": {"traces": [row for r in out for row in r["rows"]]},
    }


def run_thmC(params, workers=1):
    a = _frac(params, "a", "1/20")
    c = _frac(params, "c", "3/2")
    N = int(params.get("N", 10000))
    tol = float(params.get("tol", 0.08))
    gamma = _frac(params, "gamma", "6/5")
    seeds = _seed_list(params)
    out = _pmap(_thmC_trial, [(s, a, c, N, gamma) for s in seeds], workers)
    mean_err = float(np.mean([r["final_err"] for r in out]))
    return {
        "trials": out,
        "assertions": [{"name": "semi_random_limit",
                        "passed": mean_err <= tol,
                        "detail": f"mean |value - ref| {mean_err:.4f} vs tol {tol}"}],
        "csv": {"traces": [row for r in out for row in r["rows"]]},
    }


def run_thmD(params, workers=1):
    a = _frac(params, "a", "1/5")
    b = _frac(params, "b", "1/20")
    N = int(params.get("N", 100000))
    frac_needed = float(params.get("frac", 0.8))
    gamma = _frac(params, "gamma", 5)
    panel = int(params.get("x_panel", 64))
    seeds = _seed_list(params)
    out = _pmap(_thmD_trial, [(s, a, b, N, gamma, panel) for s in seeds], workers)
    frac = float(np.mean([r["decreasing"] for r in out]))
    return {
        "trials": out,
        "assertions": [{"name": "two_power_cauchy_proxy",
                        "passed": frac >= frac_needed,
                        "detail": f"{frac:.2%} of seeds have strictly decreasing proxy tail"}],
        "csv": {"traces": [row for r in out for row in r["rows"]]},
    }


def run_interaction(params, workers=1):
    a = _frac(params, "a", "1/20")
    b = _frac(params, "b", "3/50")
    Ns = [int(v) for v in params.get("N_grid", [1 << k for k in range(12, 18)])]
    band = float(params.get("band", 0.15))
    seeds = _seed_list(params)
    target = 1 + float(b) - 2 * float(a)
    out = _pmap(_interaction_trial, [(s, a, b, Ns) for s in seeds], workers)
    slopes = [r["slope"] for r in out]
    ok = all(abs(sl - target) <= band for sl in slopes)
    return {
        "trials": out,
        "assertions": [{"name": "interaction_scaling",
                        "passed": ok,
                        "detail": f"slopes in [{min(slopes):.3f},{max(slopes):.3f}]"
                                  f" vs target {target:.3f} +/- {band}"}],
        "csv": {"slopes": [(str(r["seed"]), repr(r["slope"])) for r in out]},
    }


def run_prop1(params, workers=1):
    N = int(params.get("N", 48))
    fam = targets.TargetFamily(a=Fraction(1, 2), mode="dyadic")
    dy = targets.build_dyadic(fam, N)
    gap = 2 * math.log(N)
    failures = 0
    checked = 0
    for n1 in range(1, N + 1):
        for n2 in range(n1 + 1, N + 1):
            if n2 - n1 <= gap:
                continue
            checked += 1
            if targets.exact_joint_measure(dy, (n1, n2)) != dy.gamma(n1) * dy.gamma(n2):
                failures += 1
    for n1 in range(1, N + 1):
        for n2 in range(n1 + 1, N + 1):
            if n2 - n1 <= gap:
                continue
            for n3 in range(n2 + 1, N + 1):
                if n3 - n2 <= gap:
                    continue
                checked += 1
                prod = dy.gamma(n1) * dy.gamma(n2) * dy.gamma(n3)
                if targets.exact_joint_measure(dy, (n1, n2, n3)) != prod:
                    failures += 1
    return {
        "trials": [{"checked": checked, "failures": failures}],
        "assertions": [{"name": "exact_independence",
                        "passed": failures == 0,
                        "detail": f"{checked} tuples checked, {failures} mismatches"}],
        "csv": {},
    }


def run_prop2(params, workers=1):
    a = _frac(params, "a", "1/2")
    top = int(params.get("N", 1 << 16))
    seeds = _seed_list(params)
    fam = targets.TargetFamily(a=a, mode="dyadic")
    dy = targets.build_dyadic(fam, 2 * top if params.get("tail_check", True) else top)
    lows, highs = dy.f_partial_sums()
    monotone = all(lows[i] <= lows[i + 1] for i in range(min(top, dy.N) - 1))
    # geometric tail: certified upper tail sum over (N, 2N] vs the bracket bound
    tail_ok = True
    if dy.N >= 2 * top:
        tail_hi = highs[2 * top - 1] - highs[top - 1]
        k_at = dy.k[top - 1]
        bound = Fraction(2 * top) * Fraction(1, 2) ** ((2 * k_at * fam.a.denominator) // fam.a.numerator)
        tail_ok = tail_hi <= bound
    Ns = [1 << k for k in range(10, 18)]
    if dy.N < max(Ns):
        dy = targets.build_dyadic(fam, max(Ns))
    out = _pmap(_prop2_seed_trial, [(s, a, Ns, dy) for s in seeds], workers)
    stable_frac = float(np.mean([r["stable"] for r in out]))
    need = float(params.get("stable_frac", 0.95))
    return {
        "trials": out,
        "assertions": [
            {"name": "f_partial_sums_monotone", "passed": monotone,
             "detail": f"partial sums monotone up to N={top}"},
            {"name": "f_tail_bound", "passed": tail_ok,
             "detail": "certified tail sum within the dyadic bracket bound"},
            {"name": "symm_diff_stabilizes", "passed": stable_frac >= need,
             "detail": f"{stable_frac:.2%} of seeds stable (need {need:.0%})"},
        ],
        "csv": {"symm_diff": [(str(r["seed"]),) + tuple(str(c) for c in r["counts"])
                              for r in out]},
    }


def run_concentration(params, workers=1):
    a = _frac(params, "a", "3/10")
    Ns = [int(v) for v in params.get("N_grid", [1 << 12, 1 << 13, 1 << 14])]
    trials = int(params.get("trials", 200))
    seeds = _seed_list(params)
    seed = seeds[0]
    bound = float(params.get("bound", 3.0))
    reports = []
    assertions = []
    for mode, ms in (("independent_bernoulli", [None]),
                     ("hitting_sequence_pairs", params.get("m_list", [1, 2, 4]))):
        for m in ms:
            qs = []
            for N in Ns:
                rep = spectral.concentration_trial(
                    mode, N, trials, seed, a=a, m=m if m else 1)
                reports.append(rep)
                qs.append(rep.q99)
            label = mode if m is None else f"{mode}[m={m}]"
            non_inc = all(qs[i + 1] <= qs[i] * 1.10 for i in range(len(qs) - 1))
            assertions.append({
                "name": f"concentration_quantile[{label}]",
                "passed": max(qs) <= bound and non_inc,
                "detail": f"q99 over N: {['%.3f' % q for q in qs]} (bound {bound})"})
    return {
        "trials": [rep.__dict__ for rep in reports],
        "assertions": assertions,
        "csv": {"quantiles": [rep.csv_row() for rep in reports]},
        "reports": reports,
    }


def run_vdc(params, workers=1):
    count = int(params.get("count", 10000))
    seeds = _seed_list(params)
    rng = np.random.Generator(np.random.Philox(seeds[0]))
    violations = 0
    min_slack = math.inf
    for _ in range(count):
        N = int(rng.integers(1, 65))
        d = int(rng.integers(1, 9))
        M = int(rng.integers(1, N + 1))
        v = rng.standard_normal((N, d)) + 1j * rng.standard_normal((N, d))
        lhs, rhs = spectral.vdc_check(v, M)
        slack = rhs - lhs
        min_slack = min(min_slack, slack)
        if lhs > rhs * (1 + 1e-10):
            violations += 1
    return {
        "trials": [{"count": count, "violations": violations,
                    "min_slack": min_slack}],
        "assertions": [{"name": "vdc_inequality",
                        "passed": violations == 0 and min_slack >= 0,
                        "detail": f"{violations} violations, min slack {min_slack:.3e}"}],
        "csv": {},
    }


def run_cov_decay(params, workers=1):
    from .digit_orbit import RationalInterval
    m_max = int(params.get("m_max", 30))
    C_bound = float(params.get("C", 2.0))
    seeds = _seed_list(params)
    I = RationalInterval(Fraction(0), Fraction(1, 3))
    covs = [abs(spectral.exact_cov(I, I, m, 2)) for m in range(1, m_max + 1)]
    fit_C = max(float(c) * 2 ** m for m, c in zip(range(1, m_max + 1), covs))
    rng = np.random.Generator(np.random.Philox(seeds[0]))
    agree = 0
    pairs = int(params.get("pairs", 50))
    for _ in range(pairs):
        ends = sorted(Fraction(int(v), 1 << 16) for v in rng.integers(1, 1 << 16, 4))
        if ends[0] == ends[1] or ends[2] == ends[3]:
            agree += 1
            continue
        Ii = RationalInterval(ends[0], ends[1])
        Jj = RationalInterval(ends[2], ends[3])
        m = int(rng.integers(0, 8))
        ex = float(spectral.exact_cov(Ii, Jj, m, 2))
        est, se = spectral.mc_cov(spectral.indicator(Ii), spectral.indicator(Jj),
                                  m, 200000, int(rng.integers(0, 1 << 62)))
        if abs(est - ex) <= 4 * max(se, 1e-12):
            agree += 1
    return {
        "trials": [{"fit_C": fit_C, "mc_agree": agree, "pairs": pairs}],
        "assertions": [
            {"name": "cov_exponential_decay", "passed": fit_C <= C_bound,
             "detail": f"fitted C = {fit_C:.3f} (bound {C_bound})"},
            {"name": "mc_cov_agreement", "passed": agree == pairs,
             "detail": f"{agree}/{pairs} pairs within 4 stderr"},
        ],
        "csv": {"cov_decay": [(str(m), repr(float(c)))
                              for m, c in zip(range(1, m_max + 1), covs)]},
    }


RUNNERS = {
    "lln": run_lln,
    "A": run_thmA,
    "B": run_thmB,
    "C": run_thmC,
    "D": run_thmD,
    "interaction": run_interaction,
    "lemma-prop1": run_prop1,
    "lemma-prop2": run_prop2,
    "concentration": run_concentration,
    "vdc": run_vdc,
    "cov-decay": run_cov_decay,
}


def run_experiment(theorem, params, workers=1):
    validate(theorem, params)
    return RUNNERS[theorem](params, workers=workers)
