"""Acceptance suite: finite-n checks with fixed tolerances.

Each check returns a :class:`CheckResult`; a check passes only if its
statistical condition holds and it finished inside its time budget.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import harness, regime
from ._rng import derive_seed
from .constructors import METHODS, PreconditionError, construct
from .exact import exact_domination
from .graph import ConflictGraph, GraphSpec, build_conflict, gen_bernoulli, graph_minus, is_dominating

SEED = 20240611


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    budget: float = math.inf

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.key:<12} {self.title}: {self.detail} ({self.seconds:.1f}s / {self.budget:g}s)"


def acceptance_workers() -> int:
    env = os.environ.get("ROBUDOM_THREADS")
    if env:
        return harness.default_workers()
    return max(1, min(8, os.cpu_count() or 1))


# -- randomized instances --------------------------------------------------------

def _random_p(rng: np.random.Generator, regime_name: str, n: int) -> float:
    if regime_name == "sparse_zero":
        return rng.uniform(0.005, 0.095) / n
    if regime_name == "sparse_lambda":
        return rng.uniform(0.15, math.log(n)) / n
    if regime_name == "dense_p0_zero":
        return rng.uniform(1.5 * math.log(n) / n, 0.0099)
    if regime_name == "dense_p0_one":
        return rng.uniform(0.991, 0.9995)
    return rng.uniform(0.02, 0.98)


def _random_conflict(rng: np.random.Generator, n: int) -> ConflictGraph:
    kind = rng.choice(["empty", "star", "matching", "random_regular", "edge_list"])
    if kind == "star":
        return build_conflict("star", n, delta=int(rng.integers(1, max(2, n // 4))))
    if kind == "matching":
        return build_conflict("matching", n, m=int(rng.integers(1, n // 2 + 1)))
    if kind == "random_regular":
        d = int(rng.integers(1, min(6, n - 1) + 1))
        if (n * d) % 2:
            d -= 1
        return build_conflict("random_regular", n, d=d, seed=int(rng.integers(1 << 31)))
    if kind == "edge_list":
        k = int(rng.integers(1, 2 * n))
        pairs = {tuple(sorted(map(int, rng.choice(n, 2, replace=False)))) for _ in range(k)}
        return build_conflict("edge_list", n, pairs=sorted(pairs))
    return build_conflict("empty", n)


def _random_instance(rng: np.random.Generator, regimes=regime.REGIMES, n_range=(8, 400)):
    name = str(rng.choice(regimes))
    if name == "dense_p0_zero":
        n = int(rng.integers(2000, 4000))
    else:
        n = int(rng.integers(*n_range))
    p = _random_p(rng, name, n)
    g = gen_bernoulli(GraphSpec(n, p, int(rng.integers(1 << 62))))
    return g, _random_conflict(rng, n)


# -- criteria --------------------------------------------------------------------

def check_validity(instances: int = 10_000, seed: int = SEED) -> tuple[bool, str]:
    rng = np.random.default_rng(derive_seed(seed, "validity"))
    emitted = invalid = precondition = 0
    first_bad = ""
    for i in range(instances):
        g, h = _random_instance(rng)
        method = METHODS[i % len(METHODS)]
        ignore = bool(rng.integers(2))
        try:
            res = construct(method, g, h, 0.1, derive_seed(seed, i), ignore_isolated=ignore)
        except PreconditionError:
            precondition += 1
            continue
        emitted += 1
        if not is_dominating(graph_minus(g, h), res.dominating_set, ignore_isolated=res.ignore_isolated):
            invalid += 1
            first_bad = first_bad or f"{method} n={g.n} p={g.p:.4g}"
    detail = f"{emitted} emitted, {invalid} invalid, {precondition} precondition refusals"
    return invalid == 0 and emitted > 0, detail + (f"; first invalid {first_bad}" if first_bad else "")


def check_oracle_sandwich(instances: int = 1000, seed: int = SEED) -> tuple[bool, str]:
    rng = np.random.default_rng(derive_seed(seed, "sandwich"))
    below_exact = monotone = compared = 0
    for i in range(instances):
        n = int(rng.integers(4, 21))
        g = gen_bernoulli(GraphSpec(n, float(rng.uniform(0.02, 0.98)), int(rng.integers(1 << 62))))
        h = _random_conflict(rng, n)
        g_eff = graph_minus(g, h)
        gamma_g = exact_domination(g).gamma
        gamma_gh = exact_domination(g_eff).gamma
        monotone += gamma_gh < gamma_g
        for method in METHODS:
            try:
                res = construct(method, g, h, 0.1, derive_seed(seed, i, method))
            except PreconditionError:
                continue
            compared += 1
            below_exact += res.size < gamma_gh
    return below_exact == 0 and monotone == 0, (
        f"{compared} constructor runs, {below_exact} below exact gamma(G\\H), "
        f"{monotone} instances with gamma(G\\H) < gamma(G)")


def check_alteration_bound(seed: int = SEED, workers: int = 1) -> tuple[bool, str]:
    eps = 0.2
    cfg = harness.ExperimentConfig(n_grid=[5000], p_rule={"kind": "fixed", "value": 0.2}, method="alteration",
                                   trials=200, base_seed=derive_seed(seed, "alteration"), epsilon=eps,
                                   conflict_rule={"kind": "star", "delta": 50})
    recs = harness.run_trials(cfg, workers)
    un = regime.u_n(5000, 0.2)
    ok = [r for r in recs if r.valid and r.repair_size <= eps * un
          and r.set_size <= (1 + eps) * un + 50 + r.repair_size]
    frac = len(ok) / len(recs)
    un_ok = abs(un - 30.956) < 1e-3  # quoted value is truncated to 3 decimals
    return frac >= 0.95 and un_ok, (f"u_n = {un:.6g}; {frac:.3f} of trials within (1+eps)u_n + Delta + repair "
                                    f"with repair <= eps u_n; max size {max(r.set_size for r in recs)}")


def check_ratio_trend(seed: int = SEED, workers: int = 1) -> tuple[bool, str]:
    cfg = harness.ExperimentConfig(n_grid=[1000, 4000, 16000], p_rule={"kind": "fixed", "value": 0.3},
                                   method="auto", trials=100, base_seed=derive_seed(seed, "trend"),
                                   conflict_rule={"kind": "star", "delta": {"power": 0.5}})
    recs = harness.run_trials(cfg, workers)
    bad = sum(not r.valid for r in recs)
    summ = harness.ratio_summary(recs)
    meds = [summ[n].median for n in cfg.n_grid]
    strictly = all(a > b for a, b in zip(meds, meds[1:]))
    return strictly and meds[-1] <= 1.35 and bad == 0, (
        "median ratios " + ", ".join(f"n={n}: {m:.6g}" for n, m in zip(cfg.n_grid, meds)) + f"; {bad} invalid")


def check_sparse_scaling(seed: int = SEED, workers: int = 1) -> tuple[bool, str]:
    cfg = harness.ExperimentConfig(n_grid=[3000], p_rule={"kind": "power", "value": 1.4}, method="sparse",
                                   trials=200, base_seed=derive_seed(seed, "sparse"), ignore_isolated=True)
    recs = harness.run_trials(cfg, workers)
    rep = harness.sparse_scaling(recs)[3000]
    m, rsd = rep.normalized_size.mean, rep.relative_sd
    frac = rep.isolated_edge_fraction.mean
    return 0.20 <= m <= 0.60 and rsd <= 0.25 and len(recs) == 200 and all(r.valid for r in recs), (
        f"mean size/(n^2 p) = {m:.6g}, relative sd = {rsd:.6g}, isolated-edge fraction {frac:.4f}")


def check_lambda_sandwich(seed: int = SEED, workers: int = 1) -> tuple[bool, str]:
    cfg = harness.ExperimentConfig(n_grid=[2000], p_rule={"kind": "lambda_over_n", "value": 5.0},
                                   method="alteration", trials=200, base_seed=derive_seed(seed, "lambda"),
                                   epsilon=0.2)
    recs = harness.run_trials(cfg, workers)
    rep = harness.lambda_sandwich(recs, 5.0, 0.2, lam0=100)
    return rep.upper_pass_fraction >= 0.95 and rep.lower_pass_fraction >= 0.95 and all(r.valid for r in recs), (
        f"upper {rep.upper_pass_fraction:.3f} at b(5)(1.2) = {rep.upper_bound:.6g}; "
        f"lower {rep.lower_pass_fraction:.3f} at a(5)(0.8) = {rep.lower_bound:.6g}")


def check_martingale(seed: int = SEED) -> tuple[bool, str]:
    rep = harness.martingale_lipschitz_check(16, 0.3, 500, derive_seed(seed, "martingale"))
    return rep.pass_fraction == 1.0, (f"pass fraction {rep.pass_fraction:.6g}, max |gap| {rep.max_gap}, "
                                      f"max gap/l_j {rep.max_slack_used:.3g}")


def check_variance(seed: int = SEED, workers: int = 1) -> tuple[bool, str]:
    cfg = harness.ExperimentConfig(n_grid=[500, 1000, 2000, 4000], p_rule={"kind": "lambda_over_n", "value": 3.0},
                                   method="auto", trials=300, base_seed=derive_seed(seed, "variance"))
    recs = harness.run_trials(cfg, workers)
    rep = harness.variance_growth_check(cfg.n_grid, 3.0, 300, cfg.base_seed, records=recs)
    return rep.passed and all(r.valid for r in recs), (
        f"var/(n log^2 n) = " + ", ".join(f"{v:.3g}" for v in rep.normalized)
        + f"; spearman rho {rep.spearman_rho:.3g} (one-sided p {rep.spearman_p_increasing:.3g}); "
        f"var/mean^2 at n=4000 = {rep.rel_var_last:.3g}; beta {rep.beta:.3g}")


CHERNOFF_GRID = [(t, p, eta) for t in (100, 400, 1600, 6400) for p in (0.1, 0.5) for eta in (0.1, 0.2, 0.4)]


def check_chernoff(seed: int = SEED, trials: int = 100_000) -> tuple[bool, str]:
    results = [harness.chernoff_empirical_check(t, p, eta, trials, derive_seed(seed, "chernoff"))
               for t, p, eta in CHERNOFF_GRID]
    failed = [r for r in results if not r.passed]
    worst = max(results, key=lambda r: r.empirical_freq - r.bound)
    return not failed, (f"{len(results) - len(failed)}/{len(results)} grid points within bound + 3 SE; "
                        f"tightest t={worst.t} p={worst.p} eta={worst.eta}: "
                        f"{worst.empirical_freq:.4g} vs {worst.bound:.4g}")


def check_chernoff_identity() -> tuple[bool, str]:
    """Library bound against direct evaluation of 2 exp(-eta^2 mu / 4)."""
    cases = [(100.0, 0.2), (500.0, 0.1), (1000.0, 0.3), (50.0, 0.45)]
    worst = 0.0
    for mu, eta in cases:
        direct = min(1.0, 2.0 * math.exp(-eta * eta * mu / 4.0))
        worst = max(worst, abs(regime.chernoff_bound(mu, eta) - direct))
    return worst <= 1e-12, f"max |library - direct| = {worst:.3g} over {len(cases)} cases"


def check_un_monotone(n: float = 1e4, grid_size: int = 10_000) -> tuple[bool, str]:
    lo, hi = 10.0 / n, 1.0 - 1.0 / n ** 3
    cert = regime.un_decreasing_certificate(n, lo, hi, grid_size)
    xs = regime.un_grid(lo, hi, grid_size)
    un = np.log(n * xs) / -np.log1p(-xs)
    slope = np.diff(un) / np.diff(xs)
    worst = float(np.max(regime.entropy_numerator(n, xs)))
    return cert and bool(np.all(slope < 0)), (
        f"max H(x) - x log n = {worst:.4g}; max finite-difference slope {float(slope.max()):.4g}")


def check_determinism(seed: int = SEED, workers: int = 8) -> tuple[bool, str]:
    cfg = harness.ExperimentConfig(n_grid=[300, 600], p_rule={"kind": "fixed", "value": 0.3}, method="auto",
                                   trials=20, base_seed=derive_seed(seed, "determinism"),
                                   conflict_rule={"kind": "star", "delta": {"power": 0.5}})
    a = harness.dumps_jsonl(harness.run_trials(cfg, 1))
    b = harness.dumps_jsonl(harness.run_trials(cfg, 1))
    c = harness.dumps_jsonl(harness.run_trials(cfg, workers))
    return a == b == c, f"{a.count(chr(10)) - 1} records; repeat identical {a == b}, 1 vs {workers} workers identical {a == c}"


@dataclass(frozen=True)
class Criterion:
    key: str
    title: str
    budget: float
    run: Callable[[int, int], tuple[bool, str]]
    quick: bool


CRITERIA = [
    Criterion("validity", "1 validity suite (10 000 instances)", 300,
              lambda w, s: check_validity(seed=s), False),
    Criterion("oracle", "2 oracle sandwich (1 000 instances, n <= 20)", 120,
              lambda w, s: check_oracle_sandwich(seed=s), False),
    Criterion("alteration", "3 alteration size bound (n=5000, p=0.2, star(50))", 60,
              lambda w, s: check_alteration_bound(seed=s, workers=w), False),
    Criterion("trend", "4 ratio trend at p=0.3 (n up to 16000)", 600,
              lambda w, s: check_ratio_trend(seed=s, workers=w), False),
    Criterion("sparse", "5 sparse scaling (n=3000, p=n^-1.4)", 180,
              lambda w, s: check_sparse_scaling(seed=s, workers=w), False),
    Criterion("lambda", "6 lambda sandwich (lambda=5, n=2000)", 120,
              lambda w, s: check_lambda_sandwich(seed=s, workers=w), True),
    Criterion("martingale", "7 martingale Lipschitz (n=16, 500 resamples)", 120,
              lambda w, s: check_martingale(seed=s), True),
    Criterion("variance", "8 variance growth (lambda=3)", 600,
              lambda w, s: check_variance(seed=s, workers=w), False),
    Criterion("chernoff", "9 Chernoff soundness grid", 180,
              lambda w, s: check_chernoff(seed=s), True),
    Criterion("monotone", "10 u_n monotonicity certificate", 5,
              lambda w, s: check_un_monotone(), True),
    Criterion("determinism", "11 determinism (repeat, 1 vs 8 workers)", 60,
              lambda w, s: check_determinism(seed=s), True),
    Criterion("identity", "Chernoff bound identity", 5,
              lambda w, s: check_chernoff_identity(), True),
]


def select(quick: bool = False, only: list[str] | None = None) -> list[Criterion]:
    chosen = [c for c in CRITERIA if not quick or c.quick]
    if only:
        unknown = set(only) - {c.key for c in CRITERIA}
        if unknown:
            raise ValueError(f"unknown check(s) {sorted(unknown)}; known: {[c.key for c in CRITERIA]}")
        chosen = [c for c in CRITERIA if c.key in only]
    return chosen


def run_criterion(c: Criterion, workers: int | None = None, seed: int = SEED) -> CheckResult:
    workers = acceptance_workers() if workers is None else workers
    start = time.perf_counter()
    try:
        ok, detail = c.run(workers, seed)
    except Exception as exc:  # a crashing check is a failing check
        ok, detail = False, f"error: {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    if elapsed > c.budget:
        ok, detail = False, detail + "; over time budget"
    return CheckResult(c.key, c.title, ok, detail, elapsed, c.budget)


def run_acceptance(quick: bool = False, only: list[str] | None = None, workers: int | None = None,
                   seed: int = SEED, report: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    results = []
    for c in select(quick, only):
        r = run_criterion(c, workers, seed)
        if report:
            report(r)
        results.append(r)
    return results
