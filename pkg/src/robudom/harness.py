"""Monte Carlo experiments over G(n, p) minus a conflict graph.

Trials are keyed by ``derive_seed(base_seed, n, trial_index)`` and sorted by
``(n, trial)`` before anything is summarized or written, so output does not
depend on how many workers ran them.

Variance and concentration claims here are measured on the constructed set
size (an upper bound on the robust domination number), not on the exact value.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from multiprocessing import get_context
from typing import Any

import numpy as np
from scipy import stats as sps

from . import regime
from ._rng import derive_seed
from .constructors import DEFAULT_EPSILON, METHODS, PreconditionError, construct
from .exact import exact_domination
from .graph import (ConflictGraph, GraphSpec, build_conflict, gen_bernoulli, graph_minus, is_dominating,
                    resample_vertex_edges, stats)

SCHEMA = "robudom.trial/1"
VARIANCE_NOTE = "variance measured on constructor output, not on the exact domination number"


# -- configuration -------------------------------------------------------------

def resolve_p(rule: dict, n: int) -> float:
    """``fixed`` -> value; ``lambda_over_n`` -> value / n; ``power`` -> n^(-value)."""
    kind, value = rule["kind"], float(rule["value"])
    if kind == "fixed":
        return value
    if kind == "lambda_over_n":
        return value / n
    if kind == "power":
        return n ** (-value)
    raise ValueError(f"unknown p_rule kind {kind!r}")


def _scaled(value, n: int) -> int:
    # int, {"power": a} -> ceil(n^a), or {"fraction": f} -> ceil(f n)
    if isinstance(value, dict):
        if "power" in value:
            return math.ceil(n ** float(value["power"]))
        if "fraction" in value:
            return math.ceil(float(value["fraction"]) * n)
        raise ValueError(f"cannot scale {value!r}")
    return int(value)


def resolve_conflict(rule: dict, n: int) -> ConflictGraph:
    kind = rule.get("kind", "empty")
    if kind == "empty":
        return build_conflict("empty", n)
    if kind == "star":
        return build_conflict("star", n, delta=_scaled(rule["delta"], n))
    if kind == "matching":
        return build_conflict("matching", n, m=_scaled(rule["m"], n))
    if kind == "random_regular":
        return build_conflict("random_regular", n, d=_scaled(rule["d"], n), seed=int(rule.get("seed", 0)))
    if kind == "edge_list":
        return build_conflict("edge_list", n, pairs=rule["pairs"])
    raise ValueError(f"unknown conflict_rule kind {kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    n_grid: tuple
    p_rule: dict
    method: str = "auto"
    trials: int = 1
    base_seed: int = 0
    epsilon: float = DEFAULT_EPSILON
    conflict_rule: dict = field(default_factory=lambda: {"kind": "empty"})
    ignore_isolated: bool = False
    checks: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.n_grid:
            raise ValueError("n_grid must not be empty")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        for n in self.n_grid:
            p = resolve_p(self.p_rule, n)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p_rule gives p = {p} at n = {n}")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_grid"] = list(self.n_grid)
        return d


# -- trials ---------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    n: int
    trial: int
    p: float
    seed: int
    method: str
    set_size: int | None
    u_n: float | None
    ratio: float | None
    valid: bool
    core_size: int | None
    repair_size: int | None
    preprocessed_size: int | None
    edge_count: int | None
    isolated_edge_count: int | None
    isolated_vertex_count: int | None
    error: str | None = None
    wall_time: float | None = field(default=None, compare=False)


RECORD_FIELDS = [f.name for f in fields(TrialRecord)]
EXPORT_FIELDS = [name for name in RECORD_FIELDS if name != "wall_time"]


def trial_seed(base_seed: int, n: int, trial_index: int) -> int:
    return derive_seed(base_seed, n, trial_index)


def run_single(n: int, p: float, seed: int, method: str, h: ConflictGraph, epsilon: float,
               ignore_isolated: bool = False, trial: int = 0) -> TrialRecord:
    """One trial from its seed; re-running with the same arguments reproduces it."""
    start = time.perf_counter()
    g = gen_bernoulli(GraphSpec(n, p, derive_seed(seed, "graph")))
    g_eff = graph_minus(g, h)
    st = stats(g_eff)
    common = dict(n=n, trial=trial, p=p, seed=seed, edge_count=st.edge_count,
                  isolated_edge_count=st.isolated_edge_count, isolated_vertex_count=st.isolated_vertex_count)
    try:
        res = construct(method, g, h, epsilon, derive_seed(seed, "construct"), ignore_isolated=ignore_isolated)
    except PreconditionError as exc:
        return TrialRecord(method=method, set_size=None, u_n=None, ratio=None, valid=False, core_size=None,
                           repair_size=None, preprocessed_size=None, error=str(exc),
                           wall_time=time.perf_counter() - start, **common)
    valid = is_dominating(g_eff, res.dominating_set, ignore_isolated=res.ignore_isolated)
    un = res.u_n if math.isfinite(res.u_n) else None
    ratio = res.size / un if un is not None and un > 0 else None
    return TrialRecord(method=res.method, set_size=res.size, u_n=un, ratio=ratio, valid=valid,
                       core_size=res.core_size, repair_size=res.repair_size,
                       preprocessed_size=res.preprocessed_size,
                       error=None if valid else "constructed set does not dominate G\\H",
                       wall_time=time.perf_counter() - start, **common)


@lru_cache(maxsize=32)
def _conflict_for(rule_json: str, n: int) -> ConflictGraph:
    return resolve_conflict(json.loads(rule_json), n)


def _run_task(args) -> TrialRecord:
    cfg_json, n, trial = args
    cfg = ExperimentConfig.from_dict(json.loads(cfg_json))
    return _trial(cfg, n, trial)


def _trial(cfg: ExperimentConfig, n: int, trial: int) -> TrialRecord:
    h = _conflict_for(json.dumps(cfg.conflict_rule, sort_keys=True), n)
    return run_single(n, resolve_p(cfg.p_rule, n), trial_seed(cfg.base_seed, n, trial), cfg.method, h,
                      cfg.epsilon, cfg.ignore_isolated, trial)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("ROBUDOM_THREADS", "1")))
    except ValueError:
        return 1


def run_trials(config: ExperimentConfig, workers: int | None = None) -> list[TrialRecord]:
    """One record per (n, trial), sorted by (n, trial)."""
    workers = default_workers() if workers is None else max(1, workers)
    tasks = [(n, t) for n in config.n_grid for t in range(config.trials)]
    if workers == 1:
        records = [_trial(config, n, t) for n, t in tasks]
    else:
        cfg_json = json.dumps(config.to_dict(), sort_keys=True)
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("fork")) as pool:
            records = list(pool.map(_run_task, [(cfg_json, n, t) for n, t in tasks],
                                    chunksize=max(1, len(tasks) // (4 * workers))))
    return sorted(records, key=lambda r: (r.n, r.trial))


# -- summaries ------------------------------------------------------------------

@dataclass(frozen=True)
class SummaryStats:
    mean: float
    median: float
    q05: float
    q95: float
    variance: float
    count: int


def summarize(values) -> SummaryStats:
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise ValueError("cannot summarize an empty group")
    q05, med, q95 = np.quantile(x, [0.05, 0.5, 0.95])
    return SummaryStats(mean=float(x.mean()), median=float(med), q05=float(q05), q95=float(q95),
                        variance=float(x.var(ddof=1)) if x.size > 1 else 0.0, count=int(x.size))


def _ok(records):
    return [r for r in records if r.valid and r.error is None]


def _group(records) -> dict[int, list[TrialRecord]]:
    out: dict[int, list[TrialRecord]] = {}
    for r in sorted(records, key=lambda r: (r.n, r.trial)):
        out.setdefault(r.n, []).append(r)
    return out


def ratio_summary(records) -> dict[int, SummaryStats]:
    """Summary of set_size / u_n per n."""
    out = {}
    for n, group in _group(records).items():
        ratios = [r.ratio for r in _ok(group) if r.ratio is not None]
        if not ratios:
            raise ValueError(f"no usable ratios at n = {n}")
        out[n] = summarize(ratios)
    return out


def _require_regime(records, wanted: str) -> None:
    for r in records:
        got = regime.classify_regime(r.n, r.p).regime
        if got != wanted:
            raise ValueError(f"record at n = {r.n}, p = {r.p:.6g} is in regime {got}, expected {wanted}")


@dataclass(frozen=True)
class SparseReport:
    n: int
    normalized_size: SummaryStats      # set_size / (n^2 p)
    isolated_edges: SummaryStats       # isolated edges / (n^2 p / 2)
    isolated_edge_fraction: SummaryStats  # isolated edges / edges, over trials with edges

    @property
    def relative_sd(self) -> float:
        s = self.normalized_size
        return math.sqrt(s.variance) / s.mean if s.mean > 0 else math.inf


def sparse_scaling(records) -> dict[int, SparseReport]:
    recs = _ok(records)
    if not recs:
        raise ValueError("no valid records")
    _require_regime(recs, "sparse_zero")
    out = {}
    for n, group in _group(recs).items():
        scale = [n * n * r.p for r in group]
        frac = [r.isolated_edge_count / r.edge_count for r in group if r.edge_count]
        out[n] = SparseReport(
            n=n,
            normalized_size=summarize(r.set_size / s for r, s in zip(group, scale)),
            isolated_edges=summarize(2 * r.isolated_edge_count / s for r, s in zip(group, scale)),
            isolated_edge_fraction=summarize(frac if frac else [1.0]),
        )
    return out


@dataclass(frozen=True)
class SandwichReport:
    lam: float
    epsilon: float
    upper_bound: float          # b(lam)(1+eps), on set_size / n
    lower_bound: float          # a(lam)(1-eps), on certificate / n
    upper_pass_fraction: float
    lower_pass_fraction: float
    trials: int


def lower_certificate(record: TrialRecord) -> int:
    """Isolated vertices plus isolated edges of G \\ H: each needs its own dominator."""
    return record.isolated_vertex_count + record.isolated_edge_count


def lambda_sandwich(records, lam: float, epsilon: float, lam0: float = regime.LAMBDA0_DEFAULT) -> SandwichReport:
    recs = _ok(records)
    if not recs:
        raise ValueError("no valid records")
    _require_regime(recs, "sparse_lambda")
    upper = regime.b_lambda(lam) * (1 + epsilon)
    lower = regime.a_lambda(lam, lam0) * (1 - epsilon)
    up = np.mean([r.set_size / r.n <= upper for r in recs])
    low = np.mean([lower_certificate(r) >= lower * r.n for r in recs])
    return SandwichReport(lam=lam, epsilon=epsilon, upper_bound=upper, lower_bound=lower,
                          upper_pass_fraction=float(up), lower_pass_fraction=float(low), trials=len(recs))


@dataclass(frozen=True)
class LipschitzReport:
    trials: int
    pass_fraction: float
    max_gap: int          # max |Gamma - Gamma^(j)|
    max_slack_used: float  # max |Gamma - Gamma^(j)| / l_j over trials with l_j > 0


def martingale_lipschitz_check(n: int, p: float, trials: int, seed: int,
                               h: ConflictGraph | None = None) -> LipschitzReport:
    """Exact check of |Gamma - Gamma^(j)| <= l_j under vertex resampling.

    l_j counts the pairs (j, v) that are edges of G or of G^(j).
    """
    if n > 24:
        raise ValueError(f"exact Lipschitz check is limited to n <= 24, got {n}")
    h = h if h is not None else build_conflict("empty", n)
    passed, max_gap, slack = 0, 0, 0.0
    for i in range(trials):
        g = gen_bernoulli(GraphSpec(n, p, derive_seed(seed, i, "graph")))
        j = derive_seed(seed, i, "vertex") % n
        g2 = resample_vertex_edges(g, j, p, derive_seed(seed, i, "resample"))
        gap = abs(exact_domination(graph_minus(g, h)).gamma - exact_domination(graph_minus(g2, h)).gamma)
        l_j = len(np.union1d(g.neighbors(j), g2.neighbors(j)))
        passed += gap <= l_j
        max_gap = max(max_gap, gap)
        if l_j:
            slack = max(slack, gap / l_j)
    return LipschitzReport(trials=trials, pass_fraction=passed / trials, max_gap=max_gap, max_slack_used=slack)


@dataclass(frozen=True)
class VarianceReport:
    note: str
    n_grid: tuple
    means: tuple
    variances: tuple
    normalized: tuple       # var / (n (log n)^2)
    spearman_rho: float
    spearman_p_increasing: float
    beta: float             # fitted exponent in var ~ c n (log n)^beta
    rel_var_last: float     # var / mean^2 at the largest n
    no_increasing_trend: bool
    passed: bool


def variance_growth_check(n_grid, lam: float, trials: int, seed: int, *, method: str = "auto",
                          epsilon: float = DEFAULT_EPSILON, alpha: float = 0.05, rel_var_max: float = 0.01,
                          records=None, workers: int | None = None) -> VarianceReport:
    """Empirical variance of the constructed size along ``n_grid`` at p = lam / n."""
    grid = tuple(sorted(int(n) for n in n_grid))
    if len(grid) < 3:
        raise ValueError("variance growth needs at least 3 grid points")
    if records is None:
        cfg = ExperimentConfig(n_grid=grid, p_rule={"kind": "lambda_over_n", "value": lam}, method=method,
                               trials=trials, base_seed=seed, epsilon=epsilon)
        records = run_trials(cfg, workers)
    groups = _group(_ok(records))
    means, variances = [], []
    for n in grid:
        s = summarize(r.set_size for r in groups[n])
        means.append(s.mean)
        variances.append(s.variance)
    norm = [v / (n * math.log(n) ** 2) for v, n in zip(variances, grid)]
    if np.ptp(norm) == 0:
        rho, p_inc = 0.0, 1.0
    else:
        rho, p_inc = sps.spearmanr(grid, norm, alternative="greater")
        rho, p_inc = float(rho), float(p_inc)
    positive = [(n, v) for n, v in zip(grid, variances) if v > 0]
    if len(positive) >= 2:
        x = np.log([math.log(n) for n, _ in positive])
        y = np.log([v / n for n, v in positive])
        beta = float(np.polyfit(x, y, 1)[0])
    else:
        beta = math.nan
    rel_last = variances[-1] / means[-1] ** 2 if means[-1] else 0.0
    no_trend = not (rho > 0 and p_inc < alpha)
    return VarianceReport(note=VARIANCE_NOTE, n_grid=grid, means=tuple(means), variances=tuple(variances),
                          normalized=tuple(norm), spearman_rho=rho, spearman_p_increasing=p_inc, beta=beta,
                          rel_var_last=rel_last, no_increasing_trend=no_trend,
                          passed=no_trend and rel_last <= rel_var_max)


@dataclass(frozen=True)
class ChernoffCheck:
    t: int
    p: float
    eta: float
    trials: int
    empirical_freq: float
    bound: float
    passed: bool


def binomial_slack(bound: float, trials: int) -> float:
    """Three binomial standard errors at rate ``bound``."""
    return 3.0 * math.sqrt(bound * (1.0 - bound) / trials)


def chernoff_empirical_check(t: int, p: float, eta: float, trials: int, seed: int) -> ChernoffCheck:
    """Simulate W ~ Binomial(t, p) and compare P(|W - tp| >= eta tp) with the bound."""
    bound = regime.chernoff_bound(t * p, eta)
    rng = np.random.default_rng(derive_seed(seed, t, str(p), str(eta)))
    w = rng.binomial(t, p, size=trials)
    mu = t * p
    freq = float(np.mean(np.abs(w - mu) >= eta * mu))
    passed = bound >= 1.0 or freq <= bound + binomial_slack(bound, trials)
    return ChernoffCheck(t=t, p=p, eta=eta, trials=trials, empirical_freq=freq, bound=bound, passed=passed)


# -- export ---------------------------------------------------------------------

def _row(r: TrialRecord, names) -> dict:
    return {k: getattr(r, k) for k in names}


def dumps_jsonl(records, include_timing: bool = False) -> str:
    names = RECORD_FIELDS if include_timing else EXPORT_FIELDS
    lines = [json.dumps({"schema": SCHEMA, "fields": names})]
    lines.extend(json.dumps(_row(r, names), allow_nan=False) for r in sorted(records, key=lambda r: (r.n, r.trial)))
    return "\n".join(lines) + "\n"


def export(records, path, format: str = "json_lines", include_timing: bool = False) -> None:
    """Write records as JSON lines or CSV; the first line carries the schema version."""
    names = RECORD_FIELDS if include_timing else EXPORT_FIELDS
    recs = sorted(records, key=lambda r: (r.n, r.trial))
    if format == "json_lines":
        with open(path, "w") as fh:
            fh.write(dumps_jsonl(recs, include_timing))
    elif format == "csv":
        with open(path, "w", newline="") as fh:
            fh.write(f"# schema: {SCHEMA}\n")
            w = csv.writer(fh)
            w.writerow(names)
            for r in recs:
                w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v
                            for v in (getattr(r, k) for k in names)])
    else:
        raise ValueError(f"unknown export format {format!r}; expected json_lines or csv")


_TYPES = {f.name: f.type for f in fields(TrialRecord)}


def _parse_csv_value(name: str, raw: str) -> Any:
    if raw == "":
        return None
    kind = _TYPES[name]
    if kind == "bool":
        return raw == "True"
    if kind.startswith("int"):
        return int(raw)
    if kind.startswith("float"):
        return float(raw)
    return raw


def load(path) -> list[TrialRecord]:
    """Read records written by :func:`export` (either format)."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if first.startswith("{"):
            header = json.loads(first)
            if header.get("schema") != SCHEMA:
                raise ValueError(f"unsupported schema {header.get('schema')!r}")
            return [TrialRecord(**json.loads(line)) for line in fh if line.strip()]
        if first.strip() != f"# schema: {SCHEMA}":
            raise ValueError("missing schema header")
        reader = csv.reader(fh)
        names = next(reader)
        return [TrialRecord(**{k: _parse_csv_value(k, v) for k, v in zip(names, row)}) for row in reader]


# -- experiment driver ----------------------------------------------------------

@dataclass
class CheckOutcome:
    name: str
    passed: bool
    detail: str


@dataclass
class ExperimentOutcome:
    records: list
    summary_rows: list
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


SUMMARY_FIELDS = ["n", "p", "trials", "errors", "size_mean", "size_variance", "ratio_mean", "ratio_median",
                  "ratio_q05", "ratio_q95"]


def summary_rows(records) -> list[dict]:
    rows = []
    for n, group in _group(records).items():
        ok = _ok(group)
        sizes = summarize(r.set_size for r in ok) if ok else None
        ratios = [r.ratio for r in ok if r.ratio is not None]
        rs = summarize(ratios) if ratios else None
        rows.append({
            "n": n, "p": group[0].p, "trials": len(group), "errors": len(group) - len(ok),
            "size_mean": sizes.mean if sizes else None, "size_variance": sizes.variance if sizes else None,
            "ratio_mean": rs.mean if rs else None, "ratio_median": rs.median if rs else None,
            "ratio_q05": rs.q05 if rs else None, "ratio_q95": rs.q95 if rs else None,
        })
    return rows


def evaluate_checks(config: ExperimentConfig, records) -> list[CheckOutcome]:
    """Checks named in ``config.checks``; record validity is always checked."""
    out = []
    bad = [r for r in records if not r.valid or r.error]
    out.append(CheckOutcome("all_valid", not bad, f"{len(bad)} failed trials" + (f"; first: {bad[0].error}" if bad else "")))
    checks = config.checks
    if "median_ratio_max" in checks:
        summ = ratio_summary(records)
        n_last = max(summ)
        val = summ[n_last].median
        out.append(CheckOutcome("median_ratio_max", val <= checks["median_ratio_max"],
                                f"median ratio {val:.6g} at n = {n_last}, limit {checks['median_ratio_max']}"))
    if checks.get("median_ratio_nonincreasing"):
        summ = ratio_summary(records)
        meds = [summ[n].median for n in sorted(summ)]
        ok = all(a >= b for a, b in zip(meds, meds[1:]))
        out.append(CheckOutcome("median_ratio_nonincreasing", ok, "medians " + ", ".join(f"{m:.6g}" for m in meds)))
    if "sparse_mean_range" in checks or "sparse_rel_sd_max" in checks:
        rep = sparse_scaling(records)
        for n, r in rep.items():
            if "sparse_mean_range" in checks:
                lo, hi = checks["sparse_mean_range"]
                m = r.normalized_size.mean
                out.append(CheckOutcome(f"sparse_mean_range[n={n}]", lo <= m <= hi, f"mean size/(n^2 p) = {m:.6g}"))
            if "sparse_rel_sd_max" in checks:
                out.append(CheckOutcome(f"sparse_rel_sd_max[n={n}]", r.relative_sd <= checks["sparse_rel_sd_max"],
                                        f"relative sd = {r.relative_sd:.6g}"))
    if "lambda_upper_pass_min" in checks or "lambda_lower_pass_min" in checks:
        lam = float(config.p_rule["value"])
        rep = lambda_sandwich(records, lam, config.epsilon)
        if "lambda_upper_pass_min" in checks:
            out.append(CheckOutcome("lambda_upper", rep.upper_pass_fraction >= checks["lambda_upper_pass_min"],
                                    f"pass fraction {rep.upper_pass_fraction:.6g} vs b(lam)(1+eps) = {rep.upper_bound:.6g}"))
        if "lambda_lower_pass_min" in checks:
            out.append(CheckOutcome("lambda_lower", rep.lower_pass_fraction >= checks["lambda_lower_pass_min"],
                                    f"pass fraction {rep.lower_pass_fraction:.6g} vs a(lam)(1-eps) = {rep.lower_bound:.6g}"))
    return out


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ExperimentOutcome:
    records = run_trials(config, workers)
    return ExperimentOutcome(records=records, summary_rows=summary_rows(records),
                             checks=evaluate_checks(config, records))


def write_summary_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        w.writeheader()
        for row in rows:
            w.writerow({k: "" if v is None else v for k, v in row.items()})
