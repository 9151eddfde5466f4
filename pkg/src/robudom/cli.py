"""Command-line entry point: ``robudom <subcommand> ...``.

Exit codes: 0 success, 1 a check or validity test failed, 2 usage error.
Data goes to stdout (or ``--output``); diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict

from . import acceptance, harness, regime
from .constructors import DEFAULT_EPSILON, METHODS, PreconditionError, construct
from .exact import MAX_EXACT_N, exact_domination
from .graph import Graph, GraphSpec, gen_bernoulli, graph_minus, is_dominating, parse_conflict

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Six significant digits for floats, plain text otherwise."""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def _emit(args, payload: dict, text: str | None = None) -> None:
    out = json.dumps(_json_safe(payload)) + "\n" if args.json else (
        text if text is not None else "".join(f"{k}: {fmt(v)}\n" for k, v in payload.items()))
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _read_graph(path: str) -> Graph:
    try:
        with open(path) as fh:
            return Graph.from_text(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read graph file {path}: {exc.strerror}") from exc


def _conflict(spec: str, n: int):
    try:
        return parse_conflict(spec, n)
    except (ValueError, IndexError, OSError) as exc:
        raise UsageError(f"bad --conflict {spec!r}: {exc}") from exc


# -- subcommands ------------------------------------------------------------------

def cmd_generate(args) -> int:
    g = gen_bernoulli(GraphSpec(args.n, args.p, args.seed))
    payload = {"n": g.n, "m": g.edge_count, "p": args.p, "seed": args.seed, "digest": g.digest(),
               "edges": g.edges().tolist()}
    _emit(args, payload, g.to_text())
    return EXIT_OK


def cmd_construct(args) -> int:
    if args.graph:
        g = _read_graph(args.graph)
        p = args.p
        if p is None:
            pairs = g.n * (g.n - 1) / 2
            p = g.edge_count / pairs if pairs else 0.0
    else:
        if args.n is None or args.p is None:
            raise UsageError("construct needs --graph or both --n and --p")
        g = gen_bernoulli(GraphSpec(args.n, args.p, args.seed))
        p = args.p
    h = _conflict(args.conflict, g.n)
    try:
        res = construct(args.method, g, h, args.epsilon, args.seed, p=p, ignore_isolated=args.ignore_isolated)
    except PreconditionError as exc:
        print(f"robudom construct: {exc}", file=sys.stderr)
        return EXIT_FAIL
    valid = is_dominating(graph_minus(g, h), res.dominating_set, ignore_isolated=res.ignore_isolated)
    un = res.u_n
    payload = {
        "method": res.method, "n": g.n, "p": p, "seed": args.seed, "graph_digest": g.digest(),
        "set_size": res.size, "core_size": res.core_size, "repair_size": res.repair_size,
        "preprocessed_size": res.preprocessed_size, "u_n": un,
        "ratio": res.size / un if math.isfinite(un) and un > 0 else None,
        "valid": valid, "ignore_isolated": res.ignore_isolated,
    }
    if res.params is not None:
        payload["params"] = asdict(res.params)
    if args.members:
        payload["members"] = res.dominating_set.sorted()
    text = "".join(f"{k}: {fmt(v)}\n" for k, v in payload.items() if k not in ("params", "members"))
    if args.members:
        text += "members: " + " ".join(map(str, res.dominating_set.sorted())) + "\n"
    _emit(args, payload, text)
    if not valid:
        print("robudom construct: constructed set does not dominate G\\H", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_exact(args) -> int:
    g = _read_graph(args.graph)
    if g.n > MAX_EXACT_N:
        raise UsageError(f"exact solver is limited to n <= {MAX_EXACT_N}, graph has n = {g.n}")
    g_eff = graph_minus(g, _conflict(args.conflict, g.n)) if args.conflict else g
    res = exact_domination(g_eff)
    payload = {"n": g.n, "gamma": res.gamma, "witness": res.witness.sorted(), "nodes_explored": res.nodes_explored,
               "graph_digest": g.digest()}
    text = f"gamma={res.gamma}\nwitness={' '.join(map(str, res.witness.sorted()))}\n"
    _emit(args, payload, text)
    return EXIT_OK


def _math_value(args) -> dict:
    q = args.quantity
    need = {"u_n": ("n", "x"), "t_n": ("n", "p", "theta"), "tail": ("n", "p", "theta"), "a": ("lam",),
            "b": ("lam",), "chernoff": ("mu", "eta"), "entropy": ("x",), "lambda": ("n", "p"),
            "certificate": ("n", "x_low", "x_high"), "regime": ("n", "p")}[q]
    missing = [f"--{k.replace('_', '-')}" for k in need if getattr(args, k) is None]
    if q == "u_n" and args.x is None and args.p is not None:
        args.x = args.p
        missing = [m for m in missing if m != "--x"]
    if missing:
        raise UsageError(f"math {q} needs {' '.join(missing)}")
    if q == "u_n":
        y = args.y if args.y is not None else args.x
        return {"u_n": regime.u_n_xy(args.n, args.x, y)}
    if q == "t_n":
        return {"t_n": regime.t_n(args.n, args.p, args.theta)}
    if q == "tail":
        tb = regime.lower_tail_bound(args.n, args.p, args.theta)
        return {"threshold": tb.threshold, "prob_bound": tb.prob_bound}
    if q == "a":
        return {"a": regime.a_lambda(args.lam, args.lam0)}
    if q == "b":
        return {"b": regime.b_lambda(args.lam)}
    if q == "chernoff":
        return {"chernoff": regime.chernoff_bound(args.mu, args.eta)}
    if q == "entropy":
        return {"entropy": regime.binary_entropy(args.x)}
    if q == "lambda":
        return {"lambda_a": regime.lambda_a(args.n, args.p), "lambda_b": regime.lambda_b(args.n, args.p)}
    if q == "certificate":
        ok = regime.un_decreasing_certificate(args.n, args.x_low, args.x_high, args.grid)
        return {"decreasing": ok}
    rp = regime.classify_regime(int(args.n), args.p)
    return {"regime": rp.regime, "parameter": rp.parameter, "lambda_a": rp.lambda_a, "lambda_b": rp.lambda_b,
            "u_n": rp.u_n}


def cmd_math(args) -> int:
    try:
        values = _math_value(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if len(values) == 1:
        text = fmt(next(iter(values.values()))) + "\n"
    else:
        text = "".join(f"{k}: {fmt(v)}\n" for k, v in values.items())
    _emit(args, values, text)
    if args.quantity == "certificate" and not values["decreasing"]:
        return EXIT_FAIL
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
    if args.seed is not None:
        doc["base_seed"] = args.seed
    if args.trials is not None:
        doc["trials"] = args.trials
    try:
        cfg = harness.ExperimentConfig.from_dict(doc)
    except (TypeError, ValueError, KeyError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc
    outcome = harness.run_experiment(cfg, args.workers)
    records = harness.dumps_jsonl(outcome.records, include_timing=args.timing)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(records)
    else:
        sys.stdout.write(records)
    summary = args.summary or (args.output + ".summary.csv" if args.output else None)
    if summary:
        harness.write_summary_csv(outcome.summary_rows, summary)
    for c in outcome.checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}", file=sys.stderr)
    return EXIT_OK if outcome.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    try:
        chosen = acceptance.select(args.quick, args.only)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    seed = acceptance.SEED if args.seed is None else args.seed
    results = []
    for c in chosen:
        r = acceptance.run_criterion(c, args.workers, seed)
        results.append(r)
        if args.json:
            print(json.dumps({"key": r.key, "title": r.title, "passed": r.passed, "detail": r.detail,
                              "seconds": r.seconds, "budget": r.budget}), flush=True)
        else:
            print(r.line(), flush=True)
    failed = [r.key for r in results if not r.passed]
    if failed:
        print(f"robudom verify: failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robudom", description="Robust domination in G(n, p) minus a conflict graph.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed_default=0, output=True):
        sp.add_argument("--seed", type=int, default=seed_default, help="random seed")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if output:
            sp.add_argument("--output", "-o", help="write data here instead of stdout")

    sp = sub.add_parser("generate", help="sample G(n, p) and print its edge list")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("construct", help="build a dominating set of G \\ H")
    sp.add_argument("--method", choices=METHODS, default="auto")
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=float)
    sp.add_argument("--graph", help="edge-list file instead of sampling")
    sp.add_argument("--conflict", default="empty", help="empty | star:D | matching:M | regular:D[:SEED] | edges:PATH")
    sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    sp.add_argument("--ignore-isolated", action="store_true", help="do not require isolated vertices to be covered")
    sp.add_argument("--members", action="store_true", help="also print the vertex set")
    common(sp)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("exact", help="exact domination number (n <= 32)")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--conflict", help="remove this conflict graph first")
    common(sp)
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("math", help="evaluate closed-form quantities")
    sp.add_argument("quantity", choices=["u_n", "t_n", "tail", "a", "b", "chernoff", "entropy", "lambda",
                                         "certificate", "regime"])
    for name in ("n", "x", "y", "p", "theta", "lam", "mu", "eta", "x-low", "x-high"):
        sp.add_argument(f"--{name}", type=float)
    sp.add_argument("--lam0", type=float, default=regime.LAMBDA0_DEFAULT)
    sp.add_argument("--grid", type=int, default=10_000)
    common(sp)
    sp.set_defaults(func=cmd_math)

    sp = sub.add_parser("experiment", help="run a Monte Carlo experiment from a JSON config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--summary", help="CSV summary path (default: <output>.summary.csv)")
    sp.add_argument("--trials", type=int, help="override the config's trial count")
    sp.add_argument("--workers", type=int, help="worker processes (default: ROBUDOM_THREADS or 1)")
    sp.add_argument("--timing", action="store_true", help="include wall_time in records")
    common(sp, seed_default=None)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("--quick", action="store_true", help="fast subset only")
    sp.add_argument("--only", nargs="+", metavar="CHECK", help="run only these checks")
    sp.add_argument("--workers", type=int)
    common(sp, seed_default=None, output=False)
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"robudom {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"robudom {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
