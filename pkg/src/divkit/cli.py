"""Command-line entry point: ``divkit <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from .acq import LayeredPrefixTreeHandle, PrefixTreeHandle, layered_preconditions, weitzman_fast_acq
from .cq.database import Database
from .cq.jointree import JoinTree, build_join_tree, find_disruptive_trio, is_disruptive_trio, is_free_connex
from .cq.query import load_cq
from .cq.yannakakis import evaluate_ids, naive_join
from .diversity import SUBSET, WEAK, WEAK_SUBSET, WEITZMAN, get_diversity
from .errors import CapExceededError, DivkitError, InvariantError, PreconditionError
from .explicit import Selection, brute_force_oracle, oracle_cap, solve_explicit_dp
from .generators import random_ultrametric
from .hardness import is_to_metric_instance, is_to_tuple_instance, load_graph
from .implicit import explicit_backed_handle, fpt_diverse, greedy_diverse
from .numeric import UrelMetric, dump_table_metric, format_decimal, format_rational, is_ultrametric, load_table_metric
from .sat import SatHandle, parse_formula
from .tree import build_ultrametric_tree, dump_tree

EXPLICIT_CAP = 4096
MODES = ("auto", "implicit-greedy", "implicit-fpt", "explicit")


class UsageError(DivkitError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _k(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be an integer, got {text!r}") from None
    if k <= 1:
        raise argparse.ArgumentTypeError(f"k must be greater than 1, got {k}")
    return k


def _value(value: Fraction, decimal: bool) -> dict:
    out = {"num": value.numerator, "den": value.denominator}
    if decimal:
        out["decimal"] = format_decimal(value)
    return out


def _emit(report: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(report, indent=2) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    for row in report.get("answers", []):
        writer.writerow(row)
    meta = {k: v for k, v in report.items() if k != "answers"}
    if "value" in meta:
        meta["value"] = format_rational(Fraction(meta["value"]["num"], meta["value"]["den"]))
    out.write("# " + " ".join(f"{k}={json.dumps(v, separators=(',', ':'))}" for k, v in meta.items()) + "\n")


def _query_source(args):
    if not args.query or not args.db:
        raise UsageError("--db and --query must be given together")
    return load_cq(args.query), Database.load_dir(args.db)


def _resolve_engine(q, requested: str | None) -> str:
    reason = layered_preconditions(q)
    if requested == "layered" and reason is not None:
        raise PreconditionError(f"layered engine unavailable: {reason}")
    if requested is not None:
        return requested
    return "layered" if reason is None else "basic"


def _materialize(q, db, cap: int) -> list[tuple]:
    """All answers as interned tuples in sorted order, refusing sets above ``cap``."""
    if isinstance(build_join_tree(q), JoinTree):
        try:
            rows = evaluate_ids(q, db, cap=cap)
        except CapExceededError:
            raise CapExceededError(
                f"explicit mode refuses answer sets above {cap} tuples; use an implicit mode"
            ) from None
    else:
        decoded = naive_join(q, db)
        if len(decoded) > cap:
            raise CapExceededError(f"explicit mode refuses answer sets above {cap} tuples")
        rows = {tuple(db.codes[v] for v in row) for row in decoded}
    return sorted(rows)


def _run_diverse(args) -> dict:
    delta = get_diversity(args.diversity)
    k = args.k
    report: dict = {"diversity": delta.name, "k": k}
    start = time.perf_counter()
    counters: dict = {}
    decode = None

    if args.metric:
        metric = load_table_metric(args.metric)
        labels = metric.labels
        check = is_ultrametric(labels, metric)
        if not check:
            raise PreconditionError(f"metric is not an ultrametric; violating triple {check.witness}")
        metric.ultrametric = True
        mode = "explicit" if args.mode == "auto" else args.mode
        engine = "table"
        if mode == "explicit":
            sel = solve_explicit_dp(labels, metric, k, delta)
            elements = list(sel.elements)
        else:
            h = explicit_backed_handle(build_ultrametric_tree(labels, metric))
            sel = _implicit(h, k, delta, mode)
            elements = [h.decode(e) for e in sel.elements]
            counters.update(materialized_answers=h.stats["members"], children_steps=h.stats["children_steps"])
        decode = lambda e: [e]  # noqa: E731
    elif args.formula is not None or args.formula_file:
        text = args.formula if args.formula is not None else Path(args.formula_file).read_text(encoding="utf-8")
        h = SatHandle(parse_formula(text.strip()))
        engine = "sat"
        if args.mode == "auto":
            mode = "implicit-greedy" if delta.is_monotone(SUBSET) else "implicit-fpt"
        else:
            mode = args.mode
        if mode == "explicit":
            universe = h.universe()
            if len(universe) > args.explicit_cap:
                raise CapExceededError(f"explicit mode refuses sets above {args.explicit_cap} elements")
            sel = solve_explicit_dp(universe, h, k, delta)
        else:
            sel = _implicit(h, k, delta, mode)
            counters.update(materialized_answers=h.stats["members"], children_steps=h.stats["children_steps"])
        elements = list(sel.elements)
        decode = lambda e: [h.decode(e)]  # noqa: E731
    else:
        q, db = _query_source(args)
        acyclic = isinstance(build_join_tree(q), JoinTree)
        mode = args.mode
        if mode == "auto":
            if not acyclic:
                mode = "explicit"
            else:
                mode = "implicit-greedy" if delta.is_monotone(SUBSET) else "implicit-fpt"
        if mode == "explicit":
            engine = "materialized"
            answers = _materialize(q, db, args.explicit_cap)
            if not answers:
                raise PreconditionError("the query has no answers on this database")
            sel = solve_explicit_dp(answers, UrelMetric(), k, delta)
        else:
            if not acyclic:
                raise PreconditionError("implicit modes need an acyclic query; use --mode explicit")
            engine = _resolve_engine(q, args.engine)
            h = LayeredPrefixTreeHandle(q, db) if engine == "layered" else PrefixTreeHandle(q, db)
            if mode == "implicit-greedy" and delta is WEITZMAN and engine == "layered":
                sel = weitzman_fast_acq(q, db, k, handle=h)
                report["algorithm"] = "weitzman-buckets"
            else:
                sel = _implicit(h, k, delta, mode)
            counters.update(materialized_answers=h.stats["members"], children_steps=h.stats["children_steps"])
        elements = list(sel.elements)
        decode = lambda e: list(db.decode(e))  # noqa: E731

    report["mode"] = mode
    report["engine"] = engine
    report.setdefault("algorithm", {"explicit": "tree-dp", "implicit-greedy": "greedy", "implicit-fpt": "fpt"}[mode])
    report["answers"] = [decode(e) for e in elements]
    report["value"] = _value(sel.value, args.decimal)
    counters.update(
        balls_touched=sel.stats.get("balls_touched", 0), delta_evaluations=sel.stats.get("delta_evaluations", 0)
    )
    report["counters"] = dict(sorted(counters.items()))
    if args.timing:
        report["wall_time_s"] = round(time.perf_counter() - start, 6)
    return report


def _implicit(h, k: int, delta, mode: str) -> Selection:
    if mode == "implicit-greedy":
        if not delta.is_monotone(SUBSET, ultrametric=True):
            raise PreconditionError(f"greedy mode needs a subset-monotone diversity function; {delta.name} is not (try implicit-fpt)")
        return greedy_diverse(h, k, delta)
    if mode == "implicit-fpt":
        return fpt_diverse(h, k, delta)
    raise UsageError(f"unknown mode {mode!r}")


def cmd_diverse(args, out) -> int:
    _emit(_run_diverse(args), args.out, out)
    return 0


def cmd_eval(args, out) -> int:
    q, db = _query_source(args)
    if isinstance(build_join_tree(q), JoinTree):
        rows = sorted(db.decode(r) for r in evaluate_ids(q, db, cap=oracle_cap()))
    else:
        rows = sorted(naive_join(q, db))
    _emit({"answers": [list(r) for r in rows], "count": len(rows)}, args.out, out)
    return 0


def cmd_tree_dump(args, out) -> int:
    if args.metric:
        metric = load_table_metric(args.metric)
        check = is_ultrametric(metric.labels, metric)
        if not check:
            raise PreconditionError(f"metric is not an ultrametric; violating triple {check.witness}")
        tree = build_ultrametric_tree(metric.labels, metric)
        legend = list(metric.labels)
    else:
        q, db = _query_source(args)
        answers = _materialize(q, db, args.explicit_cap)
        if not answers:
            raise PreconditionError("the query has no answers on this database")
        tree = build_ultrametric_tree(answers, UrelMetric())
        legend = [",".join(db.decode(a)) for a in answers]
    out.write(dump_tree(tree))
    if args.legend:
        Path(args.legend).write_text("".join(f"{i} {label}\n" for i, label in enumerate(legend)), encoding="utf-8")
    return 0


def cmd_check_acyclic(args, out) -> int:
    q = load_cq(args.query_file)
    tree = build_join_tree(q)
    if isinstance(tree, JoinTree):
        edges = ", ".join(f"{q.atoms[a]}-{q.atoms[b]}" for a, b in tree.edges) or "none"
        out.write(f"acyclic: yes; join tree edges: {edges}\n")
    else:
        residue = ", ".join(str(q.atoms[i]) for i in tree.residue)
        out.write(f"acyclic: no; GYO residue: {residue}\n")
    return 0


def _trio_text(trio) -> str:
    return "none" if trio is None else "(" + ",".join(map(str, trio)) + ")"


def cmd_check_free_connex(args, out) -> int:
    q = load_cq(args.query_file)
    fc = "yes" if is_free_connex(q) else "no"
    out.write(f"free-connex: {fc}; disruptive trio: {_trio_text(find_disruptive_trio(q))}\n")
    return 0


def cmd_find_trio(args, out) -> int:
    q = load_cq(args.query_file)
    if args.positions:
        i, j, k = args.positions
        for p in args.positions:
            if not 1 <= p <= len(q.head):
                raise PreconditionError(f"position {p} outside 1..{len(q.head)}")
        verdict = "yes" if is_disruptive_trio(q, i, j, k) else "no"
        out.write(f"disruptive trio ({i},{j},{k}): {verdict}\n")
    else:
        out.write(_trio_text(find_disruptive_trio(q)) + "\n")
    return 0


def cmd_gen_hardness(args, out) -> int:
    g = load_graph(args.graph)
    if args.kind == "metric":
        labels, metric, threshold = is_to_metric_instance(g, args.k)
        text = dump_table_metric(labels, metric)
    else:
        tuples, threshold = is_to_tuple_instance(g, args.k)
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(tuples)
        text = buf.getvalue()
    summary = {"kind": args.kind, "n": g.n, "k": args.k, "threshold": format_rational(threshold)}
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        out.write(json.dumps(summary) + "\n")
    else:
        out.write(text)
        sys.stderr.write(json.dumps(summary) + "\n")
    return 0


def _compare_on(labels, metric, k, delta, solvers) -> dict:
    oracle = brute_force_oracle(labels, metric, k, delta)
    row = {"oracle": format_rational(oracle.value)}
    for name in solvers:
        if name == "dp" and delta.is_monotone(WEAK_SUBSET):
            row["dp"] = format_rational(solve_explicit_dp(labels, metric, k, delta).value)
        elif name == "greedy" and delta.is_monotone(SUBSET):
            h = explicit_backed_handle(build_ultrametric_tree(labels, metric))
            row["greedy"] = format_rational(greedy_diverse(h, k, delta).value)
        elif name == "fpt" and delta.is_monotone(WEAK):
            h = explicit_backed_handle(build_ultrametric_tree(labels, metric))
            row["fpt"] = format_rational(fpt_diverse(h, k, delta).value)
    row["agree"] = all(v == row["oracle"] for key, v in row.items() if key != "oracle")
    return row


def cmd_oracle_compare(args, out) -> int:
    delta = get_diversity(args.diversity)
    solvers = args.solvers.split(",")
    rows = []
    if args.random:
        rng = random.Random(args.seed)
        for _ in range(args.random):
            n = rng.randint(args.k, args.size)
            labels, metric, _ = random_ultrametric(rng, n)
            rows.append(_compare_on(labels, metric, args.k, delta, solvers))
    elif args.metric:
        metric = load_table_metric(args.metric)
        check = is_ultrametric(metric.labels, metric)
        if not check:
            raise PreconditionError(f"metric is not an ultrametric; violating triple {check.witness}")
        metric.ultrametric = True
        rows.append(_compare_on(metric.labels, metric, args.k, delta, solvers))
    else:
        q, db = _query_source(args)
        answers = _materialize(q, db, args.explicit_cap)
        rows.append(_compare_on(answers, UrelMetric(), args.k, delta, solvers))
    mismatches = sum(1 for r in rows if not r["agree"])
    report = {"diversity": delta.name, "k": args.k, "instances": len(rows), "mismatches": mismatches}
    if not args.random:
        report["values"] = rows[0]
    out.write(json.dumps(report, indent=2) + "\n")
    if mismatches:
        raise InvariantError(f"{mismatches} instance(s) disagree with the brute-force oracle")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="divkit", description="Diverse subsets of sets and query answers under ultrametrics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def sources(p, sat=False, metric=True):
        p.add_argument("--db", help="database directory with one <Relation>.csv per relation")
        p.add_argument("--query", help="file holding one conjunctive query")
        if metric:
            p.add_argument("--metric", help="table-backed metric CSV (a,b,num,den)")
        if sat:
            p.add_argument("--formula", help="propositional formula over x1..xn, e.g. 'x1 & !x2'")
            p.add_argument("--formula-file", help="file holding a one-line formula")
        p.add_argument("--explicit-cap", type=int, default=EXPLICIT_CAP, help="largest set materialized explicitly")

    p = sub.add_parser("diverse", help="compute a k-diverse subset")
    sources(p, sat=True)
    p.add_argument("-k", type=_k, required=True)
    p.add_argument("--diversity", default="weitzman", choices=["sum", "min", "weitzman", "sum-min"])
    p.add_argument("--mode", default="auto", choices=MODES)
    p.add_argument("--engine", choices=["basic", "layered"])
    p.add_argument("--out", default="json", choices=["json", "csv"])
    p.add_argument("--decimal", action="store_true", help="also render the value in decimal")
    p.add_argument("--timing", action="store_true", help="include wall time (makes output run-dependent)")
    p.set_defaults(func=cmd_diverse)

    p = sub.add_parser("eval", help="evaluate a query")
    sources(p, metric=False)
    p.add_argument("--out", default="csv", choices=["json", "csv"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("tree-dump", help="print the ultrametric tree of a query's answers or a metric table")
    sources(p)
    p.add_argument("--legend", help="write 'element-id label' lines to this file")
    p.set_defaults(func=cmd_tree_dump)

    for name, func, text in (
        ("check-acyclic", cmd_check_acyclic, "report acyclicity and a join tree"),
        ("check-free-connex", cmd_check_free_connex, "report free-connexity and the first disruptive trio"),
        ("find-trio", cmd_find_trio, "print the first disruptive trio"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("query_file")
        if name == "find-trio":
            p.add_argument("--positions", type=int, nargs=3, metavar=("I", "J", "K"), help="test one triple")
        p.set_defaults(func=func)

    p = sub.add_parser("gen-hardness", help="emit an independent-set reduction instance")
    p.add_argument("--kind", required=True, choices=["metric", "tuple"])
    p.add_argument("--graph", required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--output", help="write the instance here and print the summary to stdout")
    p.set_defaults(func=cmd_gen_hardness)

    p = sub.add_parser("oracle-compare", help="check solvers against the brute-force oracle")
    sources(p)
    p.add_argument("-k", type=_k, required=True)
    p.add_argument("--diversity", default="weitzman", choices=["sum", "min", "weitzman", "sum-min"])
    p.add_argument("--solvers", default="dp,greedy,fpt")
    p.add_argument("--random", type=int, default=0, help="number of seeded random ultrametric instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=10, help="largest random instance")
    p.set_defaults(func=cmd_oracle_compare)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except AssertionError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return 2
    except DivkitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
