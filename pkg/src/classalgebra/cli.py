"""Command-line interface.

Read commands print either JSON (``--format json``) or aligned text
(``--format table``, default).  Exit codes: 0 success, 1 engine error,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional

from . import document as doc
from . import hierarchy as hy
from . import normalize as nz
from . import probability as pb
from . import syntax as sx
from .errors import EngineError
from .evaluate import Evaluator
from .model import Oid, Store


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="classalgebra",
        description="Class-algebra ontology reasoning engine",
    )
    parser.add_argument("--store", metavar="FILE", help="ontology document to operate on")
    parser.add_argument(
        "--format", choices=("json", "table"), default="table", help="output format"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", help="validate a document and report its contents")
    p.add_argument("path")

    p = sub.add_parser("save", help="rewrite the store in canonical form")
    p.add_argument("path", help="destination file")

    p = sub.add_parser("normalize", help="print the sorted normal form of an expression")
    p.add_argument("expression")

    p = sub.add_parser("query", help="extent, probability and belief interval")
    p.add_argument("expression")

    p = sub.add_parser("describe", help="most specific description of a set of objects")
    p.add_argument("oids", nargs="+")

    sub.add_parser("implications", help="equivalence/implication report")
    sub.add_parser("suggest-rules", help="database-state rule suggestions")

    p = sub.add_parser("summarize", help="per-value summary of an attribute")
    p.add_argument("attr")

    p = sub.add_parser("constrain", help="validate and apply probability constraints")
    p.add_argument("constraints", nargs="+", metavar="TEXT")

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--port", type=int, default=8420)
    p.add_argument("--host", default="127.0.0.1")
    return parser


def _load_store(args) -> Store:
    if not args.store:
        return Store()
    return doc.load(args.store)


def _emit(args, payload: dict, table_lines: List[str]):
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        for line in table_lines:
            print(line)


def _frac(x) -> str:
    return sx.print_value(Fraction(x))


def _parse_cli_oid(text: str) -> Oid:
    if text.startswith("v"):
        return Oid(int(text[1:]), "virtual")
    return Oid(int(text))


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except EngineError as ex:
        position = f" at {ex.position}" if ex.position is not None else ""
        print(f"error[{ex.code}]: {ex.message}{position}", file=sys.stderr)
        return 1
    except FileNotFoundError as ex:
        print(f"error[FileNotFound]: {ex}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "load":
        store = doc.load(args.path)
        payload = {
            "objects": len(store.objects),
            "relations": len(store.relations),
            "classes": len(store.classes),
            "virtualObjects": len(store.ledger.allocations),
            "revision": store.revision,
        }
        _emit(args, payload, [f"{k}: {v}" for k, v in payload.items()])
        return 0

    if args.command == "save":
        store = _load_store(args)
        doc.save(store, args.path)
        print(f"saved {args.path}")
        return 0

    if args.command == "serve":
        from . import server

        store = _load_store(args)
        server.serve(store, args.port, args.host)
        return 0

    store = _load_store(args)
    snapshot = store.snapshot()
    ev = Evaluator(snapshot)

    if args.command == "normalize":
        form = nz.sdnf(sx.parse_class_expr(args.expression), store.resolver)
        _emit(args, {"sdnf": form.render()}, [form.render()])
        return 0

    if args.command == "query":
        form = ev.sdnf_of(sx.parse_class_expr(args.expression))
        result = ev.extent(form)
        prob = pb.probability(form, snapshot, ev)
        lo, hi = pb.belief_interval(form, snapshot, ev)
        payload = {
            "sdnf": form.render(),
            "trueSet": [str(o) for o in result.true_set],
            "falseSet": [str(o) for o in result.false_set],
            "unknownSet": [str(o) for o in result.unknown_set],
            "probability": _frac(prob),
            "beliefInterval": [_frac(lo), _frac(hi)],
            "revision": snapshot.revision,
        }
        lines = [
            f"sdnf: {payload['sdnf']}",
            f"true ({len(result.true_set)}): {' '.join(payload['trueSet'])}",
            f"false ({len(result.false_set)}): {' '.join(payload['falseSet'])}",
            f"unknown ({len(result.unknown_set)}): {' '.join(payload['unknownSet'])}",
            f"probability: {payload['probability']}",
            f"belief interval: [{payload['beliefInterval'][0]}, {payload['beliefInterval'][1]}]",
        ]
        _emit(args, payload, lines)
        return 0

    if args.command == "describe":
        desc = hy.describe([_parse_cli_oid(t) for t in args.oids], snapshot, ev)
        payload = {
            "description": desc.render(),
            "perClassMembership": {n: _frac(f) for n, f in desc.per_class_membership},
        }
        lines = [f"description: {desc.render()}"] + [
            f"  {name}: {_frac(frac)}" for name, frac in desc.per_class_membership
        ]
        _emit(args, payload, lines)
        return 0

    if args.command == "implications":
        report = hy.implication_report(snapshot, ev)
        payload = {
            "logicalEquivalences": [list(p) for p in report.logical_equivalences],
            "databaseEquivalences": [list(p) for p in report.database_equivalences],
            "logicalImplications": [list(p) for p in report.logical_implications],
            "databaseImplications": [list(p) for p in report.database_implications],
        }
        lines = []
        for title, pairs in (
            ("logical equivalences", report.logical_equivalences),
            ("database equivalences", report.database_equivalences),
            ("logical implications", report.logical_implications),
            ("database implications", report.database_implications),
        ):
            lines.append(f"{title}:")
            lines.extend(f"  {a} -> {b}" if "implication" in title else f"  {a} = {b}" for a, b in pairs)
        _emit(args, payload, lines)
        return 0

    if args.command == "suggest-rules":
        suggestions = hy.suggest_rules(snapshot, ev)
        payload = {
            "suggestions": [
                {"context": s.context, "antecedent": s.antecedent, "consequent": s.consequent}
                for s in suggestions
            ]
        }
        lines = [
            f"in {s.context or 'any'}: {s.antecedent} -> {s.consequent}" for s in suggestions
        ]
        _emit(args, payload, lines or ["no suggestions"])
        return 0

    if args.command == "summarize":
        groups = hy.summarize(args.attr, snapshot)
        payload = {"attr": args.attr, "groups": []}
        lines = [f"{args.attr}  count  aggregates"]
        for g in groups:
            aggs = {
                other: {
                    fn: (_frac(v) if isinstance(v, Fraction) else v) for fn, v in stats.items()
                }
                for other, stats in g.aggregates
            }
            payload["groups"].append(
                {"value": doc.encode_value(g.value), "count": g.count, "aggregates": aggs}
            )
            rendered = "; ".join(
                f"{other}: " + ", ".join(f"{fn}={val}" for fn, val in stats.items())
                for other, stats in aggs.items()
            )
            lines.append(f"{sx.print_value(g.value)}  {g.count}  {rendered}")
        _emit(args, payload, lines)
        return 0

    if args.command == "constrain":
        constraints = [pb.parse_constraint(t) for t in args.constraints]
        report = pb.apply_constraints(constraints, store)
        if args.store:
            doc.save(store, args.store)
        payload = {
            "added": [{"oid": str(o), "home": h} for o, h in report.added],
            "moved": [{"oid": str(o), "from": a, "to": b} for o, a, b in report.moved],
            "perNodeDelta": report.per_node_delta,
            "satisfaction": [
                {"constraint": t, "satisfied": ok} for t, ok in report.satisfaction
            ],
        }
        lines = [f"added {len(report.added)} virtual objects, moved {len(report.moved)}"]
        lines += [f"  +{n} at {node}" for node, n in sorted(report.per_node_delta.items())]
        lines += [
            f"  {t}: {'satisfied' if ok else 'VIOLATED'}" for t, ok in report.satisfaction
        ]
        _emit(args, payload, lines)
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
