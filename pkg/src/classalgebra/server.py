"""HTTP JSON API over one store.

Thin boundary: every handler parses, calls the library, serializes.
Engine failures map to 400 with a machine-readable code; write conflicts
(an ``If-Match`` revision precondition that no longer holds) map to 409.
Reads carry the revision they observed so clients can detect staleness.

Oids are serialized as strings ("7" real, "v12" virtual); exact rationals
as reduced fraction strings.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import document as doc
from . import hierarchy as hy
from . import probability as pb
from . import syntax as sx
from .errors import EngineError, StaleRevisionError, UnknownOidError
from .evaluate import Evaluator, ExtentResult
from .model import ClassRelation, CompositeRelation, ExplicitRelation, Oid, Store

DEFAULT_PAGE = 10_000


def _oid_text(oid: Oid) -> str:
    return f"v{oid.id}" if oid.is_virtual else str(oid.id)


def _frac_text(x: Fraction) -> str:
    return sx.print_value(Fraction(x))


def _page(oids, cursor: int, limit: int):
    window = [_oid_text(o) for o in oids[cursor : cursor + limit]]
    next_cursor = cursor + limit if cursor + limit < len(oids) else None
    return window, next_cursor


def _extent_payload(result: ExtentResult, cursor: int, limit: int) -> dict:
    true_page, true_next = _page(result.true_set, cursor, limit)
    false_page, false_next = _page(result.false_set, cursor, limit)
    unknown_page, unknown_next = _page(result.unknown_set, cursor, limit)
    next_cursors = [c for c in (true_next, false_next, unknown_next) if c is not None]
    return {
        "trueSet": true_page,
        "falseSet": false_page,
        "unknownSet": unknown_page,
        "counts": {
            "true": len(result.true_set),
            "false": len(result.false_set),
            "unknown": len(result.unknown_set),
        },
        "nextCursor": min(next_cursors) if next_cursors else None,
    }


def create_app(store: Optional[Store] = None) -> FastAPI:
    app = FastAPI(title="classalgebra", docs_url=None, redoc_url=None)
    app.state.store = store if store is not None else Store()

    def current_store() -> Store:
        return app.state.store

    @app.exception_handler(EngineError)
    async def engine_error_handler(_req: Request, exc: EngineError):
        status = 409 if isinstance(exc, StaleRevisionError) else 400
        body = {"code": exc.code, "message": exc.message}
        if exc.position is not None:
            body["position"] = exc.position
        return JSONResponse(status_code=status, content=body)

    def check_precondition(request: Request):
        expected = request.headers.get("if-match")
        if expected is not None and int(expected) != current_store().revision:
            raise StaleRevisionError(
                f"revision precondition {expected} does not match {current_store().revision}"
            )

    def parse_oid(raw) -> Oid:
        text = str(raw)
        if text.startswith("v"):
            return Oid(int(text[1:]), "virtual")
        return Oid(int(text))

    def attributes_payload(attributes: dict) -> dict:
        return {
            attr: [doc.decode_value(v) for v in values]
            for attr, values in attributes.items()
        }

    # -- health / revision ---------------------------------------------------

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.get("/revision")
    async def revision():
        return {"revision": current_store().revision}

    # -- objects ---------------------------------------------------------------

    @app.get("/objects")
    async def list_objects():
        snapshot = current_store().snapshot()
        return {
            "revision": snapshot.revision,
            "objects": [
                {
                    "oid": _oid_text(oid),
                    "attributes": {
                        a: [doc.encode_value(v) for v in vals]
                        for a, vals in sorted(snapshot.objects[oid].items())
                    },
                }
                for oid in sorted(snapshot.objects)
            ],
        }

    @app.post("/objects", status_code=201)
    async def create_object(request: Request):
        check_precondition(request)
        body = await request.json()
        oid = current_store().create_object(attributes_payload(body.get("attributes", {})))
        return {"oid": _oid_text(oid), "revision": current_store().revision}

    @app.get("/objects/{oid}")
    async def get_object(oid: str):
        snapshot = current_store().snapshot()
        record = snapshot.objects.get(parse_oid(oid))
        if record is None:
            raise UnknownOidError(f"unknown oid {oid}")
        return {
            "oid": oid,
            "attributes": {
                a: [doc.encode_value(v) for v in vals] for a, vals in sorted(record.items())
            },
            "revision": snapshot.revision,
        }

    @app.patch("/objects/{oid}")
    async def patch_object(oid: str, request: Request):
        check_precondition(request)
        body = await request.json()
        store = current_store()
        for attr, values in attributes_payload(body.get("attributes", {})).items():
            store.set_attribute(parse_oid(oid), attr, values)
        return {"oid": oid, "revision": store.revision}

    @app.delete("/objects/{oid}")
    async def delete_object(oid: str, request: Request):
        check_precondition(request)
        current_store().delete_object(parse_oid(oid))
        return {"revision": current_store().revision}

    # -- relations ---------------------------------------------------------------

    @app.post("/relations", status_code=201)
    async def define_relation(request: Request):
        check_precondition(request)
        body = await request.json()
        name = body["name"]
        variant = body.get("variant", "explicit")
        store = current_store()
        if variant == "explicit":
            edges = frozenset(
                (parse_oid(s), parse_oid(t)) for s, t in body.get("edges", ())
            )
            store.define_relation(ExplicitRelation(name, edges))
        elif variant == "class":
            store.define_relation(
                ClassRelation(
                    name,
                    sx.parse_class_expr(body["domain"]),
                    sx.parse_class_expr(body["range"]),
                )
            )
        elif variant == "composite":
            store.define_relation(CompositeRelation(name, tuple(body["path"])))
        else:
            raise EngineError(f"unknown relation variant {variant!r}")
        return {"name": name, "revision": store.revision}

    @app.post("/relations/{name}/edges", status_code=201)
    async def add_edges(name: str, request: Request):
        check_precondition(request)
        body = await request.json()
        store = current_store()
        for pair in body.get("edges", ()):
            store.add_relation_edge(name, parse_oid(pair[0]), parse_oid(pair[1]))
        return {"name": name, "revision": store.revision}

    @app.get("/relations")
    async def list_relations():
        snapshot = current_store().snapshot()
        out = []
        for name in sorted(snapshot.relations):
            rel = snapshot.relations[name]
            if isinstance(rel, ExplicitRelation):
                out.append(
                    {
                        "name": name,
                        "variant": "explicit",
                        "edges": sorted([_oid_text(s), _oid_text(t)] for s, t in rel.edges),
                    }
                )
            elif isinstance(rel, ClassRelation):
                out.append(
                    {
                        "name": name,
                        "variant": "class",
                        "domain": sx.print_class_expr(rel.domain),
                        "range": sx.print_class_expr(rel.range),
                    }
                )
            else:
                out.append({"name": name, "variant": "composite", "path": list(rel.path)})
        return {"revision": snapshot.revision, "relations": out}

    # -- classes ---------------------------------------------------------------

    @app.post("/classes", status_code=201)
    async def define_class(request: Request):
        check_precondition(request)
        body = await request.json()
        store = current_store()
        form = store.define_class(body["name"], body["expression"])
        snapshot = store.snapshot()
        result = Evaluator(snapshot).extent(form)
        return {
            "name": body["name"],
            "sdnf": form.render(),
            "extentCounts": {
                "true": len(result.true_set),
                "false": len(result.false_set),
                "unknown": len(result.unknown_set),
            },
            "revision": store.revision,
        }

    @app.get("/classes")
    async def list_classes():
        snapshot = current_store().snapshot()
        return {
            "revision": snapshot.revision,
            "classes": [
                {"name": name, "sdnf": snapshot.classes[name].render()}
                for name in sorted(snapshot.classes)
            ],
        }

    @app.get("/classes/{name}/extent")
    async def class_extent(name: str, cursor: int = 0, limit: int = DEFAULT_PAGE):
        snapshot = current_store().snapshot()
        form = snapshot.classes.get(name)
        if form is None:
            raise EngineError(f"unknown class {name!r}")
        payload = _extent_payload(Evaluator(snapshot).extent(form), cursor, limit)
        payload["revision"] = snapshot.revision
        payload["sdnf"] = form.render()
        return payload

    # -- queries ---------------------------------------------------------------

    @app.post("/query")
    async def query(request: Request):
        body = await request.json()
        cursor = int(body.get("cursor", 0))
        limit = int(body.get("limit", DEFAULT_PAGE))
        snapshot = current_store().snapshot()
        ev = Evaluator(snapshot)
        expr = sx.parse_class_expr(body["expression"])
        form = ev.sdnf_of(expr)
        payload = _extent_payload(ev.extent(form), cursor, limit)
        payload["sdnf"] = form.render()
        payload["revision"] = snapshot.revision
        lo, hi = pb.belief_interval(form, snapshot, ev)
        payload["probability"] = _frac_text(pb.probability(form, snapshot, ev))
        payload["beliefInterval"] = [_frac_text(lo), _frac_text(hi)]
        return payload

    # -- reports ---------------------------------------------------------------

    @app.get("/report/implications")
    async def implications():
        snapshot = current_store().snapshot()
        report = hy.implication_report(snapshot)
        return {
            "revision": snapshot.revision,
            "logicalEquivalences": [list(p) for p in report.logical_equivalences],
            "databaseEquivalences": [list(p) for p in report.database_equivalences],
            "logicalImplications": [list(p) for p in report.logical_implications],
            "databaseImplications": [list(p) for p in report.database_implications],
        }

    @app.post("/describe")
    async def describe_objects(request: Request):
        body = await request.json()
        snapshot = current_store().snapshot()
        oids = [parse_oid(o) for o in body.get("oids", ())]
        desc = hy.describe(oids, snapshot)
        return {
            "revision": snapshot.revision,
            "description": desc.render(),
            "literals": list(desc.conjunct),
            "perClassMembership": {
                name: _frac_text(frac) for name, frac in desc.per_class_membership
            },
        }

    @app.get("/hierarchy")
    async def hierarchy_graph():
        snapshot = current_store().snapshot()
        nodes, edges = hy.build_hierarchy(snapshot)
        return {
            "revision": snapshot.revision,
            "nodes": [
                {
                    "key": nd.key,
                    "members": list(nd.members),
                    "extentCounts": {
                        "true": nd.extent_counts[0],
                        "false": nd.extent_counts[1],
                        "unknown": nd.extent_counts[2],
                    },
                }
                for nd in nodes
            ],
            "edges": [
                {"child": e.child, "parent": e.parent, "basis": e.basis} for e in edges
            ],
        }

    @app.get("/report/rules")
    async def rules():
        snapshot = current_store().snapshot()
        return {
            "revision": snapshot.revision,
            "suggestions": [
                {
                    "context": s.context,
                    "antecedent": s.antecedent,
                    "consequent": s.consequent,
                    "note": s.note,
                }
                for s in hy.suggest_rules(snapshot)
            ],
        }

    @app.get("/summarize")
    async def summarize_attr(attr: str):
        snapshot = current_store().snapshot()
        groups = hy.summarize(attr, snapshot)
        payload = []
        for g in groups:
            aggs = {}
            for other, stats in g.aggregates:
                aggs[other] = {
                    fn: (_frac_text(v) if isinstance(v, Fraction) else v)
                    for fn, v in stats.items()
                }
            payload.append(
                {"value": doc.encode_value(g.value), "count": g.count, "aggregates": aggs}
            )
        return {"revision": snapshot.revision, "attr": attr, "groups": payload}

    # -- constraints ---------------------------------------------------------------

    @app.post("/constraints")
    async def validate(request: Request):
        body = await request.json()
        store = current_store()
        constraints = [pb.parse_constraint(t) for t in body.get("constraints", ())]
        violations = pb.validate_constraints(constraints, store.resolver)
        return {
            "valid": not violations,
            "violations": [{"type": t, "message": m} for t, m in violations],
            "revision": store.revision,
        }

    @app.post("/constraints/apply")
    async def apply(request: Request):
        check_precondition(request)
        body = await request.json()
        store = current_store()
        constraints = [pb.parse_constraint(t) for t in body.get("constraints", ())]
        report = pb.apply_constraints(constraints, store)
        return {
            "revision": store.revision,
            "added": [{"oid": _oid_text(o), "home": h} for o, h in report.added],
            "moved": [
                {"oid": _oid_text(o), "from": a, "to": b} for o, a, b in report.moved
            ],
            "perNodeDelta": report.per_node_delta,
            "satisfaction": [
                {"constraint": text, "satisfied": ok} for text, ok in report.satisfaction
            ],
        }

    return app


def serve(store: Store, port: int, host: str = "127.0.0.1"):
    """Run the API on a port; blocks until interrupted."""
    import uvicorn

    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")
