"""Ontology document persistence.

A document is canonical UTF-8 JSON: fixed key order, oid-sorted objects,
name-sorted relations and classes, and exact number encoding (numbers
travel as reduced fraction strings inside one-key objects so nothing is
ever rounded).  Loading then saving an untouched document is
byte-identical, and class expression texts re-parse to the stored class's
normal form.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import List

from . import normalize as nz
from . import syntax as sx
from .errors import DocumentParseError, IntegrityError, VersionMismatchError
from .model import (
    ClassRelation,
    CompositeRelation,
    ExplicitRelation,
    Oid,
    Store,
)

FORMAT_VERSION = 1


def encode_value(v: sx.Value):
    if isinstance(v, Fraction):
        return {"n": sx.print_value(v)}
    return v


def decode_value(raw) -> sx.Value:
    if isinstance(raw, str):
        return raw
    if isinstance(raw, dict) and set(raw) == {"n"}:
        return Fraction(raw["n"])
    raise DocumentParseError(f"bad value encoding {raw!r}")


def store_to_document(store: Store) -> dict:
    snapshot = store.snapshot()
    objects = []
    for oid in sorted(snapshot.objects):
        rec = snapshot.objects[oid]
        objects.append(
            {
                "oid": oid.id,
                "attributes": {
                    attr: [encode_value(v) for v in rec[attr]] for attr in sorted(rec)
                },
            }
        )
    relations = []
    for name in sorted(snapshot.relations):
        rel = snapshot.relations[name]
        if isinstance(rel, ExplicitRelation):
            relations.append(
                {
                    "name": name,
                    "variant": "explicit",
                    "edges": sorted([s.id, t.id] for s, t in rel.edges),
                }
            )
        elif isinstance(rel, ClassRelation):
            relations.append(
                {
                    "name": name,
                    "variant": "class",
                    "domain": sx.print_class_expr(rel.domain),
                    "range": sx.print_class_expr(rel.range),
                }
            )
        else:
            relations.append({"name": name, "variant": "composite", "path": list(rel.path)})
    classes = [
        {
            "name": name,
            "expression": sx.print_class_expr(nz.sdnf_to_class_expr(snapshot.classes[name])),
        }
        for name in sorted(snapshot.classes)
    ]
    ledger = store.ledger
    return {
        "formatVersion": FORMAT_VERSION,
        "objects": objects,
        "relations": relations,
        "classes": classes,
        "constraints": list(ledger.constraints_applied),
        "virtualLedger": {
            "allocations": sorted(
                ({"oid": v.oid.id, "home": v.home} for v in ledger.allocations),
                key=lambda a: a["oid"],
            ),
            "movements": [[oid.id, src, dst] for oid, src, dst in ledger.movements],
        },
    }


def document_to_store(doc: dict) -> Store:
    if not isinstance(doc, dict):
        raise DocumentParseError("document root must be an object")
    version = doc.get("formatVersion")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported formatVersion {version!r}")
    store = Store()
    for obj in doc.get("objects", ()):
        attributes = {
            attr: [decode_value(v) for v in values]
            for attr, values in obj.get("attributes", {}).items()
        }
        store.restore_object(int(obj["oid"]), attributes)
    for cls in doc.get("classes", ()):
        store.define_class(cls["name"], cls["expression"])
    composites: List[dict] = []
    for rel in doc.get("relations", ()):
        variant = rel.get("variant")
        name = rel["name"]
        if variant == "explicit":
            edges = set()
            for pair in rel.get("edges", ()):
                s, t = Oid(int(pair[0])), Oid(int(pair[1]))
                for end in (s, t):
                    if end not in store.objects:
                        raise IntegrityError(
                            f"relation {name!r} references missing oid {end.id}"
                        )
                edges.add((s, t))
            store.define_relation(ExplicitRelation(name, frozenset(edges)))
        elif variant == "class":
            store.define_relation(
                ClassRelation(
                    name,
                    sx.parse_class_expr(rel["domain"]),
                    sx.parse_class_expr(rel["range"]),
                )
            )
        elif variant == "composite":
            composites.append(rel)  # may reference relations defined later
        else:
            raise DocumentParseError(f"unknown relation variant {variant!r}")
    while composites:
        progressed = []
        for rel in composites:
            known = set(store.relations) | {r["name"] for r in composites}
            if all(step in known and step != rel["name"] for step in rel["path"]):
                if all(step in store.relations for step in rel["path"]):
                    store.define_relation(CompositeRelation(rel["name"], tuple(rel["path"])))
                    progressed.append(rel)
        if not progressed:
            # remaining composites reference each other or unknowns; let the
            # store's own checks produce the precise error
            rel = composites[0]
            store.define_relation(CompositeRelation(rel["name"], tuple(rel["path"])))
        composites = [r for r in composites if r not in progressed]
    ledger_doc = doc.get("virtualLedger", {})
    for alloc in ledger_doc.get("allocations", ()):
        store.restore_virtual(int(alloc["oid"]), alloc["home"])
    for move in ledger_doc.get("movements", ()):
        store.ledger.movements.append((Oid(int(move[0]), "virtual"), move[1], move[2]))
    store.ledger.constraints_applied.extend(doc.get("constraints", ()))
    return store


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save(store: Store, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(store_to_document(store)))


def load(path: str) -> Store:
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as ex:
        raise DocumentParseError(f"not valid JSON: {ex}") from ex
    return document_to_store(doc)
