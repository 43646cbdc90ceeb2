"""In-memory object database.

Objects carry list-valued attributes; binary relations come in three
variants (explicit edge sets, implicit class relations as lazy
cross-products of two extents, and composites of other relations).
Classes are stored by name with their normal form, at most one name per
rendered form.

Mutations are serialized through a single writer lock and bump a
monotone revision counter; readers work on immutable ``Snapshot`` values,
so evaluation never observes a half-applied change.  Object ids are never
reused and are shared between real and virtual objects.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import normalize as nz
from . import syntax as sx
from .errors import (
    CyclicCompositeError,
    EmptyValueListError,
    NameClashError,
    UnknownOidError,
    UnknownRelationNameError,
)

Value = sx.Value


@dataclass(frozen=True, order=True)
class Oid:
    id: int
    kind: str = "real"  # "real" | "virtual"

    @property
    def is_virtual(self) -> bool:
        return self.kind == "virtual"

    def __str__(self):
        return f"{'v' if self.is_virtual else ''}{self.id}"


@dataclass(frozen=True)
class ExplicitRelation:
    name: str
    edges: frozenset  # of (Oid, Oid)


@dataclass(frozen=True)
class ClassRelation:
    name: str
    domain: sx.ClassExpr
    range: sx.ClassExpr


@dataclass(frozen=True)
class CompositeRelation:
    name: str
    path: Tuple[str, ...]


RelationDef = Union[ExplicitRelation, ClassRelation, CompositeRelation]


@dataclass(frozen=True)
class VirtualObject:
    oid: Oid
    home: str  # rendered Sdnf of the node whose membership it asserts


@dataclass
class VirtualLedger:
    """Synthetic objects added to satisfy probability constraints."""

    allocations: List[VirtualObject] = field(default_factory=list)
    movements: List[Tuple[Oid, str, str]] = field(default_factory=list)  # (oid, from, to)
    constraints_applied: List[str] = field(default_factory=list)

    def per_node(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for v in self.allocations:
            counts[v.home] = counts.get(v.home, 0) + 1
        return counts

    def copy(self) -> "VirtualLedger":
        return VirtualLedger(
            list(self.allocations), list(self.movements), list(self.constraints_applied)
        )


def coerce_value(v) -> Value:
    if isinstance(v, bool):
        raise TypeError("boolean attribute values are not supported")
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)  # exact binary expansion
    if isinstance(v, str):
        return v
    raise TypeError(f"unsupported attribute value {v!r}")


def _check_identifier(name: str, what: str):
    ok = (
        name
        and (name[0].isalpha() or name[0] == "_")
        and all(ch.isalnum() or ch == "_" for ch in name)
        and name not in sx.RESERVED_WORDS
        and name not in sx.BUILTIN_CLASSES
    )
    if not ok:
        raise NameClashError(f"invalid {what} name {name!r}")


@dataclass(frozen=True)
class Snapshot:
    """Immutable view of a store at one revision."""

    revision: int
    objects: Dict[Oid, Dict[str, Tuple[Value, ...]]]
    relations: Dict[str, RelationDef]
    classes: Dict[str, nz.Sdnf]
    virtuals: Tuple[VirtualObject, ...]

    def universe(self) -> List[Oid]:
        oids = list(self.objects) + [v.oid for v in self.virtuals]
        oids.sort()
        return oids

    def resolver(self, name: str):
        form = self.classes.get(name)
        return form

    def class_name_for(self, rendered: str) -> Optional[str]:
        for name, form in self.classes.items():
            if form.render() == rendered:
                return name
        return None


class Store:
    """Mutable store; one writer at a time, snapshot-isolated readers."""

    def __init__(self):
        self._lock = threading.RLock()
        self.revision = 0
        self._next_id = 1
        self.objects: Dict[Oid, Dict[str, List[Value]]] = {}
        self.relations: Dict[str, RelationDef] = {}
        self.classes: Dict[str, nz.Sdnf] = {}
        self._names_by_sdnf: Dict[str, str] = {}
        self.ledger = VirtualLedger()

    # -- plumbing -----------------------------------------------------------

    def _bump(self):
        self.revision += 1

    def _fresh_oid(self, kind: str) -> Oid:
        oid = Oid(self._next_id, kind)
        self._next_id += 1
        return oid

    def _require_object(self, oid: Oid) -> Dict[str, List[Value]]:
        rec = self.objects.get(oid)
        if rec is None:
            raise UnknownOidError(f"unknown or non-real oid {oid}")
        return rec

    def resolver(self, name: str):
        return self.classes.get(name)

    # -- objects --------------------------------------------------------------

    def create_object(self, attributes: Optional[Dict[str, Sequence]] = None) -> Oid:
        attributes = attributes or {}
        cleaned: Dict[str, List[Value]] = {}
        for attr, values in attributes.items():
            _check_identifier(attr, "attribute")
            values = list(values)
            if not values:
                raise EmptyValueListError(f"attribute {attr!r} has an empty value list")
            cleaned[attr] = [coerce_value(v) for v in values]
        with self._lock:
            oid = self._fresh_oid("real")
            self.objects[oid] = cleaned
            self._bump()
            return oid

    def delete_object(self, oid: Oid):
        with self._lock:
            self._require_object(oid)
            del self.objects[oid]
            for name, rel in list(self.relations.items()):
                if isinstance(rel, ExplicitRelation):
                    kept = frozenset(e for e in rel.edges if oid not in e)
                    if kept != rel.edges:
                        self.relations[name] = ExplicitRelation(name, kept)
            self._bump()

    def set_attribute(self, oid: Oid, attr: str, values: Sequence):
        """Replace the attribute's value list; an empty list removes it."""
        _check_identifier(attr, "attribute")
        with self._lock:
            rec = self._require_object(oid)
            values = [coerce_value(v) for v in values]
            if values:
                rec[attr] = values
            else:
                rec.pop(attr, None)
            self._bump()

    # -- relations --------------------------------------------------------------

    def add_relation_edge(self, name: str, source: Oid, target: Oid):
        _check_identifier(name, "relation")
        with self._lock:
            self._require_object(source)
            self._require_object(target)
            rel = self.relations.get(name)
            if rel is None:
                rel = ExplicitRelation(name, frozenset())
            elif not isinstance(rel, ExplicitRelation):
                raise NameClashError(f"relation {name!r} is not an explicit relation")
            self.relations[name] = ExplicitRelation(name, rel.edges | {(source, target)})
            self._bump()

    def define_relation(self, definition: RelationDef):
        _check_identifier(definition.name, "relation")
        with self._lock:
            if definition.name in self.relations:
                raise NameClashError(f"relation {definition.name!r} already defined")
            if isinstance(definition, ExplicitRelation):
                for s, t in definition.edges:
                    self._require_object(s)
                    self._require_object(t)
            if isinstance(definition, CompositeRelation):
                self._check_composite(definition)
            self.relations[definition.name] = definition
            self._bump()

    def _check_composite(self, definition: CompositeRelation):
        if not definition.path:
            raise CyclicCompositeError("composite relation path must be nonempty")

        def expand(name: str, trail: Tuple[str, ...]):
            if name in trail:
                raise CyclicCompositeError(
                    f"composite relation cycle through {name!r}"
                )
            rel = definition if name == definition.name else self.relations.get(name)
            if rel is None:
                raise UnknownRelationNameError(f"composite step {name!r} is undefined")
            if isinstance(rel, CompositeRelation):
                for step in rel.path:
                    expand(step, trail + (name,))

        expand(definition.name, ())

    # -- classes --------------------------------------------------------------

    def define_class(self, name: str, expression: Union[str, sx.ClassExpr]) -> nz.Sdnf:
        _check_identifier(name, "class")
        if isinstance(expression, str):
            expression = sx.parse_class_expr(expression)
        with self._lock:
            if name in self.classes:
                raise NameClashError(f"class {name!r} already defined")
            form = nz.sdnf(expression, self.resolver)
            rendered = form.render()
            clash = self._names_by_sdnf.get(rendered)
            if clash is not None:
                raise NameClashError(
                    f"normal form already named {clash!r}; at most one class name per form"
                )
            self.classes[name] = form
            self._names_by_sdnf[rendered] = name
            self._bump()
            return form

    # -- virtual objects --------------------------------------------------------

    def allocate_virtual(self, home: str) -> Oid:
        with self._lock:
            oid = self._fresh_oid("virtual")
            self.ledger.allocations.append(VirtualObject(oid, home))
            self._bump()
            return oid

    def move_virtual(self, oid: Oid, new_home: str):
        with self._lock:
            for i, v in enumerate(self.ledger.allocations):
                if v.oid == oid:
                    self.ledger.movements.append((oid, v.home, new_home))
                    self.ledger.allocations[i] = VirtualObject(oid, new_home)
                    self._bump()
                    return
            raise UnknownOidError(f"unknown virtual oid {oid}")

    def restore_virtual(self, oid_id: int, home: str):
        """Re-create a persisted virtual object with its original oid."""
        with self._lock:
            oid = Oid(oid_id, "virtual")
            self.ledger.allocations.append(VirtualObject(oid, home))
            self._next_id = max(self._next_id, oid_id + 1)
            self._bump()
            return oid

    def restore_object(self, oid_id: int, attributes: Dict[str, Sequence]) -> Oid:
        """Re-create a persisted object with its original oid."""
        with self._lock:
            oid = Oid(oid_id, "real")
            if oid in self.objects:
                raise NameClashError(f"duplicate oid {oid_id} in document")
            cleaned = {}
            for attr, values in attributes.items():
                _check_identifier(attr, "attribute")
                if not values:
                    raise EmptyValueListError(f"attribute {attr!r} has an empty value list")
                cleaned[attr] = [coerce_value(v) for v in values]
            self.objects[oid] = cleaned
            self._next_id = max(self._next_id, oid_id + 1)
            self._bump()
            return oid

    # -- snapshots --------------------------------------------------------------

    def snapshot(self) -> Snapshot:
        with self._lock:
            objects = {
                oid: {attr: tuple(vals) for attr, vals in rec.items()}
                for oid, rec in self.objects.items()
            }
            return Snapshot(
                revision=self.revision,
                objects=objects,
                relations=dict(self.relations),
                classes=dict(self.classes),
                virtuals=tuple(self.ledger.allocations),
            )
