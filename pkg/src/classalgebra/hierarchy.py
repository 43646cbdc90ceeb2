"""ISA hierarchy and reports for a database state.

Classes whose normal forms value every object identically (same ternary
signature) merge into one hierarchy node; edges follow true-extent
containment, Hasse-reduced, with a synthetic top ("any") and bottom
("empty").  An edge is *logical* when some member intent of the child
derives the parent's by propositional reasoning, and *database-only*
when the containment merely happens to hold for the current objects —
which the reports surface as a proof worth attempting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import normalize as nz
from . import syntax as sx
from .errors import EmptyOidSetError, UnknownAttributeError
from .evaluate import Evaluator, aggregate
from .model import Oid, Snapshot
from .ternary import FALSE, TRUE, UNKNOWN

logically_implies = nz.logically_implies
logically_equivalent = nz.logically_equivalent


@dataclass(frozen=True)
class HierarchyNode:
    members: Tuple[str, ...]  # class names sharing one behavior
    intent: nz.Sdnf  # canonical: least member rendering
    signature: Tuple[int, ...]  # per-oid ternary values over the universe
    extent_counts: Tuple[int, int, int]  # (true, false, unknown)

    @property
    def key(self) -> str:
        return self.intent.render()


@dataclass(frozen=True)
class HierarchyEdge:
    child: str  # node key
    parent: str
    basis: str  # "logical" | "databaseOnly"


@dataclass(frozen=True)
class ImplicationReport:
    logical_equivalences: Tuple[Tuple[str, str], ...]
    database_equivalences: Tuple[Tuple[str, str], ...]
    logical_implications: Tuple[Tuple[str, str], ...]
    database_implications: Tuple[Tuple[str, str], ...]


def build_hierarchy(snapshot: Snapshot, evaluator: Optional[Evaluator] = None):
    """Nodes by signature merging, edges by true-extent containment."""
    ev = evaluator or Evaluator(snapshot)
    universe = snapshot.universe()
    n = len(universe)

    by_signature: Dict[Tuple[int, ...], List[str]] = {}
    forms: Dict[str, nz.Sdnf] = dict(snapshot.classes)
    forms["any"] = nz.TRUE_SDNF
    forms["empty"] = nz.FALSE_SDNF
    for name, form in forms.items():
        sig = tuple(int(ev.sdnf_value(form, oid)) for oid in universe)
        by_signature.setdefault(sig, []).append(name)

    nodes: List[HierarchyNode] = []
    for sig, names in by_signature.items():
        names.sort()
        intent = min((forms[m] for m in names), key=lambda f: f.render())
        counts = (sig.count(int(TRUE)), sig.count(int(FALSE)), sig.count(int(UNKNOWN)))
        nodes.append(HierarchyNode(tuple(names), intent, sig, counts))
    nodes.sort(key=lambda nd: nd.key)

    def true_oids(node: HierarchyNode):
        return frozenset(o for o, v in zip(universe, node.signature) if v == int(TRUE))

    extents = {nd.key: true_oids(nd) for nd in nodes}
    contains: Dict[str, set] = {nd.key: set() for nd in nodes}
    for child in nodes:
        for parent in nodes:
            if child is parent:
                continue
            if extents[child.key] < extents[parent.key]:
                contains[child.key].add(parent.key)

    edges: List[HierarchyEdge] = []
    by_key = {nd.key: nd for nd in nodes}
    for child_key, parents in contains.items():
        for parent_key in parents:
            # Hasse reduction: skip edges implied through an intermediate node.
            if any(parent_key in contains[mid] for mid in parents if mid != parent_key):
                continue
            basis = "databaseOnly"
            child, parent = by_key[child_key], by_key[parent_key]
            if any(
                logically_implies(forms[a], forms[b])
                for a in child.members
                for b in parent.members
            ):
                basis = "logical"
            edges.append(HierarchyEdge(child_key, parent_key, basis))
    edges.sort(key=lambda e: (e.child, e.parent))
    return nodes, edges


def implication_report(snapshot: Snapshot, evaluator: Optional[Evaluator] = None) -> ImplicationReport:
    ev = evaluator or Evaluator(snapshot)
    names = sorted(snapshot.classes)
    true_sets = {
        name: frozenset(ev.extent(snapshot.classes[name]).true_set) for name in names
    }
    log_eq, db_eq, log_imp, db_imp = [], [], [], []
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            if logically_equivalent(snapshot.classes[a], snapshot.classes[b]):
                log_eq.append((a, b))
            if true_sets[a] == true_sets[b]:
                db_eq.append((a, b))
    for a in names:
        for b in names:
            if a == b:
                continue
            if logically_implies(snapshot.classes[a], snapshot.classes[b]):
                log_imp.append((a, b))
            if true_sets[a] <= true_sets[b]:
                db_imp.append((a, b))
    return ImplicationReport(tuple(log_eq), tuple(db_eq), tuple(log_imp), tuple(db_imp))


# ---------------------------------------------------------------------------
# Descriptions of object sets


def class_vocabulary(snapshot: Snapshot) -> List[sx.BasicPredicate]:
    """All atoms occurring in any defined class's normal form."""
    atoms: Dict[str, sx.BasicPredicate] = {}
    for form in snapshot.classes.values():
        for conjunct in form.conjuncts:
            for lit in conjunct.literals:
                atoms[sx.print_predicate(lit.atom)] = lit.atom
    return [atoms[k] for k in sorted(atoms)]


@dataclass(frozen=True)
class Description:
    conjunct: Tuple[str, ...]  # literal renderings, sorted
    per_class_membership: Tuple[Tuple[str, Fraction], ...]

    def render(self) -> str:
        return "&".join(self.conjunct) if self.conjunct else "true"


def describe(oids: Sequence[Oid], snapshot: Snapshot, evaluator: Optional[Evaluator] = None) -> Description:
    """Most specific conjunct true of every given object, simplified by
    dropping literals entailed by the rest; plus per-class membership."""
    if not oids:
        raise EmptyOidSetError("describe requires at least one oid")
    ev = evaluator or Evaluator(snapshot)
    oids = list(oids)
    literals: List[nz.Literal] = []
    for atom in class_vocabulary(snapshot):
        values = [ev.eval_predicate(atom, oid) for oid in oids]
        if all(v is TRUE for v in values):
            literals.append(nz.Literal(atom, False))
        elif all(v is FALSE for v in values):
            literals.append(nz.Literal(atom, True))
    reduced = nz.make_conjunct(literals)
    conjunct = tuple(l.text for l in reduced.literals) if reduced is not None else ()

    member = []
    total = len(oids)
    for name in sorted(snapshot.classes):
        true_set = frozenset(ev.extent(snapshot.classes[name]).true_set)
        inside = sum(1 for o in oids if o in true_set)
        member.append((name, Fraction(inside, total)))
    return Description(conjunct, tuple(member))


# ---------------------------------------------------------------------------
# Rule suggestions


@dataclass(frozen=True)
class RuleSuggestion:
    context: str  # node intent rendering
    antecedent: str  # literal rendering
    consequent: str
    note: str = "holds for the current database state"


def suggest_rules(snapshot: Snapshot, evaluator: Optional[Evaluator] = None) -> List[RuleSuggestion]:
    """Find node patterns P with sons P&r&s and P&~r where P&r&~s is empty.

    Then r -> s can be suggested for objects in P; database-state lemmas,
    not theorems.  Vacuous contexts (empty P extent) are suppressed.
    """
    ev = evaluator or Evaluator(snapshot)
    nodes, edges = build_hierarchy(snapshot, ev)
    by_key = {nd.key: nd for nd in nodes}
    children: Dict[str, List[HierarchyNode]] = {}
    for e in edges:
        children.setdefault(e.parent, []).append(by_key[e.child])

    out: List[RuleSuggestion] = []
    for parent_key, kids in children.items():
        parent = by_key[parent_key]
        if parent.extent_counts[0] == 0:
            continue
        if len(parent.intent.conjuncts) != 1:
            continue
        parent_lits = set(parent.intent.conjuncts[0].word)
        for a in kids:
            extras_a = _single_conjunct_extras(a, parent_lits)
            if extras_a is None or len(extras_a) != 2:
                continue
            for b in kids:
                extras_b = _single_conjunct_extras(b, parent_lits)
                if extras_b is None or len(extras_b) != 1:
                    continue
                neg = extras_b[0]
                positives = [l for l in extras_a if l.negated().text == neg.text]
                if not positives:
                    continue
                r = positives[0]
                s = [l for l in extras_a if l.text != r.text][0]
                witness = nz.make_conjunct(
                    list(parent.intent.conjuncts[0].literals) + [r, s.negated()]
                )
                if witness is not None:
                    counter = ev.extent(nz.sort_sdnf([witness]))
                    if counter.true_set:
                        continue
                out.append(RuleSuggestion(parent.key, r.text, s.text))
    out.sort(key=lambda s: (s.context, s.antecedent, s.consequent))
    return out


def _single_conjunct_extras(node: HierarchyNode, parent_lits) -> Optional[List[nz.Literal]]:
    if len(node.intent.conjuncts) != 1:
        return None
    conj = node.intent.conjuncts[0]
    if not parent_lits <= set(conj.word):
        return None
    return [l for l in conj.literals if l.text not in parent_lits]


# ---------------------------------------------------------------------------
# Attribute summaries


@dataclass(frozen=True)
class SummaryGroup:
    value: sx.Value
    count: int
    aggregates: Tuple[Tuple[str, Dict[str, object]], ...]  # attr -> {fn: value}


def summarize(attr: str, snapshot: Snapshot) -> List[SummaryGroup]:
    """Group objects by each value of ``attr`` (multi-valued objects land
    in several groups); per group, count plus aggregate functions of every
    other attribute (numeric aggregates only where values are numeric)."""
    groups: Dict[sx.Value, List[Oid]] = {}
    seen_attr = False
    for oid, rec in snapshot.objects.items():
        values = rec.get(attr)
        if not values:
            continue
        seen_attr = True
        for v in set(values):
            groups.setdefault(v, []).append(oid)
    if not seen_attr:
        raise UnknownAttributeError(f"no object defines attribute {attr!r}")

    other_attrs = sorted(
        {a for rec in snapshot.objects.values() for a in rec} - {attr}
    )
    out = []
    for value in sorted(groups, key=sx._value_sort_key):
        oids = sorted(groups[value])
        aggs = []
        for other in other_attrs:
            pooled: List[sx.Value] = []
            for oid in oids:
                pooled.extend(snapshot.objects[oid].get(other, ()))
            if not pooled:
                continue
            stats: Dict[str, object] = {"cnt": aggregate("cnt", pooled)}
            if all(not isinstance(v, str) for v in pooled):
                for fn in ("sum", "avg", "std", "min", "max"):
                    stats[fn] = aggregate(fn, pooled)
            aggs.append((other, stats))
        out.append(SummaryGroup(value, len(oids), tuple(aggs)))
    return out
