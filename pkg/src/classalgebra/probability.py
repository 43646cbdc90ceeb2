"""Probability algebra over extents and the virtual-object machinery.

Probabilities are exact relative frequencies: |trueSet| over the total
oid count, real and virtual objects alike.  Belief intervals are
[fraction true, 1 - fraction false], collapsing to a point when nothing
is unknown.

Conditional and marginal frequency constraints are satisfied by adding
synthetic "virtual" objects to the intersection node (for >=-type) or to
the condition node (for <=-type), preferring to pull spare virtual
objects down from ancestor nodes before allocating fresh ones.
Constraint sets that could pump each other forever (Types 1-4) are
rejected up front.  Counts are recomputed exactly from the ledger after
every change, and every allocation size is the smallest integer that
satisfies its local inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Dict, List, Optional, Sequence, Set, Tuple

from . import normalize as nz
from . import syntax as sx
from .errors import (
    ConstraintValidationError,
    EmptyUniverseError,
    UnsatisfiableError,
)
from .evaluate import Evaluator
from .model import Oid, Snapshot, Store

LOWER_OPS = (">", ">=")
UPPER_OPS = ("<", "<=")


# ---------------------------------------------------------------------------
# Probabilities of expressions


def probability(expr, snapshot: Snapshot, evaluator: Optional[Evaluator] = None) -> Fraction:
    ev = evaluator or Evaluator(snapshot)
    universe = snapshot.universe()
    if not universe:
        raise EmptyUniverseError("no objects: probability is undefined")
    result = ev.extent(expr)
    return Fraction(len(result.true_set), len(universe))


def belief_interval(expr, snapshot: Snapshot, evaluator: Optional[Evaluator] = None) -> Tuple[Fraction, Fraction]:
    ev = evaluator or Evaluator(snapshot)
    universe = snapshot.universe()
    if not universe:
        raise EmptyUniverseError("no objects: belief interval is undefined")
    result = ev.extent(expr)
    n = len(universe)
    return Fraction(len(result.true_set), n), 1 - Fraction(len(result.false_set), n)


@dataclass(frozen=True)
class StructuralCheck:
    kind: str
    equation: str
    lhs: Fraction
    rhs: Fraction
    satisfied: bool


def translate_structural(kind: str, a, b, snapshot: Snapshot,
                         evaluator: Optional[Evaluator] = None) -> StructuralCheck:
    """Independence / nonoverlap / subset as intersection-size equations.

    These are checkable assertions, not constraints the virtual-object
    algorithm enforces: integer additions cannot generally solve them.
    """
    ev = evaluator or Evaluator(snapshot)
    n = Fraction(len(snapshot.universe()))
    n_a = Fraction(len(ev.extent(a).true_set))
    n_b = Fraction(len(ev.extent(b).true_set))
    both = sx.And(_as_cond(a), _as_cond(b))
    n_ab = Fraction(len(ev.extent(both).true_set))
    if kind == "indep":
        return StructuralCheck(kind, "|A&B|*N = |A|*|B|", n_ab * n, n_a * n_b, n_ab * n == n_a * n_b)
    if kind == "nonoverlap":
        return StructuralCheck(kind, "|A&B| = 0", n_ab, Fraction(0), n_ab == 0)
    if kind == "subset":
        return StructuralCheck(kind, "|A&B| = |A|", n_ab, n_a, n_ab == n_a)
    raise ValueError(f"unknown structural constraint {kind!r}")


def _as_cond(expr) -> sx.WhereCond:
    if isinstance(expr, str):
        expr = sx.parse_class_expr(expr)
    if nz._is_class_expr(expr):
        return sx.Membership((), expr)
    return expr


# ---------------------------------------------------------------------------
# Probability constraints


@dataclass(frozen=True)
class ProbConstraint:
    """Pr(A|B) op bound, or Pr(A) op bound when ``b`` is None.

    Only strict/non-strict one-sided bounds in (0,1) are accepted;
    equality and disjunctive constraints are rejected outright.
    """

    a: sx.ClassExpr
    b: Optional[sx.ClassExpr]
    op: str
    bound: Fraction

    def __post_init__(self):
        if self.op not in LOWER_OPS + UPPER_OPS:
            raise ConstraintValidationError(
                [(0, f"operator {self.op!r} not permitted (equality constraints are rejected)")]
            )
        if not (0 < self.bound < 1):
            raise ConstraintValidationError(
                [(0, f"bound {self.bound} outside the open interval (0,1)")]
            )

    @property
    def is_lower(self) -> bool:
        return self.op in LOWER_OPS

    def render(self) -> str:
        body = sx.print_class_expr(self.a)
        if self.b is not None:
            body += "|" + sx.print_class_expr(self.b)
        return f"Pr({body}) {self.op} {sx.print_value(self.bound)}"


def parse_constraint(text: str) -> ProbConstraint:
    a, b, op, bound = sx.parse_prob_constraint_parts(text)
    return ProbConstraint(a, b, op, bound)


@dataclass(frozen=True)
class LabeledEdge:
    """Edge e(A&B, B) from the constraint labeling step."""

    constraint: ProbConstraint
    from_node: str  # rendered sdnf of A&B
    to_node: str  # rendered sdnf of B
    direction: str  # "up" for >=-type, "down" for <=-type

    def tail_head(self) -> Tuple[str, str]:
        """Traversal direction of the arrow label."""
        if self.direction == "up":
            return self.from_node, self.to_node
        return self.to_node, self.from_node


def _label_edges(constraints: Sequence[ProbConstraint], resolver, budget) -> List[LabeledEdge]:
    edges = []
    for c in constraints:
        b_expr = c.b if c.b is not None else sx.ClassName("any")
        ab = nz.sdnf(sx.Intersection(c.a, b_expr), resolver, budget)
        b = nz.sdnf(b_expr, resolver, budget)
        edges.append(
            LabeledEdge(c, ab.render(), b.render(), "up" if c.is_lower else "down")
        )
    return edges


def validate_constraints(
    constraints: Sequence[ProbConstraint],
    resolver=nz._no_classes,
    budget: nz.NormalizeBudget = nz.DEFAULT_BUDGET,
) -> List[Tuple[int, str]]:
    """Violations of the four forbidden patterns; empty means valid."""
    forms = []
    for c in constraints:
        b_expr = c.b if c.b is not None else sx.ClassName("any")
        forms.append(
            (c, nz.sdnf(c.a, resolver, budget), nz.sdnf(b_expr, resolver, budget))
        )
    violations: List[Tuple[int, str]] = []
    for i in range(len(forms)):
        ci, ai, bi = forms[i]
        for j in range(i + 1, len(forms)):
            cj, aj, bj = forms[j]
            pair = f"{ci.render()!r} with {cj.render()!r}"
            if ci.is_lower and cj.is_lower:
                if ai.render() == bj.render() and bi.render() == aj.render():
                    violations.append((1, f"mutual lower-bounded conditionals: {pair}"))
                elif bi.render() == bj.render() and ai.render() != aj.render():
                    violations.append(
                        (2, f"two lower-bounded conditionals share condition class: {pair}")
                    )
            if ai.render() == aj.render() and bi.render() == bj.render():
                if ci.is_lower != cj.is_lower:
                    violations.append((3, f"conditional bounded on both sides: {pair}"))
    violations.extend(_type4_violations(forms, budget))
    return violations


def _type4_violations(forms, budget) -> List[Tuple[int, str]]:
    edges: List[LabeledEdge] = []
    node_forms: Dict[str, nz.Sdnf] = {}
    for c, a_form, b_form in forms:
        ab = nz.set_ops(a_form, b_form, "*", budget)
        node_forms[ab.render()] = ab
        node_forms[b_form.render()] = b_form
        edges.append(
            LabeledEdge(c, ab.render(), b_form.render(), "up" if c.is_lower else "down")
        )

    graph: Dict[str, Set[str]] = {k: set() for k in node_forms}
    keys = list(node_forms)
    for u in keys:
        for v in keys:
            if u != v and nz.logically_implies(node_forms[u], node_forms[v]):
                graph[u].add(v)  # ISA edges point upward
    for e in edges:
        tail, head = e.tail_head()
        graph.setdefault(tail, set()).add(head)

    def reachable(src: str, dst: str) -> bool:
        seen = {src}
        stack = [src]
        while stack:
            node = stack.pop()
            if node == dst:
                return True
            for nxt in graph.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    out = []
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            e1, e2 = edges[i], edges[j]
            ends1 = {e1.from_node, e1.to_node}
            ends2 = {e2.from_node, e2.to_node}
            if ends1 & ends2:
                continue  # connected labeled edges are permitted
            t1, h1 = e1.tail_head()
            t2, h2 = e2.tail_head()
            if reachable(h1, t2) and reachable(h2, t1):
                out.append(
                    (4, f"cycle through disconnected labeled edges: "
                        f"{e1.constraint.render()!r} and {e2.constraint.render()!r}")
                )
    return out


# ---------------------------------------------------------------------------
# Closed-form counts


def needed_lower(bound: Fraction, n_b: int, n_ab: int, op: str = ">=") -> int:
    """Smallest m with (|A&B|+m)/(|B|+m) satisfying a lower constraint."""
    if n_b <= 0:
        return 0
    denom = 1 - bound
    estimate = ceil(n_b * bound / denom - n_ab / denom)
    return _adjust_count(estimate, lambda m: _ratio_ok(n_ab + m, n_b + m, op, bound))


def needed_upper(bound: Fraction, n_b: int, n_ab: int, op: str = "<=") -> int:
    """Smallest m with |A&B|/(|B|+m) satisfying an upper constraint."""
    estimate = ceil(n_ab / bound - n_b)
    return _adjust_count(estimate, lambda m: _ratio_ok(n_ab, n_b + m, op, bound))


def cascade_count(bound: Fraction, n_ab_old: int, n_x: int, m: int, op: str = ">=") -> int:
    """Smallest t restoring (|X|+t)/(|A&B|+m) after A&B grew by m.

    The result never exceeds m, so the just-added virtual objects always
    suffice to move down; a larger t signals a constraint set that
    validation should have rejected.
    """
    estimate = ceil(bound * n_ab_old - n_x + bound * m)
    t = _adjust_count(estimate, lambda t: _ratio_ok(n_x + t, n_ab_old + m, op, bound))
    if t > m:
        raise UnsatisfiableError(
            f"cascade needs {t} objects but only {m} were added; invalid constraint set"
        )
    return t


def _adjust_count(estimate: int, ok) -> int:
    m = max(0, estimate)
    while m > 0 and ok(m - 1):
        m -= 1
    guard = 0
    while not ok(m):
        m += 1
        guard += 1
        if guard > 1_000_000:
            raise UnsatisfiableError("no satisfying count exists")
    return m


def _ratio_ok(num: int, den: int, op: str, bound: Fraction) -> bool:
    if den == 0:
        return True  # empty condition class: nothing to constrain
    ratio = Fraction(num, den)
    if op == ">":
        return ratio > bound
    if op == ">=":
        return ratio >= bound
    if op == "<":
        return ratio < bound
    return ratio <= bound


# ---------------------------------------------------------------------------
# The bottom-up addition algorithm


@dataclass
class ApplyReport:
    added: List[Tuple[Oid, str]] = field(default_factory=list)  # (oid, home)
    moved: List[Tuple[Oid, str, str]] = field(default_factory=list)
    satisfaction: List[Tuple[str, bool]] = field(default_factory=list)
    per_node_delta: Dict[str, int] = field(default_factory=dict)

    @property
    def total_added(self) -> int:
        return len(self.added)


class _Counter:
    """Exact node counts against the store's current state."""

    def __init__(self, store: Store, budget):
        self.store = store
        self.budget = budget
        self._revision = -1
        self._ev: Optional[Evaluator] = None
        self._forms: Dict[str, nz.Sdnf] = {}

    def form(self, render: str) -> nz.Sdnf:
        form = self._forms.get(render)
        if form is None:
            form = nz.parse_sdnf_text(render)
            self._forms[render] = form
        return form

    def evaluator(self) -> Evaluator:
        if self._ev is None or self._revision != self.store.revision:
            self._ev = Evaluator(self.store.snapshot(), self.budget)
            self._revision = self.store.revision
        return self._ev

    def count(self, render: str) -> int:
        return len(self.evaluator().extent(self.form(render)).true_set)


def _edge_satisfied(edge: LabeledEdge, counter: _Counter) -> bool:
    n_ab = counter.count(edge.from_node)
    n_b = counter.count(edge.to_node)
    return _ratio_ok(n_ab, n_b, edge.constraint.op, edge.constraint.bound)


def apply_constraints(
    constraints: Sequence[ProbConstraint],
    store: Store,
    budget: nz.NormalizeBudget = nz.DEFAULT_BUDGET,
    max_iterations: Optional[int] = None,
) -> ApplyReport:
    """Add (or move) virtual objects until every constraint holds.

    Unsatisfied constraints are processed bottom-up over their nodes'
    implication order; lower bounds fill the intersection node and then
    re-balance previously modified lower edges below it; upper bounds fill
    the condition node.  After every change all edges are re-checked and
    newly unsatisfied ones pushed back on the stack.

    Converging sets settle after one or two passes per edge; the iteration
    ceiling (default 8 per edge plus 8) exists for constraint combinations
    that pump each other through a shared denominator, which the four
    validation patterns cannot always rule out.
    """
    violations = validate_constraints(constraints, store.resolver, budget)
    if violations:
        raise ConstraintValidationError(violations)

    edges = _label_edges(constraints, store.resolver, budget)
    if max_iterations is None:
        max_iterations = 8 * len(edges) + 8
    counter = _Counter(store, budget)
    modified: Set[int] = set()
    before_nodes = store.ledger.per_node()
    report = ApplyReport()

    order = _bottom_up_order(edges, counter)
    stack: List[int] = [i for i in reversed(order) if not _edge_satisfied(edges[i], counter)]

    iterations = 0
    while stack:
        iterations += 1
        if iterations > max_iterations:
            raise UnsatisfiableError(
                "iteration ceiling reached; constraint validation missed a pumping cycle"
            )
        idx = stack.pop()
        edge = edges[idx]
        if _edge_satisfied(edge, counter):
            continue
        if edge.direction == "up":
            _process_lower(edge, idx, edges, modified, counter, report)
        else:
            _process_upper(edge, idx, modified, counter, report)
        if not _edge_satisfied(edge, counter):
            raise UnsatisfiableError(
                f"{edge.constraint.render()!r} remains unsatisfied after its "
                "exact placement; the constraint set cannot be satisfied"
            )
        for i, other in enumerate(edges):
            if i not in stack and not _edge_satisfied(other, counter):
                stack.append(i)

    for edge in edges:
        report.satisfaction.append((edge.constraint.render(), _edge_satisfied(edge, counter)))
    store.ledger.constraints_applied.extend(c.render() for c in constraints)

    after_nodes = store.ledger.per_node()
    for node in set(before_nodes) | set(after_nodes):
        delta = after_nodes.get(node, 0) - before_nodes.get(node, 0)
        if delta:
            report.per_node_delta[node] = delta
    return report


def _bottom_up_order(edges: Sequence[LabeledEdge], counter: _Counter) -> List[int]:
    """Topological order of constraint indices, most specific start node first."""
    starts = [
        (e.from_node if e.direction == "up" else e.to_node) for e in edges
    ]
    remaining = list(range(len(edges)))
    out: List[int] = []
    while remaining:
        def is_minimal(i: int) -> bool:
            fi = counter.form(starts[i])
            for j in remaining:
                if j == i or starts[j] == starts[i]:
                    continue
                fj = counter.form(starts[j])
                if nz.logically_implies(fj, fi) and not nz.logically_implies(fi, fj):
                    return False
            return True

        pick = min(
            (i for i in remaining if is_minimal(i)),
            key=lambda i: (starts[i], i),
            default=remaining[0],
        )
        out.append(pick)
        remaining.remove(pick)
    return out


def _counts_in(home: str, node_form: nz.Sdnf, counter: _Counter) -> bool:
    """Would a virtual object homed at ``home`` be counted in the node?

    Mirrors the evaluator's rule: the home's representative (first) prime
    implicant must satisfy some conjunct of the node form under the
    conservative-false atom valuation.
    """
    home_form = counter.form(home)
    if not home_form.conjuncts:
        return False
    rep = home_form.conjuncts[0]
    for conjunct in node_form.conjuncts:
        ok = True
        for lit in conjunct.literals:
            holds = nz._entails_literal(rep.literals, nz.Literal(lit.atom, False))
            if lit.neg:
                holds = not holds
            if not holds:
                ok = False
                break
        if ok:
            return True
    return False


def _ancestor_donors(node: str, counter: _Counter, store: Store) -> List[Oid]:
    """Movable virtual objects homed strictly above ``node``: moving them
    down must actually add to the node's count, so objects the node already
    counts are excluded.  Nearest homes first."""
    node_form = counter.form(node)
    homes: Dict[str, List[Oid]] = {}
    for v in store.ledger.allocations:
        if v.home == node:
            continue
        home_form = counter.form(v.home)
        if nz.logically_implies(node_form, home_form) and not _counts_in(
            v.home, node_form, counter
        ):
            homes.setdefault(v.home, []).append(v.oid)

    def depth_key(home: str):
        form = counter.form(home)
        above = sum(
            1
            for other in homes
            if other != home and nz.logically_implies(form, counter.form(other))
        )
        return (above, home)  # fewer homes above it = higher; prefer nearest (lowest)

    ordered = sorted(homes, key=lambda h: (-depth_key(h)[0], h))
    out: List[Oid] = []
    for home in ordered:
        out.extend(sorted(homes[home]))
    return out


def _place_virtuals(node: str, m: int, counter: _Counter, store: Store, report: ApplyReport):
    if counter.form(node).is_false:
        raise UnsatisfiableError(
            "no number of virtual objects can satisfy a constraint on the empty class"
        )
    donors = _ancestor_donors(node, counter, store)
    moved = 0
    for oid in donors[:m]:
        old_home = next(v.home for v in store.ledger.allocations if v.oid == oid)
        store.move_virtual(oid, node)
        report.moved.append((oid, old_home, node))
        moved += 1
    for _ in range(m - moved):
        oid = store.allocate_virtual(node)
        report.added.append((oid, node))


def _process_lower(edge, idx, edges, modified, counter, report):
    n_ab = counter.count(edge.from_node)
    n_b = counter.count(edge.to_node)
    m = needed_lower(edge.constraint.bound, n_b, n_ab, edge.constraint.op)
    modified.add(idx)
    if m == 0:
        return
    _place_virtuals(edge.from_node, m, counter, counter.store, report)
    _cascade_down(edge.from_node, m, edges, modified, counter, report)


def _process_upper(edge, idx, modified, counter, report):
    n_ab = counter.count(edge.from_node)
    n_b = counter.count(edge.to_node)
    m = needed_upper(edge.constraint.bound, n_b, n_ab, edge.constraint.op)
    modified.add(idx)
    if m == 0:
        return
    # The added objects must land inside B but outside A&B, or they raise
    # the numerator along with the denominator and the ratio never drops.
    home = edge.to_node
    if _counts_in(home, counter.form(edge.from_node), counter):
        diff = nz.set_ops(counter.form(edge.to_node), counter.form(edge.from_node), "-")
        if diff.is_false:
            raise UnsatisfiableError(
                f"cannot lower {edge.constraint.render()!r}: every member of the "
                "condition class satisfies the bounded class"
            )
        home = diff.render()
        counter.form(home)  # prime the cache
    _place_virtuals(home, m, counter, counter.store, report)


def _cascade_down(node: str, added: int, edges, modified, counter, report):
    """Re-balance modified lower edges conditioned on a node that grew."""
    queue: List[Tuple[str, int]] = [(node, added)]
    while queue:
        grown, delta = queue.pop(0)
        for i in sorted(modified):
            e = edges[i]
            if e.direction != "up" or e.to_node != grown:
                continue
            if _edge_satisfied(e, counter):
                continue
            n_ab_now = counter.count(e.to_node)
            n_x = counter.count(e.from_node)
            t = cascade_count(
                e.constraint.bound, n_ab_now - delta, n_x, delta, e.constraint.op
            )
            if t == 0:
                continue
            target_form = counter.form(e.from_node)
            movable = [
                v.oid
                for v in counter.store.ledger.allocations
                if v.home == grown and not _counts_in(v.home, target_form, counter)
            ]
            if len(movable) < t:
                raise UnsatisfiableError(
                    f"cascade needs {t} virtual objects at {grown!r} but only "
                    f"{len(movable)} are homed there"
                )
            for oid in sorted(movable)[:t]:
                counter.store.move_virtual(oid, e.from_node)
                report.moved.append((oid, grown, e.from_node))
            queue.append((e.from_node, t))
