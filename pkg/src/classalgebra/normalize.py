"""Reduction of class-algebra expressions to Sorted Disjunctive Normal Form.

The pipeline turns any class expression into a canonical, unique normal
form that doubles as the class's name:

1. rewrite the expression to ``any where <cond>`` form, inlining named
   classes and turning dotted subexpressions into membership atoms;
2. push negations down and distribute to a disjunction of conjuncts;
3. widen comparison intervals across conjunct pairs where one residual
   implies the other;
4. close the conjunct set under consensus (dual resolution) and delete
   subsumed conjuncts, with subsumption generalized to comparison chains
   on a shared attribute path (``age<30`` implies ``age<40``);
5. sort literals inside conjuncts and conjuncts as words.

Comparison atoms with a plain operator on the same path and constant type
form a "chain group"; each denotes a region of the constant domain (see
``regions``).  Entailment between literals, contradictions inside a
conjunct, and the consensus side conditions are all decided by region
inclusion under the existential reading of list-valued attributes: a
positive atom needs a witness value inside its region and outside every
region forbidden by a negated atom of the same group.  Operators fused
with ``~`` or ``-`` and containment/type/membership atoms are opaque:
distinct atoms are independent.

Worst-case consensus closure is exponential, so a configurable budget
bounds distinct atoms and intermediate conjunct counts; exceeding it
raises, never silently approximates.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from . import regions as rg
from . import syntax as sx
from .errors import (
    InliningCycleError,
    SizeBudgetExceededError,
    UnknownClassNameError,
)


@dataclass(frozen=True)
class NormalizeBudget:
    """Guard rails for the consensus closure."""

    max_atoms: int = 24
    max_conjuncts: int = 100_000


DEFAULT_BUDGET = NormalizeBudget()

# A resolver maps a class name to its stored Sdnf (or, for callers that
# keep raw definitions, a ClassExpr to be normalized on the fly), or None
# for unknown names.
Resolver = Callable[[str], Union["Sdnf", sx.ClassExpr, None]]


def _no_classes(name: str):
    return None


# ---------------------------------------------------------------------------
# Literals and conjuncts


class Literal:
    """An atom with a polarity; ordered and rendered by canonical text."""

    __slots__ = ("atom", "neg", "text", "chain", "region")

    def __init__(self, atom: sx.BasicPredicate, neg: bool):
        self.atom = atom
        self.neg = neg
        atom_text = sx.print_predicate(atom)
        self.text = ("~" + atom_text) if neg else atom_text
        info = _chain_info(atom)
        if info is None:
            self.chain = None
            self.region = None
        else:
            self.chain, self.region = info

    def negated(self) -> "Literal":
        return Literal(self.atom, not self.neg)

    def __eq__(self, other):
        return isinstance(other, Literal) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __repr__(self):
        return f"Literal({self.text!r})"


def _chain_info(atom: sx.BasicPredicate):
    """Chain-group key and region for plain comparison atoms, else None."""
    if isinstance(atom, sx.Compare):
        if atom.op not in sx.PLAIN_RELOPS:
            return None
        key = ("cmp", sx._attr_path_text(atom.path), isinstance(atom.constant, str))
        return key, _op_region(atom.op, atom.constant)
    if isinstance(atom, sx.AggregateCompare):
        if atom.op not in sx.PLAIN_RELOPS:
            return None
        key = ("agg", atom.aggr, sx._attr_path_text(atom.path), isinstance(atom.constant, str))
        return key, _op_region(atom.op, atom.constant)
    return None


def _op_region(op: str, c) -> rg.Interval:
    if op == "<":
        return rg.below(c, strict=True)
    if op == "<=":
        return rg.below(c, strict=False)
    if op == ">":
        return rg.above(c, strict=True)
    if op == ">=":
        return rg.above(c, strict=False)
    return rg.point(c)


class Conjunct:
    """A duplicate-free, internally reduced, sorted conjunction of literals.

    Construct through ``make_conjunct``; the empty conjunct denotes true.
    """

    __slots__ = ("literals", "word", "key", "groups", "_texts")

    def __init__(self, literals: Tuple[Literal, ...]):
        self.literals = literals
        self.word = tuple(l.text for l in literals)
        self.key = "&".join(self.word)
        self._texts = frozenset(self.word)
        groups: Dict[tuple, Tuple[List[Literal], List[rg.Interval]]] = {}
        for lit in literals:
            if lit.chain is None:
                continue
            pos, neg_regions = groups.setdefault(lit.chain, ([], []))
            if lit.neg:
                neg_regions.append(lit.region)
            else:
                pos.append(lit)
        self.groups = groups

    def has(self, lit: Literal) -> bool:
        return lit.text in self._texts

    def without(self, drop: Literal) -> List[Literal]:
        return [l for l in self.literals if l.text != drop.text]

    def __eq__(self, other):
        return isinstance(other, Conjunct) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Conjunct({self.key or 'true'!r})"


TRUE_CONJUNCT = Conjunct(())


def make_conjunct(literals: Iterable[Literal]) -> Optional[Conjunct]:
    """Build a reduced conjunct; None when it is contradictory (false)."""
    by_text: Dict[str, Literal] = {}
    for lit in literals:
        by_text[lit.text] = lit
    lits = sorted(by_text.values(), key=lambda l: l.text)

    # Exact complementary pair on an opaque atom.
    texts = set(by_text)
    for lit in lits:
        if lit.chain is None and not lit.neg and ("~" + lit.text) in texts:
            return None

    if _chain_contradiction(lits):
        return None

    lits = _intra_reduce(lits)
    return Conjunct(tuple(lits))


def _group_neg_regions(lits: Sequence[Literal], key) -> List[rg.Interval]:
    return [l.region for l in lits if l.chain == key and l.neg]


def _chain_contradiction(lits: Sequence[Literal]) -> bool:
    """A positive chain atom with no witness region left is unsatisfiable."""
    keys = {l.chain for l in lits if l.chain is not None}
    for key in keys:
        forbidden = _group_neg_regions(lits, key)
        if not forbidden:
            continue
        for l in lits:
            if l.chain == key and not l.neg and rg.is_subset(l.region, forbidden):
                return True
    return False


def _entails_literal(lits: Sequence[Literal], target: Literal) -> bool:
    """Does the conjunction of ``lits`` logically imply ``target``?"""
    for l in lits:
        if l.text == target.text:
            return True
    if target.chain is None:
        return False
    forbidden = _group_neg_regions(lits, target.chain)
    if target.neg:
        return rg.is_subset(target.region, forbidden)
    for l in lits:
        if l.chain == target.chain and not l.neg:
            if rg.is_subset(l.region, forbidden + [target.region]):
                # witness for l is confined to the target's region
                return True
    return False


def _intra_reduce(lits: List[Literal]) -> List[Literal]:
    """Drop literals implied by the rest; deterministic fixpoint."""
    changed = True
    while changed:
        changed = False
        for i, lit in enumerate(lits):
            rest = lits[:i] + lits[i + 1 :]
            if rest and _entails_literal(rest, lit):
                lits = rest
                changed = True
                break
    return lits


def conjunct_entails(c: Conjunct, d: Conjunct) -> bool:
    """True iff conjunct c logically implies conjunct d."""
    return all(_entails_literal(c.literals, lit) for lit in d.literals)


# ---------------------------------------------------------------------------
# SDNF


@dataclass(frozen=True)
class Sdnf:
    """Sorted disjunction of mutually unsubsumed conjuncts.

    ``conjuncts`` empty means false; a single empty conjunct means true.
    """

    conjuncts: Tuple[Conjunct, ...]

    @property
    def is_false(self) -> bool:
        return not self.conjuncts

    @property
    def is_true(self) -> bool:
        return len(self.conjuncts) == 1 and not self.conjuncts[0].literals

    def render(self) -> str:
        if self.is_false:
            return "false"
        if self.is_true:
            return "true"
        return " V ".join(c.key for c in self.conjuncts)

    def __str__(self):
        return self.render()


FALSE_SDNF = Sdnf(())
TRUE_SDNF = Sdnf((TRUE_CONJUNCT,))


def sort_sdnf(conjuncts: Sequence[Conjunct]) -> Sdnf:
    """Order literals within conjuncts (already held sorted) and conjuncts
    as words, dropping duplicates."""
    if any(not c.literals for c in conjuncts):
        return TRUE_SDNF
    unique = {c.key: c for c in conjuncts}
    ordered = sorted(unique.values(), key=lambda c: c.word)
    return Sdnf(tuple(ordered))


def sdnf_to_cond(form: Sdnf) -> sx.WhereCond:
    if form.is_false:
        return sx.FALSE_COND
    if form.is_true:
        return sx.TRUE_COND
    disjuncts = []
    for c in form.conjuncts:
        parts = [sx.Not(l.atom) if l.neg else l.atom for l in c.literals]
        node = parts[0]
        for p in parts[1:]:
            node = sx.And(node, p)
        disjuncts.append(node)
    node = disjuncts[0]
    for d in disjuncts[1:]:
        node = sx.Or(node, d)
    return node


def sdnf_to_class_expr(form: Sdnf) -> sx.ClassExpr:
    if form.is_true:
        return sx.ClassName("any")
    if form.is_false:
        return sx.ClassName("empty")
    return sx.Where(sx.ClassName("any"), sdnf_to_cond(form))


# ---------------------------------------------------------------------------
# Step 1: rewrite to where-form


def to_where_form(
    expr: sx.ClassExpr,
    resolver: Resolver = _no_classes,
    budget: NormalizeBudget = DEFAULT_BUDGET,
) -> sx.WhereCond:
    """Rewrite a class expression into the condition of ``any where w``.

    Named classes are inlined; dotted subexpressions become membership
    atoms whose target is itself normalized, so the result is closed.
    """
    return _class_to_cond(expr, resolver, budget, ())


def _class_to_cond(expr, resolver, budget, stack) -> sx.WhereCond:
    if isinstance(expr, sx.ClassName):
        return _resolve_name(expr.name, resolver, budget, stack)
    if isinstance(expr, sx.Union_):
        return sx.Or(
            _class_to_cond(expr.left, resolver, budget, stack),
            _class_to_cond(expr.right, resolver, budget, stack),
        )
    if isinstance(expr, sx.Intersection):
        return sx.And(
            _class_to_cond(expr.left, resolver, budget, stack),
            _class_to_cond(expr.right, resolver, budget, stack),
        )
    if isinstance(expr, sx.Difference):
        return sx.And(
            _class_to_cond(expr.left, resolver, budget, stack),
            sx.Not(_class_to_cond(expr.right, resolver, budget, stack)),
        )
    if isinstance(expr, sx.Where):
        return sx.And(
            _class_to_cond(expr.base, resolver, budget, stack),
            _normalize_cond(expr.cond, resolver, budget, stack),
        )
    if isinstance(expr, sx.Dot):
        steps: List[sx.PathStep] = []
        node = expr
        while isinstance(node, sx.Dot):
            steps.append(sx.PathStep(node.relation, node.inverted))
            node = node.base
        steps.reverse()
        target = sdnf(node, resolver, budget, _stack=stack)
        return sx.Membership(tuple(steps), sdnf_to_class_expr(target))
    raise TypeError(f"not a class expression: {expr!r}")


def _resolve_name(name, resolver, budget, stack) -> sx.WhereCond:
    if name == "any":
        return sx.TRUE_COND
    if name == "empty":
        return sx.FALSE_COND
    if name in stack:
        raise InliningCycleError(f"class {name!r} is defined in terms of itself")
    resolved = resolver(name)
    if resolved is None:
        raise UnknownClassNameError(f"unknown class name {name!r}")
    if isinstance(resolved, Sdnf):
        return sdnf_to_cond(resolved)
    return _class_to_cond(resolved, resolver, budget, stack + (name,))


def _normalize_cond(cond, resolver, budget, stack) -> sx.WhereCond:
    if isinstance(cond, sx.And):
        return sx.And(
            _normalize_cond(cond.left, resolver, budget, stack),
            _normalize_cond(cond.right, resolver, budget, stack),
        )
    if isinstance(cond, sx.Or):
        return sx.Or(
            _normalize_cond(cond.left, resolver, budget, stack),
            _normalize_cond(cond.right, resolver, budget, stack),
        )
    if isinstance(cond, sx.Not):
        return sx.Not(_normalize_cond(cond.operand, resolver, budget, stack))
    if isinstance(cond, (sx.TrueCond, sx.FalseCond)):
        return cond
    if isinstance(cond, sx.Membership):
        if not cond.path:
            # "This in C" inlines to C's own condition.
            return _class_to_cond(cond.target, resolver, budget, stack)
        target = sdnf(cond.target, resolver, budget, _stack=stack)
        return sx.Membership(cond.path, sdnf_to_class_expr(target))
    if isinstance(cond, sx.Contain):
        return sx.Contain(cond.path, cond.op, sx.value_set(cond.values))
    return cond


# ---------------------------------------------------------------------------
# Step 2: disjunctive form


def to_disjunctive_form(
    cond: sx.WhereCond, budget: NormalizeBudget = DEFAULT_BUDGET
) -> List[Conjunct]:
    """Flatten a condition to a list of conjuncts of literals.

    Returns ``[TRUE_CONJUNCT]`` for tautologies reached syntactically and
    ``[]`` for ``false``.  Atoms are assumed canonical (see
    ``to_where_form``).
    """
    lists = _dnf_lists(cond, False, budget)
    out: Dict[str, Conjunct] = {}
    for lits in lists.values():
        c = make_conjunct(lits)
        if c is None:
            continue
        if not c.literals:
            return [TRUE_CONJUNCT]
        out[c.key] = c
    _check_atom_budget(out.values(), budget)
    return list(out.values())


def _dnf_lists(cond, neg: bool, budget) -> Dict[frozenset, List[Literal]]:
    """Disjunction of literal conjunctions, deduplicated by literal set."""
    if isinstance(cond, sx.Not):
        return _dnf_lists(cond.operand, not neg, budget)
    if isinstance(cond, sx.TrueCond):
        return {} if neg else {frozenset(): []}
    if isinstance(cond, sx.FalseCond):
        return {frozenset(): []} if neg else {}
    if isinstance(cond, (sx.And, sx.Or)):
        is_and = isinstance(cond, sx.And) != neg  # DeMorgan under negation
        left = _dnf_lists(cond.left, neg, budget)
        right = _dnf_lists(cond.right, neg, budget)
        if is_and:
            if len(left) * len(right) > budget.max_conjuncts:
                raise SizeBudgetExceededError(
                    f"distribution exceeds {budget.max_conjuncts} conjuncts"
                )
            merged: Dict[frozenset, List[Literal]] = {}
            for lk, lv in left.items():
                for rk, rv in right.items():
                    merged[lk | rk] = lv + rv
            return merged
        left.update(right)
        return left
    lit = Literal(cond, neg)
    return {frozenset((lit.text,)): [lit]}


def _check_atom_budget(conjuncts, budget):
    atoms = {l.atom for c in conjuncts for l in c.literals}
    if len(atoms) > budget.max_atoms:
        raise SizeBudgetExceededError(
            f"{len(atoms)} distinct atoms exceed the budget of {budget.max_atoms}"
        )


# ---------------------------------------------------------------------------
# Step 3: interval widening


def _interval_pattern(c: Conjunct, key):
    """The conjunct's positive ray pattern on a chain group.

    Returns (interval, lower_literal_or_None, upper_literal_or_None), or
    None when the group has no positive rays, holds a point atom, or the
    rays cross.
    """
    pos = c.groups.get(key, ((), ()))[0]
    if not pos:
        return None
    lower = upper = None
    for lit in pos:
        r = lit.region
        if r.lo is not None and r.hi is not None:
            return None  # point atom: not a ray pattern
        if r.lo is not None:
            lower = lit
        else:
            upper = lit
    interval = rg.intersect(
        lower.region if lower else rg.FULL, upper.region if upper else rg.FULL
    )
    if interval.is_empty():
        return None
    return interval, lower, upper


def _widen(c1: Conjunct, c2: Conjunct) -> List[Conjunct]:
    """Widen c2's interval on any shared group to the hull with c1's,
    when c2's residual implies c1's and the union is connected."""
    out = []
    shared = [k for k in c2.groups if k in c1.groups]
    for key in shared:
        p1 = _interval_pattern(c1, key)
        p2 = _interval_pattern(c2, key)
        if p1 is None or p2 is None:
            continue
        i1, lo1, hi1 = p1
        i2, lo2, hi2 = p2
        if not rg.union_is_connected(i1, i2):
            continue
        hull = rg.hull(i1, i2)
        if hull == i2:
            continue
        new_lower = _weaker_side(lo1, lo2, hull, side="lo")
        new_upper = _weaker_side(hi1, hi2, hull, side="hi")
        if new_lower is None and new_upper is None:
            continue  # hull unbounded on both sides is not expressible
        residual1 = [l for l in c1.literals if l not in (lo1, hi1)]
        residual2 = [l for l in c2.literals if l not in (lo2, hi2)]
        if not all(_entails_literal(residual2, lit) for lit in residual1):
            continue
        widened = make_conjunct(
            residual2 + [l for l in (new_lower, new_upper) if l is not None]
        )
        if widened is not None:
            out.append(widened)
    return out


def _weaker_side(a: Optional[Literal], b: Optional[Literal], hull: rg.Interval, side: str):
    if a is None or b is None:
        return None
    if side == "lo":
        return a if (a.region.lo, a.region.lo_open) == (hull.lo, hull.lo_open) else b
    return a if (a.region.hi, a.region.hi_open) == (hull.hi, hull.hi_open) else b


def expand_intervals(
    conjuncts: Sequence[Conjunct], budget: NormalizeBudget = DEFAULT_BUDGET
) -> List[Conjunct]:
    """Fixpoint of pairwise interval widening, replacing narrowed originals."""
    items: Dict[str, Conjunct] = {c.key: c for c in conjuncts}
    changed = True
    while changed:
        changed = False
        ordered = sorted(items.values(), key=lambda c: c.word)
        for c1 in ordered:
            for c2 in ordered:
                if c1 is c2:
                    continue
                for w in _widen(c1, c2):
                    if w.key not in items:
                        del items[c2.key]
                        items[w.key] = w
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break
        if len(items) > budget.max_conjuncts:
            raise SizeBudgetExceededError("interval expansion exceeded conjunct budget")
    return list(items.values())


# ---------------------------------------------------------------------------
# Step 4: consensus closure and subsumption


def _binary_resolvents(c1: Conjunct, c2: Conjunct) -> List[Conjunct]:
    """Resolve a positive literal of c1 against a negative literal of c2.

    Opaque atoms resolve on identity; chain atoms resolve whenever the
    negated atom's region is inside the positive one's (their disjunction
    is then valid, which is what consensus needs).
    """
    out = []
    for la in c1.literals:
        if la.neg:
            continue
        for lb in c2.literals:
            if not lb.neg:
                continue
            if la.chain is None or lb.chain is None:
                if la.atom != lb.atom:
                    continue
            else:
                if la.chain != lb.chain or not rg.is_subset(lb.region, [la.region]):
                    continue
            r = make_conjunct(c1.without(la) + c2.without(lb))
            if r is not None:
                out.append(r)
    return out


def _atom_pool(conjuncts: Sequence[Conjunct]) -> Dict[tuple, List[Literal]]:
    """Positive chain literals per group, collected from conjuncts."""
    by_group: Dict[tuple, Dict[str, Literal]] = {}
    for c in conjuncts:
        for lit in c.literals:
            if lit.chain is not None:
                pos = lit if not lit.neg else lit.negated()
                by_group.setdefault(lit.chain, {})[pos.text] = pos
    return {key: sorted(atoms.values(), key=lambda l: l.text) for key, atoms in by_group.items()}


def atom_pool_of_cond(cond: sx.WhereCond) -> Dict[tuple, List[Literal]]:
    """Positive chain literals per group over every atom of a condition.

    Simplification can erase an atom from the flattened form, but the
    canonical choice among theory-equivalent conjuncts must not depend on
    which syntactic path survived, so the full pool travels separately.
    """
    by_group: Dict[tuple, Dict[str, Literal]] = {}

    def walk(node):
        if isinstance(node, (sx.And, sx.Or)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, sx.Not):
            walk(node.operand)
        elif isinstance(node, (sx.TrueCond, sx.FalseCond)):
            pass
        else:
            lit = Literal(node, False)
            if lit.chain is not None:
                by_group.setdefault(lit.chain, {})[lit.text] = lit

    walk(cond)
    return {key: sorted(atoms.values(), key=lambda l: l.text) for key, atoms in by_group.items()}


def _cover_links(pool: Dict[tuple, List[Literal]]) -> List[Tuple[Literal, Tuple[Literal, ...]]]:
    """Minimal valid clauses ``~a V b1 V ... V bk`` over the atom pool.

    A positive chain atom whose region some others jointly (but no proper
    subset of them) cover yields such a clause: any witness for a
    satisfies one of the covers.  Unions of rays normalize to at most one
    ray per side, and a point atom can plug the single seam between two
    open rays, so minimal covers have at most three members.
    """
    links = []
    for ordered in pool.values():
        for a in ordered:
            others = [b for b in ordered if b is not a]
            singles = {b.text for b in others if rg.is_subset(a.region, [b.region])}

            def covers(group) -> bool:
                return rg.is_subset(a.region, [b.region for b in group])

            pair_keys = set()
            for i in range(len(others)):
                if others[i].text in singles:
                    continue
                for j in range(i + 1, len(others)):
                    if others[j].text in singles:
                        continue
                    pair = (others[i], others[j])
                    if covers(pair):
                        pair_keys.add(frozenset((pair[0].text, pair[1].text)))
                        links.append((a, pair))
            for i in range(len(others)):
                if others[i].text in singles:
                    continue
                for j in range(i + 1, len(others)):
                    if others[j].text in singles:
                        continue
                    for l in range(j + 1, len(others)):
                        if others[l].text in singles:
                            continue
                        trio = (others[i], others[j], others[l])
                        if any(
                            frozenset((x.text, y.text)) in pair_keys
                            for x in trio
                            for y in trio
                            if x is not y
                        ):
                            continue  # a contained pair covers: not minimal
                        if covers(trio):
                            links.append((a, trio))
    return links


def _cover_resolvents(
    items: Sequence[Conjunct],
    links: Sequence[Tuple[Literal, Tuple[Literal, ...]]],
    frontier_keys=None,
) -> List[Conjunct]:
    """Consensus over the cover links, with partial matching.

    For a valid clause ``~a V b1 V ... V bk``, conjuncts supplying at
    least two of the clause's literals resolve them away; each unmatched
    literal joins the resolvent complemented (it must fail for a matched
    branch to be the live one).  Zero- and one-matched variants only
    produce conjuncts subsumed by their sources, so they are skipped.
    """
    index: Dict[str, List[Conjunct]] = {}
    for c in items:
        for lit in c.literals:
            index.setdefault(lit.text, []).append(c)

    out = []
    for a, covers in links:
        positions = [a.negated(), *covers]
        holders = [index.get(lit.text, ()) for lit in positions]
        k = len(positions)
        for mask in range(1, 1 << k):
            matched = [i for i in range(k) if mask >> i & 1]
            if len(matched) < 2:
                continue
            if any(not holders[i] for i in matched):
                continue
            invented = [positions[i].negated() for i in range(k) if not (mask >> i & 1)]
            for combo in itertools.product(*(holders[i] for i in matched)):
                if len({id(c) for c in combo}) != len(combo):
                    continue
                if frontier_keys is not None and not any(
                    c.key in frontier_keys for c in combo
                ):
                    continue
                literals = list(invented)
                for c, i in zip(combo, matched):
                    literals.extend(c.without(positions[i]))
                r = make_conjunct(literals)
                if r is not None:
                    out.append(r)
    return out


def prime_implicants(
    conjuncts: Sequence[Conjunct],
    budget: NormalizeBudget = DEFAULT_BUDGET,
    atom_pool: Optional[Dict[tuple, List[Literal]]] = None,
) -> List[Conjunct]:
    """All mutually unsubsumed resolvents of the input disjunction.

    Saturation runs worklist-style: each round only pairs conjuncts added
    in the previous round against everything (every new resolvent involves
    at least one new conjunct, so the closure is unchanged).  The optional
    atom pool (defaulting to the conjuncts' own atoms) fixes the universe
    for cover links and canonical-representative choice.
    """
    seen: Dict[str, Conjunct] = {c.key: c for c in conjuncts}
    if TRUE_CONJUNCT.key in seen:
        return [TRUE_CONJUNCT]
    pool = atom_pool if atom_pool is not None else _atom_pool(list(seen.values()))
    links = _cover_links(pool)
    frontier = list(seen.values())
    while frontier:
        items = list(seen.values())
        frontier_keys = {c.key for c in frontier}
        fresh: Dict[str, Conjunct] = {}

        def offer(c: Conjunct):
            if c.key not in seen and c.key not in fresh:
                fresh[c.key] = c

        for c1 in items:
            for c2 in items:
                if c1 is c2:
                    continue
                if c1.key not in frontier_keys and c2.key not in frontier_keys:
                    continue
                for r in _binary_resolvents(c1, c2):
                    offer(r)
                for w in _widen(c1, c2):
                    offer(w)
        for r in _cover_resolvents(items, links, frontier_keys):
            offer(r)
        if TRUE_CONJUNCT.key in fresh:
            return [TRUE_CONJUNCT]
        seen.update(fresh)
        frontier = list(fresh.values())
        if len(seen) > budget.max_conjuncts:
            raise SizeBudgetExceededError(
                f"consensus closure exceeded {budget.max_conjuncts} conjuncts"
            )
    canonical = _canonicalize_negatives(list(seen.values()), pool)
    canonical = _canonicalize_positives(canonical, pool)
    return _prune_subsumed(canonical)


def _canonicalize_negatives(
    items: List[Conjunct], by_group: Dict[tuple, List[Literal]], max_candidates: int = 14
) -> List[Conjunct]:
    """Rewrite each group's negated-literal set to the least equivalent one.

    A conjunct's negated chain literals only say "no value lies in the
    union of these regions", so any literal set from the pool with the
    same union is interchangeable (~age<=10 & ~age>=10 equals
    ~age<40 & ~age>=10: both forbid everything).  The smallest set wins,
    ties broken lexicographically.  Groups offering more than
    ``max_candidates`` usable atoms are left alone; the enumeration is
    exponential and such inputs are already past desk scale.
    """
    out = []
    for c in items:
        new_literals: List[Literal] = [l for l in c.literals if l.chain is None]
        changed = False
        groups = sorted(c.groups, key=str)
        for key in groups:
            pos, neg_regions = c.groups[key]
            new_literals.extend(pos)
            negs = [l for l in c.literals if l.chain == key and l.neg]
            if len(negs) < 2:
                new_literals.extend(negs)
                continue
            candidates = [
                b for b in by_group.get(key, ()) if rg.is_subset(b.region, neg_regions)
            ]
            if len(candidates) > max_candidates:
                new_literals.extend(negs)
                continue
            best = _least_equal_union(negs, neg_regions, candidates)
            if [l.text for l in best] != [l.text for l in negs]:
                changed = True
            new_literals.extend(best)
        if not changed:
            out.append(c)
            continue
        rebuilt = make_conjunct(new_literals)
        if rebuilt is not None:
            out.append(rebuilt)
    return out


def _least_equal_union(
    negs: List[Literal], union: List[rg.Interval], candidates: List[Literal]
) -> List[Literal]:
    """Smallest, lexicographically least candidate set whose regions union
    to exactly the given one; falls back to the current set."""
    ordered = sorted(candidates, key=lambda l: l.text)
    current = sorted(negs, key=lambda l: l.text)
    for size in range(1, len(current) + 1):
        for combo in itertools.combinations(ordered, size):
            regions = [b.region for b in combo]
            if all(rg.is_subset(r, union) for r in regions) and all(
                rg.is_subset(u, regions) for u in union
            ):
                chosen = [b.negated() for b in combo]
                if size < len(current) or [l.text for l in chosen] <= [
                    l.text for l in current
                ]:
                    return chosen
                return current
    return current


def _canonicalize_positives(
    items: List[Conjunct], by_group: Dict[tuple, List[Literal]]
) -> List[Conjunct]:
    """Replace each positive chain literal by the least atom in the input's
    atom pool whose region, reduced by the conjunct's negated regions,
    is the same.

    A negated literal can cap a positive one's witness region so that
    several atoms become interchangeable (age<=40 and age<30 both mean
    "a value at most 10" under ~age>10); the rendering must not depend on
    which of them the derivation happened to use.
    """

    def effective(region, forbidden):
        return rg.subtract(region, forbidden)

    out = []
    for c in items:
        replaced = []
        changed = False
        for lit in c.literals:
            if lit.neg or lit.chain is None:
                replaced.append(lit)
                continue
            forbidden = _group_neg_regions(c.literals, lit.chain)
            own = effective(lit.region, forbidden)
            best = lit
            for candidate in by_group.get(lit.chain, ()):
                if candidate.text >= best.text:
                    break
                cand_eff = effective(candidate.region, forbidden)
                if _regions_equal(cand_eff, own):
                    best = candidate
                    break
            if best is not lit:
                changed = True
            replaced.append(best)
        if not changed:
            out.append(c)
            continue
        rebuilt = make_conjunct(replaced)
        if rebuilt is not None:
            out.append(rebuilt)
    return out


def _regions_equal(a: List[rg.Interval], b: List[rg.Interval]) -> bool:
    return all(rg.is_subset(x, b) for x in a) and all(rg.is_subset(x, a) for x in b)


def _prune_subsumed(items: List[Conjunct]) -> List[Conjunct]:
    keep = []
    for c in items:
        dominated = False
        for d in items:
            if d is c or not conjunct_entails(c, d):
                continue
            if not conjunct_entails(d, c):
                dominated = True
                break
            if d.word < c.word:  # mutual entailment: keep the least word
                dominated = True
                break
        if not dominated:
            keep.append(c)
    return keep


# ---------------------------------------------------------------------------
# Full pipeline


def sdnf(
    expr: Union[sx.ClassExpr, sx.WhereCond],
    resolver: Resolver = _no_classes,
    budget: NormalizeBudget = DEFAULT_BUDGET,
    _stack: tuple = (),
) -> Sdnf:
    """Normalize a class expression (or bare condition) to its unique SDNF."""
    if _is_class_expr(expr):
        cond = _class_to_cond(expr, resolver, budget, _stack)
    else:
        cond = _normalize_cond(expr, resolver, budget, _stack)
    pool = atom_pool_of_cond(cond)
    conjuncts = to_disjunctive_form(cond, budget)
    conjuncts = expand_intervals(conjuncts, budget)
    conjuncts = prime_implicants(conjuncts, budget, atom_pool=pool)
    return sort_sdnf(conjuncts)


def _is_class_expr(node) -> bool:
    return isinstance(node, (sx.ClassName, sx.Union_, sx.Intersection, sx.Difference, sx.Dot, sx.Where))


def set_ops(x: Sdnf, y: Sdnf, op: str, budget: NormalizeBudget = DEFAULT_BUDGET) -> Sdnf:
    """SDNF of a Boolean combination of two normal forms: + * or -."""
    cx, cy = sdnf_to_cond(x), sdnf_to_cond(y)
    if op == "+":
        cond = sx.Or(cx, cy)
    elif op == "*":
        cond = sx.And(cx, cy)
    elif op == "-":
        cond = sx.And(cx, sx.Not(cy))
    else:
        raise ValueError(f"unknown set operation {op!r}")
    return sdnf(cond, budget=budget)


def logically_implies(d: Sdnf, e: Sdnf) -> bool:
    """DNF-to-DNF entailment: every conjunct of d is subsumed by one of e."""
    return all(
        any(conjunct_entails(cd, ce) for ce in e.conjuncts) for cd in d.conjuncts
    )


def logically_equivalent(a: Sdnf, b: Sdnf) -> bool:
    return a.render() == b.render()


@functools.lru_cache(maxsize=4096)
def _parsed_sdnf_cached(text: str) -> Sdnf:
    return sdnf(sx.parse_where_cond(text))


def parse_sdnf_text(text: str) -> Sdnf:
    """Re-normalize a rendered SDNF condition text (used by persistence and
    the virtual-object ledger); renders are closed, so no resolver."""
    return _parsed_sdnf_cached(text)
