"""Ternary evaluation of conditions and extents over a store snapshot.

Null semantics (the single place where the three truth values are
minted):

* a plain comparison/containment is existential over the attribute's
  appended value list and returns false when nothing is reached, so its
  ``~``-fused form is a true complement;
* a ``~``-fused operator is the Kleene negation of the plain form
  (universal interpretation: undefined, or no value satisfies);
* a ``-``-fused (quasi) operator is unknown on an undefined path and the
  negation-on-defined otherwise, so its truth gap is exactly the unknowns;
* type tests are unknown on undefined attributes;
* comparing across primitive types yields unknown, never an error.

Dotted relation steps flatten into oid sets; dotted attribute access
appends value lists (duplicates preserved) in ascending-oid order, which
is what makes the aggregates come out right.

Class extents are extents of the class's normal form.  Virtual objects
have no attributes: each atom is valued true on a virtual object exactly
when the object's home form implies the atom, false otherwise, and the
normal form is then evaluated two-valuedly, which keeps counting laws
exact for every expression.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from . import normalize as nz
from . import syntax as sx
from .errors import (
    EvaluationDepthError,
    NonNumericAggregateError,
    NotExplicitError,
    UnknownOidError,
    UnknownRelationNameError,
)
from .model import ClassRelation, ExplicitRelation, Oid, Snapshot
from .ternary import FALSE, TRUE, UNKNOWN, Ternary, from_bool, t_all, t_any, t_not

Value = sx.Value


@dataclass(frozen=True)
class ExtentResult:
    true_set: Tuple[Oid, ...]
    false_set: Tuple[Oid, ...]
    unknown_set: Tuple[Oid, ...]

    @functools.cached_property
    def _true_lookup(self) -> FrozenSet[Oid]:
        return frozenset(self.true_set)

    @functools.cached_property
    def _unknown_lookup(self) -> FrozenSet[Oid]:
        return frozenset(self.unknown_set)

    def value_of(self, oid: Oid) -> Ternary:
        if oid in self._true_lookup:
            return TRUE
        if oid in self._unknown_lookup:
            return UNKNOWN
        return FALSE


def aggregate(fn: str, values: Sequence[Value]) -> Optional[Union[Fraction, float]]:
    """Apply an aggregate; None means unknown (empty input, fn != cnt).

    Only ``cnt`` accepts strings.  ``std`` is the population standard
    deviation; it returns an exact rational when the variance is a perfect
    square and a float otherwise.
    """
    if fn == "cnt":
        return Fraction(len(values))
    if any(isinstance(v, str) for v in values):
        raise NonNumericAggregateError(f"aggregate {fn} is undefined for strings")
    if not values:
        return None
    nums = [v for v in values]
    if fn == "sum":
        return sum(nums, Fraction(0))
    if fn == "avg":
        return sum(nums, Fraction(0)) / len(nums)
    if fn == "min":
        return min(nums)
    if fn == "max":
        return max(nums)
    if fn == "std":
        var = _variance(nums)
        root = _exact_sqrt(var)
        return root if root is not None else math.sqrt(var)
    raise NonNumericAggregateError(f"unknown aggregate {fn!r}")


def _variance(nums: List[Fraction]) -> Fraction:
    n = len(nums)
    mean = sum(nums, Fraction(0)) / n
    return sum((x - mean) ** 2 for x in nums) / n


def _exact_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    pn, pd = q.numerator, q.denominator
    rn, rd = math.isqrt(pn), math.isqrt(pd)
    if rn * rn == pn and rd * rd == pd:
        return Fraction(rn, rd)
    return None


class Evaluator:
    """Pure evaluation over one snapshot; memoizes extents per normal form."""

    def __init__(self, snapshot: Snapshot, budget: nz.NormalizeBudget = nz.DEFAULT_BUDGET,
                 max_depth: int = 64):
        self.snapshot = snapshot
        self.budget = budget
        self.max_depth = max_depth
        self._depth = 0
        self._extent_cache: Dict[str, ExtentResult] = {}
        self._sdnf_cache: Dict[str, nz.Sdnf] = {}
        self._forward: Dict[str, Dict[Oid, List[Oid]]] = {}
        self._backward: Dict[str, Dict[Oid, List[Oid]]] = {}
        self._virtual_atom_cache: Dict[Tuple[str, str], bool] = {}
        self._virtual_homes: Dict[Oid, str] = {v.oid: v.home for v in snapshot.virtuals}

    # -- normal forms ---------------------------------------------------------

    def sdnf_of(self, expr: Union[str, sx.ClassExpr, sx.WhereCond, nz.Sdnf]) -> nz.Sdnf:
        if isinstance(expr, nz.Sdnf):
            return expr
        if isinstance(expr, str):
            expr = sx.parse_class_expr(expr)
        key = (
            sx.print_class_expr(expr)
            if nz._is_class_expr(expr)
            else sx.print_where_cond(expr)
        )
        cached = self._sdnf_cache.get(key)
        if cached is None:
            cached = nz.sdnf(expr, self.snapshot.resolver, self.budget)
            self._sdnf_cache[key] = cached
        return cached

    # -- extents ----------------------------------------------------------------

    def extent(self, expr) -> ExtentResult:
        form = self.sdnf_of(expr)
        key = form.render()
        cached = self._extent_cache.get(key)
        if cached is not None:
            return cached
        true_s: List[Oid] = []
        false_s: List[Oid] = []
        unknown_s: List[Oid] = []
        for oid in self.snapshot.universe():
            v = self.sdnf_value(form, oid)
            (true_s if v is TRUE else false_s if v is FALSE else unknown_s).append(oid)
        result = ExtentResult(tuple(true_s), tuple(false_s), tuple(unknown_s))
        self._extent_cache[key] = result
        return result

    def sdnf_value(self, form: nz.Sdnf, oid: Oid) -> Ternary:
        if oid.is_virtual:
            return from_bool(self._virtual_sdnf_value(form, oid))
        return t_any(
            t_all(self._literal_value(lit, oid) for lit in c.literals)
            for c in form.conjuncts
        )

    def _literal_value(self, lit: nz.Literal, oid: Oid) -> Ternary:
        v = self.eval_predicate(lit.atom, oid)
        return t_not(v) if lit.neg else v

    # -- virtual objects ---------------------------------------------------------

    def _virtual_home(self, oid: Oid) -> str:
        home = self._virtual_homes.get(oid)
        if home is None:
            raise UnknownOidError(f"unknown virtual oid {oid}")
        return home

    def _virtual_atom_true(self, home: str, atom: sx.BasicPredicate) -> bool:
        """Atom valuation for a virtual object.

        The object behaves like a minimal member of its home node: an atom
        holds exactly when the home's representative (first) prime
        implicant entails it, and fails otherwise.  Valuing atoms rather
        than whole expressions keeps every counting law exact.
        """
        key = (home, sx.print_predicate(atom))
        hit = self._virtual_atom_cache.get(key)
        if hit is not None:
            return hit
        home_form = nz.parse_sdnf_text(home)
        lit = nz.Literal(atom, False)
        out = bool(home_form.conjuncts) and nz._entails_literal(
            home_form.conjuncts[0].literals, lit
        )
        self._virtual_atom_cache[key] = out
        return out

    def _virtual_sdnf_value(self, form: nz.Sdnf, oid: Oid) -> bool:
        home = self._virtual_home(oid)
        for conjunct in form.conjuncts:
            ok = True
            for lit in conjunct.literals:
                holds = self._virtual_atom_true(home, lit.atom)
                if lit.neg:
                    holds = not holds
                if not holds:
                    ok = False
                    break
            if ok:
                return True
        return False

    # -- predicates ----------------------------------------------------------------

    def eval_where(self, cond: sx.WhereCond, oid: Oid) -> Ternary:
        """Raw diagnostic evaluation of an un-normalized condition."""
        if oid.is_virtual:
            return from_bool(self._virtual_sdnf_value(self.sdnf_of(cond), oid))
        if isinstance(cond, sx.And):
            return t_all((self.eval_where(cond.left, oid), self.eval_where(cond.right, oid)))
        if isinstance(cond, sx.Or):
            return t_any((self.eval_where(cond.left, oid), self.eval_where(cond.right, oid)))
        if isinstance(cond, sx.Not):
            return t_not(self.eval_where(cond.operand, oid))
        if isinstance(cond, sx.TrueCond):
            return TRUE
        if isinstance(cond, sx.FalseCond):
            return FALSE
        return self.eval_predicate(cond, oid)

    def eval_predicate(self, atom: sx.BasicPredicate, oid: Oid) -> Ternary:
        if oid.is_virtual:
            return from_bool(self._virtual_atom_true(self._virtual_home(oid), atom))
        if oid not in self.snapshot.objects:
            raise UnknownOidError(f"unknown oid {oid}")
        self._depth += 1
        if self._depth > self.max_depth:
            self._depth -= 1
            raise EvaluationDepthError("evaluation recursion limit reached")
        try:
            if isinstance(atom, sx.Compare):
                return self._eval_compare(atom, oid)
            if isinstance(atom, sx.Contain):
                return self._eval_contain(atom, oid)
            if isinstance(atom, sx.TypeTest):
                return self._eval_typetest(atom, oid)
            if isinstance(atom, sx.AggregateCompare):
                return self._eval_aggregate_compare(atom, oid)
            if isinstance(atom, sx.Membership):
                return self._eval_membership(atom, oid)
            raise TypeError(f"not a predicate: {atom!r}")
        finally:
            self._depth -= 1

    def _eval_compare(self, atom: sx.Compare, oid: Oid) -> Ternary:
        values = self.dot_attribute_values([oid], atom.path)
        fused = atom.op.startswith("~")
        op = atom.op.lstrip("~")
        plain = t_any(_compare_value(v, op, atom.constant) for v in values)
        return t_not(plain) if fused else plain

    def _eval_contain(self, atom: sx.Contain, oid: Oid) -> Ternary:
        values = self.dot_attribute_values([oid], atom.path)
        op = atom.op
        kleene_neg = op.startswith("~")
        if kleene_neg:
            op = op[1:]
        quasi = op.startswith("-")
        if quasi:
            op = op[1:]
        if op == "in":
            plain = from_bool(any(v in atom.values for v in values))
        else:  # has
            plain = from_bool(bool(values) and all(s in values for s in atom.values))
        if quasi:
            result = UNKNOWN if not values else t_not(plain)
        else:
            result = plain
        return t_not(result) if kleene_neg else result

    def _eval_typetest(self, atom: sx.TypeTest, oid: Oid) -> Ternary:
        values = self.dot_attribute_values([oid], atom.path)
        if not values:
            return UNKNOWN
        want_str = atom.primitive == "string"
        return from_bool(all(isinstance(v, str) == want_str for v in values))

    def _eval_aggregate_compare(self, atom: sx.AggregateCompare, oid: Oid) -> Ternary:
        values = self.dot_attribute_values([oid], atom.path)
        fused = atom.op.startswith("~")
        op = atom.op.lstrip("~")
        plain = self._aggregate_compare_plain(atom.aggr, values, op, atom.constant)
        return t_not(plain) if fused else plain

    def _aggregate_compare_plain(self, aggr, values, op, constant) -> Ternary:
        if isinstance(constant, str):
            return UNKNOWN
        if aggr == "cnt":
            return from_bool(_number_op(Fraction(len(values)), op, constant))
        if not values or any(isinstance(v, str) for v in values):
            return UNKNOWN
        if aggr == "std":
            return self._compare_std(values, op, constant)
        value = aggregate(aggr, values)
        return from_bool(_number_op(value, op, constant))

    def _compare_std(self, values, op, c: Fraction) -> Ternary:
        # sqrt is irrational in general; compare variances exactly instead.
        var = _variance(list(values))
        if c < 0:
            return from_bool(op in (">", ">="))
        return from_bool(_number_op(var, op, c * c))

    def _eval_membership(self, atom: sx.Membership, oid: Oid) -> Ternary:
        target = self.sdnf_of(atom.target)
        if not atom.path:
            return self.sdnf_value(target, oid)
        reached = self.inverse_path_image([oid], atom.path)
        return t_any(self.sdnf_value(target, o) for o in reached)

    # -- relation navigation ---------------------------------------------------------

    def _relation(self, name: str):
        rel = self.snapshot.relations.get(name)
        if rel is None:
            raise UnknownRelationNameError(f"unknown relation {name!r}")
        return rel

    def _adjacency(self, name: str, backward: bool) -> Dict[Oid, List[Oid]]:
        cache = self._backward if backward else self._forward
        table = cache.get(name)
        if table is None:
            rel = self._relation(name)
            assert isinstance(rel, ExplicitRelation)
            table = {}
            for s, t in rel.edges:
                a, b = (t, s) if backward else (s, t)
                table.setdefault(a, []).append(b)
            cache[name] = table
        return table

    def dot_relation(self, sources: Iterable[Oid], name: str, inverted: bool = False) -> List[Oid]:
        """Flattened image of a source set under a named relation."""
        rel = self._relation(name)
        sources = set(sources)
        if isinstance(rel, ExplicitRelation):
            table = self._adjacency(name, backward=inverted)
            out: Set[Oid] = set()
            for s in sources:
                out.update(table.get(s, ()))
            return sorted(out)
        if isinstance(rel, ClassRelation):
            domain, range_ = rel.domain, rel.range
            if inverted:
                domain, range_ = range_, domain
            dom_true = set(self.extent(domain).true_set)
            if sources & dom_true:
                return sorted(self.extent(range_).true_set)
            return []
        # composite: compose left to right
        steps = rel.path if not inverted else tuple(reversed(rel.path))
        cur = sorted(sources)
        for step in steps:
            cur = self.dot_relation(cur, step, inverted=inverted)
        return cur

    def inverse_image(self, targets: Iterable[Oid], name: str) -> List[Oid]:
        return self.dot_relation(targets, name, inverted=True)

    def inverse_path_image(self, sources: Iterable[Oid], path: Sequence[sx.PathStep]) -> List[Oid]:
        """Walk the inverse of a dotted path: reverse order, invert steps."""
        cur = sorted(set(sources))
        for step in reversed(path):
            cur = self.dot_relation(cur, step.relation, inverted=not step.inverted)
        return cur

    def dot_attribute_values(self, sources: Iterable[Oid], path: sx.AttrPath) -> List[Value]:
        cur = sorted(set(sources))
        for rel in path.relations:
            cur = self.dot_relation(cur, rel)
        values: List[Value] = []
        for oid in cur:
            rec = self.snapshot.objects.get(oid)
            if rec is None:
                continue  # virtual objects carry no attributes
            values.extend(rec.get(path.attribute, ()))
        return values

    def reflexive_transitive_closure(self, name: str) -> FrozenSet[Tuple[Oid, Oid]]:
        rel = self._relation(name)
        if not isinstance(rel, ExplicitRelation):
            raise NotExplicitError(f"closure requires an explicit relation, not {name!r}")
        table = self._adjacency(name, backward=False)
        field: Set[Oid] = set()
        for s, t in rel.edges:
            field.add(s)
            field.add(t)
        closure: Set[Tuple[Oid, Oid]] = set()
        for start in field:
            seen = {start}
            stack = [start]
            while stack:
                node = stack.pop()
                for nxt in table.get(node, ()):
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            for reach in seen:
                closure.add((start, reach))
        for oid in field:
            closure.add((oid, oid))
        return frozenset(closure)


def _compare_value(v: Value, op: str, constant: Value) -> Ternary:
    if isinstance(v, str) != isinstance(constant, str):
        return UNKNOWN
    if op == "<":
        return from_bool(v < constant)
    if op == "<=":
        return from_bool(v <= constant)
    if op == ">":
        return from_bool(v > constant)
    if op == ">=":
        return from_bool(v >= constant)
    return from_bool(v == constant)


def _number_op(v, op: str, constant: Fraction) -> bool:
    if v is None:
        return False
    if op == "<":
        return v < constant
    if op == "<=":
        return v <= constant
    if op == ">":
        return v > constant
    if op == ">=":
        return v >= constant
    return v == constant
