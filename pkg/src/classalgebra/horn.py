"""Horn renaming, minimal models, and interval bounds.

Negated atoms are renamed to fresh positive symbols (``false_p`` for
``~p``), which makes every clause Horn and gives the clause set a unique
least model under forward chaining.  Atoms derived positively are
definitely true in every classical model of the original axioms, renamed
ones definitely false; both polarities together flag a contradiction.
The same clause graph propagates probability lower bounds, yielding the
belief interval [lower(p), 1 - lower(false_p)] per atom.

An axiom enters as the DNF of its negation: each conjunct is a forbidden
combination, i.e. a CNF clause of the axiom, and each literal of that
clause takes a turn as the head.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple

from . import normalize as nz
from . import syntax as sx
from .errors import InconsistentBoundsError


@dataclass(frozen=True, order=True)
class RenamedLiteral:
    base: str
    positive: bool = True

    def complement(self) -> "RenamedLiteral":
        return RenamedLiteral(self.base, not self.positive)

    def render(self) -> str:
        return self.base if self.positive else f"false_{self.base}"

    def __str__(self):
        return self.render()


@dataclass(frozen=True)
class HornClause:
    head: RenamedLiteral
    body: FrozenSet[RenamedLiteral]

    def render(self) -> str:
        if not self.body:
            return self.head.render()
        return f"{self.head.render()} <- " + " & ".join(
            b.render() for b in sorted(self.body)
        )


@dataclass(frozen=True)
class MinimalModel:
    derived: FrozenSet[RenamedLiteral]
    contradictions: FrozenSet[str]  # base atoms derived in both polarities


def clauses_from_forbidden_conjunct(literals: Sequence[Tuple[str, bool]]) -> Set[HornClause]:
    """Clauses ruling out one conjunct of a negated axiom.

    ``literals`` are (base, negated) pairs; for each literal L the
    complement of L becomes the head and the remaining literals the body,
    all renamed positive.  Tautological clauses (head in body) drop out.
    """
    renamed = [RenamedLiteral(base, not neg) for base, neg in literals]
    out: Set[HornClause] = set()
    for i, lit in enumerate(renamed):
        head = lit.complement()
        body = frozenset(renamed[:i] + renamed[i + 1 :])
        if head in body:
            continue
        out.add(HornClause(head, body))
    return out


def rename_to_horn(forbidden_conjuncts: Iterable[Sequence[Tuple[str, bool]]]) -> Set[HornClause]:
    """Horn clauses for a set of forbidden conjuncts (negated-axiom DNF)."""
    out: Set[HornClause] = set()
    for conjunct in forbidden_conjuncts:
        out |= clauses_from_forbidden_conjunct(conjunct)
    return out


def axiom_clauses(axiom: sx.WhereCond, budget: nz.NormalizeBudget = nz.DEFAULT_BUDGET) -> Set[HornClause]:
    """Horn clauses asserting a propositional axiom given as a condition.

    The negation is normalized to DNF first; every conjunct of it is
    forbidden.  Atom names are the canonical predicate renderings.
    """
    negated = nz.to_disjunctive_form(sx.Not(axiom), budget)
    conjuncts = []
    for c in negated:
        conjuncts.append([(sx.print_predicate(l.atom), l.neg) for l in c.literals])
    return rename_to_horn(conjuncts)


def minimal_model(clauses: Iterable[HornClause], facts: Iterable[RenamedLiteral] = ()) -> MinimalModel:
    """Least fixpoint of forward chaining from the given facts."""
    derived: Set[RenamedLiteral] = set(facts)
    clauses = list(clauses)
    changed = True
    while changed:
        changed = False
        for clause in clauses:
            if clause.head not in derived and clause.body <= derived:
                derived.add(clause.head)
                changed = True
    contradictions = {
        lit.base for lit in derived if lit.complement() in derived
    }
    return MinimalModel(frozenset(derived), frozenset(contradictions))


def rough_bounds(model: MinimalModel) -> Dict[str, str]:
    """Per base atom: definitelyTrue / definitelyFalse / unknown / contradictory."""
    out: Dict[str, str] = {}
    for lit in model.derived:
        prev = out.get(lit.base)
        mine = "definitelyTrue" if lit.positive else "definitelyFalse"
        out[lit.base] = mine if prev in (None, mine) else "contradictory"
    for base in model.contradictions:
        out[base] = "contradictory"
    return out


@dataclass
class BoundAssignment:
    """Probability lower bounds per renamed symbol.

    The belief interval of atom a is [lower(a), 1 - lower(false_a)].
    """

    lower: Dict[RenamedLiteral, Fraction] = field(default_factory=dict)

    def get(self, lit: RenamedLiteral) -> Fraction:
        return self.lower.get(lit, Fraction(0))

    def set(self, lit: RenamedLiteral, value: Fraction):
        self.lower[lit] = value

    def interval(self, base: str) -> Tuple[Fraction, Fraction]:
        lo = self.get(RenamedLiteral(base, True))
        hi = 1 - self.get(RenamedLiteral(base, False))
        return lo, hi

    def bases(self) -> List[str]:
        return sorted({lit.base for lit in self.lower})


def propagate_lower_bounds(
    clauses: Iterable[HornClause], seed: BoundAssignment, max_rounds: int = 10_000
) -> BoundAssignment:
    """Fixpoint of lower-bound propagation along clause edges.

    A body {b1..bk} guarantees its head at least max(0, sum lower(bi) -
    (k-1)) — the assumption-free conjunction bound, which for k=1 is plain
    pass-through.  Bounds only rise, so the iteration terminates.
    """
    out = BoundAssignment(dict(seed.lower))
    clauses = list(clauses)
    for _ in range(max_rounds):
        changed = False
        for clause in clauses:
            if not clause.body:
                body_bound = Fraction(1)
            else:
                body_bound = sum((out.get(b) for b in clause.body), Fraction(0)) - (
                    len(clause.body) - 1
                )
            if body_bound > out.get(clause.head):
                out.set(clause.head, min(Fraction(1), max(Fraction(0), body_bound)))
                changed = True
        if not changed:
            break
    else:
        raise AssertionError("lower-bound propagation did not settle")
    for base in out.bases():
        lo, hi = out.interval(base)
        if lo > hi:
            raise InconsistentBoundsError(
                f"atom {base}: lower {lo} exceeds upper {hi}"
            )
    return out
