import itertools
import random
from fractions import Fraction

import pytest

from classalgebra import horn
from classalgebra import syntax as sx
from classalgebra.errors import InconsistentBoundsError
from classalgebra.horn import BoundAssignment, HornClause, RenamedLiteral


def lit(name, positive=True):
    return RenamedLiteral(name, positive)


class TestRenaming:
    def test_worked_conjunct(self):
        clauses = horn.clauses_from_forbidden_conjunct(
            [("p", False), ("q", True), ("r", False)]
        )
        rendered = sorted(c.render() for c in clauses)
        assert rendered == [
            "false_p <- false_q & r",
            "false_r <- p & false_q",
            "q <- p & r",
        ]

    def test_disjunction_axiom(self):
        clauses = horn.axiom_clauses(sx.parse_where_cond("p>0 V q>0"))
        rendered = sorted(c.render() for c in clauses)
        assert rendered == ["p>0 <- false_q>0", "q>0 <- false_p>0"]

    def test_unit_fact(self):
        clauses = horn.axiom_clauses(sx.parse_where_cond("p>0"))
        assert sorted(c.render() for c in clauses) == ["p>0"]

    def test_tautology_clause_dropped(self):
        clauses = horn.clauses_from_forbidden_conjunct([("p", False), ("p", True)])
        assert clauses == set()


class TestMinimalModel:
    def test_p_or_q_empty_least_model(self):
        clauses = horn.axiom_clauses(sx.parse_where_cond("p>0 V q>0"))
        model = horn.minimal_model(clauses)
        assert model.derived == frozenset()
        assert model.contradictions == frozenset()

    def test_facts_force_contradiction(self):
        clauses = horn.axiom_clauses(sx.parse_where_cond("p>0 V q>0"))
        facts = [lit("p>0", False), lit("q>0", False)]
        model = horn.minimal_model(clauses, facts)
        assert lit("p>0") in model.derived and lit("q>0") in model.derived
        assert model.contradictions == frozenset({"p>0", "q>0"})

    def test_facts_only(self):
        model = horn.minimal_model([], [lit("a"), lit("b", False)])
        assert model.derived == frozenset({lit("a"), lit("b", False)})

    def test_fixpoint_within_symbol_count(self):
        # chain a1 <- a0, a2 <- a1, ...
        clauses = {
            HornClause(lit(f"a{i+1}"), frozenset({lit(f"a{i}")})) for i in range(30)
        }
        model = horn.minimal_model(clauses, [lit("a0")])
        assert lit("a30") in model.derived

    def test_monotone_in_facts(self):
        rng = random.Random(3)
        names = [f"x{i}" for i in range(6)]
        clauses = set()
        for _ in range(12):
            head = lit(rng.choice(names), rng.random() < 0.7)
            body = frozenset(
                lit(rng.choice(names), rng.random() < 0.7) for _ in range(rng.randint(1, 2))
            )
            if head not in body:
                clauses.add(HornClause(head, body))
        small = horn.minimal_model(clauses, [lit("x0")]).derived
        large = horn.minimal_model(clauses, [lit("x0"), lit("x1")]).derived
        assert small <= large


class TestRoughBounds:
    def test_unknown_pair(self):
        clauses = horn.axiom_clauses(sx.parse_where_cond("p>0 V q>0"))
        bounds = horn.rough_bounds(horn.minimal_model(clauses))
        assert bounds == {}  # neither p nor q derivable in either polarity

    def test_fact_definitely_true(self):
        model = horn.minimal_model([], [lit("p")])
        assert horn.rough_bounds(model)["p"] == "definitelyTrue"

    def test_contradictory(self):
        model = horn.minimal_model([], [lit("p"), lit("p", False)])
        assert horn.rough_bounds(model)["p"] == "contradictory"


class TestClassicalSoundness:
    """Interpreting false_a as ~a, derived literals hold in every classical
    model of the original axioms (checked by model enumeration)."""

    def test_random_axiom_sets(self):
        rng = random.Random(99)
        names = ["a", "b", "c", "d"]
        for _ in range(120):
            axioms = []
            for _ in range(rng.randint(1, 4)):
                size = rng.randint(1, 3)
                clause = [
                    (rng.choice(names), rng.random() < 0.4) for _ in range(size)
                ]
                axioms.append(clause)
            horn_clauses = set()
            for clause in axioms:
                # clause [(name, negated)...] asserted as a disjunction:
                # the forbidden conjunct is its negation
                forbidden = [(n, not neg) for n, neg in clause]
                horn_clauses |= horn.clauses_from_forbidden_conjunct(forbidden)
            model = horn.minimal_model(horn_clauses)
            if model.contradictions:
                continue
            classical = []
            for bits in itertools.product((False, True), repeat=len(names)):
                asg = dict(zip(names, bits))
                if all(any(asg[n] != neg for n, neg in cl) for cl in axioms):
                    classical.append(asg)
            for derived in model.derived:
                for asg in classical:
                    assert asg[derived.base] == derived.positive


class TestLowerBounds:
    def test_paper_interval_example(self):
        clauses = horn.axiom_clauses(sx.parse_where_cond("p>0 V q>0"))
        seed = BoundAssignment({lit("p>0", False): Fraction(3, 10)})
        bounds = horn.propagate_lower_bounds(clauses, seed)
        assert bounds.interval("p>0") == (Fraction(0), Fraction(7, 10))
        assert bounds.interval("q>0") == (Fraction(3, 10), Fraction(1))

    def test_empty_seed_full_intervals(self):
        clauses = horn.axiom_clauses(sx.parse_where_cond("p>0 V q>0"))
        bounds = horn.propagate_lower_bounds(clauses, BoundAssignment())
        assert bounds.interval("p>0") == (Fraction(0), Fraction(1))

    def test_conjunction_bound(self):
        clauses = {HornClause(lit("h"), frozenset({lit("b1"), lit("b2")}))}
        seed = BoundAssignment({lit("b1"): Fraction(9, 10), lit("b2"): Fraction(8, 10)})
        bounds = horn.propagate_lower_bounds(clauses, seed)
        assert bounds.get(lit("h")) == Fraction(7, 10)

    def test_conjunction_bound_is_tight(self):
        # grid-search joint distributions (p11,p10,p01,p00) with the given
        # marginal lower bounds: none puts less mass on b1&b2 than the bound,
        # and some joint attains it exactly
        lb1, lb2 = Fraction(9, 10), Fraction(8, 10)
        bound = max(Fraction(0), lb1 + lb2 - 1)
        grid = [Fraction(i, 20) for i in range(21)]
        attained = False
        for p11 in grid:
            for p10 in grid:
                for p01 in grid:
                    p00 = 1 - p11 - p10 - p01
                    if p00 < 0:
                        continue
                    if p11 + p10 >= lb1 and p11 + p01 >= lb2:
                        assert p11 >= bound
                        attained = attained or p11 == bound
        assert attained

    def test_definite_atoms_get_point_intervals(self):
        clauses = {HornClause(lit("p"), frozenset())}
        bounds = horn.propagate_lower_bounds(clauses, BoundAssignment())
        assert bounds.interval("p") == (Fraction(1), Fraction(1))

    def test_inconsistent_bounds_raise(self):
        seed = BoundAssignment(
            {lit("p"): Fraction(7, 10), lit("p", False): Fraction(6, 10)}
        )
        with pytest.raises(InconsistentBoundsError):
            horn.propagate_lower_bounds([], seed)

    def test_monotone_in_seeds(self):
        clauses = horn.axiom_clauses(
            sx.parse_where_cond("(p>0 V q>0) & (~q>0 V r>0)")
        )
        weak = horn.propagate_lower_bounds(
            clauses, BoundAssignment({lit("p>0", False): Fraction(1, 10)})
        )
        strong = horn.propagate_lower_bounds(
            clauses, BoundAssignment({lit("p>0", False): Fraction(3, 10)})
        )
        for base in strong.bases():
            assert strong.get(lit(base)) >= weak.get(lit(base))
