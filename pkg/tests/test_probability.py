import random
from fractions import Fraction

import pytest

import gen
import oracles
from classalgebra import normalize as nz
from classalgebra import probability as pb
from classalgebra import syntax as sx
from classalgebra.errors import (
    ConstraintValidationError,
    EmptyUniverseError,
    UnsatisfiableError,
)
from classalgebra.evaluate import Evaluator
from classalgebra.model import Store


def seeded_store(n_b=10, n_ab=2):
    st = Store()
    for i in range(n_b):
        attrs = {"b": [1]}
        if i < n_ab:
            attrs["a"] = [1]
        st.create_object(attrs)
    st.define_class("A", "any where a=1")
    st.define_class("B", "any where b=1")
    return st


class TestProbability:
    def test_any_is_one(self):
        st = seeded_store()
        snap = st.snapshot()
        assert pb.probability("any", snap) == 1

    def test_empty_universe(self):
        st = Store()
        with pytest.raises(EmptyUniverseError):
            pb.probability("any", st.snapshot())

    def test_complement_pair(self):
        rng = random.Random(8)
        st, _ = gen.random_store(rng, 50, two_valued_pool=True)
        snap = st.snapshot()
        ev = Evaluator(snap)
        p = "any where age>30"
        np_ = "any where age~>30"
        assert pb.probability(sx.parse_class_expr(f"({p}) + ({np_})"), snap, ev) == 1
        assert pb.probability(sx.parse_class_expr(f"({p}) * ({np_})"), snap, ev) == 0

    def test_inclusion_exclusion_randomized(self):
        rng = random.Random(21)
        for _ in range(10):
            st, _ = gen.random_store(rng, 30, two_valued_pool=True)
            snap = st.snapshot()
            ev = Evaluator(snap)
            for _ in range(20):
                x = sx.Where(sx.ClassName("any"), gen.random_plain_cond(rng, 2))
                y = sx.Where(sx.ClassName("any"), gen.random_plain_cond(rng, 2))
                lhs = pb.probability(sx.Union_(x, y), snap, ev)
                rhs = (
                    pb.probability(x, snap, ev)
                    + pb.probability(y, snap, ev)
                    - pb.probability(sx.Intersection(x, y), snap, ev)
                )
                assert lhs == rhs

    def test_belief_interval(self):
        st = Store()
        for _ in range(3):
            st.create_object({"age": [50]})
        st.create_object({"age": [1]})
        st.create_object({})  # unknown for the quasi op
        snap = st.snapshot()
        lo, hi = pb.belief_interval("any where age -in {1}", snap)
        assert (lo, hi) == (Fraction(3, 5), Fraction(4, 5))

    def test_interval_collapses_when_two_valued(self):
        st = seeded_store()
        snap = st.snapshot()
        lo, hi = pb.belief_interval("A", snap)
        assert lo == hi == Fraction(2, 10)

    def test_all_unknown_interval(self):
        st = Store()
        st.create_object({})
        lo, hi = pb.belief_interval("any where age -in {1}", st.snapshot())
        assert (lo, hi) == (Fraction(0), Fraction(1))


class TestStructural:
    def test_nonoverlap(self):
        st = Store()
        st.create_object({"p": [1]})
        st.create_object({"q": [1]})
        check = pb.translate_structural(
            "nonoverlap", "any where p=1", "any where q=1", st.snapshot()
        )
        assert check.satisfied

    def test_subset(self):
        st = Store()
        st.create_object({"p": [1], "q": [1]})
        st.create_object({"q": [1]})
        check = pb.translate_structural(
            "subset", "any where p=1", "any where q=1", st.snapshot()
        )
        assert check.satisfied

    def test_indep_on_four_object_fixture(self):
        st = Store()
        st.create_object({"a": [1], "b": [1]})
        st.create_object({"a": [1]})
        st.create_object({"b": [1]})
        st.create_object({})
        check = pb.translate_structural(
            "indep", "any where a=1", "any where b=1", st.snapshot()
        )
        assert check.satisfied  # 1*4 == 2*2


class TestConstraintParsing:
    def test_conditional(self):
        c = pb.parse_constraint("Pr(A|B) >= 0.3")
        assert c.op == ">=" and c.bound == Fraction(3, 10)
        assert c.render() == "Pr(A|B) >= 3/10"

    def test_marginal(self):
        c = pb.parse_constraint("Pr(A) < 0.6")
        assert c.b is None and c.op == "<"

    def test_equality_rejected(self):
        with pytest.raises(Exception):
            pb.parse_constraint("Pr(A|B) = 0.5")

    def test_bound_range(self):
        with pytest.raises(ConstraintValidationError):
            pb.parse_constraint("Pr(A|B) >= 1")
        with pytest.raises(ConstraintValidationError):
            pb.parse_constraint("Pr(A|B) >= 0")


class TestValidation:
    def resolver(self):
        st = seeded_store()
        st.define_class("X", "any where a=1 & b=1")
        st.define_class("Y", "any where a>5")
        return st.resolver

    def test_type1(self):
        v = pb.validate_constraints(
            [pb.parse_constraint("Pr(A|B) >= 0.4"), pb.parse_constraint("Pr(B|A) >= 0.4")],
            self.resolver(),
        )
        assert [t for t, _ in v] == [1]

    def test_type2(self):
        v = pb.validate_constraints(
            [pb.parse_constraint("Pr(X|A) >= 0.4"), pb.parse_constraint("Pr(Y|A) >= 0.4")],
            self.resolver(),
        )
        assert 2 in [t for t, _ in v]

    def test_type2_includes_marginals(self):
        v = pb.validate_constraints(
            [pb.parse_constraint("Pr(X) >= 0.4"), pb.parse_constraint("Pr(Y) >= 0.4")],
            self.resolver(),
        )
        assert 2 in [t for t, _ in v]

    def test_type3(self):
        v = pb.validate_constraints(
            [pb.parse_constraint("Pr(A|B) >= 0.4"), pb.parse_constraint("Pr(A|B) <= 0.6")],
            self.resolver(),
        )
        assert 3 in [t for t, _ in v]

    def test_type4(self):
        st = Store()
        st.create_object({"p": [1], "q": [1], "r": [1]})
        st.define_class("P", "any where p=1")
        st.define_class("Q", "any where q=1")
        st.define_class("PQR", "any where p=1 & q=1 & r=1")
        v = pb.validate_constraints(
            [pb.parse_constraint("Pr(P|Q) >= 0.4"), pb.parse_constraint("Pr(PQR) <= 0.3")],
            st.resolver,
        )
        assert 4 in [t for t, _ in v]

    def test_valid_sets_pass(self):
        resolver = self.resolver()
        cases = [
            ["Pr(A|B) >= 0.5"],
            ["Pr(A|B) <= 0.5"],
            ["Pr(A) >= 0.2"],
            ["Pr(A|B) >= 0.5", "Pr(A|B) >= 0.6"],  # same sides: permitted
            ["Pr(X|A) >= 0.4", "Pr(X|B) >= 0.4"],  # different condition classes
        ]
        for texts in cases:
            v = pb.validate_constraints([pb.parse_constraint(t) for t in texts], resolver)
            assert v == [], (texts, v)


class TestClosedForms:
    def test_spec_examples(self):
        assert pb.needed_lower(Fraction(1, 2), 10, 2) == 6
        assert pb.needed_lower(Fraction(3, 10), 10, 5) == 0
        assert pb.needed_lower(Fraction(9, 10), 1, 0) == 9
        assert pb.needed_upper(Fraction(3, 5), 5, 4) == 2
        assert pb.needed_upper(Fraction(1, 2), 2, 2) == 2
        assert pb.cascade_count(Fraction(1, 2), 4, 2, 4) == 2
        assert pb.cascade_count(Fraction(1, 2), 4, 2, 0) == 0

    def test_against_brute_force(self):
        rng = random.Random(55)
        for _ in range(300):
            bound = Fraction(rng.randint(1, 19), 20)
            n_b = rng.randint(1, 30)
            n_ab = rng.randint(0, n_b)
            op = rng.choice((">", ">="))
            assert pb.needed_lower(bound, n_b, n_ab, op) == oracles.smallest_m_lower(
                bound, op, n_b, n_ab
            )
            op = rng.choice(("<", "<="))
            assert pb.needed_upper(bound, n_b, n_ab, op) == oracles.smallest_m_upper(
                bound, op, n_b, n_ab
            )

    def test_cascade_t_le_m_property(self):
        rng = random.Random(56)
        for _ in range(300):
            bound = Fraction(rng.randint(1, 19), 20)
            n_ab = rng.randint(1, 30)
            # X-constraint satisfied previously: n_x / n_ab >= bound
            min_x = -(-n_ab * bound.numerator // bound.denominator)
            n_x = rng.randint(int(min_x), n_ab)
            m = rng.randint(0, 20)
            t = pb.cascade_count(bound, n_ab, n_x, m)
            assert t <= m
            assert t == oracles.smallest_t_cascade(bound, ">=", n_ab, n_x, m)


class TestApply:
    def test_single_lower_constraint(self):
        st = seeded_store(10, 2)
        report = pb.apply_constraints([pb.parse_constraint("Pr(A|B) >= 0.5")], st)
        assert len(report.added) == 6
        assert all(h == "a=1&b=1" for _, h in report.added)
        snap = st.snapshot()
        ev = Evaluator(snap)
        assert len(ev.extent("A*B").true_set) == 8
        assert len(ev.extent("B").true_set) == 16

    def test_marginal_lower(self):
        st = Store()
        for i in range(9):
            st.create_object({"a": [1]} if i < 1 else {"z": [1]})
        st.define_class("A", "any where a=1")
        report = pb.apply_constraints([pb.parse_constraint("Pr(A) >= 0.2")], st)
        assert len(report.added) == 1
        assert pb.probability("A", st.snapshot()) == Fraction(1, 5)

    def test_upper_constraint(self):
        st = seeded_store(5, 4)
        report = pb.apply_constraints([pb.parse_constraint("Pr(A|B) <= 0.6")], st)
        assert len(report.added) == 2
        snap = st.snapshot()
        ev = Evaluator(snap)
        ratio = Fraction(len(ev.extent("A*B").true_set), len(ev.extent("B").true_set))
        assert ratio <= Fraction(3, 5)

    def test_marginal_upper_adds_to_any(self):
        st = Store()
        for i in range(4):
            st.create_object({"a": [1]})
        st.create_object({"z": [1]})
        st.define_class("A", "any where a=1")
        report = pb.apply_constraints([pb.parse_constraint("Pr(A) <= 0.5")], st)
        assert report.added and all(h == "true" for _, h in report.added)
        snap = st.snapshot()
        assert pb.probability("A", snap) <= Fraction(1, 2)
        # any-homed virtuals count nowhere else
        ev = Evaluator(snap)
        assert len(ev.extent("A").true_set) == 4

    def test_already_satisfied_no_change(self):
        st = seeded_store(10, 8)
        report = pb.apply_constraints([pb.parse_constraint("Pr(A|B) >= 0.5")], st)
        assert report.added == [] and report.moved == []

    def test_idempotent(self):
        st = seeded_store(10, 2)
        pb.apply_constraints([pb.parse_constraint("Pr(A|B) >= 0.5")], st)
        report = pb.apply_constraints([pb.parse_constraint("Pr(A|B) >= 0.5")], st)
        assert report.added == [] and report.moved == []

    def test_pumping_combination_fails_fast(self):
        # the marginal > grows N, re-breaking the < on Q, which grows N...
        # the four validation patterns cannot see denominator-mediated
        # pumping, so the apply loop must detect and report it quickly
        import time

        st = Store()
        st.create_object({"p": [1], "r": [1]})
        st.create_object({"q": [1]})
        st.create_object({"q": [1], "r": [1]})
        st.create_object({"s": [1]})
        st.define_class("P", "any where p=1")
        st.define_class("Q", "any where q=1")
        st.define_class("R", "any where r=1")
        st.define_class("QR", "any where q=1 & r=1")
        cs = [
            pb.parse_constraint("Pr(R|P) >= 4/5"),
            pb.parse_constraint("Pr(R|Q) < 1/10"),
            pb.parse_constraint("Pr(QR) > 1/10"),
        ]
        assert pb.validate_constraints(cs, st.resolver) == []
        started = time.perf_counter()
        with pytest.raises(UnsatisfiableError):
            pb.apply_constraints(cs, st)
        assert time.perf_counter() - started < 5

    def test_rejects_invalid(self):
        st = seeded_store()
        with pytest.raises(ConstraintValidationError):
            pb.apply_constraints(
                [pb.parse_constraint("Pr(A|B) >= 0.4"), pb.parse_constraint("Pr(B|A) >= 0.4")],
                st,
            )

    def test_cascade_reuses_added_virtuals(self):
        # X-in-AB constraint satisfied, then AB grows: t objects move down
        st = Store()
        for i in range(10):
            attrs = {"b": [1]}
            if i < 4:
                attrs["a"] = [1]
            if i < 2:
                attrs["x"] = [1]
            st.create_object(attrs)
        st.define_class("A", "any where a=1")
        st.define_class("B", "any where b=1")
        st.define_class("X", "any where x=1 & a=1 & b=1")
        c_x = pb.parse_constraint("Pr(X|A*B) >= 0.5")
        c_ab = pb.parse_constraint("Pr(A|B) >= 0.5")
        report = pb.apply_constraints([c_x, c_ab], st)
        snap = st.snapshot()
        ev = Evaluator(snap)
        n_ab = len(ev.extent("A*B").true_set)
        n_b = len(ev.extent("B").true_set)
        n_x = len(ev.extent("X").true_set)
        assert Fraction(n_ab, n_b) >= Fraction(1, 2)
        assert Fraction(n_x, n_ab) >= Fraction(1, 2)
        assert report.moved  # cascade moved virtuals down into X

    def test_ledger_conservation(self):
        # replaying added homes plus the movement log reproduces the ledger
        st = Store()
        for i in range(10):
            attrs = {"q": [1]}
            if i < 4:
                attrs["p"] = [1]
            if i < 1:
                attrs["r"] = [1]
            st.create_object(attrs)
        st.define_class("Q", "any where q=1")
        st.define_class("PQ", "any where p=1 & q=1")
        st.define_class("PQR", "any where p=1 & q=1 & r=1")
        report = pb.apply_constraints(
            [pb.parse_constraint("Pr(PQR|PQ) >= 0.5"), pb.parse_constraint("Pr(PQ|Q) >= 0.6")],
            st,
        )
        assert report.moved
        homes = {oid: home for oid, home in report.added}
        for oid, src, dst in st.ledger.movements:
            assert homes[oid] == src
            homes[oid] = dst
        assert homes == {v.oid: v.home for v in st.ledger.allocations}
        replayed_counts = {}
        for home in homes.values():
            replayed_counts[home] = replayed_counts.get(home, 0) + 1
        assert replayed_counts == st.ledger.per_node()

    def test_inclusion_exclusion_after_apply(self):
        st = seeded_store(10, 2)
        st.define_class("AB", "A*B")
        pb.apply_constraints([pb.parse_constraint("Pr(A|B) >= 0.5")], st)
        snap = st.snapshot()
        ev = Evaluator(snap)
        lhs = pb.probability("A+B", snap, ev)
        rhs = (
            pb.probability("A", snap, ev)
            + pb.probability("B", snap, ev)
            - pb.probability("A*B", snap, ev)
        )
        assert lhs == rhs

    def test_randomized_valid_sets(self):
        rng = random.Random(99)
        for trial in range(25):
            st = Store()
            n = rng.randint(6, 25)
            for _ in range(n):
                attrs = {}
                for flag in ("p", "q", "r"):
                    if rng.random() < 0.5:
                        attrs[flag] = [1]
                st.create_object(attrs)
            st.define_class("P", "any where p=1")
            st.define_class("Q", "any where q=1")
            st.define_class("PQ", "any where p=1 & q=1")
            texts = rng.choice(
                (
                    ["Pr(P|Q) >= 0.5"],
                    ["Pr(P|Q) <= 0.4"],
                    ["Pr(P) >= 0.6"],
                    ["Pr(P) <= 0.3"],
                    ["Pr(PQ|P) >= 0.5", "Pr(P|Q) >= 0.3"],
                )
            )
            constraints = [pb.parse_constraint(t) for t in texts]
            if pb.validate_constraints(constraints, st.resolver):
                continue
            report = pb.apply_constraints(constraints, st)
            assert all(ok for _, ok in report.satisfaction), (trial, texts)
