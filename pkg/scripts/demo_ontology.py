#!/usr/bin/env python3
"""End-to-end tour: build a small ontology, reason over it, add a
probability constraint, and print every report the engine produces.

Run from the repository root:

    python scripts/demo_ontology.py [--save demo.json]
"""

import argparse
import sys
from fractions import Fraction

from classalgebra import document, hierarchy, normalize, probability, syntax
from classalgebra.evaluate import Evaluator
from classalgebra.model import CompositeRelation, Store


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--save", metavar="FILE", help="write the final store as a document")
    args = parser.parse_args()

    store = Store()
    people = []
    ages = [8, 15, 23, 31, 44, 52, 67]
    for i, age in enumerate(ages):
        attrs = {"age": [age], "name": [f"p{i}"]}
        if age >= 18 and i % 2:
            attrs["income"] = [1000 + 100 * i, 250 * i]
        people.append(store.create_object(attrs))
    for child, parent in [(0, 3), (1, 3), (1, 4), (0, 6)]:
        store.add_relation_edge("parentOf", people[parent], people[child])
    store.define_relation(CompositeRelation("grandparentOf", ("parentOf", "parentOf")))

    print("== classes and their canonical names ==")
    for name, text in [
        ("minor", "any where age<18"),
        ("adult", "any where age>=18"),
        ("earner", "any where income in number"),
        ("richAdult", "adult * (any where sum(income)>2000)"),
        ("parent", "any.inv(parentOf)"),
    ]:
        form = store.define_class(name, text)
        print(f"  {name:10s} = {form.render()}")

    snapshot = store.snapshot()
    ev = Evaluator(snapshot)

    print("\n== uniqueness of the normal form ==")
    a = normalize.sdnf(syntax.parse_class_expr("minor + adult"), store.resolver)
    b = normalize.sdnf(syntax.parse_class_expr("adult + minor"), store.resolver)
    print(f"  minor+adult  -> {a.render()}")
    print(f"  adult+minor  -> {b.render()}  (identical: {a.render() == b.render()})")

    print("\n== extents and probabilities ==")
    for text in ("adult", "richAdult", "adult - earner", "any where grandparentOf.age<10"):
        form = ev.sdnf_of(syntax.parse_class_expr(text))
        result = ev.extent(form)
        prob = probability.probability(form, snapshot, ev)
        lo, hi = probability.belief_interval(form, snapshot, ev)
        print(
            f"  {text:35s} true={len(result.true_set)} unknown={len(result.unknown_set)}"
            f"  Pr={prob}  interval=[{lo},{hi}]"
        )

    print("\n== implication report ==")
    report = hierarchy.implication_report(snapshot, ev)
    for d, e in report.logical_implications:
        print(f"  {d} logically implies {e}")
    for d, e in set(report.database_implications) - set(report.logical_implications):
        print(f"  {d} implies {e} for this database only (proof candidate)")

    print("\n== description of the adults ==")
    adults = list(ev.extent("adult").true_set)
    desc = hierarchy.describe(adults, snapshot, ev)
    print(f"  {desc.render()}")
    for name, frac in desc.per_class_membership:
        if frac > 0:
            print(f"    membership in {name}: {frac}")

    print("\n== attribute summary: age groups ==")
    for group in hierarchy.summarize("age", snapshot)[:4]:
        print(f"  age={group.value}: {group.count} object(s)")

    print("\n== probability constraint: at least half the adults should earn ==")
    constraint = probability.parse_constraint("Pr(earner|adult) >= 0.8")
    outcome = probability.apply_constraints([constraint], store)
    print(f"  added {len(outcome.added)} virtual object(s): {outcome.per_node_delta}")
    snapshot = store.snapshot()
    ev = Evaluator(snapshot)
    n_earning_adults = len(ev.extent("earner*adult").true_set)
    n_adults = len(ev.extent("adult").true_set)
    print(f"  Pr(earner|adult) is now {Fraction(n_earning_adults, n_adults)}")

    if args.save:
        document.save(store, args.save)
        print(f"\nwrote {args.save}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
