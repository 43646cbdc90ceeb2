"""Independent reference computations used to check the engine.

Everything here recomputes results from first principles: prime
implicants by enumerating truth assignments and conjunct patterns,
assignment realizability by sampling concrete witness values around the
comparison constants, virtual-object counts by linear search.  None of it
calls into the engine's normalization or region machinery.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from classalgebra import syntax as sx


# ---------------------------------------------------------------------------
# Atoms of a condition tree


def collect_atoms(cond):
    seen = {}

    def walk(node):
        if isinstance(node, (sx.And, sx.Or)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, sx.Not):
            walk(node.operand)
        elif isinstance(node, (sx.TrueCond, sx.FalseCond)):
            pass
        else:
            seen[sx.print_predicate(node)] = node

    walk(cond)
    return [seen[k] for k in sorted(seen)]


def classical_eval(cond, assignment) -> bool:
    """Two-valued evaluation treating each atom as a propositional variable."""
    if isinstance(cond, sx.And):
        return classical_eval(cond.left, assignment) and classical_eval(cond.right, assignment)
    if isinstance(cond, sx.Or):
        return classical_eval(cond.left, assignment) or classical_eval(cond.right, assignment)
    if isinstance(cond, sx.Not):
        return not classical_eval(cond.operand, assignment)
    if isinstance(cond, sx.TrueCond):
        return True
    if isinstance(cond, sx.FalseCond):
        return False
    return assignment[sx.print_predicate(cond)]


# ---------------------------------------------------------------------------
# Realizability of assignments under list-valued attribute semantics


def _chain_group(atom):
    """Group key for plain comparison atoms sharing entailment structure."""
    if isinstance(atom, sx.Compare) and atom.op in sx.PLAIN_RELOPS:
        return ("cmp", ".".join(atom.path.relations + (atom.path.attribute,)),
                isinstance(atom.constant, str))
    if isinstance(atom, sx.AggregateCompare) and atom.op in sx.PLAIN_RELOPS:
        return ("agg", atom.aggr, ".".join(atom.path.relations + (atom.path.attribute,)),
                isinstance(atom.constant, str))
    return None


def _op_holds(value, op, const) -> bool:
    if op == "<":
        return value < const
    if op == "<=":
        return value <= const
    if op == ">":
        return value > const
    if op == ">=":
        return value >= const
    return value == const


def _witness_grid(constants):
    """Sample values covering every region shape the constants can cut out."""
    consts = sorted(set(constants))
    if isinstance(consts[0], str):
        grid = {""}
        for c in consts:
            grid.add(c)
            grid.add(c + "\x00")  # immediate successor: witnesses every gap
        return sorted(grid)
    grid = set(consts)
    for a, b in zip(consts, consts[1:]):
        grid.add((a + b) / 2)
    grid.add(consts[0] - 1)
    grid.add(consts[-1] + 1)
    return sorted(grid)


def assignment_realizable(atoms, assignment) -> bool:
    """Can some store object (list-valued attributes) produce this assignment?

    Per chain group, every true atom needs a witness value satisfying it
    while avoiding the region of every false atom of the group.
    """
    groups = {}
    for atom in atoms:
        key = _chain_group(atom)
        if key is not None:
            groups.setdefault(key, []).append(atom)
    for members in groups.values():
        trues = [a for a in members if assignment[sx.print_predicate(a)]]
        falses = [a for a in members if not assignment[sx.print_predicate(a)]]
        if not trues:
            continue
        grid = _witness_grid([a.constant for a in members])
        for a in trues:
            ok = any(
                _op_holds(v, a.op, a.constant)
                and not any(_op_holds(v, b.op, b.constant) for b in falses)
                for v in grid
            )
            if not ok:
                return False
    return True


def realizable_assignments(atoms):
    texts = [sx.print_predicate(a) for a in atoms]
    out = []
    for bits in itertools.product((False, True), repeat=len(atoms)):
        assignment = dict(zip(texts, bits))
        if assignment_realizable(atoms, assignment):
            out.append(assignment)
    return out


# ---------------------------------------------------------------------------
# Brute-force prime implicants


def brute_force_sdnf(cond) -> str:
    """All prime implicants of a condition, rendered like an SDNF string.

    Implicants are conjunct patterns over the condition's own atoms; a
    pattern is an implicant when its realizable satisfying assignments are
    nonempty and inside the condition's.  Primes are the patterns with
    maximal satisfying sets; equal sets collapse to the fewest-literal,
    lexicographically first pattern.
    """
    atoms = collect_atoms(cond)
    texts = [sx.print_predicate(a) for a in atoms]
    space = realizable_assignments(atoms)
    fun_sat = frozenset(i for i, asg in enumerate(space) if classical_eval(cond, asg))
    if len(fun_sat) == len(space):
        return "true"

    implicants = []  # (literal_texts, sat_set)
    for pattern in itertools.product((None, True, False), repeat=len(atoms)):
        sat = frozenset(
            i
            for i, asg in enumerate(space)
            if all(p is None or asg[t] == p for t, p in zip(texts, pattern))
        )
        if sat and sat <= fun_sat:
            lits = tuple(
                t if p else "~" + t for t, p in zip(texts, pattern) if p is not None
            )
            implicants.append((lits, sat))
    if not implicants:
        return "false"

    sats = {s for _, s in implicants}
    maximal = {s for s in sats if not any(s < s2 for s2 in sats)}
    reps = {}
    for lits, sat in implicants:
        if sat not in maximal:
            continue
        best = reps.get(sat)
        if best is None or (len(lits), tuple(sorted(lits))) < (len(best), tuple(sorted(best))):
            reps[sat] = lits
    conjuncts = sorted(tuple(sorted(lits)) for lits in reps.values())
    return " V ".join("&".join(word) for word in conjuncts)


# ---------------------------------------------------------------------------
# Equivalence oracle over realizable assignments


def equivalent_conditions(c1, c2) -> bool:
    atoms = {sx.print_predicate(a): a for a in collect_atoms(c1)}
    atoms.update({sx.print_predicate(a): a for a in collect_atoms(c2)})
    ordered = [atoms[k] for k in sorted(atoms)]
    for asg in realizable_assignments(ordered):
        if classical_eval(c1, asg) != classical_eval(c2, asg):
            return False
    return True


# ---------------------------------------------------------------------------
# Pairwise literal entailment (for description-simplification checks)


def literal_text_entails(a_text: str, b_text: str, atoms_by_text) -> bool:
    """Does one rendered literal imply another, judged from first principles?

    Handles identical literals and plain same-path comparison chains
    (existential semantics: region inclusion via direct constant
    arithmetic); everything else is independent.
    """
    if a_text == b_text:
        return True
    neg_a, neg_b = a_text.startswith("~"), b_text.startswith("~")
    atom_a = atoms_by_text.get(a_text.lstrip("~"))
    atom_b = atoms_by_text.get(b_text.lstrip("~"))
    if atom_a is None or atom_b is None:
        return False
    if neg_a != neg_b:
        return False
    ka, kb = _chain_group(atom_a), _chain_group(atom_b)
    if ka is None or ka != kb:
        return False
    if neg_a:
        atom_a, atom_b = atom_b, atom_a
    return _region_subset(atom_a.op, atom_a.constant, atom_b.op, atom_b.constant)


def _region_subset(op_a, c_a, op_b, c_b) -> bool:
    """region(op_a, c_a) contained in region(op_b, c_b), dense order."""
    grid = _witness_grid([c_a, c_b])
    return all(
        _op_holds(v, op_b, c_b) for v in grid if _op_holds(v, op_a, c_a)
    )


# ---------------------------------------------------------------------------
# Smallest-count searches for the virtual-object algorithm


def smallest_m_lower(bound: Fraction, op: str, n_b: int, n_ab: int) -> int:
    """Least m making (n_ab+m)/(n_b+m) satisfy a >= / > constraint."""
    m = 0
    while True:
        ratio_ok = _ratio_satisfies(Fraction(n_ab + m), Fraction(n_b + m), op, bound)
        if ratio_ok:
            return m
        m += 1
        if m > 10_000_000:
            raise AssertionError("no m found")


def smallest_m_upper(bound: Fraction, op: str, n_b: int, n_ab: int) -> int:
    m = 0
    while True:
        if _ratio_satisfies(Fraction(n_ab), Fraction(n_b + m), op, bound):
            return m
        m += 1
        if m > 10_000_000:
            raise AssertionError("no m found")


def smallest_t_cascade(bound: Fraction, op: str, n_ab_old: int, n_x: int, m: int) -> int:
    t = 0
    while True:
        if _ratio_satisfies(Fraction(n_x + t), Fraction(n_ab_old + m), op, bound):
            return t
        t += 1
        if t > 10_000_000:
            raise AssertionError("no t found")


def _ratio_satisfies(num: Fraction, den: Fraction, op: str, bound: Fraction) -> bool:
    if den == 0:
        return op in (">", ">=") and num > 0 if op == ">" else num >= 0
    ratio = num / den
    if op == ">":
        return ratio > bound
    if op == ">=":
        return ratio >= bound
    if op == "<":
        return ratio < bound
    return ratio <= bound
