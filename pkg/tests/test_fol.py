import random

from meroval.fol import (
    And,
    App,
    Atom,
    Const,
    Exists,
    ForAll,
    Iff,
    Implies,
    Not,
    Or,
    SkolemSupply,
    Var,
    clausify_all,
    constants,
    formula_key,
    free_vars,
    predicates,
    to_cnf,
)

import oracles

X = Var("X")
Y = Var("Y")
a = Const("a")
b = Const("b")


def p(*args):
    return Atom("p", args)


def q(*args):
    return Atom("q", args)


def r(*args):
    return Atom("r", args)


# -- ground clausification against truth tables ------------------------------

def test_to_cnf_agrees_with_truth_tables_on_random_ground_formulas():
    """Distribution-based CNF of a ground formula is logically equivalent
    to the input, so the clause set must evaluate identically under every
    assignment of the formula's atoms."""
    rng = random.Random(20240)
    for i in range(500):
        formula = oracles.random_ground_formula(rng, depth=3)
        clauses = to_cnf(formula)
        atoms = oracles.formula_atoms(formula)
        assert oracles.clause_atoms(clauses) <= atoms, f"formula {i} invented atoms"
        for assignment in oracles.assignments_over(atoms):
            got = oracles.eval_clauses(clauses, assignment)
            want = oracles.eval_formula(formula, assignment)
            assert got == want, (
                f"formula {i} disagrees under {assignment}:\n"
                f"  formula: {formula_key(formula)}\n  clauses: {clauses}")


def test_to_cnf_drops_tautologies():
    assert to_cnf(Or(p(a), Not(p(a)))) == []


def test_to_cnf_deduplicates_clauses():
    clauses = to_cnf(And(p(a), p(a), Or(q(b), q(b))))
    assert clauses == [
        frozenset({(True, "p", (("c", "a"),))}),
        frozenset({(True, "q", (("c", "b"),))}),
    ]


def test_to_cnf_is_deterministic():
    f = Iff(Or(p(a), q(b)), And(p(b), Not(q(a))))
    assert to_cnf(f) == to_cnf(f)


# -- quantifiers and Skolemization --------------------------------------------

def test_universal_variable_becomes_clause_variable():
    clauses = to_cnf(ForAll([X], Implies(p(X), q(X))))
    assert clauses == [
        frozenset({(False, "p", (("v", 0),)), (True, "q", (("v", 0),))}),
    ]


def test_toplevel_existential_becomes_constant():
    clauses = to_cnf(Exists([X], p(X)))
    assert clauses == [frozenset({(True, "p", (("c", "sk1"),))})]


def test_existential_under_universal_becomes_function():
    clauses = to_cnf(ForAll([X], Exists([Y], r(X, Y))))
    assert clauses == [
        frozenset({(True, "r", (("v", 0), ("f", "sk1", (("v", 0),))))}),
    ]


def test_negated_existential_needs_no_skolem():
    clauses = to_cnf(Not(Exists([X], p(X))))
    assert clauses == [frozenset({(False, "p", (("v", 0),))})]


def test_rebound_variable_names_do_not_capture():
    # the same name bound twice: each binder must get its own variable
    f = And(ForAll([X], p(X)), Exists([X], q(X)))
    clauses = to_cnf(f)
    assert frozenset({(True, "p", (("v", 0),))}) in clauses
    assert frozenset({(True, "q", (("c", "sk1"),))}) in clauses


def test_variables_are_numbered_per_clause():
    f = And(ForAll([X], p(X)), ForAll([Y], q(Y)))
    for clause in to_cnf(f):
        (_, _, args), = clause
        assert args == (("v", 0),)


def test_clausify_all_shares_one_skolem_supply():
    clauses = clausify_all([Exists([X], p(X)), Exists([X], q(X))])
    names = sorted(t[1] for c in clauses for (_, _, args) in c for t in args)
    assert names == ["sk1", "sk2"]


def test_clausify_all_deduplicates_across_formulas():
    f = ForAll([X], p(X))
    assert clausify_all([f, f]) == [frozenset({(True, "p", (("v", 0),))})]


def test_explicit_supply_continues_numbering():
    supply = SkolemSupply()
    to_cnf(Exists([X], p(X)), supply)
    clauses = to_cnf(Exists([X], q(X)), supply)
    assert clauses == [frozenset({(True, "q", (("c", "sk2"),))})]


def test_iff_produces_both_directions():
    clauses = to_cnf(Iff(p(a), q(a)))
    assert frozenset({(False, "p", (("c", "a"),)),
                      (True, "q", (("c", "a"),))}) in clauses
    assert frozenset({(False, "q", (("c", "a"),)),
                      (True, "p", (("c", "a"),))}) in clauses
    assert len(clauses) == 2


# -- structural helpers --------------------------------------------------------

def test_free_vars_sees_through_binders():
    f = ForAll([X], Implies(p(X), q(Y)))
    assert free_vars(f) == {Y}
    assert free_vars(ForAll([X, Y], r(X, Y))) == set()


def test_free_vars_inside_function_terms():
    f = p(App("f", (X, a)))
    assert free_vars(f) == {X}


def test_predicates_and_constants():
    f = ForAll([X], Implies(r(X, a), Or(p(X), q(b))))
    assert predicates(f) == {("r", 2), ("p", 1), ("q", 1)}
    assert constants(f) == {"a", "b"}


def test_formula_key_is_stable():
    f = ForAll([X], Implies(p(X), Exists([Y], r(X, Y))))
    assert formula_key(f) == "(forall (X) (=> p(?X) (exists (Y) r(?X, ?Y))))"
    assert formula_key(f) == formula_key(
        ForAll([X], Implies(p(X), Exists([Y], r(X, Y)))))
