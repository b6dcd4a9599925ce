"""Independent brute-force implementations used as test oracles.

Everything here trades efficiency for obviousness: truth tables instead
of clause reasoning, naive graph walks instead of cached closures.
Tests compare the package's answers against these, so nothing in this
module may import from the modules it is used to check beyond the plain
data constructors.
"""

import itertools
import random

from meroval.fol import And, Atom, Const, Iff, Implies, Not, Or, subformulas

# -- random ground formulas --------------------------------------------------

# small fixed atom pool: enough distinct atoms that random formulas are
# rarely trivial, few enough that 2**n assignments stay cheap
ATOM_POOL = (
    ("p", ("a",)),
    ("p", ("b",)),
    ("q", ("a",)),
    ("q", ("b",)),
    ("r", ("a", "b")),
    ("r", ("b", "a")),
    ("s", ()),
)


def random_ground_formula(rng: random.Random, depth: int = 3):
    if depth == 0 or rng.random() < 0.25:
        pred, args = rng.choice(ATOM_POOL)
        return Atom(pred, tuple(Const(a) for a in args))
    shape = rng.choice(("not", "and", "or", "implies", "iff"))
    if shape == "not":
        return Not(random_ground_formula(rng, depth - 1))
    if shape in ("and", "or"):
        subs = [random_ground_formula(rng, depth - 1)
                for _ in range(rng.randint(2, 3))]
        return And(*subs) if shape == "and" else Or(*subs)
    left = random_ground_formula(rng, depth - 1)
    right = random_ground_formula(rng, depth - 1)
    return Implies(left, right) if shape == "implies" else Iff(left, right)


# -- truth tables ------------------------------------------------------------

def _const_name(term) -> str:
    # Const carries its name; clause terms are ("c", name) tuples
    if isinstance(term, tuple):
        return term[1]
    return term.name


def atom_key(pred: str, args) -> tuple:
    return (pred, tuple(_const_name(a) for a in args))


def formula_atoms(formula) -> set[tuple]:
    return {atom_key(sub.pred, sub.args)
            for sub in subformulas(formula)
            if isinstance(sub, Atom)}


def clause_atoms(clauses) -> set[tuple]:
    return {atom_key(pred, args)
            for clause in clauses
            for (_, pred, args) in clause}


def eval_formula(formula, assignment: dict) -> bool:
    if isinstance(formula, Atom):
        return assignment[atom_key(formula.pred, formula.args)]
    if isinstance(formula, Not):
        return not eval_formula(formula.sub, assignment)
    if isinstance(formula, And):
        return all(eval_formula(s, assignment) for s in formula.subs)
    if isinstance(formula, Or):
        return any(eval_formula(s, assignment) for s in formula.subs)
    if isinstance(formula, Implies):
        return (not eval_formula(formula.left, assignment)
                or eval_formula(formula.right, assignment))
    if isinstance(formula, Iff):
        return (eval_formula(formula.left, assignment)
                == eval_formula(formula.right, assignment))
    raise ValueError(f"not a ground propositional formula: {formula!r}")


def eval_clauses(clauses, assignment: dict) -> bool:
    return all(
        any(assignment[atom_key(pred, args)] == positive
            for (positive, pred, args) in clause)
        for clause in clauses)


def assignments_over(atoms):
    atoms = sorted(atoms)
    for bits in itertools.product((False, True), repeat=len(atoms)):
        yield dict(zip(atoms, bits))


def clauses_satisfiable(clauses) -> bool:
    return any(eval_clauses(clauses, a)
               for a in assignments_over(clause_atoms(clauses)))


# -- random ground clause sets -----------------------------------------------

def random_ground_clauses(rng: random.Random, n_clauses: int = 6,
                          max_width: int = 3) -> list:
    clauses = []
    for _ in range(n_clauses):
        width = rng.randint(1, max_width)
        lits = set()
        for _ in range(width):
            pred, args = rng.choice(ATOM_POOL)
            sign = rng.random() < 0.5
            lits.add((sign, pred, tuple(("c", a) for a in args)))
        clauses.append(frozenset(lits))
    return clauses


# -- subclass reachability ---------------------------------------------------

def reachable_superclasses(subclass_facts, name: str) -> set[str]:
    """Reflexive-transitive closure by repeated expansion, no caching."""
    out = {name}
    changed = True
    while changed:
        changed = False
        for a, b in subclass_facts:
            if a in out and b not in out:
                out.add(b)
                changed = True
    return out
