"""First-order formulas and the clausification pipeline.

Formulas are immutable trees built from the constructors below.  ``to_cnf``
takes any closed formula to an equisatisfiable list of clauses through the
standard route: rectify, negation normal form, inside-out Skolemization,
distribution.  Clauses use a flat tuple encoding (see ``Literal``) so the
prover can hash and unify them without attribute access.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return f"?{self.name}"


@dataclass(frozen=True)
class Const:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class App:
    """Function application. Only Skolemization introduces these."""

    fn: str
    args: tuple["Term", ...]

    def __repr__(self):
        return f"{self.fn}({', '.join(map(repr, self.args))})"


Term = Union[Var, Const, App]


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    def __repr__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(map(repr, self.args))})"


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    subs: tuple["Formula", ...]

    def __init__(self, *subs: "Formula"):
        object.__setattr__(self, "subs", tuple(subs))


@dataclass(frozen=True)
class Or:
    subs: tuple["Formula", ...]

    def __init__(self, *subs: "Formula"):
        object.__setattr__(self, "subs", tuple(subs))


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ForAll:
    vars: tuple[Var, ...]
    body: "Formula"

    def __init__(self, vars: Sequence[Var], body: "Formula"):
        object.__setattr__(self, "vars", tuple(vars))
        object.__setattr__(self, "body", body)


@dataclass(frozen=True)
class Exists:
    vars: tuple[Var, ...]
    body: "Formula"

    def __init__(self, vars: Sequence[Var], body: "Formula"):
        object.__setattr__(self, "vars", tuple(vars))
        object.__setattr__(self, "body", body)


Formula = Union[Atom, Not, And, Or, Implies, Iff, ForAll, Exists]


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.sub)
    elif isinstance(f, (And, Or)):
        for s in f.subs:
            yield from subformulas(s)
    elif isinstance(f, (Implies, Iff)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (ForAll, Exists)):
        yield from subformulas(f.body)


def free_vars(f: Formula) -> set[Var]:
    if isinstance(f, Atom):
        out: set[Var] = set()
        stack = list(f.args)
        while stack:
            t = stack.pop()
            if isinstance(t, Var):
                out.add(t)
            elif isinstance(t, App):
                stack.extend(t.args)
        return out
    if isinstance(f, Not):
        return free_vars(f.sub)
    if isinstance(f, (And, Or)):
        out = set()
        for s in f.subs:
            out |= free_vars(s)
        return out
    if isinstance(f, (Implies, Iff)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (ForAll, Exists)):
        return free_vars(f.body) - set(f.vars)
    raise TypeError(f"not a formula: {f!r}")


def constants(f: Formula) -> set[str]:
    out: set[str] = set()
    for sub in subformulas(f):
        if isinstance(sub, Atom):
            stack = list(sub.args)
            while stack:
                t = stack.pop()
                if isinstance(t, Const):
                    out.add(t.name)
                elif isinstance(t, App):
                    stack.extend(t.args)
    return out


def predicates(f: Formula) -> set[tuple[str, int]]:
    return {
        (sub.pred, len(sub.args))
        for sub in subformulas(f)
        if isinstance(sub, Atom)
    }


# ---------------------------------------------------------------------------
# Clause encoding
#
# literal: (sign, pred, args) with sign True for positive
# term:    ("v", n) | ("c", name) | ("f", name, (term, ...))
# clause:  frozenset of literals
#
# Variables are numbered per clause, so clauses are standardized apart by
# construction when renumbered before use.

CTerm = tuple
Literal = tuple[bool, str, tuple]
Clause = frozenset


def _term_to_ctuple(t: Term, varmap: dict[str, int]) -> CTerm:
    if isinstance(t, Var):
        if t.name not in varmap:
            varmap[t.name] = len(varmap)
        return ("v", varmap[t.name])
    if isinstance(t, Const):
        return ("c", t.name)
    return ("f", t.fn, tuple(_term_to_ctuple(a, varmap) for a in t.args))


class _Rectifier:
    """Renames bound variables apart so Skolemization sees unique names."""

    def __init__(self):
        self.counter = 0

    def fresh(self, base: str) -> Var:
        self.counter += 1
        return Var(f"{base}_{self.counter}")

    def run(self, f: Formula, env: dict[str, Term]) -> Formula:
        if isinstance(f, Atom):
            return Atom(f.pred, tuple(self._term(t, env) for t in f.args))
        if isinstance(f, Not):
            return Not(self.run(f.sub, env))
        if isinstance(f, And):
            return And(*(self.run(s, env) for s in f.subs))
        if isinstance(f, Or):
            return Or(*(self.run(s, env) for s in f.subs))
        if isinstance(f, Implies):
            return Implies(self.run(f.left, env), self.run(f.right, env))
        if isinstance(f, Iff):
            return Iff(self.run(f.left, env), self.run(f.right, env))
        if isinstance(f, (ForAll, Exists)):
            fresh = [self.fresh(v.name) for v in f.vars]
            env2 = dict(env)
            env2.update({v.name: fv for v, fv in zip(f.vars, fresh)})
            body = self.run(f.body, env2)
            cls = ForAll if isinstance(f, ForAll) else Exists
            return cls(tuple(fresh), body)
        raise TypeError(f"not a formula: {f!r}")

    def _term(self, t: Term, env: dict[str, Term]) -> Term:
        if isinstance(t, Var):
            return env.get(t.name, t)
        if isinstance(t, App):
            return App(t.fn, tuple(self._term(a, env) for a in t.args))
        return t


def _nnf(f: Formula, positive: bool) -> Formula:
    if isinstance(f, Atom):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return _nnf(f.sub, not positive)
    if isinstance(f, And):
        subs = tuple(_nnf(s, positive) for s in f.subs)
        return And(*subs) if positive else Or(*subs)
    if isinstance(f, Or):
        subs = tuple(_nnf(s, positive) for s in f.subs)
        return Or(*subs) if positive else And(*subs)
    if isinstance(f, Implies):
        if positive:
            return Or(_nnf(f.left, False), _nnf(f.right, True))
        return And(_nnf(f.left, True), _nnf(f.right, False))
    if isinstance(f, Iff):
        # (A <=> B)  ==  (A => B) & (B => A); negation pushed through both
        expanded = And(Implies(f.left, f.right), Implies(f.right, f.left))
        return _nnf(expanded, positive)
    if isinstance(f, ForAll):
        cls = ForAll if positive else Exists
        return cls(f.vars, _nnf(f.body, positive))
    if isinstance(f, Exists):
        cls = Exists if positive else ForAll
        return cls(f.vars, _nnf(f.body, positive))
    raise TypeError(f"not a formula: {f!r}")


class SkolemSupply:
    """Numbers Skolem symbols per problem so independent formulas never clash."""

    def __init__(self):
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"sk{self.counter}"


def _skolemize(f: Formula, universal: tuple[Var, ...], supply: SkolemSupply,
               env: dict[str, Term]) -> Formula:
    # f must be in NNF
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(_subst_term(t, env) for t in f.args))
    if isinstance(f, Not):
        return Not(_skolemize(f.sub, universal, supply, env))
    if isinstance(f, And):
        return And(*(_skolemize(s, universal, supply, env) for s in f.subs))
    if isinstance(f, Or):
        return Or(*(_skolemize(s, universal, supply, env) for s in f.subs))
    if isinstance(f, ForAll):
        return ForAll(f.vars, _skolemize(f.body, universal + f.vars, supply, env))
    if isinstance(f, Exists):
        env2 = dict(env)
        for v in f.vars:
            name = supply.fresh()
            if universal:
                env2[v.name] = App(name, tuple(universal))
            else:
                env2[v.name] = Const(name)
        return _skolemize(f.body, universal, supply, env2)
    raise TypeError(f"unexpected node after NNF: {f!r}")


def _subst_term(t: Term, env: dict[str, Term]) -> Term:
    if isinstance(t, Var):
        return env.get(t.name, t)
    if isinstance(t, App):
        return App(t.fn, tuple(_subst_term(a, env) for a in t.args))
    return t


def _strip_foralls(f: Formula) -> Formula:
    if isinstance(f, ForAll):
        return _strip_foralls(f.body)
    if isinstance(f, And):
        return And(*(_strip_foralls(s) for s in f.subs))
    if isinstance(f, Or):
        return Or(*(_strip_foralls(s) for s in f.subs))
    return f


def _distribute(f: Formula) -> list[list[Formula]]:
    """Matrix in NNF without quantifiers -> list of clauses of literals."""
    if isinstance(f, And):
        out: list[list[Formula]] = []
        for s in f.subs:
            out.extend(_distribute(s))
        return out
    if isinstance(f, Or):
        parts = [_distribute(s) for s in f.subs]
        out = [[]]
        for clauses in parts:
            out = [a + b for a in out for b in clauses]
        return out
    return [[f]]


def to_cnf(f: Formula, supply: SkolemSupply | None = None) -> list[Clause]:
    """Clausify a closed formula.

    Returns clauses in the tuple encoding with variables numbered per
    clause. Tautologous clauses are dropped. An unsatisfiable formula may
    clausify to [frozenset()] only via later resolution, never directly,
    except for degenerate inputs like And() with a contradictory pair.
    """
    if supply is None:
        supply = SkolemSupply()
    f = _Rectifier().run(f, {})
    f = _nnf(f, True)
    f = _skolemize(f, (), supply, {})
    f = _strip_foralls(f)
    clauses: list[Clause] = []
    seen: set[Clause] = set()
    for lits in _distribute(f):
        varmap: dict[str, int] = {}
        enc = set()
        for lit in lits:
            if isinstance(lit, Not):
                assert isinstance(lit.sub, Atom)
                enc.add((False, lit.sub.pred,
                         tuple(_term_to_ctuple(t, varmap) for t in lit.sub.args)))
            else:
                assert isinstance(lit, Atom)
                enc.add((True, lit.pred,
                         tuple(_term_to_ctuple(t, varmap) for t in lit.args)))
        clause = frozenset(enc)
        if _is_tautology(clause) or clause in seen:
            continue
        seen.add(clause)
        clauses.append(clause)
    return clauses


def _is_tautology(clause: Clause) -> bool:
    pos = {(p, a) for (s, p, a) in clause if s}
    return any((p, a) in pos for (s, p, a) in clause if not s)


def clausify_all(formulas: Sequence[Formula]) -> list[Clause]:
    """Clausify a problem with one shared Skolem supply."""
    supply = SkolemSupply()
    out: list[Clause] = []
    seen: set[Clause] = set()
    for f in formulas:
        for c in to_cnf(f, supply):
            if c not in seen:
                seen.add(c)
                out.append(c)
    return out


def formula_key(f: Formula) -> str:
    """Deterministic structural key, stable across processes."""
    if isinstance(f, Atom):
        return repr(f)
    if isinstance(f, Not):
        return f"(not {formula_key(f.sub)})"
    if isinstance(f, And):
        return "(and " + " ".join(formula_key(s) for s in f.subs) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(formula_key(s) for s in f.subs) + ")"
    if isinstance(f, Implies):
        return f"(=> {formula_key(f.left)} {formula_key(f.right)})"
    if isinstance(f, Iff):
        return f"(<=> {formula_key(f.left)} {formula_key(f.right)})"
    if isinstance(f, ForAll):
        vs = " ".join(v.name for v in f.vars)
        return f"(forall ({vs}) {formula_key(f.body)})"
    if isinstance(f, Exists):
        vs = " ".join(v.name for v in f.vars)
        return f"(exists ({vs}) {formula_key(f.body)})"
    raise TypeError(f"not a formula: {f!r}")
