"""Finite model search for function-free first-order problems.

The search grounds the problem over domains of increasing size, encodes
the result propositionally (Tseitin-style, polarity aware) and runs an
exhaustive DPLL with unit propagation. Constants are placed through
equality selector variables with exactly-one constraints; an optional
least-number restriction breaks placement symmetry.

When the problem is class-guarded in the shape produced by the ontology
emitter (class names occur only in class positions, subclass/disjoint
occur only as ground facts or inside the four generic bridge axioms),
the grounder switches to a sorted encoding: class names form their own
fixed sort, subclass and disjoint are folded to their declared closures,
and the recognized bridge axioms are replaced by the equivalent ground
constraints. Shrinking those relations to the closure preserves
satisfiability here because the remaining axioms only ever test them
negatively. Anything outside the fragment falls back to the general
encoding where class names compete for domain elements like any other
constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .fol import (And, App, Atom, Const, Exists, ForAll, Formula, Iff,
                  Implies, Not, Or, Var, _Rectifier, subformulas)

DEFAULT_MAX_NODES = 1 << 24

COUNTER_MODEL = "counterModel"
ENTAILED = "entailed"
INCONCLUSIVE = "inconclusive"

_CLASS_POSITIONS = {"instance": (1,), "subclass": (0, 1), "disjoint": (0, 1)}


@dataclass
class FiniteSearchResult:
    status: str  # "model" | "exhausted" | "budget"
    domain_size: int | None
    model: dict | None
    nodes: int
    diagnostic: str = ""


@dataclass
class EntailmentCheck:
    status: str  # counterModel | entailed | inconclusive
    domain_size: int | None
    model: dict | None
    nodes: int
    diagnostic: str = ""


# ---------------------------------------------------------------------------
# Sort analysis


@dataclass
class _SortInfo:
    ontology_mode: bool
    class_consts: list[str] = field(default_factory=list)
    object_consts: list[str] = field(default_factory=list)
    class_vars: set[str] = field(default_factory=set)
    subclass_closure: set = field(default_factory=set)
    disjoint_closure: set = field(default_factory=set)
    axioms: list = field(default_factory=list)
    propagate_pairs: list = field(default_factory=list)
    exclusion_pairs: list = field(default_factory=list)


def _check_function_free(formulas):
    for f in formulas:
        for sub in subformulas(f):
            if isinstance(sub, Atom):
                stack = list(sub.args)
                while stack:
                    t = stack.pop()
                    if isinstance(t, App):
                        raise ValueError(
                            "finite model search requires function-free input")


def _atom_occurrences(f: Formula, sign: bool):
    """Yield (atom, polarity) over an implicit NNF of f."""
    if isinstance(f, Atom):
        yield f, sign
    elif isinstance(f, Not):
        yield from _atom_occurrences(f.sub, not sign)
    elif isinstance(f, (And, Or)):
        for s in f.subs:
            yield from _atom_occurrences(s, sign)
    elif isinstance(f, Implies):
        yield from _atom_occurrences(f.left, not sign)
        yield from _atom_occurrences(f.right, sign)
    elif isinstance(f, Iff):
        for side in (f.left, f.right):
            yield from _atom_occurrences(side, True)
            yield from _atom_occurrences(side, False)
    elif isinstance(f, (ForAll, Exists)):
        yield from _atom_occurrences(f.body, sign)


def _is_implication_shape(f, antecedents, consequent_pred):
    """Match ForAll(vs, Implies(And(*antecedent atoms), atom)) structurally.

    antecedents is a list of predicate names; all atom arguments must be
    distinct bound variables. Returns the matched atoms or None.
    """
    if not isinstance(f, ForAll):
        return None
    body = f.body
    if not isinstance(body, Implies) or not isinstance(body.right, Atom):
        return None
    if body.right.pred != consequent_pred:
        return None
    left = body.left
    parts = left.subs if isinstance(left, And) else (left,)
    if len(parts) != len(antecedents):
        return None
    bound = {v.name for v in f.vars}
    atoms = []
    for part, pred in zip(parts, antecedents):
        if not isinstance(part, Atom) or part.pred != pred:
            return None
        atoms.append(part)
    for atom in atoms + [body.right]:
        for a in atom.args:
            if not isinstance(a, Var) or a.name not in bound:
                return None
    return atoms + [body.right]


def _is_instance_propagation(f):
    m = _is_implication_shape(f, ["instance", "subclass"], "instance")
    if not m:
        return False
    inst, sub, out = m
    return (inst.args[0] == out.args[0] and inst.args[1] == sub.args[0]
            and sub.args[1] == out.args[1])


def _is_subclass_transitivity(f):
    m = _is_implication_shape(f, ["subclass", "subclass"], "subclass")
    if not m:
        return False
    a, b, out = m
    return (a.args[1] == b.args[0] and out.args[0] == a.args[0]
            and out.args[1] == b.args[1])


def _is_disjoint_symmetry(f):
    m = _is_implication_shape(f, ["disjoint"], "disjoint")
    if not m:
        return False
    a, out = m
    return a.args[0] == out.args[1] and a.args[1] == out.args[0]


def _is_disjoint_exclusion(f):
    # forall: disjoint(C,D) & instance(x,C) & instance(x,D) => contradiction,
    # emitted as an implication to a negated instance atom
    if not isinstance(f, ForAll):
        return False
    body = f.body
    if not isinstance(body, Implies):
        return False
    parts = body.left.subs if isinstance(body.left, And) else (body.left,)
    if len(parts) != 2:
        return False
    disj, inst = parts
    if not (isinstance(disj, Atom) and disj.pred == "disjoint"):
        return False
    if not (isinstance(inst, Atom) and inst.pred == "instance"):
        return False
    neg = body.right
    if not (isinstance(neg, Not) and isinstance(neg.sub, Atom)
            and neg.sub.pred == "instance"):
        return False
    return (inst.args[0] == neg.sub.args[0]
            and inst.args[1] == disj.args[0]
            and neg.sub.args[1] == disj.args[1])


def _transitive_closure(pairs):
    out = set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(out):
            for (c, d) in list(out):
                if b == c and (a, d) not in out:
                    out.add((a, d))
                    changed = True
    return out


def _analyze(formulas) -> _SortInfo:
    class_consts: set[str] = set()
    object_consts_seen: dict[str, None] = {}
    class_vars: set[str] = set()
    object_vars: set[str] = set()
    conflict = False

    for f in formulas:
        for sub in subformulas(f):
            if not isinstance(sub, Atom):
                continue
            class_pos = _CLASS_POSITIONS.get(sub.pred, ())
            for i, arg in enumerate(sub.args):
                is_class = i in class_pos
                if isinstance(arg, Const):
                    if is_class:
                        class_consts.add(arg.name)
                    else:
                        object_consts_seen.setdefault(arg.name, None)
                else:
                    (class_vars if is_class else object_vars).add(arg.name)

    if class_consts & set(object_consts_seen) or class_vars & object_vars:
        conflict = True

    info = _SortInfo(ontology_mode=False)
    info.object_consts = list(object_consts_seen)
    if conflict or not class_consts:
        seen: dict[str, None] = dict(object_consts_seen)
        for f in formulas:
            for sub in subformulas(f):
                if isinstance(sub, Atom):
                    for arg in sub.args:
                        if isinstance(arg, Const):
                            seen.setdefault(arg.name, None)
        info.object_consts = list(seen)
        info.axioms = list(formulas)
        return info

    subclass_facts = set()
    disjoint_facts = set()
    axioms = []
    found_trans = found_sym = False
    for f in formulas:
        if isinstance(f, Atom) and f.pred in ("subclass", "disjoint"):
            if all(isinstance(a, Const) for a in f.args):
                pair = (f.args[0].name, f.args[1].name)
                (subclass_facts if f.pred == "subclass" else disjoint_facts).add(pair)
                continue
        if _is_subclass_transitivity(f):
            found_trans = True
            continue
        if _is_disjoint_symmetry(f):
            found_sym = True
            continue
        if _is_instance_propagation(f):
            info.propagate_pairs.append(None)  # placeholder, filled below
            continue
        if _is_disjoint_exclusion(f):
            info.exclusion_pairs.append(None)
            continue
        axioms.append(f)

    # remaining subclass/disjoint occurrences must be negative to allow
    # folding them to the closure
    for f in axioms:
        for atom, sign in _atom_occurrences(f, True):
            if atom.pred in ("subclass", "disjoint") and sign:
                info.object_consts = sorted(
                    set(info.object_consts) | class_consts)
                info.axioms = list(formulas)
                info.propagate_pairs = []
                info.exclusion_pairs = []
                return info

    sub_closure = _transitive_closure(subclass_facts) if found_trans else set(subclass_facts)
    dis = set(disjoint_facts)
    if found_sym:
        dis |= {(b, a) for (a, b) in dis}

    info.ontology_mode = True
    info.class_consts = sorted(class_consts)
    info.class_vars = class_vars
    info.subclass_closure = sub_closure
    info.disjoint_closure = dis
    info.axioms = axioms
    info.propagate_pairs = sorted(sub_closure) if info.propagate_pairs else []
    seen_pairs = set()
    exclusion = []
    if info.exclusion_pairs:
        for (a, b) in sorted(dis):
            if (b, a) not in seen_pairs:
                seen_pairs.add((a, b))
                exclusion.append((a, b))
    info.exclusion_pairs = exclusion
    return info


# ---------------------------------------------------------------------------
# Propositional trees

def _mk_and(parts):
    subs = []
    for p in parts:
        if p is False:
            return False
        if p is True:
            continue
        if isinstance(p, tuple) and p[0] == "and":
            subs.extend(p[1])
        else:
            subs.append(p)
    if not subs:
        return True
    if len(subs) == 1:
        return subs[0]
    return ("and", tuple(subs))


def _mk_or(parts):
    subs = []
    for p in parts:
        if p is True:
            return True
        if p is False:
            continue
        if isinstance(p, tuple) and p[0] == "or":
            subs.extend(p[1])
        else:
            subs.append(p)
    if not subs:
        return False
    if len(subs) == 1:
        return subs[0]
    return ("or", tuple(subs))


class _VarPool:
    def __init__(self):
        self.by_key: dict = {}
        self.keys: list = [None]  # 1-based

    def get(self, key) -> int:
        n = self.by_key.get(key)
        if n is None:
            n = len(self.keys)
            self.by_key[key] = n
            self.keys.append(key)
        return n

    def aux(self) -> int:
        self.keys.append(None)
        return len(self.keys) - 1


class _Grounder:
    def __init__(self, info: _SortInfo, n: int, symmetry_breaking: bool):
        self.info = info
        self.n = n
        self.pool = _VarPool()
        self.clauses: list[list[int]] = []
        self.unsat = False
        # constants first so placement decisions come before atom guesses
        self.limits: dict[str, int] = {}
        for idx, name in enumerate(info.object_consts):
            limit = min(idx + 1, n) if symmetry_breaking else n
            self.limits[name] = limit
            lits = [self.pool.get(("eq", name, e)) for e in range(limit)]
            self.clauses.append(list(lits))
            for i in range(len(lits)):
                for j in range(i + 1, len(lits)):
                    self.clauses.append([-lits[i], -lits[j]])

    # -- encoding ----------------------------------------------------------

    def run(self, formulas):
        for (c, d) in self.info.propagate_pairs:
            for e in range(self.n):
                self.clauses.append([-self.pool.get(("inst", c, e)),
                                     self.pool.get(("inst", d, e))])
        for (c, d) in self.info.exclusion_pairs:
            for e in range(self.n):
                self.clauses.append([-self.pool.get(("inst", c, e)),
                                     -self.pool.get(("inst", d, e))])
        for f in formulas:
            self._assert(self.tree(f, {}, True))

    def tree(self, f, env, sign):
        if isinstance(f, Atom):
            return self._atom(f, env, sign)
        if isinstance(f, Not):
            return self.tree(f.sub, env, not sign)
        if isinstance(f, And):
            parts = (self.tree(s, env, sign) for s in f.subs)
            return _mk_and(parts) if sign else _mk_or(parts)
        if isinstance(f, Or):
            parts = (self.tree(s, env, sign) for s in f.subs)
            return _mk_or(parts) if sign else _mk_and(parts)
        if isinstance(f, Implies):
            if sign:
                return _mk_or([self.tree(f.left, env, False),
                               self.tree(f.right, env, True)])
            return _mk_and([self.tree(f.left, env, True),
                            self.tree(f.right, env, False)])
        if isinstance(f, Iff):
            if sign:
                return _mk_and([
                    _mk_or([self.tree(f.left, env, False),
                            self.tree(f.right, env, True)]),
                    _mk_or([self.tree(f.right, env, False),
                            self.tree(f.left, env, True)]),
                ])
            return _mk_or([
                _mk_and([self.tree(f.left, env, True),
                         self.tree(f.right, env, False)]),
                _mk_and([self.tree(f.right, env, True),
                         self.tree(f.left, env, False)]),
            ])
        if isinstance(f, (ForAll, Exists)):
            conj = isinstance(f, ForAll) == sign
            names = [v.name for v in f.vars]
            ranges = []
            for name in names:
                if self.info.ontology_mode and name in self.info.class_vars:
                    ranges.append(self.info.class_consts)
                else:
                    ranges.append(range(self.n))
            def gen():
                for combo in product(*ranges):
                    env2 = dict(env)
                    env2.update(zip(names, combo))
                    yield self.tree(f.body, env2, sign)
            return _mk_and(gen()) if conj else _mk_or(gen())
        raise TypeError(f"not a formula: {f!r}")

    def _resolve(self, t, env):
        if isinstance(t, Var):
            return env[t.name]
        if self.info.ontology_mode and t.name in self.info.class_consts:
            return t.name
        return ("const", t.name)

    def _atom(self, f: Atom, env, sign):
        vals = [self._resolve(t, env) for t in f.args]
        if self.info.ontology_mode and f.pred in ("subclass", "disjoint"):
            closure = (self.info.subclass_closure if f.pred == "subclass"
                       else self.info.disjoint_closure)
            truth = (vals[0], vals[1]) in closure
            return truth if sign else not truth

        if self.info.ontology_mode and f.pred == "instance":
            cls = vals[1]
            def key(elems):
                return ("inst", cls, elems[0])
            return self._expand([vals[0]], key, sign)

        def key(elems):
            return ("atom", f.pred, tuple(elems))
        return self._expand(vals, key, sign)

    def _expand(self, vals, key_fn, sign):
        """Ground an atom whose args may be unplaced constants."""
        pending = [i for i, v in enumerate(vals) if isinstance(v, tuple)]
        if not pending:
            lit = self.pool.get(key_fn(vals))
            return ("lit", lit if sign else -lit)
        i = pending[0]
        name = vals[i][1]
        branches = []
        # enumerate only the placements the exactly-one constraints cover,
        # otherwise a constant could sit at two elements at once
        for e in range(self.limits.get(name, self.n)):
            eq = ("lit", self.pool.get(("eq", name, e)))
            rest = self._expand(vals[:i] + [e] + vals[i + 1:], key_fn, sign)
            branches.append(_mk_and([eq, rest]))
        return _mk_or(branches)

    # -- Tseitin -----------------------------------------------------------

    def _assert(self, t):
        if t is True:
            return
        if t is False:
            self.unsat = True
            return
        if t[0] == "and":
            for s in t[1]:
                self._assert(s)
        elif t[0] == "or":
            self.clauses.append([self._lit_of(s) for s in t[1]])
        else:
            self.clauses.append([t[1]])

    def _lit_of(self, t) -> int:
        if t[0] == "lit":
            return t[1]
        aux = self.pool.aux()
        if t[0] == "or":
            self.clauses.append([-aux] + [self._lit_of(s) for s in t[1]])
        else:
            for s in t[1]:
                self.clauses.append([-aux, self._lit_of(s)])
        return aux


# ---------------------------------------------------------------------------
# DPLL

_SAT = "sat"
_UNSAT = "unsat"
_BUDGET = "budget"


class _Solver:
    def __init__(self, num_vars: int, clauses, budget: int):
        self.nv = num_vars
        # literal truth indexed by lit + nv; var v is true iff val[v + nv]
        self.val: list = [None] * (2 * num_vars + 1)
        self.trail: list[int] = []
        self.qhead = 0
        self.budget = budget
        self.nodes = 0
        self.lits: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.units: list[int] = []
        self.empty = False
        for c in clauses:
            lits = sorted(set(c), key=abs)
            if any(-l in lits for l in lits):
                continue
            if not lits:
                self.empty = True
            elif len(lits) == 1:
                self.units.append(lits[0])
            else:
                cid = len(self.lits)
                self.lits.append(list(lits))
                self.watches.setdefault(lits[0], []).append(cid)
                self.watches.setdefault(lits[1], []).append(cid)

    def value(self, lit: int):
        return self.val[lit + self.nv]

    def enqueue(self, lit: int) -> bool:
        v = self.val[lit + self.nv]
        if v is not None:
            return v
        self.val[lit + self.nv] = True
        self.val[self.nv - lit] = False
        self.trail.append(lit)
        return True

    def propagate(self) -> bool:
        nv = self.nv
        val = self.val
        clause_lits = self.lits
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            lit = trail[self.qhead]
            self.qhead += 1
            self.nodes += 1
            wl = watches.get(-lit)
            if not wl:
                continue
            i = 0
            while i < len(wl):
                cid = wl[i]
                lits = clause_lits[cid]
                if lits[0] == -lit:
                    lits[0], lits[1] = lits[1], lits[0]
                first = lits[0]
                fv = val[first + nv]
                if fv is True:
                    i += 1
                    continue
                moved = False
                for j in range(2, len(lits)):
                    if val[lits[j] + nv] is not False:
                        lits[1], lits[j] = lits[j], lits[1]
                        watches.setdefault(lits[1], []).append(cid)
                        wl[i] = wl[-1]
                        wl.pop()
                        moved = True
                        break
                if moved:
                    continue
                if fv is False:
                    return False
                val[first + nv] = True
                val[nv - first] = False
                trail.append(first)
                i += 1
        return True

    def solve(self) -> str:
        if self.empty:
            return _UNSAT
        for u in self.units:
            if not self.enqueue(u):
                return _UNSAT
        nv = self.nv
        val = self.val
        trail = self.trail
        stack: list[tuple[int, bool, int]] = []
        # decisions take the lowest unassigned variable; every variable
        # below a decision is assigned when the decision is made, so after
        # a backtrack the scan may resume just above the flipped variable
        scan_from = 1
        while True:
            if self.nodes > self.budget:
                return _BUDGET
            if not self.propagate():
                while stack:
                    var, flipped, tlen = stack.pop()
                    for lit in trail[tlen:]:
                        val[lit + nv] = None
                        val[nv - lit] = None
                    del trail[tlen:]
                    self.qhead = tlen
                    if not flipped:
                        stack.append((var, True, tlen))
                        self.enqueue(-var)
                        scan_from = var + 1
                        break
                else:
                    return _UNSAT
                continue
            var = None
            for v in range(scan_from, nv + 1):
                if val[v + nv] is None:
                    var = v
                    break
            if var is None:
                return _SAT
            self.nodes += 1
            stack.append((var, False, len(trail)))
            self.enqueue(var)
            scan_from = var + 1


# ---------------------------------------------------------------------------
# Public entry points


def _extract_model(grounder: _Grounder, solver: _Solver) -> dict:
    constants = {}
    relations: dict[str, list] = {}
    for idx, key in enumerate(grounder.pool.keys):
        if key is None or solver.value(idx) is not True:
            continue
        kind = key[0]
        if kind == "eq":
            constants[key[1]] = key[2]
        elif kind == "inst":
            relations.setdefault("instance", []).append((key[2], key[1]))
        elif kind == "atom":
            relations.setdefault(key[1], []).append(key[2])
    for name in relations:
        relations[name] = sorted(relations[name], key=repr)
    return {
        "domain_size": grounder.n,
        "constants": constants,
        "relations": relations,
    }


def find_model(formulas, max_domain: int = 4,
               max_nodes: int = DEFAULT_MAX_NODES,
               symmetry_breaking: bool = True) -> FiniteSearchResult:
    """Search domains 1..max_domain for a model of the formulas."""
    formulas = [_Rectifier().run(f, {}) for f in formulas]
    _check_function_free(formulas)
    info = _analyze(formulas)
    total_nodes = 0
    for n in range(1, max_domain + 1):
        g = _Grounder(info, n, symmetry_breaking)
        g.run(info.axioms)
        if g.unsat:
            continue
        solver = _Solver(len(g.pool.keys) - 1, g.clauses,
                         max_nodes - total_nodes)
        outcome = solver.solve()
        total_nodes += solver.nodes
        if outcome == _SAT:
            return FiniteSearchResult("model", n, _extract_model(g, solver),
                                      total_nodes)
        if outcome == _BUDGET:
            return FiniteSearchResult(
                "budget", n, None, total_nodes,
                f"search budget of {max_nodes} nodes exhausted at domain size {n}")
    return FiniteSearchResult("exhausted", None, None, total_nodes)


def enumerate_models(axioms, conjecture: Formula | None = None,
                     max_domain: int = 4,
                     finitely_controllable: bool = False,
                     max_nodes: int = DEFAULT_MAX_NODES,
                     symmetry_breaking: bool = True) -> EntailmentCheck:
    """Look for countermodels of axioms |= conjecture by exhaustive search.

    A model of axioms + negated conjecture is a countermodel and refutes
    entailment outright. Exhausting every domain size proves entailment
    only when the caller vouches that the fragment is finitely
    controllable; otherwise the outcome is inconclusive.
    """
    problem = list(axioms)
    if conjecture is not None:
        problem.append(Not(conjecture))
    res = find_model(problem, max_domain=max_domain, max_nodes=max_nodes,
                     symmetry_breaking=symmetry_breaking)
    if res.status == "model":
        return EntailmentCheck(COUNTER_MODEL, res.domain_size, res.model,
                               res.nodes)
    if res.status == "budget":
        return EntailmentCheck(INCONCLUSIVE, res.domain_size, None, res.nodes,
                               res.diagnostic)
    if finitely_controllable:
        return EntailmentCheck(ENTAILED, None, None, res.nodes)
    return EntailmentCheck(
        INCONCLUSIVE, None, None, res.nodes,
        f"no countermodel up to domain size {max_domain}")
