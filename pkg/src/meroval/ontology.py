"""Ontology model: declarations, structural queries, emission, patches.

An Ontology is built from a SUO-KIF file. Declaration forms (subclass,
instance, disjoint, partition, domain, subrelation, documentation) feed
the structural index used by classification and the domain precheck.
Every other top-level form is a rule axiom; rule axioms carry stable
identifiers, either from a `; :id NAME` comment directly above the form
or auto-assigned, and edit scripts address them by those identifiers.

Emission translates the ontology into plain first-order formulas over
the predicates instance/subclass/disjoint plus the domain relations.
Relation-kind instance declarations and documentation stay structural:
relation symbols cannot double as term constants in the target logic.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .fol import (And, Atom, Const, Exists, Formula, ForAll, Iff, Implies,
                  Not, Or, Var, formula_key, free_vars, subformulas)
from .kif import KifError, SList, parse_formula, read_forms, render

RELATION_ROOT = "Relation"
ATTRIBUTE_ROOT = "Attribute"

CLASS_KIND = "class"
RELATION_KIND = "relation"
ATTRIBUTE_KIND = "attribute"
ATTRIBUTE_CLASS_KIND = "classOfAttributes"


class OntologyError(Exception):
    pass


class PatchError(Exception):
    pass


@dataclass(frozen=True)
class Axiom:
    id: str
    formula: Formula


@dataclass
class Ontology:
    subclass_facts: set = field(default_factory=set)
    instance_facts: set = field(default_factory=set)
    disjoint_facts: set = field(default_factory=set)
    partitions: list = field(default_factory=list)
    signatures: dict = field(default_factory=dict)
    subrelations: set = field(default_factory=set)
    axioms: list = field(default_factory=list)
    other_facts: list = field(default_factory=list)
    version: int = 1

    def __post_init__(self):
        self._ancestor_cache: dict[str, frozenset] = {}

    # -- structural queries -------------------------------------------------

    @property
    def classes(self) -> set[str]:
        out = set()
        for a, b in self.subclass_facts:
            out.add(a)
            out.add(b)
        for parent, parts in self.partitions:
            out.add(parent)
            out.update(parts)
        for _, c in self.instance_facts:
            out.add(c)
        for sig in self.signatures.values():
            out.update(sig.values())
        return out

    def ancestors(self, name: str) -> frozenset:
        """All superclasses of name, including name itself."""
        cached = self._ancestor_cache.get(name)
        if cached is not None:
            return cached
        out = {name}
        frontier = [name]
        while frontier:
            node = frontier.pop()
            for a, b in self.subclass_facts:
                if a == node and b not in out:
                    out.add(b)
                    frontier.append(b)
        result = frozenset(out)
        self._ancestor_cache[name] = result
        return result

    def is_subclass(self, a: str, b: str) -> bool:
        return b in self.ancestors(a)

    def declared_disjoint_pairs(self) -> set:
        pairs = set(self.disjoint_facts)
        for _, parts in self.partitions:
            for i in range(len(parts)):
                for j in range(i + 1, len(parts)):
                    pairs.add((parts[i], parts[j]))
        return pairs

    def are_disjoint(self, a: str, b: str) -> bool:
        """True when some declared disjointness separates ancestors of a and b."""
        up_a = self.ancestors(a)
        up_b = self.ancestors(b)
        for d1, d2 in self.declared_disjoint_pairs():
            if (d1 in up_a and d2 in up_b) or (d1 in up_b and d2 in up_a):
                return True
        return False

    def instance_classes(self, name: str) -> set[str]:
        return {c for i, c in self.instance_facts if i == name}

    def classify_concept(self, name: str) -> str:
        for c in self.instance_classes(name):
            if self.is_subclass(c, RELATION_ROOT):
                return RELATION_KIND
        for c in self.instance_classes(name):
            if self.is_subclass(c, ATTRIBUTE_ROOT):
                return ATTRIBUTE_KIND
        if name in self.classes and self.is_subclass(name, ATTRIBUTE_ROOT):
            return ATTRIBUTE_CLASS_KIND
        return CLASS_KIND

    def relation_symbols(self) -> set[str]:
        out = set(self.signatures) | {r for r, _ in self.subrelations}
        out |= {s for _, s in self.subrelations}
        for name, _ in self.instance_facts:
            if self.classify_concept(name) == RELATION_KIND:
                out.add(name)
        return out

    def axiom_by_id(self, axiom_id: str) -> Axiom:
        for ax in self.axioms:
            if ax.id == axiom_id:
                return ax
        raise KeyError(axiom_id)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for fact in sorted(self.subclass_facts):
            h.update(f"sub {fact}\n".encode())
        for fact in sorted(self.instance_facts):
            h.update(f"inst {fact}\n".encode())
        for fact in sorted(self.disjoint_facts):
            h.update(f"dis {fact}\n".encode())
        for parent, parts in self.partitions:
            h.update(f"part {parent} {parts}\n".encode())
        for rel in sorted(self.signatures):
            h.update(f"sig {rel} {sorted(self.signatures[rel].items())}\n".encode())
        for pair in sorted(self.subrelations):
            h.update(f"subrel {pair}\n".encode())
        for ax in self.axioms:
            h.update(f"ax {ax.id} {formula_key(ax.formula)}\n".encode())
        for fact in self.other_facts:
            h.update(f"other {formula_key(fact)}\n".encode())
        return h.hexdigest()

    def copy(self) -> "Ontology":
        return Ontology(
            subclass_facts=set(self.subclass_facts),
            instance_facts=set(self.instance_facts),
            disjoint_facts=set(self.disjoint_facts),
            partitions=list(self.partitions),
            signatures={r: dict(sig) for r, sig in self.signatures.items()},
            subrelations=set(self.subrelations),
            axioms=list(self.axioms),
            other_facts=list(self.other_facts),
            version=self.version,
        )

    def fresh_axiom_id(self) -> str:
        used = {ax.id for ax in self.axioms}
        n = len(self.axioms) + 1
        while f"a{n}" in used:
            n += 1
        return f"a{n}"


# ---------------------------------------------------------------------------
# Parsing

_DECLARATIONS = {"subclass", "instance", "disjoint", "partition", "domain",
                 "subrelation", "documentation"}


def _expect_symbols(form, count: int | None = None):
    args = form[1:]
    if count is not None and len(args) != count:
        raise KifError(f"({form[0]} ...) takes {count} arguments",
                       form.line, form.col)
    for a in args:
        if isinstance(a, SList):
            raise KifError(f"({form[0]} ...) takes plain symbols",
                           form.line, form.col)
    return [str(a) for a in args]


def _absorb_form(ont: Ontology, form, axiom_id: str | None):
    if isinstance(form, SList) and form and not isinstance(form[0], SList):
        head = str(form[0])
        if head in _DECLARATIONS:
            if head == "subclass":
                a, b = _expect_symbols(form, 2)
                ont.subclass_facts.add((a, b))
            elif head == "instance":
                a, b = _expect_symbols(form, 2)
                ont.instance_facts.add((a, b))
            elif head == "disjoint":
                a, b = _expect_symbols(form, 2)
                ont.disjoint_facts.add((a, b))
            elif head == "partition":
                names = _expect_symbols(form)
                if len(names) < 3:
                    raise KifError("partition needs a parent and two parts",
                                   form.line, form.col)
                ont.partitions.append((names[0], tuple(names[1:])))
            elif head == "domain":
                rel, pos, cls = _expect_symbols(form, 3)
                if not pos.isdigit() or int(pos) < 1:
                    raise KifError("domain position must be a positive integer",
                                   form.line, form.col)
                ont.signatures.setdefault(rel, {})[int(pos)] = cls
            elif head == "subrelation":
                a, b = _expect_symbols(form, 2)
                ont.subrelations.add((a, b))
            # documentation is kept out of the logical content
            return
    formula = parse_formula(form)
    if isinstance(formula, Atom) and not free_vars(formula):
        ont.other_facts.append(formula)
        return
    if free_vars(formula):
        line = getattr(form, "line", None)
        col = getattr(form, "col", None)
        raise KifError("rule axioms must be closed formulas", line, col)
    ont.axioms.append(Axiom(axiom_id or ont.fresh_axiom_id(), formula))


def parse_ontology(text: str) -> Ontology:
    ont = Ontology()
    for form, axiom_id in read_forms(text):
        _absorb_form(ont, form, axiom_id)
    ids = [ax.id for ax in ont.axioms]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise OntologyError(f"duplicate axiom ids: {sorted(dupes)}")
    return ont


# ---------------------------------------------------------------------------
# Emission

def bridge_axioms() -> list[tuple[str, Formula]]:
    x, c, d, e = Var("X"), Var("C"), Var("D"), Var("E")
    return [
        ("bridge_instance_propagation",
         ForAll([x, c, d], Implies(And(Atom("instance", (x, c)),
                                       Atom("subclass", (c, d))),
                                   Atom("instance", (x, d))))),
        ("bridge_subclass_transitivity",
         ForAll([c, d, e], Implies(And(Atom("subclass", (c, d)),
                                       Atom("subclass", (d, e))),
                                   Atom("subclass", (c, e))))),
        ("bridge_disjoint_symmetry",
         ForAll([c, d], Implies(Atom("disjoint", (c, d)),
                                Atom("disjoint", (d, c))))),
        ("bridge_disjoint_exclusion",
         ForAll([x, c, d], Implies(And(Atom("disjoint", (c, d)),
                                       Atom("instance", (x, c))),
                                   Not(Atom("instance", (x, d)))))),
    ]


def emit_formulas(ont: Ontology) -> list[tuple[str, Formula]]:
    """Translate the ontology into named first-order axioms."""
    out = list(bridge_axioms())
    for i, (a, b) in enumerate(sorted(ont.subclass_facts)):
        out.append((f"sub_{i}", Atom("subclass", (Const(a), Const(b)))))
    pairs = sorted(ont.disjoint_facts)
    seen = set(pairs)
    for parent, parts in ont.partitions:
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                pair = (parts[i], parts[j])
                if pair not in seen and (pair[1], pair[0]) not in seen:
                    seen.add(pair)
                    pairs.append(pair)
    for i, (a, b) in enumerate(pairs):
        out.append((f"dis_{i}", Atom("disjoint", (Const(a), Const(b)))))
    relations = {name for name, _ in ont.instance_facts
                 if ont.classify_concept(name) == RELATION_KIND}
    emitted = [p for p in sorted(ont.instance_facts) if p[0] not in relations]
    for i, (a, b) in enumerate(emitted):
        out.append((f"inst_{i}", Atom("instance", (Const(a), Const(b)))))
    for i, fact in enumerate(ont.other_facts):
        out.append((f"fact_{i}", fact))
    for rel in sorted(ont.signatures):
        sig = ont.signatures[rel]
        arity = max(sig)
        vars_ = [Var(f"X{i}") for i in range(1, arity + 1)]
        checks = [Atom("instance", (vars_[pos - 1], Const(cls)))
                  for pos, cls in sorted(sig.items())]
        body = checks[0] if len(checks) == 1 else And(*checks)
        out.append((f"sig_{rel}",
                    ForAll(vars_, Implies(Atom(rel, tuple(vars_)), body))))
    for i, (sub, sup) in enumerate(sorted(ont.subrelations)):
        arity = max(ont.signatures.get(sub, {1: None, 2: None}))
        vars_ = [Var(f"X{i}") for i in range(1, arity + 1)]
        out.append((f"subrel_{i}",
                    ForAll(vars_, Implies(Atom(sub, tuple(vars_)),
                                          Atom(sup, tuple(vars_))))))
    for ax in ont.axioms:
        out.append((ax.id, ax.formula))
    return out


# ---------------------------------------------------------------------------
# Edit scripts


@dataclass(frozen=True)
class PatchOp:
    kind: str  # setSignature | replaceAxiom | addAxiom
    rel: str | None = None
    pos: int | None = None
    cls: str | None = None
    axiom_id: str | None = None
    form: object = None  # raw s-expression for addAxiom / parsed for replace


@dataclass(frozen=True)
class Patch:
    name: str
    ops: tuple


def parse_patch(text: str) -> Patch:
    forms = read_forms(text)
    if len(forms) != 1:
        raise PatchError("a patch file holds exactly one (patch ...) form")
    form, _ = forms[0]
    if not (isinstance(form, SList) and len(form) >= 2
            and str(form[0]) == "patch" and not isinstance(form[1], SList)):
        raise PatchError("expected (patch NAME op ...)")
    name = str(form[1])
    ops = []
    for op in form[2:]:
        if not (isinstance(op, SList) and op and not isinstance(op[0], SList)):
            raise PatchError(f"malformed operation in patch {name}")
        head = str(op[0])
        if head == "set-signature":
            rel, pos, cls = _expect_symbols(op, 3)
            if not pos.isdigit() or int(pos) < 1:
                raise PatchError("set-signature position must be positive")
            ops.append(PatchOp("setSignature", rel=rel, pos=int(pos), cls=cls))
        elif head == "replace-axiom":
            if len(op) != 3 or isinstance(op[1], SList):
                raise PatchError("replace-axiom takes an id and a formula")
            ops.append(PatchOp("replaceAxiom", axiom_id=str(op[1]),
                               form=parse_formula(op[2])))
        elif head == "add-axiom":
            if len(op) != 2:
                raise PatchError("add-axiom takes one form")
            ops.append(PatchOp("addAxiom", form=op[1]))
        else:
            raise PatchError(f"unknown patch operation {head!r}")
    return Patch(name, tuple(ops))


def apply_patch(ont: Ontology, patch: Patch) -> Ontology:
    out = ont.copy()
    out.version = ont.version + 1
    for op in patch.ops:
        if op.kind == "setSignature":
            out.signatures.setdefault(op.rel, {})[op.pos] = op.cls
        elif op.kind == "replaceAxiom":
            for i, ax in enumerate(out.axioms):
                if ax.id == op.axiom_id:
                    out.axioms[i] = Axiom(ax.id, op.form)
                    break
            else:
                raise PatchError(
                    f"patch {patch.name}: no axiom with id {op.axiom_id!r}")
        else:
            _absorb_form(out, op.form, None)
    return out


def suggest_proper_part_rewrites(ont: Ontology) -> list[str]:
    """Axiom ids whose positive part-atoms relate two differently typed things.

    A positive part(x, y) over distinct variables whose class constraints
    (instance atoms anywhere in the axiom) do not overlap cannot be the
    reflexive case, so rewriting it to the strict relation is a candidate.
    """
    out = []
    for ax in ont.axioms:
        classes_of: dict[str, set[str]] = {}
        for sub in subformulas(ax.formula):
            if (isinstance(sub, Atom) and sub.pred == "instance"
                    and isinstance(sub.args[0], Var)
                    and isinstance(sub.args[1], Const)):
                classes_of.setdefault(sub.args[0].name, set()).add(
                    sub.args[1].name)
        hit = False
        for sub, sign in _positive_atoms(ax.formula):
            if not sign or sub.pred != "part" or len(sub.args) != 2:
                continue
            a, b = sub.args
            if not (isinstance(a, Var) and isinstance(b, Var)) or a == b:
                continue
            ca = classes_of.get(a.name, set())
            cb = classes_of.get(b.name, set())
            if ca and cb and not (ca & cb):
                hit = True
        if hit:
            out.append(ax.id)
    return out


def _positive_atoms(f: Formula, sign: bool = True):
    if isinstance(f, Atom):
        yield f, sign
    elif isinstance(f, Not):
        yield from _positive_atoms(f.sub, not sign)
    elif isinstance(f, (And, Or)):
        for s in f.subs:
            yield from _positive_atoms(s, sign)
    elif isinstance(f, Implies):
        yield from _positive_atoms(f.left, not sign)
        yield from _positive_atoms(f.right, sign)
    elif isinstance(f, Iff):
        for side in (f.left, f.right):
            yield from _positive_atoms(side, True)
            yield from _positive_atoms(side, False)
    elif isinstance(f, (ForAll, Exists)):
        yield from _positive_atoms(f.body, sign)
