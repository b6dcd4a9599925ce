"""Competency question generation from mapped meronymy pairs.

Each pair, together with the mappings of its two synsets, instantiates
one of four quantification patterns: subsumption mappings quantify
existentially, equivalence mappings universally over their side. The
resulting closed formula asks whether the ontology realizes the lexical
relation. Identical formulas coming from different pairs collapse into
a single question.

Mapping targets contribute membership atoms by their concept kind:
classes check instance, attribute individuals check attribute, and
attribute classes introduce an existential witness. Relation-kind
targets cannot fill an object position, so they make the question
ill-formed rather than silently false.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .fol import And, Atom, Const, Exists, Formula, ForAll, Implies, Var, formula_key
from .kif import render
from .mapping import INSTANCE, EQUIVALENCE, MappingTable
from .ontology import (ATTRIBUTE_CLASS_KIND, ATTRIBUTE_KIND, CLASS_KIND,
                       Ontology, RELATION_KIND)

RELATION_FOR = {"part": "properPart", "member": "member",
                "substance": "material"}

UNMAPPED = "unmappedSynset"
ILL_FORMED = "illFormedCQ"
GENERATED = "cq"


class CQGenerationError(Exception):
    pass


@dataclass(frozen=True)
class CQ:
    id: str
    formula: Formula
    text: str
    relation: str
    qp: int
    pairs: tuple


@dataclass(frozen=True)
class PairRecord:
    pair: object
    status: str
    cq_id: str | None = None
    detail: str = ""


def select_relation(lexical_relation: str) -> str:
    try:
        return RELATION_FOR[lexical_relation]
    except KeyError:
        raise CQGenerationError(
            f"no ontology relation for {lexical_relation!r}") from None


@dataclass
class _Side:
    term: object          # Var or Const
    kind: str             # "=" or "+"
    atoms: list
    witnesses: list


def _build_side(targets, var: Var, ontology: Ontology,
                witness_numbers) -> _Side:
    at_targets = [t for t in targets if t.relation == INSTANCE]
    if len(at_targets) > 1:
        raise CQGenerationError("a synset cannot denote two individuals")
    if at_targets:
        term = Const(at_targets[0].concept)
        kind = EQUIVALENCE
    else:
        term = var
        kind = (EQUIVALENCE
                if any(t.relation == EQUIVALENCE for t in targets)
                else "+")
    atoms = []
    witnesses = []
    for t in targets:
        if t.relation == INSTANCE:
            continue
        concept_kind = ontology.classify_concept(t.concept)
        if concept_kind == RELATION_KIND:
            raise CQGenerationError(
                f"{t.concept} names a relation and cannot type an argument")
        if concept_kind == CLASS_KIND:
            atoms.append(Atom("instance", (term, Const(t.concept))))
        elif concept_kind == ATTRIBUTE_KIND:
            atoms.append(Atom("attribute", (term, Const(t.concept))))
        else:
            w = Var(f"W{next(witness_numbers)}")
            witnesses.append(w)
            atoms.append(Atom("attribute", (term, w)))
            atoms.append(Atom("instance", (w, Const(t.concept))))
    return _Side(term, kind, atoms, witnesses)


def _conj(atoms) -> Formula:
    return atoms[0] if len(atoms) == 1 else And(*atoms)


def _existential_block(side: _Side, extra_atoms) -> Formula:
    atoms = side.atoms + extra_atoms
    vars_ = ([side.term] if isinstance(side.term, Var) else []) + side.witnesses
    body = _conj(atoms)
    return Exists(vars_, body) if vars_ else body


def _universal_block(side: _Side, consequent: Formula) -> Formula:
    if not side.atoms:
        return consequent
    antecedent = _conj(side.atoms)
    if side.witnesses:
        antecedent = Exists(side.witnesses, antecedent)
    wrapped = Implies(antecedent, consequent)
    if isinstance(side.term, Var):
        return ForAll([side.term], wrapped)
    return wrapped


def build_cq_formula(part_targets, whole_targets, relation: str,
                     ontology: Ontology) -> tuple[Formula, int]:
    """Instantiate the quantification pattern for one mapped pair."""
    counter = iter(range(1, 100))
    part = _build_side(part_targets, Var("X"), ontology, counter)
    whole = _build_side(whole_targets, Var("Y"), ontology, counter)
    rel_atom = Atom(relation, (part.term, whole.term))
    qp = {("+", "+"): 1, ("=", "+"): 2,
          ("+", "="): 3, ("=", "="): 4}[(part.kind, whole.kind)]

    if qp == 1:
        vars_ = [v for v in (part.term, whole.term) if isinstance(v, Var)]
        vars_ += part.witnesses + whole.witnesses
        body = _conj(part.atoms + whole.atoms + [rel_atom])
        return (Exists(vars_, body) if vars_ else body), qp
    if qp == 2:
        consequent = _existential_block(whole, [rel_atom])
        return _universal_block(part, consequent), qp
    if qp == 3:
        consequent = _existential_block(part, [rel_atom])
        return _universal_block(whole, consequent), qp
    forward = _universal_block(part, _existential_block(whole, [rel_atom]))
    backward = _universal_block(whole, _existential_block(part, [rel_atom]))
    return And(forward, backward), qp


def cq_id_for(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def generate_cqs(pairs, table: MappingTable,
                 ontology: Ontology) -> tuple[list[CQ], list[PairRecord]]:
    """Build the deduplicated question set plus a record for every pair."""
    records = []
    by_key: dict[str, dict] = {}
    order: list[str] = []
    for pair in pairs:
        part_targets = table.targets_of(pair.part)
        whole_targets = table.targets_of(pair.whole)
        missing = [name for name, ts in
                   (("part", part_targets), ("whole", whole_targets)) if not ts]
        if missing:
            records.append(PairRecord(
                pair, UNMAPPED, detail=f"unmapped {' and '.join(missing)} synset"))
            continue
        relation = select_relation(pair.relation)
        try:
            formula, qp = build_cq_formula(part_targets, whole_targets,
                                           relation, ontology)
        except CQGenerationError as exc:
            records.append(PairRecord(pair, ILL_FORMED, detail=str(exc)))
            continue
        key = formula_key(formula)
        slot = by_key.get(key)
        if slot is None:
            text = render(formula)
            slot = {"formula": formula, "text": text, "relation": relation,
                    "qp": qp, "pairs": []}
            by_key[key] = slot
            order.append(key)
        slot["pairs"].append(pair)
        records.append(PairRecord(pair, GENERATED,
                                  cq_id=cq_id_for(slot["text"])))
    cqs = []
    for key in order:
        slot = by_key[key]
        cqs.append(CQ(cq_id_for(slot["text"]), slot["formula"], slot["text"],
                      slot["relation"], slot["qp"], tuple(slot["pairs"])))
    return cqs, records


# ---------------------------------------------------------------------------
# Domain precheck


@dataclass(frozen=True)
class DomainCheck:
    violation: bool
    details: tuple  # (position, signature class, offending classes)


def domain_precheck(pair, table: MappingTable, ontology: Ontology) -> DomainCheck:
    """Compare mapped classes against the relation's argument signature.

    A position violates when the side maps to at least one class and
    every such class is declared disjoint from the signature class.
    Attribute-kind targets do not constrain an object argument here;
    they are the metonymy diagnosis's business.
    """
    relation = select_relation(pair.relation)
    sig = ontology.signatures.get(relation, {})
    details = []
    violation = False
    for pos, synset in ((1, pair.part), (2, pair.whole)):
        required = sig.get(pos)
        if required is None:
            continue
        targets = table.targets_of(synset) or ()
        candidates = []
        for t in targets:
            if t.relation == INSTANCE:
                candidates.extend(sorted(ontology.instance_classes(t.concept)))
            elif ontology.classify_concept(t.concept) == CLASS_KIND:
                candidates.append(t.concept)
        if candidates and all(ontology.are_disjoint(c, required)
                              for c in candidates):
            violation = True
            details.append((pos, required, tuple(candidates)))
    return DomainCheck(violation, tuple(details))
