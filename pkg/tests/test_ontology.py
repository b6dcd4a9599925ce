import random

import pytest

from meroval.fol import Atom, Const, ForAll, Implies, Var
from meroval.kif import KifError
from meroval.ontology import (
    ATTRIBUTE_CLASS_KIND,
    ATTRIBUTE_KIND,
    CLASS_KIND,
    OntologyError,
    PatchError,
    RELATION_KIND,
    apply_patch,
    emit_formulas,
    parse_ontology,
    parse_patch,
    suggest_proper_part_rewrites,
)

import oracles

SMALL = """
(subclass Animal Organism)
(subclass Plant Organism)
(subclass Dog Animal)
(disjoint Animal Plant)
(partition Organism Animal Plant Fungus)
(subclass Fungus Organism)

(instance part Relation)
(subclass Relation Abstract)
(domain part 1 Object)
(domain part 2 Object)
(subrelation properPart part)

(subclass Attribute Abstract)
(instance Female Attribute)
(subclass ShapeAttribute Attribute)

; :id dog-has-heart
(forall (?X)
  (=> (instance ?X Dog)
      (exists (?Y) (and (instance ?Y Heart) (part ?Y ?X)))))
"""


@pytest.fixture()
def small():
    return parse_ontology(SMALL)


# -- parsing -------------------------------------------------------------------

def test_declarations_fill_the_structural_index(small):
    assert ("Dog", "Animal") in small.subclass_facts
    assert ("Animal", "Plant") in small.disjoint_facts
    assert small.partitions == [("Organism", ("Animal", "Plant", "Fungus"))]
    assert small.signatures["part"] == {1: "Object", 2: "Object"}
    assert ("properPart", "part") in small.subrelations


def test_named_axiom_keeps_its_id(small):
    ax = small.axiom_by_id("dog-has-heart")
    assert isinstance(ax.formula, ForAll)


def test_unnamed_axioms_get_fresh_ids():
    ont = parse_ontology("(forall (?X) (=> (p ?X) (q ?X)))")
    assert [ax.id for ax in ont.axioms] == ["a1"]


def test_duplicate_axiom_ids_are_rejected():
    text = ("; :id dup\n(forall (?X) (=> (p ?X) (q ?X)))\n"
            "; :id dup\n(forall (?X) (=> (q ?X) (p ?X)))")
    with pytest.raises(OntologyError, match="duplicate axiom ids"):
        parse_ontology(text)


def test_open_rule_axioms_are_rejected():
    with pytest.raises(KifError, match="closed formulas"):
        parse_ontology("(=> (instance ?X Dog) (instance ?X Animal))")


def test_ground_atoms_become_plain_facts():
    ont = parse_ontology("(part valve1 heart1)")
    assert ont.axioms == []
    assert ont.other_facts == [Atom("part", (Const("valve1"), Const("heart1")))]


def test_malformed_declarations_are_rejected():
    with pytest.raises(KifError, match="takes 2 arguments"):
        parse_ontology("(subclass A B C)")
    with pytest.raises(KifError, match="positive integer"):
        parse_ontology("(domain part zero Object)")
    with pytest.raises(KifError, match="parent and two parts"):
        parse_ontology("(partition Organism Animal)")


# -- structural queries ------------------------------------------------------------

def test_ancestors_are_reflexive_and_transitive(small):
    assert small.ancestors("Dog") == {"Dog", "Animal", "Organism"}
    assert small.is_subclass("Dog", "Dog")
    assert small.is_subclass("Dog", "Organism")
    assert not small.is_subclass("Organism", "Dog")


def test_is_subclass_matches_graph_walk_oracle(small, base_ontology):
    for ont in (small, base_ontology):
        names = sorted(ont.classes)
        for a in names:
            reach = oracles.reachable_superclasses(ont.subclass_facts, a)
            for b in names:
                assert ont.is_subclass(a, b) == (b in reach), (a, b)


def test_partition_parts_are_pairwise_disjoint(small):
    assert small.are_disjoint("Dog", "Plant")
    assert small.are_disjoint("Plant", "Fungus")
    assert small.are_disjoint("Fungus", "Animal")
    assert not small.are_disjoint("Dog", "Organism")


def test_classify_concept_kinds(small):
    assert small.classify_concept("Dog") == CLASS_KIND
    assert small.classify_concept("part") == RELATION_KIND
    assert small.classify_concept("Female") == ATTRIBUTE_KIND
    assert small.classify_concept("ShapeAttribute") == ATTRIBUTE_CLASS_KIND
    assert small.classify_concept("NeverHeardOfIt") == CLASS_KIND


def test_content_hash_tracks_content_not_identity(small):
    same = parse_ontology(SMALL)
    assert small.content_hash() == same.content_hash()
    patched = apply_patch(small, parse_patch(
        "(patch p (add-axiom (subclass Cat Animal)))"))
    assert patched.content_hash() != small.content_hash()


# -- emission ------------------------------------------------------------------------

def test_emission_carries_every_declaration(small):
    emitted = dict(emit_formulas(small))
    assert emitted["sub_0"] == Atom("subclass",
                                    (Const("Animal"), Const("Organism")))
    names = set(emitted)
    assert {"bridge_instance_propagation", "bridge_subclass_transitivity",
            "bridge_disjoint_symmetry", "bridge_disjoint_exclusion"} <= names
    assert "sig_part" in names
    assert "subrel_0" in names
    assert "dog-has-heart" in names


def test_emission_adds_partition_disjointness(small):
    emitted = dict(emit_formulas(small))
    disjoints = {(f.args[0].name, f.args[1].name)
                 for n, f in emitted.items() if n.startswith("dis_")}
    assert ("Animal", "Plant") in disjoints
    assert (("Animal", "Fungus") in disjoints
            or ("Fungus", "Animal") in disjoints)
    assert ("Plant", "Fungus") in disjoints


def test_relation_instances_are_not_emitted_as_terms(small):
    emitted = dict(emit_formulas(small))
    for name, f in emitted.items():
        if name.startswith("inst_"):
            assert f.args[0].name != "part"


# -- patches ----------------------------------------------------------------------

def test_patch_round_trip(small):
    patch = parse_patch("""
(patch tighten-part
  (set-signature part 2 Organism)
  (replace-axiom dog-has-heart
    (forall (?X)
      (=> (instance ?X Dog)
          (exists (?Y) (and (instance ?Y Heart) (properPart ?Y ?X))))))
  (add-axiom (subclass Heart BodyPart)))
""")
    assert patch.name == "tighten-part"
    assert [op.kind for op in patch.ops] == [
        "setSignature", "replaceAxiom", "addAxiom"]
    out = apply_patch(small, patch)
    assert out.version == small.version + 1
    assert out.signatures["part"][2] == "Organism"
    assert ("Heart", "BodyPart") in out.subclass_facts
    assert "properPart" in str(out.axiom_by_id("dog-has-heart").formula)
    # the original is untouched
    assert small.signatures["part"][2] == "Object"


def test_replace_axiom_requires_an_existing_id(small):
    patch = parse_patch(
        "(patch p (replace-axiom no-such-id (forall (?X) (=> (p ?X) (q ?X)))))")
    with pytest.raises(PatchError, match="no axiom with id"):
        apply_patch(small, patch)


def test_patch_grammar_errors():
    with pytest.raises(PatchError, match="exactly one"):
        parse_patch("(patch a)(patch b)")
    with pytest.raises(PatchError, match="unknown patch operation"):
        parse_patch("(patch p (drop-axiom a1))")
    with pytest.raises(PatchError, match="takes an id and a formula"):
        parse_patch("(patch p (replace-axiom a1))")


def test_bundled_correction_patches_parse():
    import pathlib
    datasets = (pathlib.Path(__file__).resolve().parent.parent
                / "src" / "meroval" / "datasets")
    expected = {
        "substance_patch.kif": ("substance-corrections",
                                {"replaceAxiom": 5, "addAxiom": 6}),
        "member_patch.kif": ("member-corrections",
                             {"setSignature": 1, "replaceAxiom": 2,
                              "addAxiom": 12}),
        "part_patch.kif": ("part-augmentation", {"addAxiom": 11}),
    }
    for fname, (name, kinds) in expected.items():
        patch = parse_patch((datasets / fname).read_text(encoding="utf-8"))
        assert patch.name == name
        counts: dict[str, int] = {}
        for op in patch.ops:
            counts[op.kind] = counts.get(op.kind, 0) + 1
        assert counts == kinds, fname


def test_proper_part_rewrite_suggestions(small):
    # dog-has-heart relates a Heart to a Dog via plain part: a candidate
    assert suggest_proper_part_rewrites(small) == ["dog-has-heart"]
    reflexive = parse_ontology("""
; :id self-part
(forall (?X) (=> (instance ?X Object) (part ?X ?X)))
""")
    assert suggest_proper_part_rewrites(reflexive) == []
