import pytest

from meroval.mapping import (
    ASSIGNMENT,
    BLC_PROPAGATED,
    EQUIVALENCE,
    SUBSUMPTION,
    MappingError,
    MappingTable,
    Target,
    VersionConflict,
    parse_mapping,
    parse_official,
    parse_tsv,
    target_from_token,
)

from conftest import MIN_DESCENDANTS


def t(token: str) -> Target:
    return target_from_token(token)


# -- tokens ------------------------------------------------------------------------

def test_target_token_round_trip():
    assert t("BodyPart+") == Target("BodyPart", SUBSUMPTION)
    assert t("Heart=") == Target("Heart", EQUIVALENCE)
    assert t("BodyPart+").token() == "BodyPart+"


def test_bad_target_tokens_are_rejected():
    with pytest.raises(MappingError):
        target_from_token("BodyPart")
    with pytest.raises(MappingError):
        target_from_token("+")


# -- file formats -------------------------------------------------------------------

ANNOTATED = """\
  1 license header
00000021 03 n 01 heart 0 000 | the pump &%Heart=
00000031 03 n 01 blood 0 000 | red fluid &%BodySubstance+ &%Liquid+
00000041 03 n 01 stone 0 000 | no mapping here
"""


def test_parse_official_reads_gloss_tokens():
    out = parse_official(ANNOTATED)
    assert out == {
        21: (Target("Heart", EQUIVALENCE),),
        31: (Target("BodySubstance", SUBSUMPTION),
             Target("Liquid", SUBSUMPTION)),
    }


def test_parse_official_rejects_malformed_tokens():
    bad = "00000021 03 n 01 heart 0 000 | the pump &%Heart*\n"
    with pytest.raises(MappingError, match="malformed mapping token"):
        parse_official(bad)


def test_parse_tsv_resolves_senses(corpus):
    text = ("# comment\n"
            "heart#1:n\tHeart\t=\n"
            "\n"
            "muscle#1:n\tMuscle\t+\n"
            "muscle#1:n\tTissue\t+\n")
    out = parse_tsv(text, corpus)
    heart = corpus.resolve("heart#1:n")
    muscle = corpus.resolve("muscle#1:n")
    assert out[heart] == (Target("Heart", EQUIVALENCE),)
    assert out[muscle] == (Target("Muscle", SUBSUMPTION),
                           Target("Tissue", SUBSUMPTION))


def test_parse_tsv_rejects_bad_rows(corpus):
    with pytest.raises(MappingError, match="3 tab-separated fields"):
        parse_tsv("heart#1:n\tHeart\n", corpus)
    with pytest.raises(MappingError, match="bad relation"):
        parse_tsv("heart#1:n\tHeart\t*\n", corpus)


def test_parse_mapping_detects_the_format(corpus):
    assert parse_mapping(ANNOTATED, corpus)[21] == (
        Target("Heart", EQUIVALENCE),)
    assert parse_mapping("heart#1:n\tHeart\t=\n", corpus) == {
        corpus.resolve("heart#1:n"): (Target("Heart", EQUIVALENCE),)}
    assert parse_mapping("", corpus) == {}


def test_bundled_correction_tables_parse():
    import pathlib
    datasets = (pathlib.Path(__file__).resolve().parent.parent
                / "src" / "meroval" / "datasets")
    rows = [line for line in
            (datasets / "blc_corrections.tsv").read_text().splitlines()
            if line.strip() and not line.startswith("#")]
    assert len(rows) == 3
    for row in rows:
        sense, concept, relation = row.split("\t")
        assert sense.endswith(":n")
        assert relation in ("+", "=", "@")
    catalogue = [line for line in
                 (datasets / "substance_catalogue.tsv").read_text().splitlines()
                 if line.strip() and not line.startswith("#")]
    assert len(catalogue) == 8
    assert all(len(line.split("\t")) == 6 for line in catalogue)


# -- table edits ---------------------------------------------------------------------

def test_ingest_sets_version_and_originals():
    table = MappingTable.ingest({21: (t("Heart="),)})
    assert table.version == 1
    entry = table.entries[21]
    assert entry.targets == entry.original_targets == (t("Heart="),)
    assert entry.provenance == ASSIGNMENT


def test_edit_bumps_version_and_keeps_originals():
    table = MappingTable.ingest({21: (t("Heart="),)})
    table.edit(21, [t("Organ+")], note="too specific")
    entry = table.entries[21]
    assert table.version == 2
    assert entry.targets == (t("Organ+"),)
    assert entry.original_targets == (t("Heart="),)
    assert entry.note == "too specific"


def test_edit_with_stale_base_version_conflicts():
    table = MappingTable.ingest({21: (t("Heart="),)})
    table.edit(21, [t("Organ+")])
    with pytest.raises(VersionConflict) as err:
        table.edit(21, [t("BodyPart+")], base_version=1)
    assert err.value.expected == 1
    assert err.value.actual == 2
    # table untouched by the failed edit
    assert table.entries[21].targets == (t("Organ+"),)


def test_edit_validates_relations():
    table = MappingTable.ingest({})
    with pytest.raises(MappingError, match="bad mapping relation"):
        table.edit(21, [Target("Heart", "*")])


def test_edit_can_introduce_a_new_synset():
    table = MappingTable.ingest({})
    table.edit(99, [t("Heart=")])
    assert table.entries[99].original_targets == (t("Heart="),)


def test_journal_replay_reconstructs_the_table(corpus, base_ontology, table):
    table.edit(corpus.resolve("heart#1:n"), [t("Organ+")], note="n1")
    table.apply_heuristics(corpus, base_ontology, "H1")
    rebuilt = MappingTable.from_journal(table.journal)
    assert rebuilt.version == table.version
    assert rebuilt.state_hash() == table.state_hash()
    assert rebuilt.entries.keys() == table.entries.keys()
    probe = corpus.resolve("hyaenidae#1:n")
    assert rebuilt.entries[probe].targets == table.entries[probe].targets
    assert rebuilt.entries[probe].provenance == "heuristic:H1"


def test_state_hash_tracks_content():
    a = MappingTable.ingest({21: (t("Heart="),)})
    b = MappingTable.ingest({21: (t("Heart="),)})
    assert a.state_hash() == b.state_hash()
    b.edit(21, [t("Organ+")])
    assert a.state_hash() != b.state_hash()


# -- heuristics ------------------------------------------------------------------------

H1_SENSES = ["fish_genus#1:n", "clupea#1:n", "salmo#1:n", "esox#1:n",
             "hyaenidae#1:n"]


def test_h1_rewrites_animal_groups(corpus, base_ontology, table):
    changed = table.apply_heuristics(corpus, base_ontology, "H1")
    assert changed == sorted(corpus.resolve(s) for s in H1_SENSES)
    for synset in changed:
        entry = table.entries[synset]
        assert entry.targets == (t("GroupOfAnimals+"),)
        assert entry.provenance == "heuristic:H1"
        assert entry.original_targets != entry.targets
    # idempotent: nothing left to change
    assert table.apply_heuristics(corpus, base_ontology, "H1") == []


def test_h2_rewrites_plant_groups_to_plain_group(corpus, base_ontology, table):
    changed = table.apply_heuristics(corpus, base_ontology, "H2")
    expected = sorted(corpus.resolve(s)
                      for s in ("genus_rosa#1:n", "genus_ulmus#1:n"))
    assert changed == expected
    for synset in changed:
        assert table.entries[synset].targets == (t("Group+"),)


def test_h2_prime_needs_the_plant_group_class(corpus, base_ontology, table):
    with pytest.raises(MappingError,
                       match="heuristic H2' needs the GroupOfPlants class"):
        table.apply_heuristics(corpus, base_ontology, "H2'")


def test_h2_prime_overrides_h2_after_the_class_exists(corpus, base_ontology,
                                                      table):
    from meroval.ontology import apply_patch, parse_patch
    patched = apply_patch(base_ontology, parse_patch(
        "(patch add-plant-groups (add-axiom (subclass GroupOfPlants Group)))"))
    table.apply_heuristics(corpus, patched, "H2")
    changed = table.apply_heuristics(corpus, patched, "H2p")  # alias
    expected = sorted(corpus.resolve(s)
                      for s in ("genus_rosa#1:n", "genus_ulmus#1:n"))
    assert changed == expected
    for synset in changed:
        entry = table.entries[synset]
        assert entry.targets == (t("GroupOfPlants+"),)
        assert entry.provenance == "heuristic:H2'"


def test_unknown_heuristic_phase_is_rejected(corpus, base_ontology, table):
    with pytest.raises(MappingError, match="unknown heuristic phase"):
        table.apply_heuristics(corpus, base_ontology, "H9")


# -- BLC propagation ----------------------------------------------------------------------

TREE_FOLLOWERS = ["larch#2:n", "oak#2:n", "elm#1:n", "pine#1:n", "birch#1:n",
                  "maple#1:n", "cedar#1:n"]


def test_propagation_rewrites_equally_mapped_hyponyms(corpus, table):
    blcs = corpus.compute_blcs(MIN_DESCENDANTS)
    tree = corpus.resolve("tree#1:n")
    correction = {tree: (t("BotanicalTree+"),)}
    count = table.propagate_correction(corpus, blcs, correction, note="fix")
    assert count == len(TREE_FOLLOWERS)
    assert table.entries[tree].targets == (t("BotanicalTree+"),)
    for sense in TREE_FOLLOWERS:
        entry = table.entries[corpus.resolve(sense)]
        assert entry.targets == (t("BotanicalTree+"),)
        assert entry.provenance == BLC_PROPAGATED
        assert entry.note == "fix"
    # yew keeps its own deviating mapping
    yew = table.entries[corpus.resolve("yew#1:n")]
    assert yew.targets == yew.original_targets
    assert yew.provenance == ASSIGNMENT


def test_propagation_requires_a_mapped_blc(corpus, table):
    blcs = corpus.compute_blcs(MIN_DESCENDANTS)
    unmapped = corpus.resolve("pedicel#1:n")
    assert table.targets_of(unmapped) is None
    with pytest.raises(MappingError, match="no mapping entry"):
        table.propagate_correction(corpus, blcs,
                                   {unmapped: (t("PlantPart+"),)})


def test_propagation_skips_manual_edits(corpus, table):
    blcs = corpus.compute_blcs(MIN_DESCENDANTS)
    tree = corpus.resolve("tree#1:n")
    oak = corpus.resolve("oak#2:n")
    table.edit(oak, [t("Oak+")], note="hand-checked")
    count = table.propagate_correction(corpus, blcs,
                                       {tree: (t("BotanicalTree+"),)})
    assert count == len(TREE_FOLLOWERS) - 1
    assert table.entries[oak].targets == (t("Oak+"),)
