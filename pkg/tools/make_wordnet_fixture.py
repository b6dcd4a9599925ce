"""Generate the bundled noun database fixture.

The synset table below is the single source of truth: it lists lemmas,
hypernym parents, meronym pointers (declared on the whole-side synset),
and the ontology mapping tokens that go into the annotated copy.
Everything else is derived: hyponym backlinks, inverse holonym
pointers, the sense index, and the byte offsets that real database
files use as synset identifiers.

Offsets are the byte position of each data line, so the file is written
in two passes: a first pass with placeholder offsets fixes every line
width (offsets are always eight digits), a second pass substitutes the
real positions. Run from anywhere; paths resolve against the repo root.
"""

from __future__ import annotations

import sys
from collections import namedtuple
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT_DIR = ROOT / "src" / "meroval" / "fixtures" / "wordnet"

Syn = namedtuple("Syn", "key lexfile lemmas parents merons mapping gloss")

# (symbol, part_key) pairs live on the whole-side synset. Inverse #
# pointers are generated on the part side for every pair except the ones
# listed in NO_INVERSE (inverses are optional in the source data, so the
# parser has to cope with at least one missing).
SYNSETS = [
    Syn("entity", 3, ["entity"], [], [], [],
        "that which is perceived or known or inferred to have its own "
        "distinct existence"),
    Syn("object", 3, ["object", "physical_object"], ["entity"], [], [],
        "a tangible and visible entity"),
    Syn("organism", 3, ["organism", "being"], ["object"], [], [],
        "a living thing that has the ability to act or function "
        "independently"),
    Syn("animal", 5, ["animal", "animate_being", "beast"], ["organism"], [],
        ["Animal+"],
        "a living organism characterized by voluntary movement"),
    Syn("carnivore", 5, ["carnivore"], ["animal"], [], ["Carnivore+"],
        "a terrestrial or aquatic flesh-eating mammal"),
    Syn("hyaena", 5, ["hyaena", "hyena"], ["carnivore"], [], ["Carnivore+"],
        "doglike nocturnal mammal of Africa and southern Asia that feeds "
        "chiefly on carrion"),
    Syn("fish", 5, ["fish"], ["animal"], [], ["Fish+"],
        "any of various mostly cold-blooded aquatic vertebrates usually "
        "having scales"),
    Syn("herring", 5, ["herring"], ["fish"], [], ["Fish+"],
        "soft-finned food fish of northern seas"),
    Syn("salmon", 5, ["salmon"], ["fish"], [], ["Fish+"],
        "any of various large food and game fishes of northern waters"),
    Syn("pike", 5, ["pike"], ["fish"], [], ["Fish+"],
        "any of several elongate long-snouted freshwater game and food "
        "fishes"),
    Syn("person", 18, ["person", "individual"], ["organism"],
        [("%p", "heart_organ"), ("%p", "brain")], ["Human="],
        "a human being"),
    Syn("child", 18, ["child", "kid"], ["person"], [], ["Human+"],
        "a young person"),
    Syn("priest", 18, ["priest"], ["person"], [], ["Human+"],
        "a clergyman in Christian churches"),
    Syn("plant", 20, ["plant", "flora"], ["organism"], [], ["Plant+"],
        "a living organism lacking the power of locomotion"),
    Syn("tree", 20, ["tree"], ["plant"], [("%p", "trunk")], ["Plant="],
        "a tall perennial woody plant having a main trunk"),
    Syn("larch_tree", 20, ["larch"], ["tree"], [("%s", "larch_wood")],
        ["Plant="],
        "any of numerous conifers of the genus Larix"),
    Syn("oak_tree", 20, ["oak"], ["tree"], [("%s", "oak_wood")], ["Plant="],
        "a deciduous tree of the genus Quercus"),
    Syn("elm", 20, ["elm"], ["tree"], [], ["Plant="],
        "any of various trees of the genus Ulmus"),
    Syn("pine", 20, ["pine"], ["tree"], [], ["Plant="],
        "a coniferous tree of the genus Pinus"),
    Syn("birch", 20, ["birch"], ["tree"], [], ["Plant="],
        "hardy deciduous trees of northern temperate regions having "
        "white or yellowish bark"),
    Syn("maple", 20, ["maple"], ["tree"], [], ["Plant="],
        "any of numerous trees of the genus Acer"),
    Syn("cedar", 20, ["cedar"], ["tree"], [], ["Plant="],
        "any of numerous evergreen conifers with fragrant durable wood"),
    Syn("yew", 20, ["yew"], ["tree"], [], ["Plant+"],
        "evergreen of the genus Taxus having needlelike leaves and "
        "scarlet berries"),
    Syn("rose", 20, ["rose", "rosebush"], ["plant"], [], ["FloweringPlant+"],
        "any of many shrubs of the genus Rosa that bear roses"),
    Syn("flower", 20, ["flower", "bloom", "blossom"], ["plant"],
        [("%p", "pedicel")], ["FloweringPlant+"],
        "a plant cultivated for its blooms or blossoms"),
    Syn("trunk", 20, ["trunk", "tree_trunk", "bole"], ["object"], [],
        ["PlantPart+"],
        "the main stem of a tree"),
    Syn("pedicel", 20, ["pedicel", "pedicle"], ["object"], [], [],
        "a small stalk bearing a single flower"),
    Syn("body_part", 8, ["body_part"], ["object"], [], [],
        "any part of an organism"),
    Syn("heart_organ", 8, ["heart", "pump", "ticker"], ["body_part"],
        [("%p", "heart_valve"), ("%s", "muscle")], ["Heart+"],
        "the hollow muscular organ that maintains the circulation of "
        "the blood"),
    Syn("brain", 8, ["brain", "encephalon"], ["body_part"], [], ["Brain+"],
        "the organ of thought and neural coordination"),
    Syn("heart_valve", 8, ["heart_valve", "cardiac_valve"], ["body_part"],
        [], ["BodyPart+"],
        "a valve that controls the flow of blood through the heart"),
    Syn("skull", 8, ["skull"], ["body_part"], [], ["Skull="],
        "the bony skeleton of the head"),
    Syn("head", 8, ["head", "caput"], ["body_part"], [("%p", "skull")],
        ["Head="],
        "the upper part of the body containing the brain and the face"),
    Syn("muscle", 8, ["muscle", "musculus"], ["body_part"], [], ["Muscle+"],
        "animal tissue consisting predominantly of contractile cells"),
    Syn("heart_courage", 7, ["heart", "mettle", "nerve", "spunk"],
        ["entity"], [], [],
        "the courage to carry on"),
    Syn("substance", 3, ["substance", "matter"], ["entity"], [], [],
        "the real physical matter of which a thing consists"),
    Syn("wood", 27, ["wood"], ["substance"], [], ["Wood+"],
        "the hard fibrous lignified substance under the bark of trees"),
    Syn("larch_wood", 27, ["larch"], ["wood"], [], ["Wood+"],
        "durable wood of a larch tree"),
    Syn("oak_wood", 27, ["oak"], ["wood"], [], ["Wood+"],
        "the hard durable wood of an oak tree"),
    Syn("indocin", 27, ["indocin"], ["substance"],
        [("%s", "indomethacin")], ["Medicine+"],
        "a nonsteroidal anti-inflammatory drug (trade name Indocin)"),
    Syn("indomethacin", 27, ["indomethacin"], ["substance"], [],
        ["Medicine+"],
        "a nonsteroidal anti-inflammatory drug used to reduce "
        "inflammation"),
    Syn("group", 3, ["group", "grouping"], ["entity"], [], ["Collection+"],
        "any number of entities considered as a unit"),
    Syn("taxonomic_group", 14,
        ["taxonomic_group", "taxonomic_category", "taxon"], ["group"], [],
        [],
        "animal or plant group having natural relations"),
    Syn("genus", 14, ["genus"], ["taxonomic_group"], [], [],
        "a taxonomic group containing one or more species"),
    Syn("fish_genus", 14, ["fish_genus"], ["genus"], [], ["Fish+"],
        "any of various genus of fish"),
    Syn("clupea", 14, ["clupea", "genus_clupea"], ["fish_genus"],
        [("%m", "herring")], ["Fish+"],
        "type genus of the family Clupeidae: typical herrings"),
    Syn("salmo", 14, ["salmo", "genus_salmo"], ["fish_genus"],
        [("%m", "salmon")], ["Fish+"],
        "type genus of the family Salmonidae: salmon and trout"),
    Syn("esox", 14, ["esox", "genus_esox"], ["fish_genus"],
        [("%m", "pike")], ["Fish+"],
        "type and only genus of the family Esocidae"),
    Syn("genus_rosa", 14, ["genus_rosa", "rosa"], ["genus"],
        [("%m", "rose")], ["FloweringPlant+"],
        "large genus of erect or climbing prickly shrubs"),
    Syn("genus_ulmus", 14, ["genus_ulmus", "ulmus"], ["genus"],
        [("%m", "elm")], ["Plant+"],
        "type genus of the family Ulmaceae: elm trees"),
    Syn("family_tax", 14, ["family"], ["taxonomic_group"], [], [],
        "a taxonomic group containing one or more genera"),
    Syn("hyaenidae", 5, ["hyaenidae", "family_hyaenidae"], ["family_tax"],
        [("%m", "hyaena")], ["Carnivore+"],
        "hyenas"),
    Syn("social_group", 14, ["social_group"], ["group"], [], [],
        "people sharing some social relation"),
    Syn("family_social", 14, ["family", "household"], ["social_group"],
        [("%m", "child")], ["Group+"],
        "a social unit living together"),
    Syn("people", 14, ["people"], ["social_group"], [("%m", "person")],
        ["GroupOfAnimals+"],
        "any group of human beings collectively"),
    Syn("priesthood", 14, ["priesthood"], ["social_group"],
        [("%m", "priest")], ["Profession+"],
        "the body of ordained religious practitioners"),
]

# pairs whose inverse holonym pointer is deliberately left out
NO_INVERSE = {("genus_ulmus", "elm")}

INVERSE = {"%p": "#p", "%s": "#s", "%m": "#m"}

# polysemous lemmas whose sense numbering differs from file order
SENSE_ORDER = {
    "heart": ["heart_courage", "heart_organ"],
    "larch": ["larch_wood", "larch_tree"],
    "oak": ["oak_wood", "oak_tree"],
    "family": ["family_tax", "family_social"],
}

SYMBOL_ORDER = ["@", "~", "%p", "%s", "%m", "#p", "#s", "#m"]

HEADER = (
    "  1 This file is part of a hand-built lexical database fixture.\n"
    "  2 The layout follows the stock noun database format: data lines\n"
    "  3 carry synsets keyed by byte offset, and the companion index\n"
    "  4 maps each lemma to its senses in numbered order.\n"
    "  5 The contents are a small curated corpus, not a full release.\n")


def build_pointers():
    """Per-synset pointer lists: hypernyms, hyponym backlinks, merons,
    then the derived inverse holonyms."""
    order = {s.key: i for i, s in enumerate(SYNSETS)}
    byname = {s.key: s for s in SYNSETS}
    children: dict[str, list] = {s.key: [] for s in SYNSETS}
    for s in SYNSETS:
        for p in s.parents:
            children[p].append(s.key)
    inverses: dict[str, list] = {s.key: [] for s in SYNSETS}
    for s in SYNSETS:
        for symbol, part in s.merons:
            if (s.key, part) in NO_INVERSE:
                continue
            inverses[part].append((INVERSE[symbol], s.key))
    out = {}
    for s in SYNSETS:
        ptrs = [("@", p) for p in s.parents]
        ptrs += [("~", c) for c in sorted(children[s.key], key=order.get)]
        ptrs += list(s.merons)
        ptrs += inverses[s.key]
        out[s.key] = ptrs
    assert all(byname[t] for _, t in sum(out.values(), []))
    return out


def data_line(syn, offsets, pointers, annotated=False) -> str:
    words = " ".join(f"{w} 0" for w in syn.lemmas)
    ptrs = " ".join(f"{sym} {offsets[t]:08d} n 0000"
                    for sym, t in pointers[syn.key])
    head = (f"{offsets[syn.key]:08d} {syn.lexfile:02d} n "
            f"{len(syn.lemmas):02x} {words} {len(pointers[syn.key]):03d}")
    if ptrs:
        head += " " + ptrs
    gloss = syn.gloss
    if annotated and syn.mapping:
        gloss += " " + " ".join(f"&%{m}" for m in syn.mapping)
    return f"{head} | {gloss}"


def layout_offsets(pointers) -> dict[str, int]:
    # line widths never change between passes: offsets are fixed-width
    offsets = {s.key: 0 for s in SYNSETS}
    for _ in range(2):
        pos = len(HEADER.encode())
        new = {}
        for syn in SYNSETS:
            new[syn.key] = pos
            pos += len(data_line(syn, offsets, pointers).encode()) + 1
        if new == offsets:
            break
        offsets = new
    else:
        raise AssertionError("offset layout did not converge")
    return offsets


def index_lines(offsets, pointers) -> list[str]:
    senses: dict[str, list] = {}
    for syn in SYNSETS:
        for lemma in syn.lemmas:
            senses.setdefault(lemma, []).append(syn.key)
    for lemma, keys in SENSE_ORDER.items():
        assert sorted(senses[lemma]) == sorted(keys), lemma
        senses[lemma] = list(keys)
    byname = {s.key: s for s in SYNSETS}
    lines = []
    for lemma in sorted(senses):
        keys = senses[lemma]
        symbols = {sym for k in keys for sym, _ in pointers[k]}
        symbols = [s for s in SYMBOL_ORDER if s in symbols]
        n = len(keys)
        offs = " ".join(f"{offsets[k]:08d}" for k in keys)
        ptr_part = f"{len(symbols)} {' '.join(symbols)}".rstrip()
        lines.append(f"{lemma} n {n} {ptr_part} {n} {n} {offs}")
    return lines


def check(data_text: str, index_text: str, annotated_text: str):
    sys.path.insert(0, str(ROOT / "src"))
    from meroval.lexicon import Corpus
    from meroval.mapping import parse_mapping

    corpus = Corpus.from_texts(data_text, index_text)
    assert len(corpus.synsets) == len(SYNSETS)
    for sense, key in [("heart#1:n", "heart_courage"),
                       ("heart#2:n", "heart_organ"),
                       ("larch#1:n", "larch_wood"),
                       ("larch#2:n", "larch_tree"),
                       ("oak#1:n", "oak_wood"),
                       ("family#2:n", "family_social"),
                       ("group#1:n", "group"),
                       ("tree#1:n", "tree")]:
        resolved = corpus.resolve(sense)
        assert corpus.synsets[resolved].words[0][0] in (
            key, sense.split("#")[0]), (sense, key)
    pairs = corpus.meronymy_pairs()
    assert len(pairs) == 19, len(pairs)
    counts = corpus.descendant_counts()
    tree_off = corpus.resolve("tree#1:n")
    assert counts[tree_off] == 8, counts[tree_off]
    blcs = corpus.compute_blcs(8)
    elm_off = corpus.resolve("elm#1:n")
    assert blcs[elm_off] == tree_off
    assert blcs[tree_off] == tree_off
    mapping = parse_mapping(annotated_text, corpus)
    assert len(mapping) == 45, len(mapping)
    return pairs


def main():
    pointers = build_pointers()
    offsets = layout_offsets(pointers)
    data_text = HEADER + "\n".join(
        data_line(s, offsets, pointers) for s in SYNSETS) + "\n"
    annotated_text = HEADER + "\n".join(
        data_line(s, offsets, pointers, annotated=True)
        for s in SYNSETS) + "\n"
    index_text = HEADER + "\n".join(index_lines(offsets, pointers)) + "\n"

    pairs = check(data_text, index_text, annotated_text)

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    (OUT_DIR / "data.noun").write_text(data_text, encoding="utf-8")
    (OUT_DIR / "index.noun").write_text(index_text, encoding="utf-8")
    (OUT_DIR / "annotated.noun").write_text(annotated_text, encoding="utf-8")
    print(f"wrote {len(SYNSETS)} synsets, {len(pairs)} meronymy pairs "
          f"to {OUT_DIR}")


if __name__ == "__main__":
    main()
