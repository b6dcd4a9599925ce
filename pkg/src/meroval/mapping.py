"""Synset-to-concept mappings: parsing, edits, heuristics, propagation.

Entries keep both their current targets and the targets they were first
ingested with. Correction machinery (the group heuristics and BLC
propagation) tests premises against the original targets, so corrections
stay idempotent and re-runnable after other edits have landed.

Every change appends a self-contained record to the table's journal;
replaying the journal from scratch reconstructs the exact table state.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .lexicon import Corpus, parse_data_line, _content_lines

ASSIGNMENT = "assignment"
MANUAL = "manual"
BLC_PROPAGATED = "blc-propagated"

EQUIVALENCE = "="
SUBSUMPTION = "+"
INSTANCE = "@"
_RELATIONS = (EQUIVALENCE, SUBSUMPTION, INSTANCE)


class MappingError(Exception):
    pass


class VersionConflict(Exception):
    def __init__(self, expected: int, actual: int):
        super().__init__(
            f"mapping version is {actual}, edit was based on {expected}")
        self.expected = expected
        self.actual = actual


@dataclass(frozen=True)
class Target:
    concept: str
    relation: str

    def token(self) -> str:
        return f"{self.concept}{self.relation}"


def target_from_token(token: str) -> Target:
    if len(token) < 2 or token[-1] not in _RELATIONS:
        raise MappingError(f"bad target token {token!r}")
    return Target(token[:-1], token[-1])


@dataclass
class MappingEntry:
    synset: int
    targets: tuple
    original_targets: tuple
    provenance: str = ASSIGNMENT
    note: str = ""


def _targets_from_lists(raw) -> tuple:
    out = []
    for concept, relation in raw:
        if relation not in _RELATIONS:
            raise MappingError(f"bad mapping relation {relation!r}")
        out.append(Target(concept, relation))
    return tuple(out)


class MappingTable:
    def __init__(self):
        self.entries: dict[int, MappingEntry] = {}
        self.version = 0
        self.journal: list[dict] = []

    # -- construction --------------------------------------------------------

    @classmethod
    def ingest(cls, assignments: dict[int, tuple]) -> "MappingTable":
        table = cls()
        changes = []
        for synset in sorted(assignments):
            targets = assignments[synset]
            table.entries[synset] = MappingEntry(
                synset, targets, targets, ASSIGNMENT)
            changes.append(_change_record(table.entries[synset]))
        table.version = 1
        table.journal.append({"op": "ingest", "version": 1,
                              "changes": changes})
        return table

    @classmethod
    def from_journal(cls, records) -> "MappingTable":
        table = cls()
        for rec in records:
            for change in rec["changes"]:
                synset = change["synset"]
                targets = _targets_from_lists(change["targets"])
                if rec["op"] == "ingest":
                    table.entries[synset] = MappingEntry(
                        synset, targets, targets, ASSIGNMENT)
                else:
                    table._apply_change(synset, targets,
                                        change["provenance"],
                                        change.get("note", ""))
            table.version = rec["version"]
            table.journal.append(rec)
        return table

    def _apply_change(self, synset, targets, provenance, note):
        entry = self.entries.get(synset)
        if entry is None:
            self.entries[synset] = MappingEntry(
                synset, targets, targets, provenance, note)
        else:
            entry.targets = targets
            entry.provenance = provenance
            entry.note = note

    def _commit(self, op: str, changes: list, **meta):
        self.version += 1
        rec = {"op": op, "version": self.version, "changes": changes}
        rec.update(meta)
        self.journal.append(rec)

    # -- queries --------------------------------------------------------------

    def targets_of(self, synset: int):
        entry = self.entries.get(synset)
        return entry.targets if entry else None

    def state_hash(self) -> str:
        h = hashlib.sha256()
        for synset in sorted(self.entries):
            e = self.entries[synset]
            h.update(json.dumps(
                [synset, [t.token() for t in e.targets],
                 [t.token() for t in e.original_targets],
                 e.provenance, e.note]).encode())
        h.update(str(self.version).encode())
        return h.hexdigest()

    # -- edits ------------------------------------------------------------------

    def edit(self, synset: int, targets, note: str = "",
             base_version: int | None = None,
             provenance: str = MANUAL) -> MappingEntry:
        if base_version is not None and base_version != self.version:
            raise VersionConflict(base_version, self.version)
        for t in targets:
            if t.relation not in _RELATIONS:
                raise MappingError(f"bad mapping relation {t.relation!r}")
        targets = tuple(targets)
        self._apply_change(synset, targets, provenance, note)
        entry = self.entries[synset]
        self._commit("edit", [_change_record(entry)])
        return entry

    def apply_heuristics(self, corpus: Corpus, ontology, phase: str) -> list[int]:
        """Rewrite taxonomic-group synsets mapped to organism classes.

        H1 retargets animal groups, H2 and H2' plant groups; H2' needs the
        dedicated plant-group class and fails cleanly when the ontology
        lacks it. Premises test the original targets, so a later phase can
        override an earlier one. Returns the synsets changed.
        """
        phase = "H2'" if phase == "H2p" else phase
        rules = {
            "H1": ("Animal", Target("GroupOfAnimals", SUBSUMPTION)),
            "H2": ("Plant", Target("Group", SUBSUMPTION)),
            "H2'": ("Plant", Target("GroupOfPlants", SUBSUMPTION)),
        }
        if phase not in rules:
            raise MappingError(f"unknown heuristic phase {phase!r}")
        premise_class, target = rules[phase]
        if target.concept not in ontology.classes:
            raise MappingError(
                f"heuristic {phase} needs the {target.concept} class, "
                f"which this ontology does not declare")
        group_off = corpus.resolve("group#1:n")
        changed = []
        changes = []
        for synset in sorted(self.entries):
            entry = self.entries[synset]
            if not corpus.is_hyponym_of(synset, group_off):
                continue
            if not any(ontology.is_subclass(t.concept, premise_class)
                       for t in entry.original_targets):
                continue
            new_targets = (target,)
            if entry.targets == new_targets:
                continue
            entry.targets = new_targets
            entry.provenance = f"heuristic:{phase}"
            entry.note = ""
            changed.append(synset)
            changes.append(_change_record(entry))
        if changes:
            self._commit("heuristics", changes, phase=phase)
        return changed

    def propagate_correction(self, corpus: Corpus, blcs: dict[int, int],
                             corrections: dict[int, tuple],
                             note: str = "") -> int:
        """Apply corrected BLC mappings and push them down the hierarchy.

        Each corrected BLC entry is rewritten in place; untouched
        assignment-based entries whose BLC this is and whose original
        targets equal the BLC's original targets follow along. The
        returned count covers the propagated hyponyms only.
        """
        changes = []
        propagated = 0
        for blc_synset in sorted(corrections):
            new_targets = corrections[blc_synset]
            blc_entry = self.entries.get(blc_synset)
            if blc_entry is None:
                raise MappingError(
                    f"BLC synset {blc_synset} has no mapping entry")
            blc_original = blc_entry.original_targets
            blc_entry.targets = tuple(new_targets)
            blc_entry.provenance = MANUAL
            blc_entry.note = note
            changes.append(_change_record(blc_entry))
            for synset in sorted(self.entries):
                if synset == blc_synset:
                    continue
                entry = self.entries[synset]
                if blcs.get(synset) != blc_synset:
                    continue
                if entry.provenance != ASSIGNMENT:
                    continue
                if entry.original_targets != blc_original:
                    continue
                entry.targets = tuple(new_targets)
                entry.provenance = BLC_PROPAGATED
                entry.note = note
                changes.append(_change_record(entry))
                propagated += 1
        if changes:
            self._commit("blc-propagation", changes, propagated=propagated)
        return propagated


def _change_record(entry: MappingEntry) -> dict:
    return {
        "synset": entry.synset,
        "targets": [[t.concept, t.relation] for t in entry.targets],
        "provenance": entry.provenance,
        "note": entry.note,
    }


# ---------------------------------------------------------------------------
# File formats


def parse_official(text: str) -> dict[int, tuple]:
    """Annotated database lines: &%Concept= tokens at the end of the gloss."""
    out: dict[int, tuple] = {}
    for lineno, line in _content_lines(text):
        syn = parse_data_line(line, lineno)
        targets = []
        for tok in syn.gloss.split():
            if not tok.startswith("&%"):
                continue
            body = tok[2:]
            if len(body) < 2 or body[-1] not in _RELATIONS:
                raise MappingError(
                    f"line {lineno}: malformed mapping token {tok!r}")
            targets.append(Target(body[:-1], body[-1]))
        if targets:
            out[syn.offset] = tuple(targets)
    return out


def parse_tsv(text: str, corpus: Corpus) -> dict[int, tuple]:
    """Canonical rows: lemma#k:n<TAB>Concept<TAB>relation."""
    out: dict[int, list] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise MappingError(
                f"line {lineno}: expected 3 tab-separated fields")
        sense, concept, relation = (p.strip() for p in parts)
        if relation not in _RELATIONS:
            raise MappingError(f"line {lineno}: bad relation {relation!r}")
        offset = corpus.resolve(sense)
        out.setdefault(offset, []).append(Target(concept, relation))
    return {off: tuple(ts) for off, ts in out.items()}


def parse_mapping(text: str, corpus: Corpus) -> dict[int, tuple]:
    """Auto-detect the official annotated format versus canonical TSV."""
    for _, line in _content_lines(text):
        if "\t" in line:
            return parse_tsv(text, corpus)
        return parse_official(text)
    return {}
