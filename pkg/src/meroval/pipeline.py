"""End-to-end operations tying the modules together over a workspace.

The pipeline owns the mutable project state: which corpus, ontology, and
mapping blobs are live, the patch chain, the mapping journal, and the
evaluation snapshots. Each operation loads what it needs, journals what
it did, and persists the state file. Replaying the journal from the
blobs alone rebuilds the same state, which the tests rely on.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass

from . import atp, evaluation, mapping as mapping_mod, ontology as ontology_mod
from .lexicon import Corpus, MeronymyPair
from .mapping import MappingTable, Target
from .questions import GENERATED, domain_precheck, generate_cqs
from .workspace import Workspace, WorkspaceError

DEFAULT_MIN_DESCENDANTS = 20


class CancelledEvaluation(Exception):
    pass


class _TableView:
    """Frozen targets_of lookup so a snapshot reflects one mapping version."""

    def __init__(self, targets: dict):
        self._targets = targets

    def targets_of(self, synset: int):
        return self._targets.get(synset)


@dataclass
class EvaluateOptions:
    label: str = ""
    seconds: int = atp.DEFAULT_SECONDS
    megabytes: int = atp.DEFAULT_MEGABYTES
    jobs: int = 1
    relations: tuple | None = None  # prover scope; None means all
    pairs: tuple | None = None  # (part, whole) offsets; None means all


class Pipeline:
    def __init__(self, workspace: Workspace, provers=None):
        self.ws = workspace
        self.provers = provers or [atp.bundled_prover()]
        self._corpus: Corpus | None = None
        self._ontology = None
        self._table: MappingTable | None = None
        self._state: dict | None = None

    # -- state access ----------------------------------------------------------

    @property
    def state(self) -> dict:
        if self._state is None:
            self._state = self.ws.read_state()
        return self._state

    def _save(self):
        self.ws.write_state(self.state)

    @property
    def corpus(self) -> Corpus:
        if self._corpus is None:
            refs = self.state["corpus"]
            self._corpus = Corpus.from_texts(
                self.ws.get_text(refs["data"]),
                self.ws.get_text(refs["index"]))
        return self._corpus

    @property
    def ontology(self):
        if self._ontology is None:
            refs = self.state["ontology"]
            ont = ontology_mod.parse_ontology(self.ws.get_text(refs["base"]))
            for sha in refs["patches"]:
                patch = ontology_mod.parse_patch(self.ws.get_text(sha))
                ont = ontology_mod.apply_patch(ont, patch)
            self._ontology = ont
        return self._ontology

    @property
    def table(self) -> MappingTable:
        if self._table is None:
            self._table = MappingTable.from_journal(
                self.state["mapping_journal"])
        return self._table

    def _sync_mapping(self):
        self.state["mapping_journal"] = self.table.journal
        self._save()

    def sense_of(self, offset: int) -> str:
        return self.corpus.sense_id(offset)

    # -- ingest -----------------------------------------------------------------

    def ingest(self, data_text: str, index_text: str, ontology_text: str,
               mapping_text: str,
               min_descendants: int = DEFAULT_MIN_DESCENDANTS) -> dict:
        if self.ws.has_state():
            raise WorkspaceError("workspace already ingested")
        corpus = Corpus.from_texts(data_text, index_text)
        ontology_mod.parse_ontology(ontology_text)  # validate before storing
        assignments = mapping_mod.parse_mapping(mapping_text, corpus)
        table = MappingTable.ingest(assignments)
        mapping_sha = self.ws.put_text(mapping_text)
        state = {
            "corpus": {"data": self.ws.put_text(data_text),
                       "index": self.ws.put_text(index_text)},
            "ontology": {"base": self.ws.put_text(ontology_text),
                         "patches": []},
            "mapping_journal": table.journal,
            "snapshots": [],
            "config": {"min_descendants": min_descendants},
        }
        self._state = state
        self._corpus = corpus
        self._table = table
        self._ontology = None
        self._save()
        self.ws.append_event(
            "ingest",
            corpus=state["corpus"], ontology=state["ontology"]["base"],
            mapping=mapping_sha, entries=len(table.entries),
            pairs=len(corpus.meronymy_pairs()),
            min_descendants=min_descendants)
        return state

    # -- read-only stages ---------------------------------------------------------

    def generate(self):
        pairs = self.corpus.meronymy_pairs()
        return generate_cqs(pairs, self.table, self.ontology)

    def precheck(self):
        pairs = self.corpus.meronymy_pairs()
        return {pair: domain_precheck(pair, self.table, self.ontology)
                for pair in pairs}

    # -- corrections ---------------------------------------------------------------

    def edit_mapping(self, synset: int, targets, note: str = "",
                     base_version: int | None = None):
        entry = self.table.edit(synset, targets, note, base_version)
        self._sync_mapping()
        self.ws.append_event(
            "edit-mapping", synset=synset,
            targets=[[t.concept, t.relation] for t in entry.targets],
            note=note, mapping_version=self.table.version)
        return entry

    def apply_heuristics(self, phase: str) -> list[int]:
        changed = self.table.apply_heuristics(self.corpus, self.ontology,
                                              phase)
        if changed:
            self._sync_mapping()
        self.ws.append_event("apply-heuristics", phase=phase,
                             changed=changed,
                             mapping_version=self.table.version)
        return changed

    def apply_patch(self, patch_text: str) -> int:
        patch = ontology_mod.parse_patch(patch_text)
        patched = ontology_mod.apply_patch(self.ontology, patch)
        sha = self.ws.put_text(patch_text)
        self.state["ontology"]["patches"].append(sha)
        self._ontology = patched
        self._save()
        self.ws.append_event("apply-patch", patch=sha, name=patch.name,
                             ontology_version=patched.version)
        return patched.version

    def blc_map(self, min_descendants: int | None = None) -> dict[int, int]:
        if min_descendants is None:
            min_descendants = self.state["config"]["min_descendants"]
        return self.corpus.compute_blcs(min_descendants)

    def propagate_blc(self, corrections_text: str,
                      min_descendants: int | None = None) -> int:
        corrections = mapping_mod.parse_tsv(corrections_text, self.corpus)
        blcs = self.blc_map(min_descendants)
        propagated = self.table.propagate_correction(self.corpus, blcs,
                                                     corrections)
        self._sync_mapping()
        sha = self.ws.put_text(corrections_text)
        self.ws.append_event(
            "propagate-blc", corrections=sha, propagated=propagated,
            min_descendants=(min_descendants
                             or self.state["config"]["min_descendants"]),
            mapping_version=self.table.version)
        return propagated

    def preview_propagation(self, synset: int,
                            min_descendants: int | None = None) -> list[int]:
        """Hyponyms that would follow a corrected mapping of this synset."""
        entry = self.table.entries.get(synset)
        if entry is None:
            raise mapping_mod.MappingError(
                f"synset {synset} has no mapping entry")
        blcs = self.blc_map(min_descendants)
        out = []
        for other, other_entry in self.table.entries.items():
            if other == synset:
                continue
            if (blcs.get(other) == synset
                    and other_entry.provenance == mapping_mod.ASSIGNMENT
                    and other_entry.original_targets == entry.original_targets):
                out.append(other)
        return sorted(out)

    # -- evaluation -----------------------------------------------------------------

    def evaluate(self, options: EvaluateOptions | None = None,
                 cancel: threading.Event | None = None,
                 progress=None) -> dict:
        """Generate, precheck, prove, classify, and persist one snapshot.

        A scope (relation or pair filter) limits which questions may spawn
        provers; everything else is answered from the verdict cache, so a
        scoped run after an edit re-proves only what changed. Cancelling
        raises before any snapshot is committed.
        """
        options = options or EvaluateOptions()
        cqs, records = self.generate()
        checks = self.precheck()
        mapping_version = self.table.version
        targets_now = {syn: entry.targets
                       for syn, entry in self.table.entries.items()}
        violated_pairs = {pair for pair, check in checks.items()
                          if check.violation}
        needed_ids = {rec.cq_id for rec in records
                      if rec.status == GENERATED
                      and rec.pair not in violated_pairs}
        scoped_ids = self._scoped_ids(records, options)
        to_prove = [cq for cq in cqs
                    if cq.id in needed_ids and cq.id in scoped_ids]
        from_cache = [cq for cq in cqs
                      if cq.id in needed_ids and cq.id not in scoped_ids]
        if progress is not None:
            for cq in cqs:  # precheck rejections settle without a prover
                if cq.id not in needed_ids:
                    progress(cq.id)
        emitted = ontology_mod.emit_formulas(self.ontology)
        cache = atp.VerdictCache(self.ws.cache_file)
        decisions = atp.decide_cqs(
            to_prove, emitted, self.provers, seconds=options.seconds,
            megabytes=options.megabytes, cache=cache,
            archive_dir=self.ws.runs_dir, jobs=options.jobs, cancel=cancel,
            progress=progress)
        decisions.update(atp.decide_cqs(
            from_cache, emitted, self.provers, seconds=options.seconds,
            megabytes=options.megabytes, cache=cache, cancel=cancel,
            cache_only=True, progress=progress))
        if cancel is not None and cancel.is_set():
            raise CancelledEvaluation()
        table_view = _TableView(targets_now)
        outcomes = evaluation.classify_pairs(records, checks, decisions)
        evaluation.diagnose_all(outcomes, decisions, table_view,
                                self.ontology)
        rows = evaluation.compute_metrics(outcomes)
        triage = evaluation.build_triage(outcomes, table_view)
        snapshot_id = len(self.state["snapshots"]) + 1
        title = options.label or f"evaluation {snapshot_id}"
        report = evaluation.render_report(
            title, self.ontology.version, mapping_version, rows,
            len(cqs), triage, outcomes, sense_of=self.sense_of)
        snapshot = {
            "id": snapshot_id,
            "label": title,
            "ontology_version": self.ontology.version,
            "mapping_version": mapping_version,
            "cq_count": len(cqs),
            "metrics": [_row_json(r) for r in rows],
            "outcomes": [self._outcome_json(o, table_view) for o in outcomes],
            "report": self.ws.put_text(report),
        }
        snapshot_sha = self.ws.put_text(
            json.dumps(snapshot, sort_keys=True))
        self.state["snapshots"].append(snapshot)
        self._save()
        self.ws.append_event("evaluate", snapshot=snapshot_sha,
                             id=snapshot_id,
                             ontology_version=self.ontology.version,
                             mapping_version=mapping_version)
        return snapshot

    def _scoped_ids(self, records, options: EvaluateOptions) -> set:
        if options.relations is None and options.pairs is None:
            return {rec.cq_id for rec in records if rec.cq_id}
        wanted_pairs = (None if options.pairs is None
                        else {tuple(p) for p in options.pairs})
        out = set()
        for rec in records:
            if not rec.cq_id:
                continue
            if (options.relations is not None
                    and rec.pair.relation not in options.relations):
                continue
            if (wanted_pairs is not None
                    and (rec.pair.part, rec.pair.whole) not in wanted_pairs):
                continue
            out.add(rec.cq_id)
        return out

    def _outcome_json(self, outcome, table_view) -> dict:
        pair = outcome.pair
        part_targets = table_view.targets_of(pair.part) or ()
        whole_targets = table_view.targets_of(pair.whole) or ()
        return {
            "relation": pair.relation,
            "part": pair.part,
            "whole": pair.whole,
            "part_sense": self.sense_of(pair.part),
            "whole_sense": self.sense_of(pair.whole),
            "part_targets": [t.token() for t in part_targets],
            "whole_targets": [t.token() for t in whole_targets],
            "status": outcome.status,
            "reason": outcome.reason,
            "cq_id": outcome.cq_id,
            "diagnosis": outcome.diagnosis,
        }

    def report_text(self, snapshot_id: int | None = None) -> str:
        snapshots = self.state["snapshots"]
        if not snapshots:
            raise WorkspaceError("no evaluation snapshots yet")
        if snapshot_id is None:
            snapshot = snapshots[-1]
        else:
            matches = [s for s in snapshots if s["id"] == snapshot_id]
            if not matches:
                raise WorkspaceError(f"no snapshot {snapshot_id}")
            snapshot = matches[0]
        return self.ws.get_text(snapshot["report"])

    def summary(self, snapshot_ids=None) -> dict:
        """Metric rows for the requested snapshots plus consecutive deltas."""
        snapshots = self.state["snapshots"]
        if snapshot_ids:
            chosen = [s for s in snapshots if s["id"] in set(snapshot_ids)]
        else:
            chosen = list(snapshots)
        deltas = []
        for prev, cur in zip(chosen, chosen[1:]):
            prev_rows = {r["relation"]: r for r in prev["metrics"]}
            delta_rows = []
            for row in cur["metrics"]:
                before = prev_rows.get(row["relation"])
                if before is None:
                    continue
                delta_rows.append({
                    "relation": row["relation"],
                    "recall": _dec_delta(row["recall"], before["recall"]),
                    "precision": _dec_delta(row["precision"],
                                            before["precision"]),
                    "f1": _dec_delta(row["f1"], before["f1"]),
                })
            deltas.append({"from": prev["id"], "to": cur["id"],
                           "rows": delta_rows})
        return {"snapshots": chosen, "deltas": deltas}

    # -- replay -----------------------------------------------------------------------

    def rebuild_state_from_journal(self) -> dict:
        """Reconstruct the state file from the journal and blobs alone."""
        state: dict = {}
        table: MappingTable | None = None
        corpus: Corpus | None = None

        def ontology_at(refs):
            ont = ontology_mod.parse_ontology(self.ws.get_text(refs["base"]))
            for sha in refs["patches"]:
                ont = ontology_mod.apply_patch(
                    ont, ontology_mod.parse_patch(self.ws.get_text(sha)))
            return ont

        for event in self.ws.events():
            op = event["op"]
            if op == "ingest":
                corpus = Corpus.from_texts(
                    self.ws.get_text(event["corpus"]["data"]),
                    self.ws.get_text(event["corpus"]["index"]))
                assignments = mapping_mod.parse_mapping(
                    self.ws.get_text(event["mapping"]), corpus)
                table = MappingTable.ingest(assignments)
                state = {
                    "corpus": event["corpus"],
                    "ontology": {"base": event["ontology"], "patches": []},
                    "snapshots": [],
                    "config": {"min_descendants": event.get(
                        "min_descendants", DEFAULT_MIN_DESCENDANTS)},
                }
            elif op == "apply-patch":
                state["ontology"]["patches"].append(event["patch"])
            elif op == "apply-heuristics":
                table.apply_heuristics(corpus, ontology_at(state["ontology"]),
                                       event["phase"])
            elif op == "edit-mapping":
                targets = tuple(Target(c, r) for c, r in event["targets"])
                table.edit(event["synset"], targets, event.get("note", ""))
            elif op == "propagate-blc":
                corrections = mapping_mod.parse_tsv(
                    self.ws.get_text(event["corrections"]), corpus)
                blcs = corpus.compute_blcs(event["min_descendants"])
                table.propagate_correction(corpus, blcs, corrections)
            elif op == "evaluate":
                state["snapshots"].append(
                    json.loads(self.ws.get_text(event["snapshot"])))
        state["mapping_journal"] = table.journal if table else []
        return state


def _row_json(row) -> dict:
    return {
        "relation": row.relation,
        "total": row.total,
        "validated": row.validated,
        "unvalidated": row.unvalidated,
        "via_atp": row.via_atp,
        "unknown": row.unknown,
        "recall": str(row.recall),
        "precision": str(row.precision),
        "f1": str(row.f1),
    }


def _dec_delta(cur: str, prev: str) -> str:
    from decimal import Decimal
    value = Decimal(cur) - Decimal(prev)
    return f"{value:+.2f}"
