"""Verdict aggregation: pair outcomes, metrics, triage, diagnoses, report.

A pair is validated when its question passed, unvalidated when the
question was refuted or the domain precheck already rejected it, and
unknown otherwise (unresolved question or an unusable mapping). Recall
is validated over all pairs; precision is validated over decided pairs.
Both round half-up to two decimals, and F1 is the harmonic mean of the
rounded values, so printed tables can be reproduced from printed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .atp import NON_PASSING, PASSING, UNRESOLVED
from .lexicon import MeronymyPair
from .mapping import INSTANCE, MappingTable
from .ontology import ATTRIBUTE_CLASS_KIND, Ontology
from .questions import GENERATED, ILL_FORMED, UNMAPPED

VALIDATED = "validated"
UNVALIDATED = "unvalidated"
UNKNOWN = "unknown"

DOMAIN_VIOLATION = "domainViolation"

RESOURCE_LIMIT = "resourceLimit"
ONTOLOGICAL_DECISION = "ontologicalDecision"
METONYMY = "metonymy"
LACK_OF_KNOWLEDGE = "lackOfKnowledge"
UNKNOWN_CAUSE = "unknownCause"

DEFAULT_DECISION_AXES = (("Human", "GroupOfAnimals"),)

ROW_ORDER = ("member", "part", "substance")
TOTAL = "Total"

_CENT = Decimal("0.01")
_ZERO = Decimal("0.00")


@dataclass
class PairOutcome:
    pair: object
    status: str
    reason: str
    cq_id: str | None = None
    diagnosis: str | None = None


def classify_pairs(records, domain_checks, decisions) -> list[PairOutcome]:
    """Join generation records, prechecks, and prover decisions per pair."""
    out = []
    for rec in records:
        if rec.status == UNMAPPED:
            out.append(PairOutcome(rec.pair, UNKNOWN, UNMAPPED))
            continue
        if rec.status == ILL_FORMED:
            out.append(PairOutcome(rec.pair, UNKNOWN, ILL_FORMED))
            continue
        assert rec.status == GENERATED
        check = domain_checks.get(rec.pair)
        if check is not None and check.violation:
            out.append(PairOutcome(rec.pair, UNVALIDATED, DOMAIN_VIOLATION,
                                   rec.cq_id))
            continue
        decision = decisions.get(rec.cq_id)
        if decision is None or decision.status == UNRESOLVED:
            out.append(PairOutcome(rec.pair, UNKNOWN, UNRESOLVED, rec.cq_id))
        elif decision.status == PASSING:
            out.append(PairOutcome(rec.pair, VALIDATED, PASSING, rec.cq_id))
        else:
            out.append(PairOutcome(rec.pair, UNVALIDATED, NON_PASSING,
                                   rec.cq_id))
    return out


# ---------------------------------------------------------------------------
# Metrics


@dataclass(frozen=True)
class MetricsRow:
    relation: str
    total: int
    validated: int
    unvalidated: int
    via_atp: int
    unknown: int
    recall: Decimal
    precision: Decimal
    f1: Decimal


def _round2(num: int, den: int) -> Decimal:
    if den == 0:
        return _ZERO
    return (Decimal(num) / Decimal(den)).quantize(_CENT, ROUND_HALF_UP)


def _f1(precision: Decimal, recall: Decimal) -> Decimal:
    if precision + recall == 0:
        return _ZERO
    return ((2 * precision * recall)
            / (precision + recall)).quantize(_CENT, ROUND_HALF_UP)


def metrics_row(relation: str, outcomes) -> MetricsRow:
    total = len(outcomes)
    validated = sum(1 for o in outcomes if o.status == VALIDATED)
    unvalidated = sum(1 for o in outcomes if o.status == UNVALIDATED)
    via_atp = sum(1 for o in outcomes
                  if o.status == UNVALIDATED and o.reason == NON_PASSING)
    unknown = total - validated - unvalidated
    recall = _round2(validated, total)
    precision = _round2(validated, validated + unvalidated)
    return MetricsRow(relation, total, validated, unvalidated, via_atp,
                      unknown, recall, precision, _f1(precision, recall))


def compute_metrics(outcomes) -> list[MetricsRow]:
    rows = []
    for relation in ROW_ORDER:
        subset = [o for o in outcomes if o.pair.relation == relation]
        if subset:
            rows.append(metrics_row(relation, subset))
    rows.append(metrics_row(TOTAL, list(outcomes)))
    return rows


def count_cqs(cqs) -> int:
    return len(cqs)


# ---------------------------------------------------------------------------
# Triage


@dataclass(frozen=True)
class TriageGroup:
    signature: str
    relation: str
    part_targets: tuple
    whole_targets: tuple
    count: int
    pairs: tuple
    statuses: tuple


def build_triage(outcomes, table: MappingTable,
                 statuses=(UNVALIDATED, UNKNOWN)) -> list[TriageGroup]:
    """Group not-yet-validated pairs by their mapping signature.

    Groups come out largest first so one mapping correction fixes as many
    pairs as possible; ties break on the signature text.
    """
    buckets: dict[tuple, list] = {}
    for o in outcomes:
        if o.status not in statuses:
            continue
        part_t = table.targets_of(o.pair.part) or ()
        whole_t = table.targets_of(o.pair.whole) or ()
        key = (o.pair.relation,
               tuple(t.token() for t in part_t),
               tuple(t.token() for t in whole_t))
        buckets.setdefault(key, []).append((o.pair, o.status))
    return _triage_groups(buckets)


def triage_from_records(records, statuses=(UNVALIDATED, UNKNOWN)):
    """Rebuild triage groups from persisted outcome records.

    Records carry the target tokens captured at evaluation time, so the
    groups reflect the mapping version the snapshot was taken with, not
    the current one.
    """
    buckets: dict[tuple, list] = {}
    for rec in records:
        if rec["status"] not in statuses:
            continue
        key = (rec["relation"], tuple(rec["part_targets"]),
               tuple(rec["whole_targets"]))
        pair = MeronymyPair(rec["relation"], rec["part"], rec["whole"])
        buckets.setdefault(key, []).append((pair, rec["status"]))
    return _triage_groups(buckets)


def _triage_groups(buckets: dict) -> list[TriageGroup]:
    groups = []
    for (relation, part_t, whole_t), members in buckets.items():
        signature = (f"{relation}: part=[{' '.join(part_t) or '-'}] "
                     f"whole=[{' '.join(whole_t) or '-'}]")
        groups.append(TriageGroup(
            signature, relation, part_t, whole_t, len(members),
            tuple(sorted(pair for pair, _ in members)),
            tuple(sorted({status for _, status in members}))))
    groups.sort(key=lambda g: (-g.count, g.signature))
    return groups


# ---------------------------------------------------------------------------
# Diagnoses


def diagnose(outcome: PairOutcome, decision, table: MappingTable,
             ontology: Ontology,
             axes=DEFAULT_DECISION_AXES) -> str | None:
    """Attach a failure cause to a pair that did not validate."""
    if outcome.status == VALIDATED:
        return None
    if decision is not None and decision.any_timeout:
        return RESOURCE_LIMIT
    part_targets = table.targets_of(outcome.pair.part) or ()
    whole_targets = table.targets_of(outcome.pair.whole) or ()
    for part_cls, whole_cls in axes:
        part_hit = any(t.relation != INSTANCE
                       and ontology.is_subclass(t.concept, part_cls)
                       for t in part_targets)
        whole_hit = any(t.relation != INSTANCE
                        and ontology.is_subclass(t.concept, whole_cls)
                        for t in whole_targets)
        if part_hit and whole_hit:
            return ONTOLOGICAL_DECISION
    for t in list(part_targets) + list(whole_targets):
        if (t.relation != INSTANCE
                and ontology.classify_concept(t.concept) == ATTRIBUTE_CLASS_KIND):
            return METONYMY
    if outcome.reason == UNRESOLVED:
        return LACK_OF_KNOWLEDGE
    return UNKNOWN_CAUSE


def diagnose_all(outcomes, decisions, table, ontology,
                 axes=DEFAULT_DECISION_AXES):
    for o in outcomes:
        o.diagnosis = diagnose(o, decisions.get(o.cq_id), table, ontology,
                               axes)
    return outcomes


# ---------------------------------------------------------------------------
# Report


def _fmt_count(n: int) -> str:
    return format(n, ",")


def render_report(title: str, ontology_version: int, mapping_version: int,
                  rows, cq_count: int, triage, outcomes,
                  sense_of=None) -> str:
    """Fixed-layout text report; identical inputs yield identical bytes."""
    sense_of = sense_of or (lambda off: str(off))
    lines = [title,
             "=" * len(title),
             f"ontology version {ontology_version}, "
             f"mapping version {mapping_version}, "
             f"{_fmt_count(cq_count)} competency questions",
             ""]
    headers = ("relation", "pairs", "validated", "unvalidated", "(via ATP)",
               "unknown", "recall", "precision", "F1")
    table = [headers]
    for r in rows:
        table.append((r.relation, _fmt_count(r.total), _fmt_count(r.validated),
                      _fmt_count(r.unvalidated), _fmt_count(r.via_atp),
                      _fmt_count(r.unknown), str(r.recall), str(r.precision),
                      str(r.f1)))
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    for ri, row in enumerate(table):
        cells = [row[0].ljust(widths[0])]
        cells += [row[i].rjust(widths[i]) for i in range(1, len(headers))]
        lines.append("  ".join(cells).rstrip())
        if ri == 0:
            lines.append("  ".join("-" * w for w in widths))
    lines.append("")
    lines.append("triage groups")
    lines.append("-------------")
    if not triage:
        lines.append("(none)")
    for g in triage:
        lines.append(f"{_fmt_count(g.count):>4}  {g.signature}")
        for pair in g.pairs:
            lines.append(f"      {pair.relation}: {sense_of(pair.part)}"
                         f" -> {sense_of(pair.whole)}")
    lines.append("")
    lines.append("diagnoses")
    lines.append("---------")
    diagnosed = [o for o in outcomes if o.diagnosis]
    if not diagnosed:
        lines.append("(none)")
    for o in diagnosed:
        lines.append(f"{o.status:<12} {o.reason:<16} {o.diagnosis:<20}"
                     f" {o.pair.relation}: {sense_of(o.pair.part)}"
                     f" -> {sense_of(o.pair.whole)}")
    lines.append("")
    return "\n".join(lines)
