"""Command-line front end over the pipeline.

Every subcommand operates on a workspace directory, taken from
--workspace or the MEROVAL_WORKSPACE environment variable. Commands that
only read still append a journal event, so the journal doubles as a
usage log; replay ignores the read-only entries.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import atp, pipeline
from .kif import KifError
from .lexicon import LexiconError
from .mapping import MappingError, VersionConflict, target_from_token
from .ontology import OntologyError, PatchError
from .pipeline import EvaluateOptions, Pipeline
from .questions import GENERATED
from .workspace import Workspace, WorkspaceError

ENV_WORKSPACE = "MEROVAL_WORKSPACE"

_ERRORS = (KifError, LexiconError, MappingError, OntologyError, PatchError,
           WorkspaceError, ValueError, OSError)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _workspace_root(args) -> str:
    return args.workspace or os.environ.get(ENV_WORKSPACE) or "."


def _pipeline(args) -> Pipeline:
    ws = Workspace.open(_workspace_root(args))
    return Pipeline(ws, provers=_provers(args))


def _provers(args):
    specs = getattr(args, "prover", None)
    if not specs:
        return None
    known = {cfg.name: cfg for cfg in atp.default_provers()}
    out = []
    for spec in specs:
        if "=" in spec:
            name, command = spec.split("=", 1)
            out.append(atp.ProverConfig(name, command))
        elif spec in known:
            out.append(known[spec])
        else:
            raise ValueError(
                f"unknown prover {spec!r}; use name=<command template>")
    return out


def cmd_init(args) -> int:
    ws = Workspace.create(_workspace_root(args))
    print(f"initialized workspace at {ws.root}")
    return 0


def cmd_ingest(args) -> int:
    pipe = _pipeline(args)
    state = pipe.ingest(_read(args.data), _read(args.index),
                        _read(args.ontology), _read(args.mapping),
                        min_descendants=args.min_descendants)
    print(f"ingested {len(pipe.corpus.synsets)} synsets, "
          f"{len(pipe.table.entries)} mapping entries, "
          f"{len(pipe.corpus.meronymy_pairs())} meronymy pairs")
    print(f"ontology version {pipe.ontology.version}, "
          f"mapping version {pipe.table.version}")
    return 0 if state else 1


def cmd_gen_cqs(args) -> int:
    pipe = _pipeline(args)
    cqs, records = pipe.generate()
    pipe.ws.append_event("gen-cqs", cqs=len(cqs), pairs=len(records))
    if args.show:
        matches = [cq for cq in cqs if cq.id == args.show]
        if not matches:
            print(f"no question {args.show}", file=sys.stderr)
            return 1
        print(matches[0].text)
        return 0
    skipped = [r for r in records if r.status != GENERATED]
    print(f"{len(records)} pairs, {len(cqs)} questions, "
          f"{len(skipped)} pairs skipped")
    for cq in cqs:
        print(f"cq {cq.id}  {cq.relation:<9} QP{cq.qp}  "
              f"{len(cq.pairs)} pair(s)")
    for rec in skipped:
        sense = pipe.sense_of
        print(f"skipped {sense(rec.pair.part)} {rec.pair.relation} of "
              f"{sense(rec.pair.whole)}: {rec.status} ({rec.detail})")
    return 0


def cmd_precheck(args) -> int:
    pipe = _pipeline(args)
    checks = pipe.precheck()
    violations = {p: c for p, c in checks.items() if c.violation}
    pipe.ws.append_event("precheck", pairs=len(checks),
                         violations=len(violations))
    print(f"{len(violations)} domain violations in {len(checks)} pairs")
    for pair, check in sorted(violations.items()):
        reasons = "; ".join(
            f"{'part' if pos == 1 else 'whole'} maps to "
            f"{', '.join(offenders)}, disjoint from {required}"
            for pos, required, offenders in check.details)
        print(f"violation {pipe.sense_of(pair.part)} {pair.relation} of "
              f"{pipe.sense_of(pair.whole)}: {reasons}")
    return 0


def cmd_evaluate(args) -> int:
    pipe = _pipeline(args)
    options = EvaluateOptions(
        label=args.label or "",
        seconds=args.time_limit,
        megabytes=args.mem_limit,
        jobs=args.jobs,
        relations=tuple(args.relation) if args.relation else None)
    snapshot = pipe.evaluate(options)
    print(pipe.ws.get_text(snapshot["report"]))
    print(f"snapshot {snapshot['id']} written")
    return 0


def cmd_report(args) -> int:
    pipe = _pipeline(args)
    text = pipe.report_text(args.snapshot)
    pipe.ws.append_event("report", snapshot=args.snapshot)
    print(text)
    return 0


def cmd_summary(args) -> int:
    import json

    pipe = _pipeline(args)
    ids = ([int(v) for v in args.versions.split(",")]
           if args.versions else None)
    print(json.dumps(pipe.summary(ids), indent=2, sort_keys=True))
    return 0


def cmd_apply_heuristics(args) -> int:
    pipe = _pipeline(args)
    changed = pipe.apply_heuristics(args.phase)
    print(f"{args.phase}: {len(changed)} mapping(s) changed, "
          f"mapping version {pipe.table.version}")
    for synset in changed:
        targets = ", ".join(t.token() for t in pipe.table.targets_of(synset))
        print(f"  {pipe.sense_of(synset)} -> {targets}")
    return 0


def cmd_apply_patch(args) -> int:
    pipe = _pipeline(args)
    version = pipe.apply_patch(_read(args.file))
    print(f"ontology version {version}")
    return 0


def cmd_propagate_blc(args) -> int:
    pipe = _pipeline(args)
    count = pipe.propagate_blc(_read(args.file), args.min_descendants)
    print(f"{count} mapping(s) rewritten by propagation, "
          f"mapping version {pipe.table.version}")
    return 0


def cmd_edit_mapping(args) -> int:
    pipe = _pipeline(args)
    synset = (pipe.corpus.resolve(args.synset) if "#" in args.synset
              else int(args.synset))
    targets = tuple(target_from_token(tok) for tok in args.target)
    pipe.edit_mapping(synset, targets, args.note or "", args.base_version)
    print(f"mapping version {pipe.table.version}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import build_app

    ws = Workspace.open(_workspace_root(args))
    app = build_app(ws, provers=_provers(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meroval",
        description="Validate lexicon meronymy against a formal ontology.")
    parser.add_argument("--workspace", help="workspace directory "
                        f"(default: ${ENV_WORKSPACE} or .)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create an empty workspace")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("ingest", help="load corpus, ontology, and mapping")
    p.add_argument("--data", required=True, help="noun database file")
    p.add_argument("--index", required=True, help="noun index file")
    p.add_argument("--ontology", required=True, help="axiom file")
    p.add_argument("--mapping", required=True,
                   help="annotated database or tab-separated mapping")
    p.add_argument("--min-descendants", type=int,
                   default=pipeline.DEFAULT_MIN_DESCENDANTS,
                   help="hyponym count that qualifies a base-level synset")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("gen-cqs", help="generate competency questions")
    p.add_argument("--show", metavar="ID", help="print one question's formula")
    p.set_defaults(func=cmd_gen_cqs)

    p = sub.add_parser("precheck", help="argument-domain screening")
    p.set_defaults(func=cmd_precheck)

    p = sub.add_parser("evaluate", help="prove, classify, and snapshot")
    p.add_argument("--label", help="snapshot label")
    p.add_argument("--prover", action="append", metavar="NAME[=TEMPLATE]",
                   help="portfolio member; repeatable")
    p.add_argument("--time-limit", type=int, default=atp.DEFAULT_SECONDS,
                   metavar="SECONDS")
    p.add_argument("--mem-limit", type=int, default=atp.DEFAULT_MEGABYTES,
                   metavar="MEGABYTES")
    p.add_argument("--jobs", type=int, default=1, metavar="N")
    p.add_argument("--relation", action="append",
                   choices=["member", "part", "substance"],
                   help="limit fresh prover runs to these relations")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="print an evaluation report")
    p.add_argument("--snapshot", type=int, help="snapshot id (default last)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("summary", help="snapshot metrics with deltas, as JSON")
    p.add_argument("--versions", help="comma-separated snapshot ids")
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("apply-heuristics",
                       help="rewrite taxonomic-group mappings")
    p.add_argument("--phase", required=True,
                   choices=["H1", "H2", "H2'", "H2p"],
                   help="H2p is an alias for H2'")
    p.set_defaults(func=cmd_apply_heuristics)

    p = sub.add_parser("apply-patch", help="apply an ontology patch file")
    p.add_argument("file")
    p.set_defaults(func=cmd_apply_patch)

    p = sub.add_parser("propagate-blc",
                       help="apply corrected base-level mappings and "
                            "propagate them to hyponyms")
    p.add_argument("file", help="tab-separated corrections")
    p.add_argument("--min-descendants", type=int, default=None, metavar="N")
    p.set_defaults(func=cmd_propagate_blc)

    p = sub.add_parser("edit-mapping", help="replace one synset's targets")
    p.add_argument("synset", help="offset or lemma#k:n")
    p.add_argument("--target", action="append", required=True,
                   metavar="ConceptREL", help="e.g. Heart= or Group+")
    p.add_argument("--note")
    p.add_argument("--base-version", type=int, default=None)
    p.set_defaults(func=cmd_edit_mapping)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--prover", action="append", metavar="NAME[=TEMPLATE]")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VersionConflict as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
