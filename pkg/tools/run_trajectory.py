"""Drive the bundled fixture through the full correction trajectory.

Runs ingest, a baseline evaluation, the BLC correction, the three axiom
patches, and both group heuristics, evaluating after each stage, then
prints the four reports plus a per-pair outcome table. Useful when the
fixture changes: the printed numbers are the source for the frozen
expectations in the test suite.
"""

from __future__ import annotations

import sys
import tempfile
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from meroval.pipeline import EvaluateOptions, Pipeline  # noqa: E402
from meroval.workspace import Workspace  # noqa: E402

FIXTURES = ROOT / "src" / "meroval" / "fixtures"


def read(rel: str) -> str:
    return (FIXTURES / rel).read_text(encoding="utf-8")


def show(pipe: Pipeline, snapshot: dict):
    print(pipe.ws.get_text(snapshot["report"]))
    for o in snapshot["outcomes"]:
        targets = "{} -> {}".format(
            " ".join(o["part_targets"]) or "(unmapped)",
            " ".join(o["whole_targets"]) or "(unmapped)")
        print(f"  {o['relation']:<9} {o['part_sense']:<16} "
              f"{o['whole_sense']:<16} {o['status']:<12} "
              f"{o['reason'] or '-':<16} {o['diagnosis'] or '-':<20} "
              f"{targets}")
    print()


def main():
    jobs = 4
    started = time.monotonic()
    with tempfile.TemporaryDirectory() as tmp:
        ws = Workspace.create(Path(tmp) / "ws")
        pipe = Pipeline(ws)
        pipe.ingest(read("wordnet/data.noun"), read("wordnet/index.noun"),
                    read("ontology/base.kif"), read("wordnet/annotated.noun"),
                    min_descendants=8)
        tree = pipe.corpus.resolve("tree#1:n")
        preview = pipe.preview_propagation(tree)
        print(f"preview_propagation(tree#1:n): {len(preview)} synsets")
        print(f"  {[pipe.sense_of(s) for s in preview]}")

        show(pipe, pipe.evaluate(EvaluateOptions(label="original mapping",
                                                 jobs=jobs)))

        version = pipe.apply_patch(read("patches/part.kif"))
        print(f"apply_patch part.kif -> ontology version {version}\n")
        show(pipe, pipe.evaluate(EvaluateOptions(label="part axioms",
                                                 jobs=jobs)))

        for name in ("substance", "member"):
            version = pipe.apply_patch(read(f"patches/{name}.kif"))
            print(f"apply_patch {name}.kif -> ontology version {version}")
        print()
        show(pipe, pipe.evaluate(
            EvaluateOptions(label="signature and membership axioms",
                            jobs=jobs)))

        for phase in ("H1", "H2'"):
            changed = pipe.apply_heuristics(phase)
            print(f"apply_heuristics {phase}: "
                  f"{[pipe.sense_of(s) for s in changed]}")
        propagated = pipe.propagate_blc(read("corrections/blc.tsv"))
        print(f"propagate_blc: {propagated} hyponyms followed\n")
        show(pipe, pipe.evaluate(EvaluateOptions(label="group remapping",
                                                 jobs=jobs)))

    print(f"total wall time {time.monotonic() - started:.1f}s")


if __name__ == "__main__":
    main()
