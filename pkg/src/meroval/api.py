"""HTTP service over one workspace.

Reads serve persisted snapshots, so they stay consistent while a job
runs. Writes are compare-and-set: mapping edits carry the version they
were drafted against and fail with 409 when it moved. One evaluation
job runs at a time; the registry keeps finished jobs for polling.
"""

from __future__ import annotations

import itertools
import os
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import atp, evaluation
from .lexicon import LexiconError
from .mapping import MappingError, Target, VersionConflict, target_from_token
from .pipeline import CancelledEvaluation, EvaluateOptions, Pipeline
from .workspace import Workspace, WorkspaceError

QUEUED = "queued"
RUNNING = "running"
DONE = "done"
FAILED = "failed"


@dataclass
class Job:
    id: str
    state: str = QUEUED
    total: int = 0
    done: int = 0
    snapshot: int | None = None
    error: str | None = None
    cancel: threading.Event = field(default_factory=threading.Event)

    def to_json(self) -> dict:
        return {"id": self.id, "state": self.state,
                "progress": {"total": self.total, "done": self.done},
                "snapshot": self.snapshot, "error": self.error}


class JobRegistry:
    def __init__(self):
        self._jobs: dict[str, Job] = {}
        self._seq = itertools.count(1)
        self._lock = threading.Lock()

    def create(self) -> Job:
        with self._lock:
            job = Job(f"j{next(self._seq)}")
            self._jobs[job.id] = job
            return job

    def get(self, job_id: str) -> Job | None:
        return self._jobs.get(job_id)


class TargetBody(BaseModel):
    concept: str
    relation: str


class MappingEditBody(BaseModel):
    targets: list[TargetBody | str]
    note: str = ""
    baseVersion: int | None = None
    propagate: bool = False
    preview: bool = False


class EvaluateBody(BaseModel):
    label: str = ""
    relations: list[str] | None = None
    pairs: list[list[int]] | None = None
    timeLimit: int | None = None
    memLimit: int | None = None
    jobs: int = 1


def build_app(workspace: Workspace, provers=None) -> FastAPI:
    pipe = Pipeline(workspace, provers=provers)
    registry = JobRegistry()
    edit_lock = threading.Lock()
    eval_lock = threading.Lock()
    app = FastAPI(title="meroval service")

    @app.exception_handler(VersionConflict)
    async def _conflict(request, exc: VersionConflict):
        return JSONResponse(status_code=409, content={
            "detail": str(exc), "expected": exc.expected,
            "actual": exc.actual})

    @app.exception_handler(MappingError)
    async def _mapping_error(request, exc: MappingError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(WorkspaceError)
    async def _workspace_error(request, exc: WorkspaceError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def current_versions() -> dict:
        snapshots = pipe.state["snapshots"]
        return {"ontology": pipe.ontology.version,
                "mapping": pipe.table.version,
                "snapshot": snapshots[-1]["id"] if snapshots else None}

    def snapshot_or_none(snapshot_id: int | None = None) -> dict | None:
        snapshots = pipe.state["snapshots"]
        if snapshot_id is None:
            return snapshots[-1] if snapshots else None
        for snap in snapshots:
            if snap["id"] == snapshot_id:
                return snap
        raise HTTPException(404, f"no snapshot {snapshot_id}")

    def resolve_synset(key: str) -> int:
        try:
            synset = (pipe.corpus.resolve(key) if "#" in key else int(key))
        except (LexiconError, ValueError):
            raise HTTPException(404, f"unknown synset {key}")
        if synset not in pipe.corpus.synsets:
            raise HTTPException(404, f"unknown synset {key}")
        return synset

    @app.get("/pairs")
    def get_pairs(status: str | None = None, relation: str | None = None,
                  group: str | None = None, snapshot: int | None = None):
        snap = snapshot_or_none(snapshot)
        if snap is None:
            return {"versions": current_versions(), "snapshot": None, "pairs": []}
        records = snap["outcomes"]
        if group is not None:
            groups = evaluation.triage_from_records(
                records, statuses=("validated", "unvalidated", "unknown"))
            wanted = {g.signature: {(p.part, p.whole) for p in g.pairs}
                      for g in groups}
            members = wanted.get(group)
            if members is None:
                raise HTTPException(404, f"unknown group {group!r}")
            records = [r for r in records
                       if (r["part"], r["whole"]) in members]
        if status is not None:
            records = [r for r in records if r["status"] == status]
        if relation is not None:
            records = [r for r in records if r["relation"] == relation]
        return {"versions": current_versions(), "snapshot": snap["id"],
                "pairs": records}

    @app.get("/cqs/{cq_id}")
    def get_cq(cq_id: str):
        cqs, records = pipe.generate()
        matches = [cq for cq in cqs if cq.id == cq_id]
        if not matches:
            raise HTTPException(404, f"no question {cq_id}")
        cq = matches[0]
        snap = snapshot_or_none()
        outcome = None
        if snap is not None:
            for rec in snap["outcomes"]:
                if rec["cq_id"] == cq_id:
                    outcome = rec
                    break
        return {"versions": current_versions(),
                "cq": {"id": cq.id, "relation": cq.relation, "qp": cq.qp,
                       "text": cq.text,
                       "pairs": [{"part": pipe.sense_of(p.part),
                                  "whole": pipe.sense_of(p.whole)}
                                 for p in cq.pairs]},
                "outcome": outcome,
                "logs": _prover_logs(pipe.ws.runs_dir, cq_id)}

    @app.get("/triage")
    def get_triage(statuses: str | None = None, snapshot: int | None = None):
        snap = snapshot_or_none(snapshot)
        if snap is None:
            return {"versions": current_versions(), "snapshot": None, "groups": []}
        wanted = (tuple(statuses.split(",")) if statuses
                  else ("unvalidated", "unknown"))
        groups = evaluation.triage_from_records(snap["outcomes"], wanted)
        sense = pipe.sense_of
        return {"versions": current_versions(), "snapshot": snap["id"],
                "groups": [{
                    "signature": g.signature,
                    "relation": g.relation,
                    "partTargets": list(g.part_targets),
                    "wholeTargets": list(g.whole_targets),
                    "count": g.count,
                    "statuses": list(g.statuses),
                    "pairs": [{"part": sense(p.part), "whole": sense(p.whole),
                               "partOffset": p.part, "wholeOffset": p.whole}
                              for p in g.pairs],
                } for g in groups]}

    @app.get("/reports/summary")
    def get_summary(ids: str | None = None):
        try:
            chosen = [int(x) for x in ids.split(",")] if ids else None
        except ValueError:
            raise HTTPException(400, "ids must be comma-separated snapshot ids")
        return {"versions": current_versions(), **pipe.summary(chosen)}

    @app.post("/mappings/{synset}")
    def post_mapping(synset: str, body: MappingEditBody):
        offset = resolve_synset(synset)
        targets = tuple(target_from_token(t) if isinstance(t, str)
                        else Target(t.concept, t.relation)
                        for t in body.targets)
        if body.preview:
            affected = pipe.preview_propagation(offset)
            return {"versions": current_versions(), "synset": offset,
                    "preview": {"propagation": len(affected),
                                "affected": [pipe.sense_of(s)
                                             for s in affected]}}
        with edit_lock:
            if (body.baseVersion is not None
                    and body.baseVersion != pipe.table.version):
                raise VersionConflict(body.baseVersion, pipe.table.version)
            if body.propagate:
                sense = pipe.sense_of(offset)
                rows = "\n".join(f"{sense}\t{t.concept}\t{t.relation}"
                                 for t in targets)
                propagated = pipe.propagate_blc(rows + "\n")
            else:
                pipe.edit_mapping(offset, targets, body.note,
                                  body.baseVersion)
                propagated = 0
        return {"versions": current_versions(), "synset": offset,
                "targets": [t.token() for t in targets],
                "propagated": propagated}

    @app.post("/jobs/evaluate")
    def post_evaluate(body: EvaluateBody):
        job = registry.create()
        options = EvaluateOptions(
            label=body.label,
            seconds=body.timeLimit or atp.DEFAULT_SECONDS,
            megabytes=body.memLimit or atp.DEFAULT_MEGABYTES,
            jobs=body.jobs,
            relations=tuple(body.relations) if body.relations else None,
            pairs=(tuple(tuple(p) for p in body.pairs)
                   if body.pairs else None))
        thread = threading.Thread(
            target=_run_job, args=(pipe, job, options, eval_lock),
            daemon=True)
        thread.start()
        return {"versions": current_versions(), "job": job.to_json()}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = registry.get(job_id)
        if job is None:
            raise HTTPException(404, f"no job {job_id}")
        return {"versions": current_versions(), "job": job.to_json()}

    @app.post("/jobs/{job_id}/cancel")
    def cancel_job(job_id: str):
        job = registry.get(job_id)
        if job is None:
            raise HTTPException(404, f"no job {job_id}")
        job.cancel.set()
        return {"versions": current_versions(), "job": job.to_json()}

    return app


def _run_job(pipe: Pipeline, job: Job, options: EvaluateOptions, lock):
    with lock:
        job.state = RUNNING
        try:
            cqs, _ = pipe.generate()
            job.total = len(cqs)

            def bump(_cq_id):
                job.done += 1

            snapshot = pipe.evaluate(options, cancel=job.cancel,
                                     progress=bump)
            job.snapshot = snapshot["id"]
            job.state = DONE
        except CancelledEvaluation:
            job.state = FAILED
            job.error = "cancelled"
        except Exception as exc:  # job must always reach a terminal state
            job.state = FAILED
            job.error = str(exc)


def _prover_logs(runs_dir: str, cq_id: str) -> list[dict]:
    base = os.path.join(runs_dir, cq_id)
    logs = []
    if not os.path.isdir(base):
        return logs
    for entry in sorted(os.listdir(base)):
        sub = os.path.join(base, entry)
        if os.path.isdir(sub):
            for name in sorted(os.listdir(sub)):
                with open(os.path.join(sub, name), encoding="utf-8") as fh:
                    logs.append({"prover": entry,
                                 "file": name,
                                 "text": fh.read()})
        else:
            with open(sub, encoding="utf-8") as fh:
                logs.append({"prover": "", "file": entry, "text": fh.read()})
    return logs
