import shlex
import sys
import time
from urllib.parse import quote

import pytest
from fastapi.testclient import TestClient

from meroval.api import build_app
from meroval.atp import ProverConfig
from meroval.pipeline import Pipeline
from meroval.workspace import Workspace

GOLDEN_PAIR = ("heart_valve#1:n", "heart#2:n")


def mapping_url(sense: str) -> str:
    # the hash in a sense id must not read as a URL fragment
    return f"/mappings/{quote(sense, safe='')}"


def wait_for_job(client, job_id, deadline=60.0):
    start = time.monotonic()
    while time.monotonic() - start < deadline:
        job = client.get(f"/jobs/{job_id}").json()["job"]
        if job["state"] in ("done", "failed"):
            return job
        time.sleep(0.05)
    raise AssertionError(f"job {job_id} did not finish")


@pytest.fixture(scope="module")
def evaluated(tmp_path_factory, data_text, index_text, ontology_text,
              mapping_text):
    """One workspace with a completed evaluation scoped to the golden pair."""
    ws = Workspace.create(str(tmp_path_factory.mktemp("api") / "ws"))
    pipe = Pipeline(ws)
    pipe.ingest(data_text, index_text, ontology_text, mapping_text,
                min_descendants=8)
    part = pipe.corpus.resolve(GOLDEN_PAIR[0])
    whole = pipe.corpus.resolve(GOLDEN_PAIR[1])
    client = TestClient(build_app(ws))
    job = client.post("/jobs/evaluate", json={
        "label": "api snapshot", "pairs": [[part, whole]],
        "timeLimit": 20, "memLimit": 256}).json()["job"]
    finished = wait_for_job(client, job["id"])
    assert finished["state"] == "done", finished
    return {"client": client, "part": part, "whole": whole,
            "job": finished}


@pytest.fixture
def fresh(tmp_path, data_text, index_text, ontology_text, mapping_text):
    """Ingested but not yet evaluated workspace behind a fresh app."""
    ws = Workspace.create(str(tmp_path / "ws"))
    pipe = Pipeline(ws)
    pipe.ingest(data_text, index_text, ontology_text, mapping_text,
                min_descendants=8)
    return {"client": TestClient(build_app(ws)), "pipe": pipe}


# -- reads over a snapshot ---------------------------------------------------------

def test_pairs_serves_the_latest_snapshot(evaluated):
    body = evaluated["client"].get("/pairs").json()
    assert body["snapshot"] == 1
    assert body["versions"] == {"ontology": 1, "mapping": 1, "snapshot": 1}
    assert len(body["pairs"]) == 19
    record = body["pairs"][0]
    assert {"relation", "part", "whole", "part_sense", "whole_sense",
            "part_targets", "whole_targets", "status", "reason", "cq_id",
            "diagnosis"} <= set(record)


def test_pairs_filters_compose(evaluated):
    client = evaluated["client"]
    validated = client.get("/pairs", params={"status": "validated"}).json()
    assert [(p["part_sense"], p["whole_sense"])
            for p in validated["pairs"]] == [GOLDEN_PAIR]
    member = client.get("/pairs", params={"relation": "member"}).json()
    assert len(member["pairs"]) == 9
    both = client.get("/pairs", params={"relation": "member",
                                        "status": "validated"}).json()
    assert both["pairs"] == []
    assert client.get("/pairs", params={"snapshot": 1}).status_code == 200
    assert client.get("/pairs", params={"snapshot": 9}).status_code == 404


def test_pairs_can_follow_a_triage_group(evaluated):
    client = evaluated["client"]
    groups = client.get("/triage").json()["groups"]
    assert groups
    group = groups[0]
    body = client.get("/pairs", params={"group": group["signature"]}).json()
    got = {(p["part"], p["whole"]) for p in body["pairs"]}
    assert {(p["partOffset"], p["wholeOffset"])
            for p in group["pairs"]} <= got
    assert client.get(
        "/pairs", params={"group": "no such signature"}).status_code == 404


def test_cq_detail_carries_text_outcome_and_logs(evaluated):
    client = evaluated["client"]
    golden = client.get("/pairs", params={"status": "validated"}
                        ).json()["pairs"][0]
    body = client.get(f"/cqs/{golden['cq_id']}").json()
    assert body["cq"]["relation"] == "properPart"
    assert body["cq"]["qp"] == 1
    assert body["cq"]["text"].startswith("(exists (?X ?Y)")
    assert body["cq"]["pairs"] == [{"part": GOLDEN_PAIR[0],
                                    "whole": GOLDEN_PAIR[1]}]
    assert body["outcome"]["status"] == "validated"
    files = {(log["prover"], log["file"]) for log in body["logs"]}
    assert ("", "conjecture.p") in files
    assert ("micro", "conjecture.out") in files
    assert client.get("/cqs/feedfacecafe").status_code == 404


def test_triage_respects_the_status_filter(evaluated):
    client = evaluated["client"]
    default = client.get("/triage").json()["groups"]
    assert max(g["count"] for g in default) == 3  # the three fish genera
    for group in default:
        assert set(group["statuses"]) <= {"unvalidated", "unknown"}
        assert group["pairs"][0]["part"].endswith(":n")
    only_unvalidated = client.get(
        "/triage", params={"statuses": "unvalidated"}).json()["groups"]
    assert only_unvalidated
    for group in only_unvalidated:
        assert group["statuses"] == ["unvalidated"]


def test_summary_lists_snapshots(evaluated):
    client = evaluated["client"]
    body = client.get("/reports/summary").json()
    assert [s["id"] for s in body["snapshots"]] == [1]
    assert body["snapshots"][0]["label"] == "api snapshot"
    assert body["deltas"] == []
    scoped = client.get("/reports/summary", params={"ids": "1"}).json()
    assert [s["id"] for s in scoped["snapshots"]] == [1]
    assert client.get("/reports/summary",
                      params={"ids": "first"}).status_code == 400


def test_job_progress_is_reported(evaluated):
    job = evaluated["job"]
    assert job["progress"] == {"total": 15, "done": 15}
    assert job["snapshot"] == 1
    assert job["error"] is None


def test_unknown_jobs_404(evaluated):
    client = evaluated["client"]
    assert client.get("/jobs/j999").status_code == 404
    assert client.post("/jobs/j999/cancel").status_code == 404


# -- reads before any snapshot ----------------------------------------------------

def test_empty_workspace_reads(fresh):
    client = fresh["client"]
    pairs = client.get("/pairs").json()
    assert pairs == {"versions": {"ontology": 1, "mapping": 1,
                                  "snapshot": None},
                     "snapshot": None, "pairs": []}
    assert client.get("/triage").json()["groups"] == []
    summary = client.get("/reports/summary").json()
    assert summary["snapshots"] == []
    assert summary["deltas"] == []


# -- mapping edits ------------------------------------------------------------------

def test_mapping_preview_reports_the_followers(fresh):
    body = fresh["client"].post(mapping_url("tree#1:n"), json={
        "targets": [{"concept": "GroupOfPlants", "relation": "+"}],
        "preview": True}).json()
    assert body["preview"]["propagation"] == 7
    assert "oak#2:n" in body["preview"]["affected"]
    assert len(body["preview"]["affected"]) == 7


def test_stale_edits_conflict_without_mutating(fresh):
    client = fresh["client"]
    stale = client.post(mapping_url("muscle#1:n"), json={
        "targets": [{"concept": "Muscle", "relation": "="}],
        "baseVersion": 99})
    assert stale.status_code == 409
    assert stale.json()["expected"] == 99
    assert stale.json()["actual"] == 1
    fixed = client.post(mapping_url("muscle#1:n"), json={
        "targets": [{"concept": "Muscle", "relation": "="}],
        "note": "drafted against v1", "baseVersion": 1})
    assert fixed.status_code == 200
    assert fixed.json()["targets"] == ["Muscle="]
    assert fixed.json()["versions"]["mapping"] == 2


def test_mapping_edit_can_propagate(fresh):
    body = fresh["client"].post(mapping_url("tree#1:n"), json={
        "targets": [{"concept": "BotanicalTree", "relation": "="}],
        "propagate": True}).json()
    assert body["propagated"] == 7
    assert body["versions"]["mapping"] == 2


def test_bad_targets_are_rejected(fresh):
    response = fresh["client"].post(mapping_url("muscle#1:n"), json={
        "targets": [{"concept": "Muscle", "relation": "*"}]})
    assert response.status_code == 400
    assert "relation" in response.json()["detail"]


def test_targets_accept_token_strings(fresh):
    client = fresh["client"]
    edited = client.post(mapping_url("muscle#1:n"), json={
        "targets": ["Muscle="], "baseVersion": 1})
    assert edited.status_code == 200
    assert edited.json()["targets"] == ["Muscle="]
    assert client.post(mapping_url("muscle#1:n"), json={
        "targets": ["Muscle*"]}).status_code == 400


def test_unknown_synsets_404(fresh):
    client = fresh["client"]
    assert client.post(mapping_url("nonexistent#1:n"), json={
        "targets": []}).status_code == 404
    assert client.post("/mappings/999999", json={
        "targets": []}).status_code == 404


# -- job cancellation ----------------------------------------------------------------

def test_jobs_can_be_cancelled(tmp_path, data_text, index_text,
                               ontology_text, mapping_text):
    ws = Workspace.create(str(tmp_path / "ws-cancel"))
    pipe = Pipeline(ws)
    pipe.ingest(data_text, index_text, ontology_text, mapping_text,
                min_descendants=8)
    crawler = ProverConfig(
        "crawler", f"{shlex.quote(sys.executable)} -c "
                   "\"import time; time.sleep(0.3)\"")
    client = TestClient(build_app(ws, provers=[crawler]))
    job = client.post("/jobs/evaluate", json={"label": "doomed"}
                      ).json()["job"]
    client.post(f"/jobs/{job['id']}/cancel")
    finished = wait_for_job(client, job["id"])
    assert finished["state"] == "failed"
    assert finished["error"] == "cancelled"
    assert client.get("/pairs").json()["snapshot"] is None
