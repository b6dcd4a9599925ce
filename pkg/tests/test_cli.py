"""Smoke tests for the command-line surface.

These drive cli.main in-process and only skim each command's output;
the behavior behind the commands is covered by the pipeline tests. The
serve command is exercised once over a real socket since nothing else
runs the module entry point.
"""

import json
import socket
import subprocess
import sys
import time
import urllib.request

import pytest

from conftest import FIXTURES, MIN_DESCENDANTS
from meroval.cli import main

DATA = str(FIXTURES / "wordnet" / "data.noun")
INDEX = str(FIXTURES / "wordnet" / "index.noun")
ONTOLOGY = str(FIXTURES / "ontology" / "base.kif")
MAPPING = str(FIXTURES / "wordnet" / "annotated.noun")
BLC = str(FIXTURES / "corrections" / "blc.tsv")
MEMBER_PATCH = str(FIXTURES / "patches" / "member.kif")

GOLDEN_CQ_ID = "01376ba85c3d"


@pytest.fixture()
def ws(tmp_path):
    root = str(tmp_path / "ws")
    assert main(["--workspace", root, "init"]) == 0
    assert main(["--workspace", root, "ingest",
                 "--data", DATA, "--index", INDEX,
                 "--ontology", ONTOLOGY, "--mapping", MAPPING,
                 "--min-descendants", str(MIN_DESCENDANTS)]) == 0
    return root


def test_init_refuses_an_existing_workspace(tmp_path, capsys):
    root = str(tmp_path / "ws")
    assert main(["--workspace", root, "init"]) == 0
    assert main(["--workspace", root, "init"]) == 1
    assert "error:" in capsys.readouterr().err


def test_ingest_reports_corpus_sizes(tmp_path, capsys):
    root = str(tmp_path / "ws")
    assert main(["--workspace", root, "init"]) == 0
    assert main(["--workspace", root, "ingest",
                 "--data", DATA, "--index", INDEX,
                 "--ontology", ONTOLOGY, "--mapping", MAPPING]) == 0
    out = capsys.readouterr().out
    assert "ingested 56 synsets, 45 mapping entries, 19 meronymy pairs" in out
    assert "ontology version 1, mapping version 1" in out


def test_workspace_comes_from_the_environment(tmp_path, monkeypatch, capsys):
    root = str(tmp_path / "ws")
    monkeypatch.setenv("MEROVAL_WORKSPACE", root)
    assert main(["init"]) == 0
    assert root in capsys.readouterr().out


def test_gen_cqs_lists_and_shows_questions(ws, capsys):
    assert main(["--workspace", ws, "gen-cqs"]) == 0
    out = capsys.readouterr().out
    assert "19 pairs, 15 questions, 1 pairs skipped" in out
    assert f"cq {GOLDEN_CQ_ID}" in out
    assert "skipped pedicel#1:n part of flower#1:n" in out

    assert main(["--workspace", ws, "gen-cqs", "--show", GOLDEN_CQ_ID]) == 0
    out = capsys.readouterr().out
    assert out.startswith("(exists (?X ?Y)")
    assert "($instance ?X BodyPart)" in out

    assert main(["--workspace", ws, "gen-cqs", "--show", "feedbeef"]) == 1
    assert "no question feedbeef" in capsys.readouterr().err


def test_precheck_prints_structured_violations(ws, capsys):
    assert main(["--workspace", ws, "precheck"]) == 0
    out = capsys.readouterr().out
    assert "8 domain violations in 19 pairs" in out
    assert ("violation hyaena#1:n member of hyaenidae#1:n: "
            "whole maps to Carnivore, disjoint from Collection" in out)


def test_evaluate_report_and_summary_round_trip(ws, capsys):
    assert main(["--workspace", ws, "evaluate", "--label", "cli check",
                 "--relation", "part", "--time-limit", "30"]) == 0
    evaluated = capsys.readouterr().out
    assert evaluated.startswith("cli check\n=========\n")
    assert evaluated.rstrip().endswith("snapshot 1 written")

    assert main(["--workspace", ws, "report", "--snapshot", "1"]) == 0
    reported = capsys.readouterr().out
    assert evaluated.startswith(reported.rstrip("\n"))

    assert main(["--workspace", ws, "summary", "--versions", "1"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["snapshots"][0]["label"] == "cli check"
    assert summary["deltas"] == []


def test_report_needs_a_snapshot(ws, capsys):
    assert main(["--workspace", ws, "report"]) == 1
    assert "no evaluation snapshots yet" in capsys.readouterr().err


def test_correction_commands_report_versions(ws, capsys):
    assert main(["--workspace", ws, "apply-patch", MEMBER_PATCH]) == 0
    assert "ontology version 2" in capsys.readouterr().out

    assert main(["--workspace", ws, "apply-heuristics", "--phase", "H1"]) == 0
    out = capsys.readouterr().out
    assert "H1: 5 mapping(s) changed, mapping version 2" in out
    assert "hyaenidae#1:n -> GroupOfAnimals+" in out

    assert main(["--workspace", ws, "propagate-blc", BLC]) == 0
    out = capsys.readouterr().out
    assert "7 mapping(s) rewritten by propagation" in out

    assert main(["--workspace", ws, "edit-mapping", "muscle#1:n",
                 "--target", "Muscle=", "--note", "narrow to the organ"]) == 0
    assert "mapping version 4" in capsys.readouterr().out


def test_edit_mapping_surfaces_version_conflicts(ws, capsys):
    rc = main(["--workspace", ws, "edit-mapping", "muscle#1:n",
               "--target", "Muscle=", "--base-version", "9"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_bad_prover_spec_is_rejected(ws, capsys):
    rc = main(["--workspace", ws, "evaluate", "--prover", "zipperposition"])
    assert rc == 1
    assert "unknown prover" in capsys.readouterr().err


def test_serve_answers_over_a_socket(ws):
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    proc = subprocess.Popen(
        [sys.executable, "-m", "meroval", "--workspace", ws,
         "serve", "--port", str(port)],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT)
    try:
        deadline = time.monotonic() + 20
        last = None
        while True:
            try:
                with urllib.request.urlopen(
                        f"http://127.0.0.1:{port}/pairs", timeout=1) as resp:
                    body = json.load(resp)
                break
            except OSError as exc:
                last = exc
                if time.monotonic() > deadline:
                    raise AssertionError(f"serve never came up: {last}")
                time.sleep(0.1)
        assert body["snapshot"] is None
        assert body["pairs"] == []
    finally:
        proc.terminate()
        proc.wait(timeout=10)
