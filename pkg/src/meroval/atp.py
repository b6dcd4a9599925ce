"""Prover portfolio: subprocess execution, verdict cache, CQ classification.

Provers are external commands described by templates; the bundled
saturation prover joins the portfolio through the same subprocess
interface, so every portfolio member is exercised identically and
classification depends only on printed SZS markers.

A question passes when some prover proves it from the emitted ontology.
When nobody proves it but somebody proves its negation, it is refuted.
Everything else stays unresolved. Both directions of every attempt are
cached by problem content, so re-running an unchanged evaluation spawns
no prover processes at all.
"""

from __future__ import annotations

import hashlib
import json
import os
import shlex
import subprocess
import sys
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .fol import Not
from .tptp import write_problem

PROVED = "proved"
COUNTER_SATISFIABLE = "counterSatisfiable"
GAVE_UP = "gaveUp"
TIMEOUT = "timeout"
UNAVAILABLE = "unavailable"
ERROR = "error"

PASSING = "passingCQ"
NON_PASSING = "nonPassingCQ"
UNRESOLVED = "unresolvedCQ"

DEFAULT_SECONDS = 600
DEFAULT_MEGABYTES = 2048

_spawn_lock = threading.Lock()
_spawn_count = 0


def spawn_count() -> int:
    return _spawn_count


def reset_spawn_count():
    global _spawn_count
    with _spawn_lock:
        _spawn_count = 0


@dataclass(frozen=True)
class ProverConfig:
    name: str
    command: str  # template with {problemFile}, {seconds}, {megabytes}
    proved_markers: tuple = ("SZS status Theorem", "SZS status Unsatisfiable")
    csa_markers: tuple = ("SZS status CounterSatisfiable",
                          "SZS status Satisfiable")
    gaveup_markers: tuple = ("SZS status GaveUp",)
    timeout_markers: tuple = ("SZS status Timeout", "SZS status ResourceOut")


def default_provers() -> list[ProverConfig]:
    return [
        ProverConfig(
            "vampire",
            "vampire --proof tptp --output_axiom_names on --mode casc"
            " -t {seconds} -m {megabytes} {problemFile}"),
        ProverConfig(
            "eprover",
            "eprover --auto --proof-object -s --cpu-limit={seconds}"
            " --memory-limit={megabytes} {problemFile}"),
        bundled_prover(),
    ]


def bundled_prover() -> ProverConfig:
    return ProverConfig(
        "micro",
        f"{shlex.quote(sys.executable)} -m meroval.prove {{problemFile}}"
        " --time-limit {seconds}")


@dataclass
class ProverRun:
    prover: str
    direction: str  # "conjecture" | "negation"
    verdict: str
    seconds: float
    output: str = ""
    cached: bool = False


def _note_spawn():
    global _spawn_count
    with _spawn_lock:
        _spawn_count += 1


def run_prover(config: ProverConfig, problem_path: str, seconds: int,
               megabytes: int) -> tuple[str, str]:
    """Execute one prover; returns (verdict, combined output)."""
    cmd = config.command.format(problemFile=shlex.quote(problem_path),
                                seconds=seconds, megabytes=megabytes)
    argv = shlex.split(cmd)
    try:
        proc = subprocess.run(argv, capture_output=True, text=True,
                              timeout=seconds + 10)
    except FileNotFoundError:
        return UNAVAILABLE, f"prover executable not found: {argv[0]}"
    except subprocess.TimeoutExpired as exc:
        _note_spawn()
        out = (exc.stdout or b"")
        if isinstance(out, bytes):
            out = out.decode(errors="replace")
        return TIMEOUT, out + "\n[killed after wall-clock limit]"
    _note_spawn()
    output = proc.stdout + ("\n" + proc.stderr if proc.stderr else "")
    for marker in config.proved_markers:
        if marker in output:
            return PROVED, output
    for marker in config.csa_markers:
        if marker in output:
            return COUNTER_SATISFIABLE, output
    for marker in config.gaveup_markers:
        if marker in output:
            return GAVE_UP, output
    for marker in config.timeout_markers:
        if marker in output:
            return TIMEOUT, output
    if proc.returncode != 0:
        return ERROR, output
    return GAVE_UP, output


class VerdictCache:
    """Thread-safe verdict store persisted as one JSON file."""

    def __init__(self, path: str | None = None):
        self.path = path
        self._lock = threading.Lock()
        self._data: dict[str, dict] = {}
        self._dirty = False
        if path and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                self._data = json.load(fh)

    @staticmethod
    def key(problem_text: str, prover: str, seconds: int,
            megabytes: int) -> str:
        h = hashlib.sha256()
        h.update(problem_text.encode())
        h.update(f"|{prover}|{seconds}|{megabytes}".encode())
        return h.hexdigest()

    def get(self, key: str) -> dict | None:
        with self._lock:
            return self._data.get(key)

    def put(self, key: str, verdict: str, seconds: float):
        with self._lock:
            self._data[key] = {"verdict": verdict, "seconds": seconds}
            self._dirty = True

    def flush(self):
        if not self.path:
            return
        with self._lock:
            if not self._dirty:
                return
            tmp = self.path + ".tmp"
            os.makedirs(os.path.dirname(self.path), exist_ok=True)
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(self._data, fh, indent=0, sort_keys=True)
            os.replace(tmp, self.path)
            self._dirty = False


@dataclass
class CQDecision:
    cq_id: str
    status: str
    attempts: list = field(default_factory=list)

    @property
    def any_timeout(self) -> bool:
        return any(a.verdict == TIMEOUT for a in self.attempts)


def _problem_texts(cq, emitted_axioms) -> dict[str, str]:
    return {
        "conjecture": write_problem(emitted_axioms, cq.formula,
                                    conjecture_name=f"cq_{cq.id}"),
        "negation": write_problem(emitted_axioms, Not(cq.formula),
                                  conjecture_name=f"ncq_{cq.id}"),
    }


def _archive(archive_dir, cq_id, prover, direction, problem_text, output):
    if not archive_dir:
        return
    run_dir = os.path.join(archive_dir, cq_id, prover)
    os.makedirs(run_dir, exist_ok=True)
    problem_file = os.path.join(archive_dir, cq_id, f"{direction}.p")
    if not os.path.exists(problem_file):
        with open(problem_file, "w", encoding="utf-8") as fh:
            fh.write(problem_text)
    with open(os.path.join(run_dir, f"{direction}.out"), "w",
              encoding="utf-8") as fh:
        fh.write(output)


def decide_cq(cq, emitted_axioms, provers, seconds: int, megabytes: int,
              cache: VerdictCache | None = None,
              archive_dir: str | None = None,
              cache_only: bool = False) -> CQDecision:
    texts = _problem_texts(cq, emitted_axioms)
    decision = CQDecision(cq.id, UNRESOLVED)
    for direction in ("conjecture", "negation"):
        problem_text = texts[direction]
        direction_proved = False
        for config in provers:
            key = VerdictCache.key(problem_text, config.name, seconds,
                                   megabytes)
            cached = cache.get(key) if cache else None
            if cached is not None:
                run = ProverRun(config.name, direction, cached["verdict"],
                                cached["seconds"], cached=True)
            elif cache_only:
                continue
            else:
                verdict, output = _run_on_temp(config, problem_text,
                                               seconds, megabytes)
                run = ProverRun(config.name, direction, verdict, seconds)
                _archive(archive_dir, cq.id, config.name, direction,
                         problem_text, output)
                if cache and verdict != UNAVAILABLE:
                    cache.put(key, verdict, seconds)
            if run.verdict != UNAVAILABLE:
                decision.attempts.append(run)
            if run.verdict == PROVED:
                direction_proved = True
                break
        if direction_proved:
            decision.status = PASSING if direction == "conjecture" else NON_PASSING
            return decision
    return decision


def _run_on_temp(config, problem_text, seconds, megabytes):
    fd, path = tempfile.mkstemp(suffix=".p", prefix="meroval_")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(problem_text)
        return run_prover(config, path, seconds, megabytes)
    finally:
        os.unlink(path)


def decide_cqs(cqs, emitted_axioms, provers, seconds: int = DEFAULT_SECONDS,
               megabytes: int = DEFAULT_MEGABYTES,
               cache: VerdictCache | None = None,
               archive_dir: str | None = None,
               jobs: int = 1, cancel=None, cache_only: bool = False,
               progress=None) -> dict[str, CQDecision]:
    """Decide every question, optionally across a thread pool.

    A set `cancel` event stops the run between questions; decisions made
    so far are still returned so the caller can tell how far it got.
    `progress`, when given, is called once per finished question.
    """
    def cancelled():
        return cancel is not None and cancel.is_set()

    def one(cq):
        decision = decide_cq(cq, emitted_axioms, provers, seconds,
                             megabytes, cache, archive_dir, cache_only)
        if progress is not None:
            progress(cq.id)
        return decision

    out: dict[str, CQDecision] = {}
    if jobs <= 1:
        for cq in cqs:
            if cancelled():
                break
            out[cq.id] = one(cq)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {}
            for cq in cqs:
                if cancelled():
                    break
                futures[cq.id] = pool.submit(one, cq)
            out = {cq_id: fut.result() for cq_id, fut in futures.items()}
    if cache:
        cache.flush()
    return out
