"""Given-clause saturation prover over the tuple clause encoding.

Binary resolution with factoring, forward subsumption and tautology
deletion. Resolution is restricted to steps where at least one premise
is a positive clause (P-resolution), which stays refutationally
complete but lets saturation terminate on the transitivity-heavy
problems this package emits: two mixed clauses such as the subclass
chain rule can no longer resolve into ever-longer chains. Clause
selection interleaves smallest-first and oldest-first picks at a fixed
ratio; both orders break ties by arrival, so runs stay deterministic
for caching. The prover answers exactly one question: does the clause
set derive the empty clause.
"""

from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass

from .fol import Clause, Literal

PROVED = "proved"
GAVE_UP = "gaveUp"
TIMEOUT = "timeout"


@dataclass
class SaturationResult:
    verdict: str
    generated: int
    processed: int
    seconds: float


# -- terms ------------------------------------------------------------------

def _walk(t, subst):
    while t[0] == "v":
        nxt = subst.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def _occurs(v, t, subst):
    t = _walk(t, subst)
    if t == v:
        return True
    if t[0] == "f":
        return any(_occurs(v, a, subst) for a in t[2])
    return False


def unify(a, b, subst):
    """Extend subst to unify terms a and b, or return None.

    Performs the occurs check, so the result is always a valid
    idempotent-after-walk substitution.
    """
    a = _walk(a, subst)
    b = _walk(b, subst)
    if a == b:
        return subst
    if a[0] == "v":
        if _occurs(a, b, subst):
            return None
        out = dict(subst)
        out[a] = b
        return out
    if b[0] == "v":
        if _occurs(b, a, subst):
            return None
        out = dict(subst)
        out[b] = a
        return out
    if a[0] == "f" and b[0] == "f" and a[1] == b[1] and len(a[2]) == len(b[2]):
        for x, y in zip(a[2], b[2]):
            subst = unify(x, y, subst)
            if subst is None:
                return None
        return subst
    return None


def unify_tuples(args_a, args_b, subst):
    if len(args_a) != len(args_b):
        return None
    for x, y in zip(args_a, args_b):
        subst = unify(x, y, subst)
        if subst is None:
            return None
    return subst


def apply_subst(t, subst):
    t = _walk(t, subst)
    if t[0] == "f":
        return ("f", t[1], tuple(apply_subst(a, subst) for a in t[2]))
    return t


def _rename_term(t, offset):
    if t[0] == "v":
        return ("v", t[1] + offset)
    if t[0] == "f":
        return ("f", t[1], tuple(_rename_term(a, offset) for a in t[2]))
    return t


def _max_var(clause: Clause) -> int:
    top = -1

    def scan(t):
        nonlocal top
        if t[0] == "v":
            top = max(top, t[1])
        elif t[0] == "f":
            for a in t[2]:
                scan(a)

    for _, _, args in clause:
        for a in args:
            scan(a)
    return top


def rename_apart(clause: Clause, offset: int) -> Clause:
    if offset == 0:
        return clause
    return frozenset(
        (s, p, tuple(_rename_term(a, offset) for a in args))
        for (s, p, args) in clause
    )


def normalize_clause(clause) -> Clause:
    """Renumber variables in first-seen order so variants collide."""
    order = sorted(clause)
    varmap: dict = {}

    def ren(t):
        if t[0] == "v":
            if t not in varmap:
                varmap[t] = ("v", len(varmap))
            return varmap[t]
        if t[0] == "f":
            return ("f", t[1], tuple(ren(a) for a in t[2]))
        return t

    return frozenset((s, p, tuple(ren(a) for a in args)) for (s, p, args) in order)


def is_tautology(clause: Clause) -> bool:
    pos = {(p, a) for (s, p, a) in clause if s}
    return any((p, a) in pos for (s, p, a) in clause if not s)


def subsumes(small: Clause, big: Clause) -> bool:
    """True when some substitution maps every literal of small into big."""
    if len(small) > len(big):
        return False
    small_lits = list(small)
    big_lits = list(big)

    def match(i, subst):
        if i == len(small_lits):
            return True
        s, p, args = small_lits[i]
        for s2, p2, args2 in big_lits:
            if s2 != s or p2 != p or len(args2) != len(args):
                continue
            nxt = _match_args(args, args2, subst)
            if nxt is not None and match(i + 1, nxt):
                return True
        return False

    return match(0, {})


def _match_args(pat, ground, subst):
    # one-way matching: variables bind in pat only
    for a, b in zip(pat, ground):
        subst = _match_term(a, b, subst)
        if subst is None:
            return None
    return subst


def _match_term(pat, tgt, subst):
    if pat[0] == "v":
        bound = subst.get(pat)
        if bound is None:
            out = dict(subst)
            out[pat] = tgt
            return out
        return subst if bound == tgt else None
    if pat[0] == "c":
        return subst if pat == tgt else None
    if tgt[0] != "f" or pat[1] != tgt[1] or len(pat[2]) != len(tgt[2]):
        return None
    return _match_args(pat[2], tgt[2], subst)


def resolvents(given: Clause, other: Clause, offset: int | None = None):
    """All binary resolvents of the two clauses, variables renamed apart.

    Literals are visited in sorted order so the yield order, and with it
    the whole search, is independent of hash seeding.
    """
    if offset is None:
        offset = _max_var(given) + 1
    other = rename_apart(other, offset)
    for s1, p1, args1 in sorted(given):
        for s2, p2, args2 in sorted(other):
            if s1 == s2 or p1 != p2 or len(args1) != len(args2):
                continue
            subst = unify_tuples(args1, args2, {})
            if subst is None:
                continue
            merged = set()
            for lit in given:
                if lit != (s1, p1, args1):
                    merged.add((lit[0], lit[1],
                                tuple(apply_subst(a, subst) for a in lit[2])))
            for lit in other:
                if lit != (s2, p2, args2):
                    merged.add((lit[0], lit[1],
                                tuple(apply_subst(a, subst) for a in lit[2])))
            yield frozenset(merged)


def factors(clause: Clause):
    lits = sorted(clause)
    for i in range(len(lits)):
        for j in range(i + 1, len(lits)):
            s1, p1, args1 = lits[i]
            s2, p2, args2 = lits[j]
            if s1 != s2 or p1 != p2 or len(args1) != len(args2):
                continue
            subst = unify_tuples(args1, args2, {})
            if subst is None:
                continue
            yield frozenset(
                (s, p, tuple(apply_subst(a, subst) for a in args))
                for (s, p, args) in clause
            )


def _lit_keys(clause: Clause) -> tuple:
    return tuple(sorted({(s, p, len(args)) for (s, p, args) in clause}))


def _is_positive(clause: Clause) -> bool:
    return all(s for (s, _, _) in clause)


def _term_is_ground(t) -> bool:
    if t[0] == "v":
        return False
    if t[0] == "f":
        return all(_term_is_ground(a) for a in t[2])
    return True


def _is_ground(clause: Clause) -> bool:
    return all(_term_is_ground(a) for (_, _, args) in clause for a in args)


PICK_RATIO = 4  # smallest-first picks between consecutive oldest-first picks


def saturate(clauses, max_seconds: float | None = None,
             max_clauses: int | None = None) -> SaturationResult:
    """Run the given-clause loop until refutation, saturation, or budget.

    max_seconds bounds wall-clock time; max_clauses bounds the number of
    generated clauses. Hitting either budget yields verdict "timeout".

    Clause selection interleaves smallest-first with oldest-first at
    PICK_RATIO so unit cascades (Skolem chains breed endless new ground
    units) cannot starve the bigger clauses a refutation needs. Active
    clauses are indexed by literal key (sign, predicate, arity):
    resolution partners must hold a complementary key and a subsumer's
    keys must all occur in the subsumee, so both scans touch only
    plausible candidates. Index buckets are insertion-ordered lists,
    keeping runs deterministic.
    """
    start = time.monotonic()
    passive: list = []
    fifo: deque = deque()
    seen: set[Clause] = set()
    processed: set[Clause] = set()
    seq = 0
    generated = 0
    picks = 0

    def push(clause: Clause) -> bool:
        # returns True if the empty clause was pushed
        nonlocal seq, generated
        clause = normalize_clause(clause)
        if clause in seen or is_tautology(clause):
            return False
        seen.add(clause)
        generated += 1
        heapq.heappush(passive, (len(clause), seq, clause))
        fifo.append(clause)
        seq += 1
        return len(clause) == 0

    def next_given():
        nonlocal picks
        picks += 1
        if picks % (PICK_RATIO + 1) == 0:
            while fifo:
                clause = fifo.popleft()
                if clause not in processed:
                    return clause
        while passive:
            _, _, clause = heapq.heappop(passive)
            if clause not in processed:
                return clause
        while fifo:
            clause = fifo.popleft()
            if clause not in processed:
                return clause
        return None

    for c in clauses:
        if push(c):
            return SaturationResult(PROVED, generated, 0,
                                    time.monotonic() - start)

    active_count = 0
    by_lit: dict = {}      # literal key -> active clauses holding it
    by_lit_pos: dict = {}  # literal key -> positive active clauses
    by_min_key: dict = {}  # smallest key -> (clause, is_ground) actives

    while True:
        if max_seconds is not None and time.monotonic() - start > max_seconds:
            return SaturationResult(TIMEOUT, generated, active_count,
                                    time.monotonic() - start)
        if max_clauses is not None and generated > max_clauses:
            return SaturationResult(TIMEOUT, generated, active_count,
                                    time.monotonic() - start)
        given = next_given()
        if given is None:
            break
        processed.add(given)
        keys = _lit_keys(given)
        key_set = set(keys)
        subsumed = False
        for key in keys:
            for old, old_keys, old_ground in by_min_key.get(key, ()):
                if len(old) > len(given) or not old_keys <= key_set:
                    continue
                # a ground clause subsumes exactly its supersets
                hit = (old <= given) if old_ground else subsumes(old, given)
                if hit:
                    subsumed = True
                    break
            if subsumed:
                break
        if subsumed:
            continue
        positive = _is_positive(given)
        index = by_lit if positive else by_lit_pos
        partners: list[Clause] = []
        found = {given}
        for s, p, arity in keys:
            for other in index.get((not s, p, arity), ()):
                if other not in found:
                    found.add(other)
                    partners.append(other)
        new: list[Clause] = []
        offset = _max_var(given) + 1
        for other in partners:
            new.extend(resolvents(given, other, offset))
        new.extend(factors(given))
        active_count += 1
        for key in keys:
            by_lit.setdefault(key, []).append(given)
            if positive:
                by_lit_pos.setdefault(key, []).append(given)
        by_min_key.setdefault(min(keys), []).append(
            (given, key_set, _is_ground(given)))
        for clause in new:
            if push(clause):
                return SaturationResult(PROVED, generated, active_count,
                                        time.monotonic() - start)
    return SaturationResult(GAVE_UP, generated, active_count,
                            time.monotonic() - start)
