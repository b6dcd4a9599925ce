"""WordNet database files: synsets, sense resolution, meronymy, BLCs.

The parser reads the stock database file format (data.noun plus
index.noun). License header lines, which begin with two spaces, are
skipped. Sense numbers come from the index file: the k-th offset listed
for a lemma is sense k, so external identifiers of the form lemma#k:n
resolve without any extra tables.

Meronymy pointers sit on the whole-side synset: a %p / %s / %m pointer
from S to T contributes the pair (part=T, whole=S). Inverse pointers
(#p / #s / #m) are optional but checked for consistency when present.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass

Pointer = namedtuple("Pointer", "symbol offset pos source target")

MERONYM_SYMBOLS = {"%p": "part", "%s": "substance", "%m": "member"}
HOLONYM_SYMBOLS = {"#p": "part", "#s": "substance", "#m": "member"}
HYPERNYM_SYMBOLS = ("@", "@i")
HYPONYM_SYMBOLS = ("~", "~i")


class LexiconError(Exception):
    pass


@dataclass(frozen=True)
class Synset:
    offset: int
    lex_filenum: int
    ss_type: str
    words: tuple
    pointers: tuple
    gloss: str

    @property
    def head_lemma(self) -> str:
        return self.words[0][0]


MeronymyPair = namedtuple("MeronymyPair", "relation part whole")


def _split_gloss(line: str, lineno: int):
    if " | " not in line:
        raise LexiconError(f"data line {lineno}: missing gloss separator")
    head, gloss = line.split(" | ", 1)
    return head, gloss.strip()


def parse_data_line(line: str, lineno: int = 0) -> Synset:
    head, gloss = _split_gloss(line, lineno)
    toks = head.split()
    try:
        offset = int(toks[0])
        lex_filenum = int(toks[1])
        ss_type = toks[2]
        w_cnt = int(toks[3], 16)
        i = 4
        words = []
        for _ in range(w_cnt):
            words.append((toks[i], int(toks[i + 1], 16)))
            i += 2
        p_cnt = int(toks[i], 10)
        i += 1
        pointers = []
        for _ in range(p_cnt):
            symbol, tgt, pos, st = toks[i:i + 4]
            if len(st) != 4:
                raise ValueError(f"bad source/target field {st!r}")
            pointers.append(Pointer(symbol, int(tgt), pos,
                                    int(st[:2], 16), int(st[2:], 16)))
            i += 4
    except (IndexError, ValueError) as exc:
        raise LexiconError(f"data line {lineno}: {exc}") from exc
    if i != len(toks):
        raise LexiconError(
            f"data line {lineno}: {len(toks) - i} unconsumed fields")
    return Synset(offset, lex_filenum, ss_type, tuple(words),
                  tuple(pointers), gloss)


def parse_index_line(line: str, lineno: int = 0):
    toks = line.split()
    try:
        lemma = toks[0]
        pos = toks[1]
        synset_cnt = int(toks[2])
        p_cnt = int(toks[3])
        i = 4 + p_cnt
        sense_cnt = int(toks[i])
        # tagsense_cnt at i+1
        offsets = [int(t) for t in toks[i + 2:]]
    except (IndexError, ValueError) as exc:
        raise LexiconError(f"index line {lineno}: {exc}") from exc
    if len(offsets) != synset_cnt or sense_cnt != synset_cnt:
        raise LexiconError(f"index line {lineno}: sense counts disagree")
    return lemma, pos, offsets


def _content_lines(text: str):
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.startswith("  ") or not line.strip():
            continue
        yield lineno, line


class Corpus:
    """A parsed database: synsets by offset plus the sense index."""

    def __init__(self, synsets: dict, index: dict):
        self.synsets = synsets
        self.index = index
        self._descendant_counts: dict | None = None
        self._check_pointers()
        self._check_acyclic()

    @classmethod
    def from_texts(cls, data_text: str, index_text: str) -> "Corpus":
        synsets = {}
        for lineno, line in _content_lines(data_text):
            syn = parse_data_line(line, lineno)
            if syn.offset in synsets:
                raise LexiconError(
                    f"data line {lineno}: duplicate offset {syn.offset}")
            synsets[syn.offset] = syn
        index = {}
        for lineno, line in _content_lines(index_text):
            lemma, pos, offsets = parse_index_line(line, lineno)
            for off in offsets:
                if off not in synsets:
                    raise LexiconError(
                        f"index line {lineno}: unknown offset {off}")
            index[lemma] = offsets
        return cls(synsets, index)

    @classmethod
    def from_dir(cls, path) -> "Corpus":
        import os
        with open(os.path.join(path, "data.noun"), encoding="utf-8") as fh:
            data_text = fh.read()
        with open(os.path.join(path, "index.noun"), encoding="utf-8") as fh:
            index_text = fh.read()
        return cls.from_texts(data_text, index_text)

    def _check_pointers(self):
        for syn in self.synsets.values():
            for ptr in syn.pointers:
                if ptr.offset not in self.synsets:
                    raise LexiconError(
                        f"synset {syn.offset}: dangling pointer to {ptr.offset}")

    def _check_acyclic(self):
        # hypernym cycles would break closures and the BLC walk
        WHITE, GRAY, BLACK = 0, 1, 2
        color = {off: WHITE for off in self.synsets}
        for start in self.synsets:
            if color[start] != WHITE:
                continue
            stack = [(start, iter(self.hypernyms(start)))]
            color[start] = GRAY
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt in it:
                    if color[nxt] == GRAY:
                        raise LexiconError(
                            f"hypernym cycle through synset {nxt}")
                    if color[nxt] == WHITE:
                        color[nxt] = GRAY
                        stack.append((nxt, iter(self.hypernyms(nxt))))
                        advanced = True
                        break
                if not advanced:
                    color[node] = BLACK
                    stack.pop()

    # -- senses --------------------------------------------------------------

    def resolve(self, external_id: str) -> int:
        """lemma#k:n -> synset offset (sense numbers are 1-based)."""
        try:
            rest, pos = external_id.rsplit(":", 1)
            lemma, sense = rest.rsplit("#", 1)
            k = int(sense)
        except ValueError as exc:
            raise LexiconError(f"malformed sense id {external_id!r}") from exc
        if pos != "n":
            raise LexiconError(f"only noun senses are supported: {external_id!r}")
        lemma = lemma.strip().lower().replace(" ", "_")
        offsets = self.index.get(lemma)
        if not offsets or not (1 <= k <= len(offsets)):
            raise LexiconError(f"unknown sense {external_id!r}")
        return offsets[k - 1]

    def sense_id(self, offset: int) -> str:
        """Canonical external id for a synset via its head lemma."""
        syn = self.synsets[offset]
        lemma = syn.head_lemma.lower()
        offsets = self.index.get(lemma, [])
        if offset in offsets:
            return f"{lemma}#{offsets.index(offset) + 1}:n"
        return f"{lemma}#?:n"

    # -- graph ----------------------------------------------------------------

    def hypernyms(self, offset: int) -> list[int]:
        return [p.offset for p in self.synsets[offset].pointers
                if p.symbol in HYPERNYM_SYMBOLS]

    def hyponyms(self, offset: int) -> list[int]:
        return [p.offset for p in self.synsets[offset].pointers
                if p.symbol in HYPONYM_SYMBOLS]

    def is_hyponym_of(self, offset: int, ancestor: int) -> bool:
        """Reflexive-transitive membership in the ancestor's subtree."""
        seen = set()
        frontier = [offset]
        while frontier:
            node = frontier.pop()
            if node == ancestor:
                return True
            if node in seen:
                continue
            seen.add(node)
            frontier.extend(self.hypernyms(node))
        return False

    def meronymy_pairs(self) -> list[MeronymyPair]:
        pairs = set()
        for syn in self.synsets.values():
            for ptr in syn.pointers:
                rel = MERONYM_SYMBOLS.get(ptr.symbol)
                if rel:
                    pairs.add(MeronymyPair(rel, ptr.offset, syn.offset))
        for syn in self.synsets.values():
            for ptr in syn.pointers:
                rel = HOLONYM_SYMBOLS.get(ptr.symbol)
                if rel and MeronymyPair(rel, syn.offset, ptr.offset) not in pairs:
                    raise LexiconError(
                        f"synset {syn.offset}: inverse {ptr.symbol} pointer to "
                        f"{ptr.offset} has no matching meronym pointer")
        return sorted(pairs)

    # -- descendant statistics -------------------------------------------------

    def descendant_counts(self) -> dict[int, int]:
        """Distinct proper hyponyms below each synset."""
        if self._descendant_counts is not None:
            return self._descendant_counts
        closures: dict[int, frozenset] = {}

        def closure(off: int) -> frozenset:
            got = closures.get(off)
            if got is not None:
                return got
            acc = set()
            for child in self.hyponyms(off):
                acc.add(child)
                acc |= closure(child)
            result = frozenset(acc)
            closures[off] = result
            return result

        import sys
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, len(self.synsets) + 100))
        try:
            counts = {off: len(closure(off)) for off in self.synsets}
        finally:
            sys.setrecursionlimit(old)
        self._descendant_counts = counts
        return counts

    def blc_of(self, offset: int, min_descendants: int = 20) -> int:
        """Walk rootward to the first synset with enough descendants.

        At branch points the parent with the larger descendant count wins,
        ties going to the smaller offset. When no node on the walk reaches
        the threshold the walk's top is returned.
        """
        counts = self.descendant_counts()
        node = offset
        while True:
            if counts[node] >= min_descendants:
                return node
            parents = self.hypernyms(node)
            if not parents:
                return node
            node = max(parents, key=lambda p: (counts[p], -p))

    def compute_blcs(self, min_descendants: int = 20) -> dict[int, int]:
        return {off: self.blc_of(off, min_descendants) for off in self.synsets}
