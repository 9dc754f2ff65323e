"""Core text algorithms: normalization, sentence segmentation, edit distance,
string similarity and BM25 sentence ranking.

Everything here is a pure function over immutable inputs; all operations are
safe to call concurrently.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import _kernels

__all__ = [
    "SentenceSpan",
    "Bm25Params",
    "DEFAULT_ABBREVIATIONS",
    "normalize",
    "split_sentences",
    "levenshtein",
    "similarity",
    "bm25_rank",
    "tokenize",
    "reduce_context",
]


@dataclass(frozen=True)
class SentenceSpan:
    """A sentence with its [start, end) character offsets into the source text.

    Invariant: ``source[start:end] == text``; spans from one document never
    overlap and are ordered by ``start``.
    """

    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError(f"k1 must be non-negative, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


# Dotted tokens that end with '.' but do not terminate a sentence.  Matched
# case-insensitively against the text ending at the period.
DEFAULT_ABBREVIATIONS = (
    "dr.", "mr.", "mrs.", "ms.", "prof.", "st.", "jr.", "sr.",
    "vs.", "cf.", "ca.", "approx.", "fig.", "figs.", "eq.", "sec.",
    "no.", "vol.", "et al.", "e.g.", "i.e.", "etc.",
)

_TERMINATORS = ".!?"


def normalize(text: str) -> str:
    """Collapse every whitespace run to a single space and strip the ends."""
    return " ".join(text.split())


def _ends_with_abbreviation(lowered: str, abbreviations: tuple[str, ...]) -> bool:
    # `lowered` is text[:i+1].lower() where i points at the period.
    for abbr in abbreviations:
        if lowered.endswith(abbr):
            prev = len(lowered) - len(abbr) - 1
            if prev < 0 or not lowered[prev].isalpha():
                return True
    return False


def split_sentences(
    text: str,
    abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS,
) -> list[SentenceSpan]:
    """Split text into sentence spans with exact source offsets.

    Boundaries sit after a run of sentence terminators (., !, ?) that is
    followed by whitespace-then-capital or end of text, and at every newline.
    The abbreviation list suppresses false splits after tokens like "Dr." or
    "e.g.".  Spans are trimmed of surrounding whitespace, so the input equals
    the spans interleaved with the skipped whitespace.
    """
    spans: list[SentenceSpan] = []
    n = len(text)
    abbrevs = tuple(a.lower() for a in abbreviations)

    def emit(s: int, e: int) -> None:
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if e > s:
            spans.append(SentenceSpan(text=text[s:e], start=s, end=e))

    start = 0
    i = 0
    while i < n:
        ch = text[i]
        if ch == "\n":
            emit(start, i)
            start = i + 1
        elif ch in _TERMINATORS:
            j = i + 1
            while j < n and text[j] in _TERMINATORS:
                j += 1
            k = j
            while k < n and text[k].isspace() and text[k] != "\n":
                k += 1
            boundary = j >= n or (k > j and k < n and text[k].isupper())
            if boundary and text[j - 1] == "." and _ends_with_abbreviation(
                text[:j].lower(), abbrevs
            ):
                boundary = False
            if boundary:
                emit(start, j)
                start = j
            i = j - 1
        i += 1
    emit(start, n)
    return spans


def _codes(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int32)


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert/delete/substitute) between two strings.

    Character-level and case-sensitive; symmetric in its arguments.
    """
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    # Trimming the common affixes keeps the DP small for near-equal strings.
    lo = 0
    hi_a, hi_b = len(a), len(b)
    while lo < hi_a and lo < hi_b and a[lo] == b[lo]:
        lo += 1
    while hi_a > lo and hi_b > lo and a[hi_a - 1] == b[hi_b - 1]:
        hi_a -= 1
        hi_b -= 1
    a, b = a[lo:hi_a], b[lo:hi_b]
    if not a:
        return len(b)
    if not b:
        return len(a)
    return int(_kernels.lev_distance(_codes(a), _codes(b)))


def similarity(a: str, b: str) -> float:
    """Levenshtein similarity ``1 - d(a, b) / max(|a|, |b|)`` in [0, 1].

    Two empty strings are defined to be identical (similarity 1).
    """
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


def bm25_rank(
    sentences: list[SentenceSpan],
    query: str,
    params: Bm25Params = Bm25Params(),
) -> list[tuple[int, float]]:
    """Score each sentence against the query with Okapi BM25.

    Each sentence is one document and the sentence list is the corpus.
    IDF = ln((N - df + 0.5) / (df + 0.5) + 1); query tokens are scored as
    given, so a repeated query term counts once per occurrence.  Returns
    (index, score) pairs sorted by descending score, ties by ascending index.
    """
    n_docs = len(sentences)
    if n_docs == 0:
        return []
    doc_tokens = [tokenize(s.text) for s in sentences]
    doc_lens = [len(toks) for toks in doc_tokens]
    avg_len = sum(doc_lens) / n_docs
    term_freqs = [Counter(toks) for toks in doc_tokens]
    df: Counter = Counter()
    for tf in term_freqs:
        df.update(tf.keys())
    idf = {
        term: math.log((n_docs - d + 0.5) / (d + 0.5) + 1.0)
        for term, d in df.items()
    }

    query_tokens = tokenize(query)
    scores = []
    for i, tf in enumerate(term_freqs):
        if avg_len == 0:
            scores.append((i, 0.0))
            continue
        norm = params.k1 * (1.0 - params.b + params.b * doc_lens[i] / avg_len)
        s = 0.0
        for term in query_tokens:
            f = tf.get(term, 0)
            if f == 0:
                continue
            s += idf[term] * (f * (params.k1 + 1.0)) / (f + norm)
        scores.append((i, s))
    scores.sort(key=lambda pair: (-pair[1], pair[0]))
    return scores


def reduce_context(
    document: str,
    query: str,
    char_cap: int,
    params: Bm25Params = Bm25Params(),
) -> str:
    """Shrink a document to at most ``char_cap`` characters of sentences.

    Sentences are taken greedily by descending BM25 rank against the query
    until adding the next ranked sentence would exceed the cap, then emitted
    in original document order joined by single newlines.  The cap bounds the
    sum of sentence lengths; joining newlines come on top.
    """
    if char_cap <= 0:
        raise ValueError(f"char_cap must be positive, got {char_cap}")
    sentences = split_sentences(document)
    if not sentences:
        return ""
    if min(len(s.text) for s in sentences) > char_cap:
        raise ValueError(
            f"char_cap {char_cap} is smaller than every sentence in the document"
        )
    ranked = bm25_rank(sentences, query, params)
    selected: list[int] = []
    budget = char_cap
    for idx, _score in ranked:
        cost = len(sentences[idx].text)
        if cost > budget:
            break
        selected.append(idx)
        budget -= cost
    selected.sort()
    return "\n".join(sentences[i].text for i in selected)
