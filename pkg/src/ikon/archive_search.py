"""Inverted index over the corpus, tf-idf ranking, and the term archive.

The index is immutable once built and rebuilt from scratch on demand;
desk scale makes incremental indexing pointless. Term and concept lookup
is plain exact/prefix label matching, no index needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import tokens
from .corpus import CorpusManifest
from .errors import MissingDocument
from .ontology import OntologyGraph, normalize_label


@dataclass(frozen=True)
class InvertedIndex:
    postings: dict[str, tuple[tuple[str, int], ...]]  # token -> ((doc_id, tf), ...) by doc_id
    doc_count: int
    doc_totals: dict[str, int]


@dataclass(frozen=True)
class SearchHit:
    kind: str  # document | term | concept
    target_id: str
    score: float
    snippet: str | None = None


def build_index(manifest: CorpusManifest, bodies: dict[str, str]) -> InvertedIndex:
    counts: dict[str, dict[str, int]] = {}
    totals: dict[str, int] = {}
    for entry in manifest.entries:
        if entry.doc_id not in bodies:
            raise MissingDocument(entry.doc_id)
        doc_tokens = tokens.words_lower(bodies[entry.doc_id])
        totals[entry.doc_id] = len(doc_tokens)
        for token in doc_tokens:
            counts.setdefault(token, {}).setdefault(entry.doc_id, 0)
            counts[token][entry.doc_id] += 1
    postings = {
        token: tuple(sorted(per_doc.items())) for token, per_doc in counts.items()
    }
    return InvertedIndex(postings, len(manifest.entries), totals)


def search(index: InvertedIndex, query: str, k: int,
           bodies: dict[str, str] | None = None) -> list[SearchHit]:
    """Top-k documents by summed tf * ln(1 + N/df) over the query tokens.

    Zero-scoring documents are excluded; ties break by doc_id ascending.
    """
    if k < 1:
        raise ValueError("k must be positive")
    scores: dict[str, float] = {}
    query_tokens = tokens.words_lower(query)
    for token in query_tokens:
        posting = index.postings.get(token)
        if not posting:
            continue
        idf = math.log(1 + index.doc_count / len(posting))
        for doc_id, tf in posting:
            scores[doc_id] = scores.get(doc_id, 0.0) + tf * idf
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    hits = []
    for doc_id, score in ranked[:k]:
        if score <= 0:
            continue
        snippet = _snippet(bodies.get(doc_id, ""), query_tokens) if bodies else None
        hits.append(SearchHit("document", doc_id, score, snippet))
    return hits


def _snippet(body: str, query_tokens: list[str], width: int = 60) -> str | None:
    if not body:
        return None
    lower = body.lower()
    for token in query_tokens:
        pos = lower.find(token)
        if pos >= 0:
            start = max(0, pos - width // 2)
            return " ".join(body[start : pos + len(token) + width // 2].split())
    return None


def label_search(query: str, labeled: dict[str, str], kind: str, k: int) -> list[SearchHit]:
    """Exact (score 1.0) and prefix (score 0.5) matches over id -> label."""
    wanted = normalize_label(query)
    if not wanted:
        return []
    hits = []
    for target_id, label in labeled.items():
        norm = normalize_label(label)
        if norm == wanted:
            hits.append(SearchHit(kind, target_id, 1.0, label))
        elif norm.startswith(wanted):
            hits.append(SearchHit(kind, target_id, 0.5, label))
    hits.sort(key=lambda h: (-h.score, h.target_id))
    return hits[:k]


# -- term archive (append-only) -------------------------------------------------

def read_archive(path: str | Path) -> list[tuple[str, str, str, str]]:
    path = Path(path)
    if not path.exists():
        return []
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        surface, status, concept_id, stamp = line.split("\t")
        rows.append((surface, status, concept_id, stamp))
    return rows


def archive_terms(terms, graph: OntologyGraph | None, path: str | Path) -> list[tuple[str, str, str, str]]:
    """Append one row per term whose (status, linked concept) changed since
    the latest archived row for that surface; unchanged terms are no-ops.
    Existing rows are never rewritten."""
    path = Path(path)
    latest: dict[str, tuple[str, str]] = {}
    for surface, status, concept_id, _ in read_archive(path):
        latest[surface] = (status, concept_id)

    concept_by_norm = {}
    if graph is not None:
        concept_by_norm = {
            normalize_label(c.preferred_label): c.concept_id for c in graph.concepts.values()
        }

    appended = []
    stamp = datetime.now(timezone.utc).isoformat()
    for term in sorted(terms, key=lambda t: t.surface_form):
        concept_id = concept_by_norm.get(normalize_label(term.surface_form), "-")
        row = (term.surface_form, term.status, concept_id)
        if latest.get(term.surface_form) == (term.status, concept_id):
            continue
        appended.append((*row, stamp))
    if appended:
        with path.open("a", encoding="utf-8") as fh:
            for row in appended:
                fh.write("\t".join(row) + "\n")
    return appended


# -- index persistence -----------------------------------------------------------

def write_index(path: str | Path, index: InvertedIndex) -> None:
    lines = []
    for token in sorted(index.postings):
        for doc_id, tf in index.postings[token]:
            lines.append(f"{token}\t{doc_id}\t{tf}")
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_index(path: str | Path, doc_count: int) -> InvertedIndex:
    postings: dict[str, list[tuple[str, int]]] = {}
    text = Path(path).read_text(encoding="utf-8") if Path(path).exists() else ""
    for line in text.splitlines():
        token, doc_id, tf = line.split("\t")
        postings.setdefault(token, []).append((doc_id, int(tf)))
    frozen = {t: tuple(p) for t, p in postings.items()}
    return InvertedIndex(frozen, doc_count, {})
