"""Document ingestion, relevance filtering, and the corpus store.

Sources are local directories (``*.txt`` / ``*.md``, recursive) plus an
optional fetch-by-URL client with naive HTML stripping. Documents are
identified by content hash, so re-ingesting the same sources is
idempotent and byte-identical duplicates collapse to one document.
"""

from __future__ import annotations

import hashlib
import html as html_mod
import re
import urllib.request
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from . import tokens
from .errors import EmptyDocument, UnreadableSource

_TAG = re.compile(r"<[^>]*>")
_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class Document:
    doc_id: str
    uri: str
    title: str
    body: str
    ingested_at: str
    relevance: float | None = None


@dataclass(frozen=True)
class ManifestEntry:
    doc_id: str
    uri: str
    sha256: str
    relevance: float
    title: str


@dataclass(frozen=True)
class CorpusManifest:
    project_id: str
    entries: tuple[ManifestEntry, ...]

    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]


def _sha256(body: str) -> str:
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def _doc_id(body: str) -> str:
    return "d" + _sha256(body)[:12]


def _title(body: str) -> str:
    for line in body.splitlines():
        line = _WS.sub(" ", line).strip()
        if line:
            return line[:120]
    return ""


def strip_html(raw: str) -> str:
    """Tag removal plus whitespace collapse; good enough for text sources."""
    text = _TAG.sub(" ", raw)
    text = html_mod.unescape(text)
    return _WS.sub(" ", text).strip()


def fetch_url(url: str, timeout: float = 10.0) -> str:
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            raw = resp.read().decode("utf-8")
    except (OSError, ValueError, UnicodeDecodeError) as exc:
        raise UnreadableSource(url, str(exc)) from exc
    if "<" in raw[:1024] and re.search(r"<\s*(html|body|p|div|h\d)\b", raw, re.IGNORECASE):
        return strip_html(raw)
    return raw


def ingest(directories: list[str | Path] | None = None, urls: list[str] | None = None) -> list[Document]:
    """One Document per readable source item, deduplicated by content hash.

    Directory files are taken in sorted relative order so repeated runs
    return documents in the same order.
    """
    now = datetime.now(timezone.utc).isoformat()
    docs: list[Document] = []
    seen_hashes: set[str] = set()

    def add(uri: str, body: str) -> None:
        if not body.strip():
            raise EmptyDocument(uri)
        digest = _sha256(body)
        if digest in seen_hashes:
            return
        seen_hashes.add(digest)
        docs.append(Document(_doc_id(body), uri, _title(body), body, now))

    for directory in directories or []:
        root = Path(directory)
        if not root.is_dir():
            raise UnreadableSource(str(root), "not a directory")
        paths = sorted(
            p for p in root.rglob("*") if p.is_file() and p.suffix in (".txt", ".md")
        )
        for path in paths:
            try:
                body = path.read_text(encoding="utf-8")
            except (OSError, UnicodeDecodeError) as exc:
                raise UnreadableSource(str(path), str(exc)) from exc
            add(str(path), body)

    for url in urls or []:
        add(url, fetch_url(url))

    return docs


def score_relevance(doc: Document, seed_terms: set[str]) -> float:
    """Fraction of seed terms that occur in the body as whole-token sequences.

    Matching is case-insensitive; a multiword seed matches when its token
    sequence occurs contiguously.
    """
    if not seed_terms:
        raise ValueError("seed_terms must be non-empty")
    body_tokens = tokens.words_lower(doc.body)
    matched = 0
    for seed in seed_terms:
        seq = tokens.words_lower(seed)
        if seq and _contains(body_tokens, seq):
            matched += 1
    return matched / len(seed_terms)


def _contains(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    return any(haystack[i : i + n] == needle for i in range(len(haystack) - n + 1))


def select_corpus(
    docs: list[Document], seed_terms: set[str], threshold: float, project_id: str = ""
) -> tuple[CorpusManifest, list[Document]]:
    """Manifest of documents scoring >= threshold, by (score desc, doc_id asc)."""
    if not 0 <= threshold <= 1:
        raise ValueError(f"threshold {threshold} outside [0,1]")
    scored = [replace(d, relevance=score_relevance(d, seed_terms)) for d in docs]
    selected = [d for d in scored if d.relevance >= threshold]
    selected.sort(key=lambda d: (-d.relevance, d.doc_id))
    entries = tuple(
        ManifestEntry(d.doc_id, d.uri, _sha256(d.body), d.relevance, d.title) for d in selected
    )
    return CorpusManifest(project_id, entries), selected


# -- store layout: corpus/<doc_id>.txt + corpus/manifest.tsv ----------------

def write_store(corpus_dir: str | Path, manifest: CorpusManifest, docs: list[Document]) -> list[Path]:
    """Persist bodies and the manifest; returns the written paths."""
    corpus_dir = Path(corpus_dir)
    corpus_dir.mkdir(parents=True, exist_ok=True)
    bodies = {d.doc_id: d for d in docs}
    written = []
    for entry in manifest.entries:
        path = corpus_dir / f"{entry.doc_id}.txt"
        path.write_text(bodies[entry.doc_id].body, encoding="utf-8")
        written.append(path)
    lines = [
        f"{e.doc_id}\t{e.uri}\t{e.sha256}\t{e.relevance:.4f}\t{e.title}" for e in manifest.entries
    ]
    manifest_path = corpus_dir / "manifest.tsv"
    manifest_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    written.append(manifest_path)
    return written


def read_store(corpus_dir: str | Path, project_id: str = "") -> tuple[CorpusManifest, dict[str, str]]:
    """Load manifest and bodies back; verifies stored hashes."""
    corpus_dir = Path(corpus_dir)
    entries = []
    bodies: dict[str, str] = {}
    manifest_path = corpus_dir / "manifest.tsv"
    text = manifest_path.read_text(encoding="utf-8") if manifest_path.exists() else ""
    for line in text.splitlines():
        doc_id, uri, sha, relevance, title = line.split("\t", 4)
        body = (corpus_dir / f"{doc_id}.txt").read_text(encoding="utf-8")
        if _sha256(body) != sha:
            raise UnreadableSource(doc_id, "stored body does not match manifest hash")
        entries.append(ManifestEntry(doc_id, uri, sha, float(relevance), title))
        bodies[doc_id] = body
    return CorpusManifest(project_id, tuple(entries)), bodies
