"""Term extraction and the corpus-level semantic network.

Candidates are contiguous token spans matching a fixed set of noun-phrase
POS patterns over the readings that survived disambiguation; an ambiguous
token contributes once under each surviving noun/adjective reading.
Frequencies are exact occurrence counts, aggregated from per-document
partials whose merge is associative and commutative so documents can be
processed in parallel.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import UnknownConcept
from .lexicon import Lexicon, base_form
from .linganalysis import ParseGraph
from .ontology import OntologyGraph, normalize_label

MAX_TERM_LEN = 4

# slot kinds: N noun, A adjective, literal surface otherwise
PATTERNS: tuple[tuple[str, ...], ...] = (
    ("N",),
    ("A", "N"),
    ("N", "N"),
    ("A", "A", "N"),
    ("N", "of", "N"),
)

# index of the head slot within each pattern ('of' phrases are headed by
# their first noun, the rest by the final one)
_HEAD_SLOT = {("N",): 0, ("A", "N"): 1, ("N", "N"): 1, ("A", "A", "N"): 2, ("N", "of", "N"): 0}


@dataclass(frozen=True)
class Occurrence:
    doc_id: str
    sentence_index: int
    start: int
    end: int


@dataclass(frozen=True)
class TermCandidate:
    term_id: str
    lemma_sequence: tuple[str, ...]
    surface_form: str
    frequency: int
    doc_ids: frozenset[str]
    status: str = "candidate"  # candidate | accepted | rejected
    occurrences: frozenset[Occurrence] = frozenset()
    head_lemma_id: str = ""
    head_surface: str = ""


@dataclass(frozen=True)
class NetworkEdge:
    label: str
    source: str
    target: str
    weight: int


@dataclass(frozen=True)
class SemanticNetwork:
    nodes: frozenset[str]
    edges: tuple[NetworkEdge, ...]


def term_id_for(lemma_sequence: tuple[str, ...]) -> str:
    digest = hashlib.sha1(",".join(lemma_sequence).encode("utf-8")).hexdigest()
    return "t" + digest[:12]


@dataclass
class _Partial:
    """Mutable per-document accumulator keyed by lemma sequence."""

    occurrences: dict[tuple[str, ...], set[Occurrence]] = field(default_factory=dict)
    heads: dict[tuple[str, ...], str] = field(default_factory=dict)

    def add(self, seq: tuple[str, ...], occ: Occurrence, head: str) -> None:
        self.occurrences.setdefault(seq, set()).add(occ)
        self.heads.setdefault(seq, head)


def extract_partial(
    graphs: list[ParseGraph],
    lexicon: Lexicon,
    noun_tags: frozenset[str] = frozenset({"N"}),
    adj_tags: frozenset[str] = frozenset({"A"}),
) -> _Partial:
    partial = _Partial()
    for graph in graphs:
        nodes = graph.nodes
        for start in range(len(nodes)):
            for pattern in PATTERNS:
                if start + len(pattern) > len(nodes):
                    continue
                choices: list[list[str]] = []
                for offset, slot in enumerate(pattern):
                    token = nodes[start + offset]
                    if slot == "N":
                        lemmas = sorted({a.lexeme_id for a in token.analyses if a.pos in noun_tags})
                    elif slot == "A":
                        lemmas = sorted({a.lexeme_id for a in token.analyses if a.pos in adj_tags})
                    else:
                        if token.surface.lower() != slot or not token.analyses:
                            lemmas = []
                        else:
                            lemmas = [min(a.lexeme_id for a in token.analyses)]
                    if not lemmas:
                        choices = []
                        break
                    choices.append(lemmas)
                if not choices:
                    continue
                occ = Occurrence(graph.doc_id, graph.sentence_index, start, start + len(pattern) - 1)
                head_slot = _HEAD_SLOT[pattern]
                for seq in _product(choices):
                    partial.add(seq, occ, seq[head_slot])
    return partial


def _product(choices: list[list[str]]) -> list[tuple[str, ...]]:
    seqs: list[tuple[str, ...]] = [()]
    for options in choices:
        seqs = [s + (o,) for s in seqs for o in options]
    return seqs


def merge_partials(a: _Partial, b: _Partial) -> _Partial:
    """Associative, commutative merge of partial counts."""
    out = _Partial()
    for src in (a, b):
        for seq, occs in src.occurrences.items():
            out.occurrences.setdefault(seq, set()).update(occs)
    heads = {**a.heads, **b.heads}
    out.heads = heads
    return out


def finalize_terms(partial: _Partial, lexicon: Lexicon) -> set[TermCandidate]:
    terms = set()
    for seq, occs in partial.occurrences.items():
        surface = " ".join(base_form(lexicon, lemma) for lemma in seq)
        head = partial.heads[seq]
        terms.add(
            TermCandidate(
                term_id=term_id_for(seq),
                lemma_sequence=seq,
                surface_form=surface,
                frequency=len(occs),
                doc_ids=frozenset(o.doc_id for o in occs),
                occurrences=frozenset(occs),
                head_lemma_id=head,
                head_surface=base_form(lexicon, head),
            )
        )
    return terms


def extract_terms(
    parses: list[ParseGraph],
    lexicon: Lexicon,
    noun_tags: frozenset[str] = frozenset({"N"}),
    adj_tags: frozenset[str] = frozenset({"A"}),
) -> set[TermCandidate]:
    """All candidates over the given parses, frequencies aggregated corpus-wide."""
    by_doc: dict[str, list[ParseGraph]] = {}
    for g in parses:
        by_doc.setdefault(g.doc_id, []).append(g)
    merged = _Partial()
    for doc_id in sorted(by_doc):
        merged = merge_partials(merged, extract_partial(by_doc[doc_id], lexicon, noun_tags, adj_tags))
    return finalize_terms(merged, lexicon)


def display_rank_key(term: TermCandidate):
    """UI ranking: frequency desc, then length desc, then surface asc."""
    return (-term.frequency, -len(term.lemma_sequence), term.surface_form, term.term_id)


# -- lexical sense resolution against a seed ontology ------------------------

@dataclass(frozen=True)
class SenseContext:
    """One term occurrence plus the lemmas of the rest of its sentence."""

    doc_id: str
    sentence_index: int
    start: int
    end: int
    surface: str
    context_lemmas: frozenset[str]


@dataclass(frozen=True)
class SenseAssignment:
    doc_id: str
    sentence_index: int
    start: int
    end: int
    concept_id: str
    score: int


def sense_contexts(term: TermCandidate, parses: list[ParseGraph], lexicon: Lexicon) -> list[SenseContext]:
    by_key = {(g.doc_id, g.sentence_index): g for g in parses}
    contexts = []
    for occ in sorted(term.occurrences, key=lambda o: (o.doc_id, o.sentence_index, o.start)):
        graph = by_key.get((occ.doc_id, occ.sentence_index))
        if graph is None:
            continue
        lemmas = set()
        for token in graph.nodes:
            if occ.start <= token.token_index <= occ.end:
                continue
            for a in token.analyses:
                lemmas.add(normalize_label(base_form(lexicon, a.lexeme_id)))
        contexts.append(
            SenseContext(occ.doc_id, occ.sentence_index, occ.start, occ.end, term.surface_form, frozenset(lemmas))
        )
    return contexts


def disambiguate_sense(occurrence: SenseContext, seed: OntologyGraph | None) -> SenseAssignment | None:
    """Pick the label-matching seed concept whose neighborhood shares the most
    lemmas with the sentence; ties go to the smallest concept_id, zero overlap
    everywhere means no assignment."""
    if seed is None:
        raise UnknownConcept("<seed ontology missing>")
    wanted = normalize_label(occurrence.surface)
    candidates = [
        c for c in seed.concepts.values()
        if normalize_label(c.preferred_label) == wanted
        or any(normalize_label(alt) == wanted for alt in c.alt_labels)
    ]
    if not candidates:
        return None
    best: tuple[int, str] | None = None
    for concept in candidates:
        neighborhood: set[str] = set()
        for rel in seed.relations:
            other = None
            if rel.source == concept.concept_id:
                other = rel.target
            elif rel.target == concept.concept_id:
                other = rel.source
            if other is None:
                continue
            neighbor = seed.concepts[other]
            for label in (neighbor.preferred_label, *neighbor.alt_labels):
                neighborhood.update(normalize_label(label).split())
        overlap = len(occurrence.context_lemmas & neighborhood)
        key = (-overlap, concept.concept_id)
        if best is None or key < best:
            best = key
            best_concept = concept.concept_id
            best_overlap = overlap
    if best_overlap == 0:
        return None
    return SenseAssignment(
        occurrence.doc_id, occurrence.sentence_index, occurrence.start, occurrence.end,
        best_concept, best_overlap,
    )


# -- categorical network over accepted terms ---------------------------------

def build_network(parses: list[ParseGraph], terms: set[TermCandidate]) -> SemanticNetwork:
    """Network edge weights count the distinct parse edges linking two
    accepted terms; rejected and undecided terms never appear."""
    accepted = [t for t in terms if t.status == "accepted" and t.occurrences]
    spans: dict[tuple[str, int], list[tuple[str, int, int]]] = {}
    for term in accepted:
        for occ in term.occurrences:
            spans.setdefault((occ.doc_id, occ.sentence_index), []).append((term.term_id, occ.start, occ.end))

    support: dict[tuple[str, str, str], set] = {}
    for graph in parses:
        located = spans.get((graph.doc_id, graph.sentence_index))
        if not located:
            continue
        for edge in graph.edges:
            head_terms = {tid for tid, s, e in located if s <= edge.head <= e}
            dep_terms = {tid for tid, s, e in located if s <= edge.dep <= e}
            for ht in head_terms:
                for dt in dep_terms:
                    if ht == dt:
                        continue
                    key = (edge.relation, ht, dt)
                    support.setdefault(key, set()).add(
                        (graph.doc_id, graph.sentence_index, edge.relation, edge.head, edge.dep, edge.rule_id)
                    )

    edges = tuple(
        NetworkEdge(label, src, tgt, len(evidence))
        for (label, src, tgt), evidence in sorted(support.items())
    )
    nodes = frozenset(t.term_id for t in accepted)
    return SemanticNetwork(nodes, edges)


# -- stores -------------------------------------------------------------------

def write_terms(path: str | Path, terms: set[TermCandidate]) -> None:
    rows = sorted(terms, key=display_rank_key)
    lines = [
        f"{t.term_id}\t{t.surface_form}\t{','.join(t.lemma_sequence)}\t{t.frequency}\t{len(t.doc_ids)}\t{t.status}"
        for t in rows
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


@dataclass(frozen=True)
class TermRow:
    """One line of terms.tsv; occurrences are not persisted."""

    term_id: str
    surface_form: str
    lemma_sequence: tuple[str, ...]
    frequency: int
    doc_count: int
    status: str


def read_terms(path: str | Path) -> list[TermRow]:
    out = []
    text = Path(path).read_text(encoding="utf-8") if Path(path).exists() else ""
    for line in text.splitlines():
        term_id, surface, lemmas, freq, doc_count, status = line.split("\t")
        out.append(
            TermRow(
                term_id=term_id,
                surface_form=surface,
                lemma_sequence=tuple(lemmas.split(",")) if lemmas else (),
                frequency=int(freq),
                doc_count=int(doc_count),
                status=status,
            )
        )
    return out


def apply_statuses(terms: set[TermCandidate], statuses: dict[str, str]) -> set[TermCandidate]:
    return {replace(t, status=statuses.get(t.term_id, t.status)) for t in terms}


def write_network(path: str | Path, network: SemanticNetwork) -> None:
    lines = [f"{e.label}\t{e.source}\t{e.target}\t{e.weight}" for e in network.edges]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
