"""Ontology graph: concepts, typed relations, merge, and the OWL subset.

Graphs are immutable values; every operation returns a new graph with a
bumped version. Concept unification in merge follows label identity:
equal normalized preferred labels, or a preferred label contained in the
other concept's alt labels, transitively closed across the two inputs.
The is_a subgraph is kept acyclic by construction everywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import quote, unquote

from .errors import (
    CycleRejected,
    LabelCollision,
    MalformedTriple,
    UnknownConcept,
    UnsupportedConstruct,
)

IS_A = "is_a"
PART_OF = "part_of"
ASSOC = "assoc"

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
OWL_CLASS = "http://www.w3.org/2002/07/owl#Class"
RDFS_SUBCLASS = "http://www.w3.org/2000/01/rdf-schema#subClassOf"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"
SKOS_ALT = "http://www.w3.org/2004/02/skos/core#altLabel"
REL_PREFIX = "urn:ikon:rel:"


def normalize_label(label: str) -> str:
    """Lowercase, collapse internal whitespace, trim."""
    return re.sub(r"\s+", " ", label).strip().lower()


def concept_id_for(label: str) -> str:
    return "c-" + quote(normalize_label(label), safe="")


def concept_iri(domain_name: str, label: str) -> str:
    return f"urn:ikon:{quote(domain_name, safe='')}:{quote(normalize_label(label), safe='')}"


@dataclass(frozen=True)
class Concept:
    concept_id: str
    preferred_label: str
    alt_labels: frozenset[str] = frozenset()
    definition: str | None = None
    provenance: frozenset[tuple[str, int]] = frozenset()


@dataclass(frozen=True)
class ConceptRelation:
    kind: str  # is_a | part_of | assoc
    source: str
    target: str
    label: str | None = None  # set for assoc only

    def rel_name(self) -> str:
        return self.label if self.kind == ASSOC else self.kind


@dataclass(frozen=True)
class OntologyGraph:
    graph_id: str
    domain_name: str
    concepts: dict[str, Concept]
    relations: frozenset[ConceptRelation]
    version: int = 1


def empty_graph(domain_name: str, graph_id: str = "") -> OntologyGraph:
    return OntologyGraph(graph_id or domain_name, domain_name, {}, frozenset(), 1)


def _isa_pairs(relations) -> list[tuple[str, str]]:
    return [(r.source, r.target) for r in relations if r.kind == IS_A]


def _has_cycle(pairs: list[tuple[str, str]]) -> bool:
    adjacency: dict[str, list[str]] = {}
    for src, tgt in pairs:
        adjacency.setdefault(src, []).append(tgt)
    state: dict[str, int] = {}

    def visit(node: str) -> bool:
        state[node] = 1
        for nxt in adjacency.get(node, []):
            mark = state.get(nxt)
            if mark == 1 or (mark is None and visit(nxt)):
                return True
        state[node] = 2
        return False

    return any(state.get(n) is None and visit(n) for n in adjacency)


def validate_graph(graph: OntologyGraph) -> None:
    """Raise if any structural invariant is broken.

    Besides preferred-label uniqueness, an alt label may not shadow
    another concept's preferred label: two concepts kept distinct inside
    one graph must stay distinct under merge, and the unification rule
    would otherwise glue them through any merge partner.
    """
    labels: dict[str, str] = {}
    for cid, concept in graph.concepts.items():
        if cid != concept.concept_id:
            raise UnknownConcept(cid)
        if not normalize_label(concept.preferred_label):
            raise LabelCollision("", (cid,))
        norm = normalize_label(concept.preferred_label)
        if norm in labels:
            raise LabelCollision(norm, (labels[norm], cid))
        labels[norm] = cid
    for cid, concept in graph.concepts.items():
        for alt in concept.alt_labels:
            owner = labels.get(normalize_label(alt))
            if owner is not None and owner != cid:
                raise LabelCollision(normalize_label(alt), (owner, cid))
    for rel in graph.relations:
        for endpoint in (rel.source, rel.target):
            if endpoint not in graph.concepts:
                raise UnknownConcept(endpoint)
        if rel.source == rel.target:
            raise CycleRejected(rel.source, rel.target)
    if _has_cycle(_isa_pairs(graph.relations)):
        raise CycleRejected("<graph>", "<graph>")


# -- promotion of the curated network ----------------------------------------

def promote(network, terms, domain_name: str, graph_id: str = "") -> OntologyGraph:
    """Turn accepted terms and their network into a fresh ontology graph.

    One concept per network node labeled by the term surface; network
    edges become assoc relations named after the parse relation; a
    multiword term whose head word is itself a concept gains an is_a
    edge to it.
    """
    by_id = {t.term_id: t for t in terms}
    by_norm: dict[str, str] = {}
    concepts: dict[str, Concept] = {}
    for term_id in sorted(network.nodes):
        term = by_id[term_id]
        norm = normalize_label(term.surface_form)
        if norm in by_norm:
            raise LabelCollision(norm, (by_norm[norm], term_id))
        by_norm[norm] = term_id
        cid = concept_id_for(term.surface_form)
        concepts[cid] = Concept(
            concept_id=cid,
            preferred_label=term.surface_form,
            provenance=frozenset((o.doc_id, o.sentence_index) for o in term.occurrences),
        )

    relations: set[ConceptRelation] = set()
    term_cid = {tid: concept_id_for(by_id[tid].surface_form) for tid in network.nodes}
    for edge in network.edges:
        relations.add(ConceptRelation(ASSOC, term_cid[edge.source], term_cid[edge.target], edge.label))
    for term_id in sorted(network.nodes):
        term = by_id[term_id]
        if len(term.lemma_sequence) < 2 or not term.head_surface:
            continue
        head_norm = normalize_label(term.head_surface)
        if head_norm in by_norm and by_norm[head_norm] != term_id:
            relations.add(ConceptRelation(IS_A, term_cid[term_id], concept_id_for(term.head_surface)))

    graph = OntologyGraph(graph_id or domain_name, domain_name, concepts, frozenset(relations), 1)
    validate_graph(graph)
    return graph


# -- merge --------------------------------------------------------------------

@dataclass(frozen=True)
class MergeReport:
    dropped_isa_edges: tuple[tuple[str, str], ...] = ()
    dropped_self_loops: tuple[str, ...] = ()


@dataclass(frozen=True)
class MergeResult:
    graph: OntologyGraph
    report: MergeReport


def _label_match(a: Concept, b: Concept) -> bool:
    na, nb = normalize_label(a.preferred_label), normalize_label(b.preferred_label)
    if na == nb:
        return True
    if nb in {normalize_label(x) for x in a.alt_labels}:
        return True
    if na in {normalize_label(x) for x in b.alt_labels}:
        return True
    return False


def merge(a: OntologyGraph, b: OntologyGraph) -> MergeResult:
    """Label-driven unification of two graphs; symmetric up to isomorphism.

    Unified concepts keep the lexicographically smallest member id, its
    preferred label and definition; alt labels, other members' preferred
    labels, and provenance are unioned. Relations are re-targeted and
    deduplicated; re-targeting that produces a self-loop drops the loop,
    and is_a edges are re-admitted in sorted order skipping any that
    would close a cycle. Both removals are reported, not fatal.
    """
    members: dict[str, Concept] = {}
    for cid, c in a.concepts.items():
        members["a:" + cid] = c
    for cid, c in b.concepts.items():
        members["b:" + cid] = c

    parent: dict[str, str] = {k: k for k in members}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: str, y: str) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for ka, ca in a.concepts.items():
        for kb, cb in b.concepts.items():
            if _label_match(ca, cb):
                union("a:" + ka, "b:" + kb)

    groups: dict[str, list[str]] = {}
    for key in members:
        groups.setdefault(find(key), []).append(key)

    canonical: dict[str, str] = {}  # prefixed member key -> merged concept_id
    concepts: dict[str, Concept] = {}
    for group in groups.values():
        group_concepts = [members[k] for k in group]
        base = min(group_concepts, key=lambda c: c.concept_id)
        alt: set[str] = set()
        provenance: set[tuple[str, int]] = set()
        definition = base.definition
        for c in sorted(group_concepts, key=lambda c: c.concept_id):
            alt.update(c.alt_labels)
            provenance.update(c.provenance)
            if definition is None and c.definition is not None:
                definition = c.definition
            if c.preferred_label != base.preferred_label:
                alt.add(c.preferred_label)
        alt.discard(base.preferred_label)
        merged = Concept(base.concept_id, base.preferred_label, frozenset(alt), definition, frozenset(provenance))
        concepts[merged.concept_id] = merged
        for key in group:
            canonical[key] = merged.concept_id

    retargeted: set[ConceptRelation] = set()
    self_loops: list[str] = []
    for prefix, graph in (("a:", a), ("b:", b)):
        for rel in graph.relations:
            src = canonical[prefix + rel.source]
            tgt = canonical[prefix + rel.target]
            if src == tgt:
                self_loops.append(src)
                continue
            retargeted.add(ConceptRelation(rel.kind, src, tgt, rel.label))

    kept: set[ConceptRelation] = {r for r in retargeted if r.kind != IS_A}
    accepted_isa: list[tuple[str, str]] = []
    dropped: list[tuple[str, str]] = []
    for rel in sorted((r for r in retargeted if r.kind == IS_A), key=lambda r: (r.source, r.target)):
        if _has_cycle(accepted_isa + [(rel.source, rel.target)]):
            dropped.append((rel.source, rel.target))
        else:
            accepted_isa.append((rel.source, rel.target))
            kept.add(rel)

    domain = a.domain_name if a.domain_name == b.domain_name else "+".join(sorted({a.domain_name, b.domain_name}))
    graph_id = "+".join(sorted({a.graph_id, b.graph_id}))
    graph = OntologyGraph(graph_id, domain, concepts, frozenset(kept), max(a.version, b.version) + 1)
    validate_graph(graph)
    return MergeResult(graph, MergeReport(tuple(sorted(dropped)), tuple(sorted(set(self_loops)))))


# -- point edits (used by the control API) ------------------------------------

def add_concept(graph: OntologyGraph, label: str, alt_labels: set[str] | None = None,
                definition: str | None = None) -> OntologyGraph:
    cid = concept_id_for(label)
    if cid in graph.concepts:
        raise LabelCollision(normalize_label(label), (cid,))
    concepts = dict(graph.concepts)
    concepts[cid] = Concept(cid, label, frozenset(alt_labels or ()), definition)
    out = replace(graph, concepts=concepts, version=graph.version + 1)
    validate_graph(out)
    return out


def update_concept(graph: OntologyGraph, concept_id: str, preferred_label: str | None = None,
                   alt_labels: set[str] | None = None, definition: str | None = None) -> OntologyGraph:
    if concept_id not in graph.concepts:
        raise UnknownConcept(concept_id)
    current = graph.concepts[concept_id]
    concepts = dict(graph.concepts)
    concepts[concept_id] = replace(
        current,
        preferred_label=preferred_label if preferred_label is not None else current.preferred_label,
        alt_labels=frozenset(alt_labels) if alt_labels is not None else current.alt_labels,
        definition=definition if definition is not None else current.definition,
    )
    out = replace(graph, concepts=concepts, version=graph.version + 1)
    validate_graph(out)
    return out


def add_relation(graph: OntologyGraph, kind: str, source: str, target: str,
                 label: str | None = None) -> OntologyGraph:
    for endpoint in (source, target):
        if endpoint not in graph.concepts:
            raise UnknownConcept(endpoint)
    if source == target:
        raise CycleRejected(source, target)
    rel = ConceptRelation(kind, source, target, label if kind == ASSOC else None)
    if kind == IS_A and _has_cycle(_isa_pairs(graph.relations) + [(source, target)]):
        raise CycleRejected(source, target)
    return replace(graph, relations=graph.relations | {rel}, version=graph.version + 1)


def remove_relation(graph: OntologyGraph, kind: str, source: str, target: str,
                    label: str | None = None) -> OntologyGraph:
    rel = ConceptRelation(kind, source, target, label if kind == ASSOC else None)
    if rel not in graph.relations:
        raise UnknownConcept(f"{kind}({source}->{target})")
    return replace(graph, relations=graph.relations - {rel}, version=graph.version + 1)


# -- OWL subset ----------------------------------------------------------------

def _escape_literal(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def _unescape_literal(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            mapped = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}.get(nxt)
            if mapped is None:
                raise ValueError(f"bad escape \\{nxt}")
            out.append(mapped)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def export_owl(graph: OntologyGraph) -> str:
    """Deterministic N-Triples-style serialization, sorted by subject,
    predicate, then object. Byte-identical across runs for equal graphs."""
    iri: dict[str, str] = {
        cid: concept_iri(graph.domain_name, c.preferred_label) for cid, c in graph.concepts.items()
    }
    triples: list[tuple[str, str, str]] = []
    for cid, concept in graph.concepts.items():
        subject = f"<{iri[cid]}>"
        triples.append((subject, f"<{RDF_TYPE}>", f"<{OWL_CLASS}>"))
        triples.append((subject, f"<{RDFS_LABEL}>", f'"{_escape_literal(concept.preferred_label)}"'))
        for alt in concept.alt_labels:
            triples.append((subject, f"<{SKOS_ALT}>", f'"{_escape_literal(alt)}"'))
    for rel in graph.relations:
        subject = f"<{iri[rel.source]}>"
        obj = f"<{iri[rel.target]}>"
        if rel.kind == IS_A:
            predicate = f"<{RDFS_SUBCLASS}>"
        else:
            predicate = f"<{REL_PREFIX}{quote(rel.rel_name(), safe='')}>"
        triples.append((subject, predicate, obj))

    lines = [
        f"# domain: {graph.domain_name}",
        f"# version: {graph.version}",
    ]
    lines.extend(f"{s} {p} {o} ." for s, p, o in sorted(triples))
    return "".join(line + "\n" for line in lines)


_TRIPLE = re.compile(r'^<([^>]*)> <([^>]*)> (?:<([^>]*)>|"((?:[^"\\]|\\.)*)") \.$')


def import_owl(source) -> OntologyGraph:
    """Parse a document produced by export_owl (or a conforming subset)
    back into a graph; concept ids are regenerated from the IRIs."""
    text = source if isinstance(source, str) else source.read()
    domain = ""
    version = 1
    declared: set[str] = set()
    labels: dict[str, str] = {}
    alts: dict[str, set[str]] = {}
    links: list[tuple[int, str, str, str]] = []  # line_no, subject, predicate, object iri

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            header = line[1:].strip()
            if header.startswith("domain:"):
                domain = header[len("domain:"):].strip()
            elif header.startswith("version:"):
                try:
                    version = int(header[len("version:"):].strip())
                except ValueError:
                    raise MalformedTriple(line_no, "bad version header") from None
            continue
        match = _TRIPLE.match(line)
        if not match:
            raise MalformedTriple(line_no, f"unparseable triple {line!r}")
        subject, predicate, obj_iri, obj_literal = match.groups()
        if predicate == RDF_TYPE:
            if obj_iri != OWL_CLASS:
                raise UnsupportedConstruct(line_no, f"only owl:Class declarations supported, got {obj_iri}")
            declared.add(subject)
        elif predicate == RDFS_LABEL:
            if obj_literal is None:
                raise MalformedTriple(line_no, "rdfs:label needs a literal object")
            labels[subject] = _unescape_literal(obj_literal)
        elif predicate == SKOS_ALT:
            if obj_literal is None:
                raise MalformedTriple(line_no, "skos:altLabel needs a literal object")
            alts.setdefault(subject, set()).add(_unescape_literal(obj_literal))
        elif predicate == RDFS_SUBCLASS or predicate.startswith(REL_PREFIX):
            if obj_iri is None:
                raise MalformedTriple(line_no, "object property needs an IRI object")
            links.append((line_no, subject, predicate, obj_iri))
        else:
            raise UnsupportedConstruct(line_no, f"unsupported predicate {predicate}")

    def local_label(iri_text: str) -> str:
        parts = iri_text.split(":")
        return unquote(parts[-1])

    if not domain and declared:
        first = sorted(declared)[0].split(":")
        domain = unquote(first[2]) if len(first) >= 4 else ""

    concepts: dict[str, Concept] = {}
    id_of: dict[str, str] = {}
    for subject in sorted(declared):
        label = labels.get(subject, local_label(subject))
        cid = "c-" + quote(normalize_label(label), safe="")
        id_of[subject] = cid
        concepts[cid] = Concept(cid, label, frozenset(alts.get(subject, ())))

    relations: set[ConceptRelation] = set()
    for line_no, subject, predicate, obj_iri in links:
        if subject not in declared or obj_iri not in declared:
            raise UnsupportedConstruct(line_no, "relation endpoint is not a declared class")
        if predicate == RDFS_SUBCLASS:
            relations.add(ConceptRelation(IS_A, id_of[subject], id_of[obj_iri]))
        else:
            name = unquote(predicate[len(REL_PREFIX):])
            if name == PART_OF:
                relations.add(ConceptRelation(PART_OF, id_of[subject], id_of[obj_iri]))
            else:
                relations.add(ConceptRelation(ASSOC, id_of[subject], id_of[obj_iri], name))

    graph = OntologyGraph(domain or "imported", domain or "imported", concepts, frozenset(relations), version)
    validate_graph(graph)
    return graph


def isomorphic(a: OntologyGraph, b: OntologyGraph) -> bool:
    """Structural equality up to concept/graph ids and versions.

    Concepts are matched by normalized preferred label (unique within a
    valid graph), alt-label sets must coincide, and relations must map
    onto each other under that matching. Definitions and provenance are
    not carried by the OWL subset and are ignored here.
    """
    def signature(graph: OntologyGraph):
        by_label = {}
        for c in graph.concepts.values():
            by_label[normalize_label(c.preferred_label)] = frozenset(c.alt_labels)
        label_of = {c.concept_id: normalize_label(c.preferred_label) for c in graph.concepts.values()}
        rels = frozenset(
            (r.kind, r.label, label_of[r.source], label_of[r.target]) for r in graph.relations
        )
        return by_label, rels

    return signature(a) == signature(b)


# -- versioned library ----------------------------------------------------------

def _domain_dir(root: Path, domain_name: str) -> Path:
    return root / quote(domain_name, safe="")


def library_versions(root: str | Path, domain_name: str) -> list[int]:
    directory = _domain_dir(Path(root), domain_name)
    if not directory.is_dir():
        return []
    return sorted(int(p.stem) for p in directory.glob("*.nt"))


def publish(root: str | Path, graph: OntologyGraph) -> int:
    """Store a graph under the next strictly-increasing version for its domain."""
    root = Path(root)
    versions = library_versions(root, graph.domain_name)
    stored = max(graph.version, (versions[-1] + 1) if versions else 1)
    out = replace(graph, version=stored)
    directory = _domain_dir(root, graph.domain_name)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{stored}.nt").write_text(export_owl(out), encoding="utf-8")
    index = root / "index.tsv"
    created = datetime.now(timezone.utc).isoformat()
    with index.open("a", encoding="utf-8") as fh:
        fh.write(f"{graph.domain_name}\t{stored}\t{created}\t{len(graph.concepts)}\n")
    return stored


def load_from_library(root: str | Path, domain_name: str, version: int | None = None) -> OntologyGraph:
    versions = library_versions(root, domain_name)
    if not versions:
        raise UnknownConcept(f"library has no ontology for domain {domain_name!r}")
    pick = version if version is not None else versions[-1]
    if pick not in versions:
        raise UnknownConcept(f"domain {domain_name!r} has no version {pick}")
    path = _domain_dir(Path(root), domain_name) / f"{pick}.nt"
    return import_owl(path.read_text(encoding="utf-8"))
