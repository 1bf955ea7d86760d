"""Independent oracles the tests check the production code against.

Everything here is written from the operation definitions directly,
brute force on purpose, and stays independent of the code paths it
verifies.
"""

from __future__ import annotations

import itertools
import math

from ikon.lexicon import generate_paradigm


# -- morphology: full paradigm enumeration inverted ---------------------------

def inversion_table(lexicon) -> dict[str, set]:
    """surface (lowercased) -> set of analyses, by enumerating every paradigm."""
    table: dict[str, set] = {}
    for lexeme_id in lexicon.lexemes:
        for analysis in generate_paradigm(lexicon, lexeme_id):
            table.setdefault(analysis.surface.lower(), set()).add(analysis)
    return table


# -- disambiguation: exhaustive assignment enumeration ------------------------

def _pair_realized(rule, head_analysis, dep_analysis) -> bool:
    if head_analysis.pos != rule.head_pos or dep_analysis.pos != rule.dep_pos:
        return False
    for feature in rule.agree_on:
        hv = head_analysis.features.get(feature)
        dv = dep_analysis.features.get(feature)
        if hv is not None and dv is not None and hv != dv:
            return False
    for feature, value in rule.require.items():
        if dep_analysis.features.get(feature) != value:
            return False
    return True


def _pairs(analyses, rules):
    out = []
    for rule in rules:
        for head in range(len(analyses)):
            for dep in range(len(analyses)):
                if head == dep or abs(head - dep) > rule.max_distance:
                    continue
                if rule.direction == "L" and not head < dep:
                    continue
                if rule.direction == "R" and not head > dep:
                    continue
                head_ok = any(a.pos == rule.head_pos for a in analyses[head])
                dep_ok = any(a.pos == rule.dep_pos for a in analyses[dep])
                if head_ok and dep_ok:
                    out.append((rule, head, dep))
    return out


def exhaustive_disambiguate(tokens, rules):
    """Enumerate every assignment, keep the consistent ones, project per token.

    Returns (list of per-token analysis sets, unresolved flag).
    """
    analyses = [t.analyses for t in tokens]
    variables = [i for i, a in enumerate(analyses) if a]
    pairs = _pairs(analyses, rules)
    domains = [sorted(analyses[i], key=repr) for i in variables]
    projection = {i: set() for i in variables}
    found = False
    for combo in itertools.product(*domains):
        assign = dict(zip(variables, combo))
        if all(
            _pair_realized(rule, assign[h], assign[d])
            for rule, h, d in pairs
            if h in assign and d in assign
        ):
            found = True
            for i, a in assign.items():
                projection[i].add(a)
    if not found:
        return [set(a) for a in analyses], True
    result = []
    for i, a in enumerate(analyses):
        result.append(projection[i] if i in projection else set(a))
    return result, False


# -- term extraction: brute-force n-gram pattern count ------------------------

_ORACLE_PATTERNS = [("N",), ("A", "N"), ("N", "N"), ("A", "A", "N"), ("N", "of", "N")]


def brute_force_term_counts(parses, noun_tags=("N",), adj_tags=("A",)):
    """lemma sequence -> (frequency, doc_id set) by direct enumeration."""
    occurrences: dict[tuple, set] = {}
    for graph in parses:
        nodes = graph.nodes
        for start in range(len(nodes)):
            for pattern in _ORACLE_PATTERNS:
                if start + len(pattern) > len(nodes):
                    continue
                slot_choices = []
                for k, slot in enumerate(pattern):
                    token = nodes[start + k]
                    if slot == "N":
                        opts = {a.lexeme_id for a in token.analyses if a.pos in noun_tags}
                    elif slot == "A":
                        opts = {a.lexeme_id for a in token.analyses if a.pos in adj_tags}
                    else:
                        opts = (
                            {min(a.lexeme_id for a in token.analyses)}
                            if token.surface.lower() == slot and token.analyses
                            else set()
                        )
                    slot_choices.append(sorted(opts))
                for combo in itertools.product(*slot_choices):
                    occurrences.setdefault(tuple(combo), set()).add(
                        (graph.doc_id, graph.sentence_index, start, start + len(pattern) - 1)
                    )
    return {seq: (len(occs), {o[0] for o in occs}) for seq, occs in occurrences.items()}


# -- search: spreadsheet-style tf-idf ------------------------------------------

def tfidf_ranking(bodies: dict[str, str], query_tokens: list[str]) -> list[tuple[str, float]]:
    """(doc_id, score) ranked per the stated formula, zero scores dropped."""
    import re

    token_lists = {d: [w.lower() for w in re.findall(r"[^\W_]+", text)] for d, text in bodies.items()}
    n_docs = len(bodies)
    scores: dict[str, float] = {}
    for token in query_tokens:
        df = sum(1 for words in token_lists.values() if token in words)
        if df == 0:
            continue
        idf = math.log(1 + n_docs / df)
        for doc_id, words in token_lists.items():
            tf = sum(1 for w in words if w == token)
            if tf:
                scores[doc_id] = scores.get(doc_id, 0.0) + tf * idf
    return sorted(((d, s) for d, s in scores.items() if s > 0), key=lambda x: (-x[1], x[0]))


# -- ontology: label-keyed structural signature --------------------------------

def graph_signature(graph):
    """Concepts by normalized preferred label with alt sets, plus relations
    mapped onto labels; two graphs are isomorphic iff signatures match."""
    import re as _re

    def norm(s):
        return _re.sub(r"\s+", " ", s).strip().lower()

    label_of = {c.concept_id: norm(c.preferred_label) for c in graph.concepts.values()}
    concepts = frozenset((norm(c.preferred_label), frozenset(c.alt_labels)) for c in graph.concepts.values())
    relations = frozenset(
        (r.kind, r.label, label_of[r.source], label_of[r.target]) for r in graph.relations
    )
    return concepts, relations
