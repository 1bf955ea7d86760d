import random
from dataclasses import replace

import pytest

from ikon.corpus import Document
from ikon.errors import UnknownConcept
from ikon.extraction import (
    SenseContext,
    apply_statuses,
    build_network,
    disambiguate_sense,
    display_rank_key,
    extract_partial,
    extract_terms,
    finalize_terms,
    merge_partials,
    read_terms,
    sense_contexts,
    write_terms,
)
from ikon.linganalysis import analyze_document
from ikon.ontology import Concept, ConceptRelation, OntologyGraph

from oracles import brute_force_term_counts


def _parses(lex, rules, *texts):
    graphs = []
    for i, text in enumerate(texts):
        doc = Document(f"doc{i}", f"test://{i}", "t", text, "")
        graphs.extend(analyze_document(doc, lex, rules))
    return graphs


@pytest.fixture(scope="module")
def corpus_parses(toy_lexicon, toy_rules):
    return _parses(
        toy_lexicon,
        toy_rules,
        "The information system stores the text.",
        "The information system links a graph. A system sleeps.",
    )


def test_extract_matches_spec_frequencies(corpus_parses, toy_lexicon):
    terms = {t.surface_form: t for t in extract_terms(corpus_parses, toy_lexicon)}
    # "information system" appears twice, "system" three times in total
    assert terms["information system"].frequency == 2
    assert terms["system"].frequency == 3
    assert terms["information system"].doc_ids == {"doc0", "doc1"}


def test_extract_matches_brute_force_oracle(corpus_parses, toy_lexicon):
    expected = brute_force_term_counts(corpus_parses)
    got = extract_terms(corpus_parses, toy_lexicon)
    assert {t.lemma_sequence for t in got} == set(expected)
    for term in got:
        frequency, doc_ids = expected[term.lemma_sequence]
        assert term.frequency == frequency
        assert term.doc_ids == doc_ids


def test_extract_empty_parses():
    class _FakeLex:
        pass

    assert extract_terms([], _FakeLex()) == set()


def test_extract_verbs_only_sentence(toy_lexicon, toy_rules):
    parses = _parses(toy_lexicon, toy_rules, "sleep see build.")
    assert extract_terms(parses, toy_lexicon) == set()


def test_extract_of_pattern(toy_lexicon, toy_rules):
    parses = _parses(toy_lexicon, toy_rules, "A system of systems.")
    surfaces = {t.surface_form for t in extract_terms(parses, toy_lexicon)}
    assert "system of system" in surfaces
    of_term = next(
        t for t in extract_terms(parses, toy_lexicon) if t.surface_form == "system of system"
    )
    assert of_term.head_surface == "system"  # of-phrases are headed by the first noun


def test_ambiguous_token_contributes_per_noun_reading(toy_lexicon, toy_rules):
    # "saw" keeps both readings without constraining context: the noun
    # reading should surface as a term, the verb reading should not
    parses = _parses(toy_lexicon, toy_rules, "saw")
    terms = extract_terms(parses, toy_lexicon)
    assert {t.lemma_sequence for t in terms} == {("n_saw",)}


def test_max_term_length_is_respected(corpus_parses, toy_lexicon):
    for term in extract_terms(corpus_parses, toy_lexicon):
        assert 1 <= len(term.lemma_sequence) <= 4


def test_partial_merge_order_invariant(toy_lexicon, toy_rules):
    texts = [
        "The information system stores the text.",
        "The knowledge base links the terms.",
        "The big semantic network links the knowledge.",
        "A system of systems.",
    ]
    per_doc = []
    for i, text in enumerate(texts):
        doc = Document(f"doc{i}", f"test://{i}", "t", text, "")
        per_doc.append(extract_partial(analyze_document(doc, toy_lexicon, toy_rules), toy_lexicon))

    def merged_in(order):
        acc = per_doc[order[0]]
        for idx in order[1:]:
            acc = merge_partials(acc, per_doc[idx])
        return finalize_terms(acc, toy_lexicon)

    rng = random.Random(3)
    baseline = merged_in(list(range(len(per_doc))))
    for _ in range(6):
        order = list(range(len(per_doc)))
        rng.shuffle(order)
        assert merged_in(order) == baseline


def test_terms_tsv_round_trip(tmp_path, corpus_parses, toy_lexicon):
    terms = extract_terms(corpus_parses, toy_lexicon)
    path = tmp_path / "terms.tsv"
    write_terms(path, terms)
    rows = read_terms(path)
    assert [r.term_id for r in rows] == [t.term_id for t in sorted(terms, key=display_rank_key)]
    by_id = {t.term_id: t for t in terms}
    for row in rows:
        assert row.frequency == by_id[row.term_id].frequency
        assert row.surface_form == by_id[row.term_id].surface_form


# -- sense disambiguation ------------------------------------------------------

def _seed():
    concepts = {
        "c-cutting%20tool": Concept("c-cutting%20tool", "cutting tool", frozenset({"saw"})),
        "c-past%20seeing": Concept("c-past%20seeing", "past seeing", frozenset({"saw"})),
        "c-workshop": Concept("c-workshop", "workshop"),
        "c-vision": Concept("c-vision", "vision"),
        "c-cat": Concept("c-cat", "cat"),
    }
    relations = frozenset(
        {
            ConceptRelation("assoc", "c-cutting%20tool", "c-workshop", "uses"),
            ConceptRelation("assoc", "c-past%20seeing", "c-vision", "kind"),
        }
    )
    return OntologyGraph("seed", "testdomain", concepts, relations, 1)


def _ctx(lemmas):
    return SenseContext("d1", 0, 2, 2, "saw", frozenset(lemmas))


def test_sense_zero_overlap_returns_none():
    assert disambiguate_sense(_ctx({"cat"}), _seed()) is None


def test_sense_prefers_higher_neighborhood_overlap():
    # hand count: {workshop, cat} overlaps "cutting tool" neighborhood once,
    # "past seeing" neighborhood not at all
    assignment = disambiguate_sense(_ctx({"workshop", "cat"}), _seed())
    assert assignment is not None
    assert assignment.concept_id == "c-cutting%20tool"
    assert assignment.score == 1


def test_sense_tie_breaks_to_smallest_concept_id():
    assignment = disambiguate_sense(_ctx({"workshop", "vision"}), _seed())
    assert assignment.concept_id == "c-cutting%20tool"


def test_sense_no_label_match_returns_none():
    assert disambiguate_sense(_ctx({"workshop"}), OntologyGraph("g", "d", {}, frozenset(), 1)) is None


def test_sense_missing_seed_raises():
    with pytest.raises(UnknownConcept):
        disambiguate_sense(_ctx({"workshop"}), None)


def test_sense_contexts_exclude_own_span(toy_lexicon, toy_rules):
    parses = _parses(toy_lexicon, toy_rules, "The engineer sees a saw.")
    terms = {t.surface_form: t for t in extract_terms(parses, toy_lexicon)}
    contexts = sense_contexts(terms["saw"], parses, toy_lexicon)
    assert len(contexts) == 1
    assert "saw" not in contexts[0].context_lemmas
    assert "engineer" in contexts[0].context_lemmas


# -- categorical network -------------------------------------------------------

def _accepted(terms, surfaces):
    return {
        replace(t, status="accepted") if t.surface_form in surfaces else t for t in terms
    }


def test_network_empty_without_accepted_terms(corpus_parses, toy_lexicon):
    terms = extract_terms(corpus_parses, toy_lexicon)
    network = build_network(corpus_parses, terms)
    assert network.nodes == frozenset() and network.edges == ()


def test_network_requires_both_endpoints_inside_terms(toy_lexicon, toy_rules):
    parses = _parses(toy_lexicon, toy_rules, "The cats sleep.")
    terms = _accepted(extract_terms(parses, toy_lexicon), {"cat"})
    network = build_network(parses, terms)
    assert network.edges == ()  # subj edge exists but "sleep" is no term
    assert len(network.nodes) == 1


def test_network_counts_supporting_edges(toy_lexicon, toy_rules):
    texts = [
        "The semantic network sleeps.",
        "The semantic network sleeps again.",
        "A semantic network sleeps.",
    ]
    parses = _parses(toy_lexicon, toy_rules, *texts)
    terms = _accepted(extract_terms(parses, toy_lexicon), {"network", "semantic network"})
    network = build_network(parses, terms)
    amod = [e for e in network.edges if e.label == "amod"]
    assert len(amod) == 1
    # three sentences each contribute one distinct amod parse edge
    assert amod[0].weight == 3
    src_term = next(t for t in terms if t.term_id == amod[0].source)
    tgt_term = next(t for t in terms if t.term_id == amod[0].target)
    assert src_term.surface_form == "network"
    assert tgt_term.surface_form == "semantic network"


def test_network_rejected_terms_never_appear(toy_lexicon, toy_rules):
    parses = _parses(toy_lexicon, toy_rules, "The semantic network sleeps.")
    terms = extract_terms(parses, toy_lexicon)
    decided = set()
    for t in terms:
        status = "rejected" if t.surface_form == "network" else "accepted"
        decided.add(replace(t, status=status))
    network = build_network(parses, decided)
    rejected_id = next(t.term_id for t in decided if t.status == "rejected")
    assert rejected_id not in network.nodes
    assert all(rejected_id not in (e.source, e.target) for e in network.edges)


def test_apply_statuses(corpus_parses, toy_lexicon):
    terms = extract_terms(corpus_parses, toy_lexicon)
    target = next(t for t in terms if t.surface_form == "system")
    updated = apply_statuses(terms, {target.term_id: "accepted"})
    statuses = {t.term_id: t.status for t in updated}
    assert statuses[target.term_id] == "accepted"
    assert all(s == "candidate" for tid, s in statuses.items() if tid != target.term_id)


def test_frequencies_monotone_under_corpus_growth(toy_lexicon, toy_rules):
    texts = [
        "The information system stores the text.",
        "The information system links a graph.",
        "A system sleeps.",
    ]
    parses = []
    previous: dict[str, int] = {}
    for i, text in enumerate(texts):
        doc = Document(f"doc{i}", f"test://{i}", "t", text, "")
        parses.extend(analyze_document(doc, toy_lexicon, toy_rules))
        current = {t.term_id: t.frequency for t in extract_terms(parses, toy_lexicon)}
        for term_id, frequency in previous.items():
            assert current.get(term_id, 0) >= frequency
        previous = current
