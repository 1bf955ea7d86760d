import random
from pathlib import Path

import pytest

from ikon.lexicon import load_lexicon
from ikon.linganalysis import load_rules
from ikon.ontology import Concept, ConceptRelation, OntologyGraph, validate_graph

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def toy_lexicon():
    return load_lexicon(DATA.joinpath("toy_lexicon.tsv").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def toy_rules(toy_lexicon):
    return load_rules(DATA.joinpath("toy_rules.tsv").read_text(encoding="utf-8"), toy_lexicon)


@pytest.fixture
def corpus_src_dir():
    return DATA / "corpus_src"


@pytest.fixture
def seed_terms_path():
    return DATA / "seed_terms.txt"


# -- random generators (seeded, shared by property and acceptance tests) ------

STEM_ALPHABET = "abcdefghijklmnop"
FEATURE_POOL = {"number": ["sg", "pl"], "case": ["nom", "acc", "dat"], "tense": ["pres", "past"]}


def random_lexicon_text(rng: random.Random, n_lexemes=200, n_classes=12) -> str:
    lines = ["!POS\tN,V,A", "!FEAT\t" + ",".join(f"{k}:{'|'.join(v)}" for k, v in FEATURE_POOL.items())]
    class_ids = [f"C{i}" for i in range(n_classes)]
    for cid in class_ids:
        used = set()
        for _ in range(rng.randint(1, 6)):
            ending = "".join(rng.choice(STEM_ALPHABET) for _ in range(rng.randint(0, 3)))
            names = rng.sample(sorted(FEATURE_POOL), rng.randint(0, 2))
            bundle = ",".join(f"{n}={rng.choice(FEATURE_POOL[n])}" for n in sorted(names))
            if (ending, bundle) in used:
                continue
            used.add((ending, bundle))
            lines.append(f"F\t{cid}\t{ending}\t{bundle}")
    for i in range(n_lexemes):
        stem = "".join(rng.choice(STEM_ALPHABET) for _ in range(rng.randint(3, 8)))
        pos = rng.choice("NVA")
        lines.append(f"L\tx{i}\t{stem}\t{pos}\t{rng.choice(class_ids)}\t")
    return "\n".join(lines) + "\n"


LABEL_WORDS = [
    "system", "graph", "node", "edge", "term", "store", "index", "layer",
    "model", "view", "frame", "field", "unit", "chain", "link", "map",
]


def random_graph(rng: random.Random, max_concepts=20, label_pool=None) -> OntologyGraph:
    pool = label_pool or LABEL_WORDS
    n = rng.randint(0, max_concepts)
    labels = set()
    while len(labels) < n:
        words = rng.sample(pool, rng.randint(1, 3))
        labels.add(" ".join(words))
    labels = sorted(labels)
    concepts = {}
    for label in labels:
        cid = "c-" + label.replace(" ", "_")
        alt = set()
        # alt labels drawn from the shared pool may match a preferred label
        # of a DIFFERENT random graph (driving unification in merge tests) but
        # never shadow a preferred label of this one
        for _ in range(rng.randint(0, 2)):
            candidate = " ".join(rng.sample(pool, rng.randint(1, 3)))
            if candidate not in labels:
                alt.add(candidate)
        if rng.random() < 0.3:
            alt.add(" ".join(rng.sample(pool, 2)) + " alias")
        concepts[cid] = Concept(cid, label, frozenset(alt))

    ids = sorted(concepts)
    relations = set()
    order = ids[:]
    rng.shuffle(order)
    rank = {cid: i for i, cid in enumerate(order)}
    for _ in range(rng.randint(0, 2 * len(ids))):
        if len(ids) < 2:
            break
        a, b = rng.sample(ids, 2)
        kind = rng.choice(["is_a", "part_of", "assoc"])
        if kind == "is_a":
            src, tgt = (a, b) if rank[a] < rank[b] else (b, a)
            relations.add(ConceptRelation("is_a", src, tgt))
        elif kind == "part_of":
            relations.add(ConceptRelation("part_of", a, b))
        else:
            relations.add(ConceptRelation("assoc", a, b, rng.choice(["attr", "near", "uses"])))
    graph = OntologyGraph(f"g{rng.randint(0, 10**6)}", "testdomain", concepts, frozenset(relations), 1)
    validate_graph(graph)
    return graph
