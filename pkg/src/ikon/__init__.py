"""Pipeline for building domain ontologies from text corpora.

Submodules mirror the processing stages: lexicon (dictionary morphology),
corpus (ingestion and relevance), linganalysis (parsing), extraction
(terms and the semantic network), ontology (graph, merge, OWL),
archive_search (index and archive), pipeline (orchestration), server
(HTTP control API) and cli.
"""

__version__ = "0.1.0"
