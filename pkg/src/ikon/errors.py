"""Exception types shared across the pipeline modules.

Everything raised on purpose derives from IkonError so the CLI can map
user mistakes to exit code 1 and stage failures to exit code 2.
"""

from __future__ import annotations


class IkonError(Exception):
    """Base class for all errors raised by this package."""


# -- lexicon ---------------------------------------------------------------

class MalformedLine(IkonError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateId(IkonError):
    def __init__(self, id_: str):
        super().__init__(f"duplicate id {id_!r}")
        self.id = id_


class UnresolvedClass(IkonError):
    def __init__(self, lexeme_id: str, class_id: str):
        super().__init__(f"lexeme {lexeme_id!r} references unknown flexion class {class_id!r}")
        self.lexeme_id = lexeme_id
        self.class_id = class_id


class UnknownLexeme(IkonError):
    def __init__(self, lexeme_id: str):
        super().__init__(f"unknown lexeme {lexeme_id!r}")
        self.lexeme_id = lexeme_id


# -- corpus ----------------------------------------------------------------

class UnreadableSource(IkonError):
    def __init__(self, uri: str, reason: str = ""):
        super().__init__(f"unreadable source {uri}" + (f": {reason}" if reason else ""))
        self.uri = uri


class EmptyDocument(IkonError):
    def __init__(self, uri: str):
        super().__init__(f"empty document at {uri}")
        self.uri = uri


# -- ontology --------------------------------------------------------------

class LabelCollision(IkonError):
    def __init__(self, label: str, ids: tuple[str, ...]):
        super().__init__(f"distinct terms normalize to one label {label!r}: {', '.join(ids)}")
        self.label = label
        self.ids = ids


class MalformedTriple(IkonError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnsupportedConstruct(IkonError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnknownConcept(IkonError):
    def __init__(self, concept_id: str):
        super().__init__(f"unknown concept {concept_id!r}")
        self.concept_id = concept_id


class CycleRejected(IkonError):
    """An edit would create an is_a cycle; the graph is left unchanged."""

    def __init__(self, source: str, target: str):
        super().__init__(f"is_a({source} -> {target}) would close a cycle")
        self.source = source
        self.target = target


# -- archive / search ------------------------------------------------------

class MissingDocument(IkonError):
    def __init__(self, doc_id: str):
        super().__init__(f"document {doc_id!r} listed in manifest but not stored")
        self.doc_id = doc_id


# -- pipeline --------------------------------------------------------------

class DuplicateProject(IkonError):
    def __init__(self, project_id: str):
        super().__init__(f"project {project_id!r} already exists")
        self.project_id = project_id


class UnknownProject(IkonError):
    def __init__(self, project_id: str):
        super().__init__(f"no project {project_id!r}")
        self.project_id = project_id


class InvalidConfig(IkonError):
    def __init__(self, field: str, message: str = ""):
        super().__init__(f"invalid config field {field!r}" + (f": {message}" if message else ""))
        self.field = field


class PrerequisiteNotMet(IkonError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class AlreadyDone(IkonError):
    def __init__(self, stage: str):
        super().__init__(f"{stage} is already done; roll back or decide terms to repeat it")
        self.stage = stage


class InvalidEdge(IkonError):
    def __init__(self, edge: str):
        super().__init__(f"no such rollback edge {edge!r}")
        self.edge = edge


class StageFailure(IkonError):
    def __init__(self, stage: str, diagnostic: str):
        super().__init__(f"{stage} failed: {diagnostic}")
        self.stage = stage
        self.diagnostic = diagnostic


class StaleVersion(IkonError):
    """Optimistic-lock mismatch on a mutating call (HTTP 409)."""

    def __init__(self, expected: int, actual: int):
        super().__init__(f"stale version {expected}, project is at {actual}")
        self.expected = expected
        self.actual = actual


class UnknownTerm(IkonError):
    def __init__(self, term_id: str):
        super().__init__(f"no term {term_id!r}")
        self.term_id = term_id
