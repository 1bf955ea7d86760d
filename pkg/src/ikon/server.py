"""HTTP control API over the project store.

JSON over HTTP; every mutating response carries the new project state
(including its version), and mutating requests may send the version they
last saw — a mismatch is rejected with 409 so concurrent editors cannot
trample each other. Stage failures are reported inside a 200 response:
the transition itself succeeded and left the stage marked failed.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import (
    AlreadyDone,
    DuplicateProject,
    IkonError,
    InvalidEdge,
    PrerequisiteNotMet,
    StageFailure,
    StaleVersion,
    UnknownConcept,
    UnknownProject,
    UnknownTerm,
)
from .pipeline import ProjectStore, state_to_dict

def _status_code(exc: IkonError) -> int:
    if isinstance(exc, (UnknownProject, UnknownTerm, UnknownConcept)):
        return 404
    if isinstance(exc, (StaleVersion, DuplicateProject, PrerequisiteNotMet, AlreadyDone, InvalidEdge)):
        return 409
    return 422


class CreateProject(BaseModel):
    domain_name: str
    config: dict
    project_id: str | None = None


class VersionedBody(BaseModel):
    version: int | None = None


class RollbackBody(VersionedBody):
    edge: str
    reason: str = ""


class DecisionBody(VersionedBody):
    status: str


class ConceptBody(VersionedBody):
    label: str
    alt_labels: list[str] = []
    definition: str | None = None


class ConceptPatch(VersionedBody):
    preferred_label: str | None = None
    alt_labels: list[str] | None = None
    definition: str | None = None


class RelationBody(VersionedBody):
    kind: str
    source: str
    target: str
    label: str | None = None


class MergeBody(VersionedBody):
    library_ref: str


def _graph_to_dict(graph) -> dict:
    return {
        "graph_id": graph.graph_id,
        "domain_name": graph.domain_name,
        "version": graph.version,
        "concepts": [
            {
                "concept_id": c.concept_id,
                "preferred_label": c.preferred_label,
                "alt_labels": sorted(c.alt_labels),
                "definition": c.definition,
            }
            for c in sorted(graph.concepts.values(), key=lambda c: c.concept_id)
        ],
        "relations": [
            {"kind": r.kind, "source": r.source, "target": r.target, "label": r.label}
            for r in sorted(graph.relations, key=lambda r: (r.kind, r.source, r.target, r.label or ""))
        ],
    }


def _hits_to_list(hits) -> list[dict]:
    return [{"kind": h.kind, "target_id": h.target_id, "score": h.score, "snippet": h.snippet} for h in hits]


def create_app(root: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    store = ProjectStore(root)
    app = FastAPI(title="ikon control api")

    @app.exception_handler(IkonError)
    async def ikon_error_handler(_, exc: IkonError):
        return JSONResponse(status_code=_status_code(exc), content={"error": str(exc), "type": type(exc).__name__})

    @app.get("/projects")
    def list_projects():
        return [state_to_dict(s) for s in store.list_projects()]

    @app.post("/projects", status_code=201)
    def create_project(body: CreateProject):
        project = store.create(body.domain_name, body.config, body.project_id)
        return state_to_dict(project.state)

    @app.get("/projects/{pid}")
    def get_project(pid: str):
        return state_to_dict(store.get(pid).status())

    @app.post("/projects/{pid}/stages/{stage}/run")
    def run_stage(pid: str, stage: str, body: VersionedBody | None = None):
        project = store.get(pid)
        expected = body.version if body else None
        try:
            state = project.run_stage(stage, expected_version=expected)
            return state_to_dict(state)
        except StageFailure as exc:
            return {**state_to_dict(project.state), "stage_failure": exc.diagnostic}

    @app.post("/projects/{pid}/rollback")
    def rollback(pid: str, body: RollbackBody):
        state = store.get(pid).rollback(body.edge, body.reason, expected_version=body.version)
        return state_to_dict(state)

    @app.get("/projects/{pid}/terms")
    def list_terms(pid: str, status: str | None = None):
        project = store.get(pid)
        rows = project.terms(status)
        return {
            "version": project.state.version,
            "terms": [
                {
                    "term_id": r.term_id,
                    "surface": r.surface_form,
                    "lemma_ids": list(r.lemma_sequence),
                    "frequency": r.frequency,
                    "doc_count": r.doc_count,
                    "status": r.status,
                }
                for r in rows
            ],
        }

    @app.post("/projects/{pid}/terms/{term_id}/decision")
    def decide_term(pid: str, term_id: str, body: DecisionBody):
        state = store.get(pid).decide_term(term_id, body.status, expected_version=body.version)
        return state_to_dict(state)

    @app.get("/projects/{pid}/ontology")
    def get_ontology(pid: str):
        project = store.get(pid)
        return {"version": project.state.version, "graph": _graph_to_dict(project.ontology_graph())}

    @app.post("/projects/{pid}/ontology/concepts")
    def add_concept(pid: str, body: ConceptBody):
        state = store.get(pid).add_concept(body.label, body.alt_labels, body.definition,
                                           expected_version=body.version)
        return state_to_dict(state)

    @app.patch("/projects/{pid}/ontology/concepts/{concept_id}")
    def patch_concept(pid: str, concept_id: str, body: ConceptPatch):
        state = store.get(pid).update_concept(
            concept_id, body.preferred_label, body.alt_labels, body.definition,
            expected_version=body.version,
        )
        return state_to_dict(state)

    @app.post("/projects/{pid}/ontology/relations")
    def add_relation(pid: str, body: RelationBody):
        state = store.get(pid).add_relation(body.kind, body.source, body.target, body.label,
                                            expected_version=body.version)
        return state_to_dict(state)

    @app.post("/projects/{pid}/ontology/relations/remove")
    def remove_relation(pid: str, body: RelationBody):
        state = store.get(pid).remove_relation(body.kind, body.source, body.target, body.label,
                                               expected_version=body.version)
        return state_to_dict(state)

    @app.post("/projects/{pid}/ontology/merge")
    def merge_ontology(pid: str, body: MergeBody):
        state = store.get(pid).merge_with_library(body.library_ref, expected_version=body.version)
        return state_to_dict(state)

    @app.get("/projects/{pid}/search")
    def search(pid: str, q: str, k: int = Query(default=10, ge=1)):
        results = store.get(pid).search(q, k)
        return {key: _hits_to_list(hits) for key, hits in results.items()}

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
