"""Project lifecycle and stage orchestration.

Five strictly ordered stages: S1 corpus selection, S2 linguistic
analysis, S3 term extraction, S4 ontology integration, S5 index and
archive. Two rollback edges exist, S2->S1 and S3->S2; a rollback marks
the target stage and everything downstream needs_repeat and flags their
artifacts stale.

State is event-sourced: every transition appends one event to
events.ndjson and rewrites the project.json snapshot atomically, so a
reload always lands on the last persisted transition and replaying the
log reproduces the snapshot exactly. The transition core below is pure
(state x event -> state) and does no I/O, which keeps it model-checkable.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from . import archive_search, corpus, extraction, linganalysis, ontology
from .errors import (
    AlreadyDone,
    DuplicateProject,
    InvalidConfig,
    InvalidEdge,
    PrerequisiteNotMet,
    StageFailure,
    StaleVersion,
    UnknownProject,
    UnknownTerm,
)
from .lexicon import load_lexicon

STAGES = ("S1", "S2", "S3", "S4", "S5")
ROLLBACK_EDGES = {"S2toS1": ("S2", "S1"), "S3toS2": ("S3", "S2")}
RUNNING, DONE, PENDING, NEEDS_REPEAT, FAILED = "running", "done", "pending", "needs_repeat", "failed"


@dataclass(frozen=True)
class StageRecord:
    status: str = PENDING
    started_at: str | None = None
    finished_at: str | None = None
    artifacts: dict[str, str] = field(default_factory=dict)
    stale: bool = False
    diagnostic: str | None = None


@dataclass(frozen=True)
class ProjectState:
    project_id: str
    domain_name: str
    version: int
    config: dict
    stages: dict[str, StageRecord]

    def stage(self, name: str) -> StageRecord:
        return self.stages[name]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# -- pure transition core ------------------------------------------------------

def initial_state(event: dict) -> ProjectState:
    return ProjectState(
        project_id=event["project_id"],
        domain_name=event["domain_name"],
        version=event["seq"],
        config=event["config"],
        stages={s: StageRecord() for s in STAGES},
    )


def apply_event(state: ProjectState | None, event: dict) -> ProjectState:
    """Fold one event into the state. Events are assumed pre-validated."""
    etype = event["type"]
    if etype == "project_created":
        return initial_state(event)
    assert state is not None
    stages = dict(state.stages)

    if etype == "stage_started":
        stage = event["stage"]
        stages[stage] = replace(stages[stage], status=RUNNING, started_at=event["ts"],
                                finished_at=None, diagnostic=None)
    elif etype == "stage_finished":
        stage = event["stage"]
        stages[stage] = replace(
            stages[stage],
            status=event["status"],
            finished_at=event["ts"],
            artifacts=dict(event.get("artifacts", {})),
            stale=False,
            diagnostic=event.get("diagnostic"),
        )
    elif etype == "stage_interrupted":
        stage = event["stage"]
        stages[stage] = replace(stages[stage], status=FAILED, finished_at=event["ts"],
                                diagnostic="interrupted before completion")
    elif etype == "rollback":
        _, to_stage = ROLLBACK_EDGES[event["edge"]]
        start = STAGES.index(to_stage)
        for name in STAGES[start:]:
            stages[name] = replace(stages[name], status=NEEDS_REPEAT, stale=True)
    elif etype == "term_decision":
        for name in ("S4", "S5"):
            if stages[name].status == DONE:
                stages[name] = replace(stages[name], status=NEEDS_REPEAT, stale=True)
    elif etype == "ontology_edited":
        if stages["S5"].status == DONE:
            stages["S5"] = replace(stages["S5"], status=NEEDS_REPEAT, stale=True)
    else:
        raise ValueError(f"unknown event type {etype!r}")

    return replace(state, version=event["seq"], stages=stages)


def replay(events: list[dict]) -> ProjectState | None:
    state: ProjectState | None = None
    for event in events:
        state = apply_event(state, event)
    return state


def check_run_allowed(state: ProjectState, stage: str) -> None:
    if stage not in STAGES:
        raise PrerequisiteNotMet(stage, f"unknown stage; expected one of {', '.join(STAGES)}")
    for name in STAGES:
        if name != stage and state.stages[name].status == RUNNING:
            raise PrerequisiteNotMet(stage, f"{name} is still running")
    for name in STAGES[: STAGES.index(stage)]:
        if state.stages[name].status != DONE:
            raise PrerequisiteNotMet(stage, f"predecessor {name} is not done ({state.stages[name].status})")
    status = state.stages[stage].status
    if status == DONE:
        raise AlreadyDone(stage)


def check_rollback_allowed(state: ProjectState, edge: str) -> None:
    if edge not in ROLLBACK_EDGES:
        raise InvalidEdge(edge)
    from_stage, _ = ROLLBACK_EDGES[edge]
    if state.stages[from_stage].status not in (DONE, FAILED):
        raise PrerequisiteNotMet(from_stage, "rollback source stage must be done or failed")


def assert_invariants(state: ProjectState) -> None:
    """Ordering and exclusivity invariants; raised AssertionError means a bug."""
    running = [s for s in STAGES if state.stages[s].status == RUNNING]
    assert len(running) <= 1, f"multiple running stages: {running}"
    for i, name in enumerate(STAGES):
        if state.stages[name].status in (RUNNING, DONE):
            for pred in STAGES[:i]:
                assert state.stages[pred].status == DONE, (
                    f"{name} is {state.stages[name].status} but {pred} is {state.stages[pred].status}"
                )


# -- state (de)serialization -----------------------------------------------------

def state_to_dict(state: ProjectState) -> dict:
    return {
        "project_id": state.project_id,
        "domain_name": state.domain_name,
        "version": state.version,
        "config": state.config,
        "stages": {
            name: {
                "status": rec.status,
                "started_at": rec.started_at,
                "finished_at": rec.finished_at,
                "artifacts": rec.artifacts,
                "stale": rec.stale,
                "diagnostic": rec.diagnostic,
            }
            for name, rec in state.stages.items()
        },
    }


def state_from_dict(data: dict) -> ProjectState:
    return ProjectState(
        project_id=data["project_id"],
        domain_name=data["domain_name"],
        version=data["version"],
        config=data["config"],
        stages={
            name: StageRecord(
                status=rec["status"],
                started_at=rec["started_at"],
                finished_at=rec["finished_at"],
                artifacts=rec["artifacts"],
                stale=rec["stale"],
                diagnostic=rec["diagnostic"],
            )
            for name, rec in data["stages"].items()
        },
    )


# -- configuration -----------------------------------------------------------------

CONFIG_DEFAULTS = {
    "urls": [],
    "auto_accept_min_freq": 2,
    "seed_ontology": None,
}


def validate_config(config: dict) -> dict:
    """Check the frozen project configuration; returns it with defaults filled."""
    merged = {**CONFIG_DEFAULTS, **config}
    for field_name in ("lexicon", "rules", "seeds"):
        path = merged.get(field_name)
        if not path or not Path(path).is_file():
            raise InvalidConfig(field_name, "missing or not a readable file")
    threshold = merged.get("threshold")
    if not isinstance(threshold, (int, float)) or not 0 <= threshold <= 1:
        raise InvalidConfig("threshold", "must be a number in [0,1]")
    sources = merged.get("sources")
    if not isinstance(sources, list) or (not sources and not merged["urls"]):
        raise InvalidConfig("sources", "at least one source directory or url is required")
    for src in sources:
        if not Path(src).is_dir():
            raise InvalidConfig("sources", f"{src} is not a directory")
    seeds = _read_seed_terms(merged["seeds"])
    if not seeds:
        raise InvalidConfig("seeds", "seed term file is empty")
    if merged["seed_ontology"] is not None and not Path(merged["seed_ontology"]).is_file():
        raise InvalidConfig("seed_ontology", "not a readable file")
    freq = merged["auto_accept_min_freq"]
    if freq is not None and (not isinstance(freq, int) or freq < 1):
        raise InvalidConfig("auto_accept_min_freq", "must be a positive integer or null")
    try:
        with open(merged["lexicon"], encoding="utf-8") as fh:
            load_lexicon(fh)
    except Exception as exc:
        raise InvalidConfig("lexicon", str(exc)) from exc
    return merged


def _read_seed_terms(path: str | Path) -> set[str]:
    out = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.add(line)
    return out


# -- disk-backed project ---------------------------------------------------------

def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "-" for ch in name.lower()).strip("-") or "project"


class Project:
    """Single-writer handle over one project directory."""

    def __init__(self, directory: Path, library_root: Path):
        self.dir = directory
        self.library_root = library_root
        self._lock = threading.RLock()
        self.state = self._load()

    # .. persistence ..

    @property
    def events_path(self) -> Path:
        return self.dir / "events.ndjson"

    @property
    def snapshot_path(self) -> Path:
        return self.dir / "project.json"

    def _load(self) -> ProjectState:
        events = self.read_events()
        if not events:
            raise UnknownProject(self.dir.name)
        state = replay(events)
        assert state is not None
        return state

    def read_events(self) -> list[dict]:
        if not self.events_path.exists():
            return []
        return [json.loads(line) for line in self.events_path.read_text(encoding="utf-8").splitlines() if line]

    def _append(self, event: dict) -> ProjectState:
        event = {"seq": self.state.version + 1 if self.state else 1, "ts": _now(), **event}
        with self.events_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
        self.state = apply_event(self.state, event)
        self._write_snapshot()
        return self.state

    def _write_snapshot(self) -> None:
        tmp = self.snapshot_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(state_to_dict(self.state), sort_keys=True, indent=2) + "\n", encoding="utf-8")
        os.replace(tmp, self.snapshot_path)

    def _check_version(self, expected: int | None) -> None:
        if expected is not None and expected != self.state.version:
            raise StaleVersion(expected, self.state.version)

    # .. operations ..

    def run_stage(self, stage: str, runner=None, expected_version: int | None = None) -> ProjectState:
        with self._lock:
            self._check_version(expected_version)
            if stage in STAGES and self.state.stages[stage].status == RUNNING:
                # a previous process died mid-run; record the interruption and retry
                self._append({"type": "stage_interrupted", "stage": stage})
            check_run_allowed(self.state, stage)
            self._append({"type": "stage_started", "stage": stage})
            run = runner or default_runner
            try:
                artifacts = run(self, stage)
            except Exception as exc:
                diagnostic = f"{type(exc).__name__}: {exc}"
                self._append({"type": "stage_finished", "stage": stage, "status": FAILED,
                              "artifacts": {}, "diagnostic": diagnostic})
                raise StageFailure(stage, diagnostic) from exc
            self._append({"type": "stage_finished", "stage": stage, "status": DONE,
                          "artifacts": artifacts, "diagnostic": None})
            return self.state

    def rollback(self, edge: str, reason: str, expected_version: int | None = None) -> ProjectState:
        with self._lock:
            self._check_version(expected_version)
            check_rollback_allowed(self.state, edge)
            return self._append({"type": "rollback", "edge": edge, "reason": reason})

    def status(self) -> ProjectState:
        return self.state

    def decide_term(self, term_id: str, status: str, expected_version: int | None = None) -> ProjectState:
        if status not in ("accepted", "rejected", "candidate"):
            raise InvalidConfig("status", "must be accepted, rejected or candidate")
        with self._lock:
            self._check_version(expected_version)
            terms_path = self.dir / "terms.tsv"
            rows = extraction.read_terms(terms_path)
            if all(r.term_id != term_id for r in rows):
                raise UnknownTerm(term_id)
            lines = []
            for r in rows:
                row_status = status if r.term_id == term_id else r.status
                lines.append(
                    f"{r.term_id}\t{r.surface_form}\t{','.join(r.lemma_sequence)}\t{r.frequency}\t{r.doc_count}\t{row_status}"
                )
            terms_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
            return self._append({"type": "term_decision", "term_id": term_id, "status": status})

    def terms(self, status: str | None = None) -> list[extraction.TermRow]:
        rows = extraction.read_terms(self.dir / "terms.tsv")
        if status:
            rows = [r for r in rows if r.status == status]
        return rows

    # .. ontology editing ..

    def _load_ontology(self) -> ontology.OntologyGraph:
        path = self.dir / "ontology.nt"
        if not path.exists():
            raise PrerequisiteNotMet("S4", "no ontology yet; run S4 first")
        return ontology.import_owl(path.read_text(encoding="utf-8"))

    def _store_ontology(self, graph: ontology.OntologyGraph, action: str) -> ProjectState:
        (self.dir / "ontology.nt").write_text(ontology.export_owl(graph), encoding="utf-8")
        return self._append({"type": "ontology_edited", "action": action})

    def ontology_graph(self) -> ontology.OntologyGraph:
        return self._load_ontology()

    def add_concept(self, label: str, alt_labels: list[str] | None = None,
                    definition: str | None = None, expected_version: int | None = None) -> ProjectState:
        with self._lock:
            self._check_version(expected_version)
            graph = ontology.add_concept(self._load_ontology(), label, set(alt_labels or ()), definition)
            return self._store_ontology(graph, f"add_concept:{label}")

    def update_concept(self, concept_id: str, preferred_label: str | None = None,
                       alt_labels: list[str] | None = None, definition: str | None = None,
                       expected_version: int | None = None) -> ProjectState:
        with self._lock:
            self._check_version(expected_version)
            graph = ontology.update_concept(
                self._load_ontology(), concept_id, preferred_label,
                set(alt_labels) if alt_labels is not None else None, definition,
            )
            return self._store_ontology(graph, f"update_concept:{concept_id}")

    def add_relation(self, kind: str, source: str, target: str, label: str | None = None,
                     expected_version: int | None = None) -> ProjectState:
        with self._lock:
            self._check_version(expected_version)
            graph = ontology.add_relation(self._load_ontology(), kind, source, target, label)
            return self._store_ontology(graph, f"add_relation:{kind}:{source}->{target}")

    def remove_relation(self, kind: str, source: str, target: str, label: str | None = None,
                        expected_version: int | None = None) -> ProjectState:
        with self._lock:
            self._check_version(expected_version)
            graph = ontology.remove_relation(self._load_ontology(), kind, source, target, label)
            return self._store_ontology(graph, f"remove_relation:{kind}:{source}->{target}")

    def merge_with_library(self, library_ref: str, expected_version: int | None = None) -> ProjectState:
        with self._lock:
            self._check_version(expected_version)
            domain, _, version_text = library_ref.partition(":")
            version = int(version_text) if version_text else None
            other = ontology.load_from_library(self.library_root, domain, version)
            result = ontology.merge(self._load_ontology(), other)
            return self._store_ontology(result.graph, f"merge:{library_ref}")

    # .. read-side helpers ..

    def export_owl(self) -> str:
        record = self.state.stages["S4"]
        if record.status != DONE or record.stale:
            raise PrerequisiteNotMet("S4", "ontology export needs S4 done and not stale")
        return (self.dir / "ontology.nt").read_text(encoding="utf-8")

    def search(self, query: str, k: int = 10) -> dict:
        index_path = self.dir / "index.tsv"
        if not index_path.exists():
            raise PrerequisiteNotMet("S5", "no index yet; run S5 first")
        manifest, bodies = corpus.read_store(self.dir / "corpus", self.state.project_id)
        index = archive_search.read_index(index_path, len(manifest.entries))
        documents = archive_search.search(index, query, k, bodies)
        term_labels = {r.term_id: r.surface_form for r in self.terms()}
        term_hits = archive_search.label_search(query, term_labels, "term", k)
        concept_hits: list[archive_search.SearchHit] = []
        if (self.dir / "ontology.nt").exists():
            graph = self._load_ontology()
            labels = {c.concept_id: c.preferred_label for c in graph.concepts.values()}
            concept_hits = archive_search.label_search(query, labels, "concept", k)
        return {"documents": documents, "terms": term_hits, "concepts": concept_hits}


# -- real stage bindings -----------------------------------------------------------

def default_runner(project: Project, stage: str) -> dict[str, str]:
    runner = {
        "S1": _run_s1,
        "S2": _run_s2,
        "S3": _run_s3,
        "S4": _run_s4,
        "S5": _run_s5,
    }[stage]
    written = runner(project)
    return {str(p.relative_to(project.dir)): _sha256_file(p) for p in written}


def _config(project: Project) -> dict:
    return project.state.config


def _lexicon(project: Project):
    with open(_config(project)["lexicon"], encoding="utf-8") as fh:
        return load_lexicon(fh)


def _rules(project: Project, lexicon):
    with open(_config(project)["rules"], encoding="utf-8") as fh:
        return linganalysis.load_rules(fh, lexicon)


def _run_s1(project: Project) -> list[Path]:
    config = _config(project)
    docs = corpus.ingest(config["sources"], config["urls"])
    seeds = _read_seed_terms(config["seeds"])
    manifest, selected = corpus.select_corpus(docs, seeds, config["threshold"], project.state.project_id)
    return corpus.write_store(project.dir / "corpus", manifest, selected)


def _run_s2(project: Project) -> list[Path]:
    lexicon = _lexicon(project)
    rules = _rules(project, lexicon)
    manifest, bodies = corpus.read_store(project.dir / "corpus", project.state.project_id)
    parse_dir = project.dir / "parse"
    parse_dir.mkdir(exist_ok=True)
    for stale in parse_dir.glob("*.psg"):
        stale.unlink()
    written = []
    for entry in manifest.entries:
        doc = corpus.Document(entry.doc_id, entry.uri, entry.title, bodies[entry.doc_id], "")
        graphs = linganalysis.analyze_document(doc, lexicon, rules)
        path = parse_dir / f"{entry.doc_id}.psg"
        linganalysis.write_parse_file(path, graphs)
        written.append(path)
    return written


def _load_parses(project: Project, lexicon) -> list[linganalysis.ParseGraph]:
    manifest, _ = corpus.read_store(project.dir / "corpus", project.state.project_id)
    graphs = []
    for entry in manifest.entries:
        path = project.dir / "parse" / f"{entry.doc_id}.psg"
        graphs.extend(linganalysis.read_parse_file(path, entry.doc_id, lexicon))
    return graphs


def _run_s3(project: Project) -> list[Path]:
    config = _config(project)
    lexicon = _lexicon(project)
    parses = _load_parses(project, lexicon)
    terms = extraction.extract_terms(parses, lexicon)

    previous = {r.term_id: r.status for r in extraction.read_terms(project.dir / "terms.tsv")}
    min_freq = config["auto_accept_min_freq"]
    decided = set()
    for term in terms:
        status = previous.get(term.term_id, "candidate")
        if status == "candidate" and min_freq is not None and term.frequency >= min_freq:
            status = "accepted"
        decided.add(replace(term, status=status))

    terms_path = project.dir / "terms.tsv"
    extraction.write_terms(terms_path, decided)
    written = [terms_path]

    if config["seed_ontology"]:
        seed = ontology.import_owl(Path(config["seed_ontology"]).read_text(encoding="utf-8"))
        senses_path = project.dir / "senses.tsv"
        lines = []
        for term in sorted(decided, key=lambda t: t.term_id):
            for ctx in extraction.sense_contexts(term, parses, lexicon):
                assignment = extraction.disambiguate_sense(ctx, seed)
                if assignment is not None:
                    lines.append(
                        f"{assignment.doc_id}\t{assignment.sentence_index}\t{assignment.start}"
                        f"\t{assignment.end}\t{term.term_id}\t{assignment.concept_id}\t{assignment.score}"
                    )
        senses_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        written.append(senses_path)
    return written


def _curated_terms(project: Project, lexicon, parses) -> set[extraction.TermCandidate]:
    statuses = {r.term_id: r.status for r in extraction.read_terms(project.dir / "terms.tsv")}
    terms = extraction.extract_terms(parses, lexicon)
    return extraction.apply_statuses(terms, statuses)


def _run_s4(project: Project) -> list[Path]:
    lexicon = _lexicon(project)
    parses = _load_parses(project, lexicon)
    terms = _curated_terms(project, lexicon, parses)
    network = extraction.build_network(parses, terms)
    graph = ontology.promote(network, terms, project.state.domain_name)

    network_path = project.dir / "network.tsv"
    extraction.write_network(network_path, network)
    ontology_path = project.dir / "ontology.nt"
    ontology_path.write_text(ontology.export_owl(graph), encoding="utf-8")
    ontology.publish(project.library_root, graph)
    return [network_path, ontology_path]


def _run_s5(project: Project) -> list[Path]:
    manifest, bodies = corpus.read_store(project.dir / "corpus", project.state.project_id)
    index = archive_search.build_index(manifest, bodies)
    index_path = project.dir / "index.tsv"
    archive_search.write_index(index_path, index)

    lexicon = _lexicon(project)
    parses = _load_parses(project, lexicon)
    terms = _curated_terms(project, lexicon, parses)
    graph = None
    if (project.dir / "ontology.nt").exists():
        graph = ontology.import_owl((project.dir / "ontology.nt").read_text(encoding="utf-8"))
    archive_path = project.dir / "archive.tsv"
    archive_search.archive_terms(terms, graph, archive_path)
    return [index_path, archive_path]


# -- multi-project store -------------------------------------------------------------

class ProjectStore:
    """Directory of projects plus the shared ontology library."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.projects_dir = self.root / "projects"
        self.library_root = self.root / "library"
        self.projects_dir.mkdir(parents=True, exist_ok=True)
        self._handles: dict[str, Project] = {}
        self._lock = threading.Lock()

    def create(self, domain_name: str, config: dict, project_id: str | None = None) -> Project:
        pid = project_id or _slug(domain_name)
        directory = self.projects_dir / pid
        if directory.exists():
            raise DuplicateProject(pid)
        merged = validate_config(config)
        directory.mkdir(parents=True)
        event = {
            "seq": 1,
            "ts": _now(),
            "type": "project_created",
            "project_id": pid,
            "domain_name": domain_name,
            "config": merged,
        }
        (directory / "events.ndjson").write_text(json.dumps(event, sort_keys=True) + "\n", encoding="utf-8")
        project = Project(directory, self.library_root)
        project._write_snapshot()
        with self._lock:
            self._handles[pid] = project
        return project

    def get(self, project_id: str) -> Project:
        with self._lock:
            if project_id in self._handles:
                return self._handles[project_id]
        directory = self.projects_dir / project_id
        if not directory.is_dir():
            raise UnknownProject(project_id)
        project = Project(directory, self.library_root)
        with self._lock:
            self._handles[project_id] = project
        return project

    def list_projects(self) -> list[ProjectState]:
        out = []
        for directory in sorted(self.projects_dir.iterdir()):
            if directory.is_dir() and (directory / "events.ndjson").exists():
                out.append(self.get(directory.name).state)
        return out
