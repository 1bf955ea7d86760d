import json
import random
import signal
import subprocess
import sys
import time
from pathlib import Path

import pytest

from ikon.errors import (
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
from ikon.pipeline import (
    STAGES,
    ProjectStore,
    apply_event,
    assert_invariants,
    check_rollback_allowed,
    check_run_allowed,
    replay,
    state_from_dict,
    state_to_dict,
)

DATA = Path(__file__).parent / "data"


def make_config(**overrides):
    config = {
        "lexicon": str(DATA / "toy_lexicon.tsv"),
        "rules": str(DATA / "toy_rules.tsv"),
        "seeds": str(DATA / "seed_terms.txt"),
        "threshold": 0.25,
        "sources": [str(DATA / "corpus_src")],
        "auto_accept_min_freq": 2,
    }
    config.update(overrides)
    return config


@pytest.fixture
def store(tmp_path):
    return ProjectStore(tmp_path / "root")


def instant(project, stage):
    return {}


def test_create_project_starts_pending(store):
    project = store.create("test domain", make_config())
    assert project.state.project_id == "test-domain"
    assert all(project.state.stages[s].status == "pending" for s in STAGES)
    assert project.state.version == 1


def test_create_validates_config(store):
    with pytest.raises(InvalidConfig) as err:
        store.create("d", make_config(lexicon="/nonexistent"))
    assert err.value.field == "lexicon"
    with pytest.raises(InvalidConfig):
        store.create("d", make_config(threshold=3))
    with pytest.raises(InvalidConfig):
        store.create("d", make_config(sources=[]))


def test_create_duplicate_project(store):
    store.create("dom", make_config())
    with pytest.raises(DuplicateProject):
        store.create("dom", make_config())


def test_unknown_project(store):
    with pytest.raises(UnknownProject):
        store.get("nope")


def test_run_requires_predecessors(store):
    project = store.create("dom", make_config())
    with pytest.raises(PrerequisiteNotMet):
        project.run_stage("S2", runner=instant)


def test_rerun_done_stage_rejected(store):
    project = store.create("dom", make_config())
    project.run_stage("S1", runner=instant)
    with pytest.raises(AlreadyDone):
        project.run_stage("S1", runner=instant)


def test_stage_failure_recorded_and_retryable(store):
    project = store.create("dom", make_config())

    def boom(project, stage):
        raise RuntimeError("exploded")

    with pytest.raises(StageFailure):
        project.run_stage("S1", runner=boom)
    assert project.state.stages["S1"].status == "failed"
    assert "exploded" in project.state.stages["S1"].diagnostic
    project.run_stage("S1", runner=instant)
    assert project.state.stages["S1"].status == "done"


def test_run_s1_produces_corpus_artifacts(store):
    project = store.create("dom", make_config())
    state = project.run_stage("S1")
    record = state.stages["S1"]
    assert record.status == "done"
    assert "corpus/manifest.tsv" in record.artifacts
    manifest = (project.dir / "corpus" / "manifest.tsv").read_text().splitlines()
    assert len(manifest) == 24  # the relevant docs; cat documents filtered out


def test_full_pipeline_run(store):
    project = store.create("dom", make_config())
    for stage in STAGES:
        project.run_stage(stage)
    assert all(project.state.stages[s].status == "done" for s in STAGES)
    assert (project.dir / "terms.tsv").exists()
    assert (project.dir / "network.tsv").exists()
    assert (project.dir / "ontology.nt").exists()
    assert (project.dir / "index.tsv").exists()
    assert (project.dir / "archive.tsv").exists()
    graph = project.ontology_graph()
    assert len(graph.concepts) > 0
    assert project.library_root.joinpath("dom").is_dir()


def test_rollback_semantics(store):
    project = store.create("dom", make_config())
    for stage in ("S1", "S2", "S3"):
        project.run_stage(stage)
    state = project.rollback("S3toS2", "bad rules")
    assert state.stages["S1"].status == "done"
    for name in ("S2", "S3", "S4", "S5"):
        assert state.stages[name].status == "needs_repeat"
        assert state.stages[name].stale
    # needs_repeat is runnable again
    project.run_stage("S2")
    assert project.state.stages["S2"].status == "done"


def test_rollback_invalid_edge(store):
    project = store.create("dom", make_config())
    project.run_stage("S1", runner=instant)
    with pytest.raises(InvalidEdge):
        project.rollback("S5toS1", "nope")


def test_rollback_requires_source_stage_state(store):
    project = store.create("dom", make_config())
    with pytest.raises(PrerequisiteNotMet):
        project.rollback("S2toS1", "nothing ran yet")


def test_term_decision_marks_downstream_stale(store):
    project = store.create("dom", make_config())
    for stage in STAGES:
        project.run_stage(stage)
    term = project.terms("accepted")[0]
    state = project.decide_term(term.term_id, "rejected")
    assert state.stages["S4"].status == "needs_repeat" and state.stages["S4"].stale
    assert state.stages["S5"].status == "needs_repeat"
    with pytest.raises(PrerequisiteNotMet):
        project.export_owl()  # stale S4 output excluded from export
    project.run_stage("S4")
    assert project.export_owl().startswith("# domain:")  # re-run clears the gate
    rejected = {r.term_id for r in project.terms("rejected")}
    assert term.term_id in rejected
    labels = {c.preferred_label for c in project.ontology_graph().concepts.values()}
    assert term.surface_form not in labels


def test_decide_unknown_term(store):
    project = store.create("dom", make_config())
    for stage in ("S1", "S2", "S3"):
        project.run_stage(stage)
    with pytest.raises(UnknownTerm):
        project.decide_term("t-missing", "accepted")


def test_stale_version_rejected(store):
    project = store.create("dom", make_config())
    with pytest.raises(StaleVersion):
        project.run_stage("S1", runner=instant, expected_version=99)
    project.run_stage("S1", runner=instant, expected_version=1)


def test_event_log_replay_reproduces_state(store):
    project = store.create("dom", make_config())
    project.run_stage("S1")
    project.run_stage("S2")
    project.rollback("S2toS1", "redo")
    project.run_stage("S1")
    events = project.read_events()
    assert replay(events) == project.state
    snapshot = json.loads(project.snapshot_path.read_text())
    assert state_from_dict(snapshot) == project.state
    assert state_to_dict(replay(events)) == snapshot


def test_reload_yields_last_persisted_state(store):
    project = store.create("dom", make_config())
    project.run_stage("S1", runner=instant)
    fresh = ProjectStore(store.root).get("dom")
    assert fresh.state == project.state


_CRASH_SCRIPT = """
import sys, time
from ikon.pipeline import ProjectStore

store = ProjectStore(sys.argv[1])
project = store.get(sys.argv[2])

def slow(project, stage):
    time.sleep(30)
    return {}

project.run_stage("S1", runner=slow)
"""


def test_kill_and_reload_resumes_from_persisted_transition(store, tmp_path):
    project = store.create("dom", make_config())
    proc = subprocess.Popen(
        [sys.executable, "-c", _CRASH_SCRIPT, str(store.root), "dom"],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    try:
        deadline = time.time() + 20
        while time.time() < deadline:
            snapshot = json.loads(project.snapshot_path.read_text())
            if snapshot["stages"]["S1"]["status"] == "running":
                break
            time.sleep(0.05)
        else:
            pytest.fail("stage never reached running state")
    finally:
        proc.send_signal(signal.SIGKILL)
        proc.wait()

    persisted = json.loads(project.snapshot_path.read_text())
    reloaded = ProjectStore(store.root).get("dom")
    assert state_to_dict(reloaded.state) == persisted  # exactly the last persisted transition
    assert reloaded.state.stages["S1"].status == "running"

    reloaded.run_stage("S1")  # records the interruption, then re-runs to done
    assert reloaded.state.stages["S1"].status == "done"
    events = [e["type"] for e in reloaded.read_events()]
    assert "stage_interrupted" in events


# -- model check over the pure transition core ---------------------------------

class CoreMachine:
    def __init__(self):
        event = {
            "seq": 1, "ts": "t", "type": "project_created",
            "project_id": "p", "domain_name": "d", "config": {},
        }
        self.events = [event]
        self.state = apply_event(None, event)

    def _emit(self, **payload):
        event = {"seq": self.state.version + 1, "ts": "t", **payload}
        self.events.append(event)
        self.state = apply_event(self.state, event)

    def run(self, stage, fail):
        check_run_allowed(self.state, stage)
        self._emit(type="stage_started", stage=stage)
        self._emit(type="stage_finished", stage=stage,
                   status="failed" if fail else "done", artifacts={}, diagnostic=None)

    def rollback(self, edge):
        check_rollback_allowed(self.state, edge)
        self._emit(type="rollback", edge=edge, reason="r")


def run_random_sequence(rng, commands=12):
    machine = CoreMachine()
    for _ in range(commands):
        before = machine.state
        kind = rng.random()
        try:
            if kind < 0.6:
                machine.run(rng.choice(STAGES), fail=rng.random() < 0.15)
            elif kind < 0.8:
                machine.rollback(rng.choice(["S2toS1", "S3toS2", "S5toS1", "bogus"]))
            elif kind < 0.9:
                machine._emit(type="term_decision", term_id="t", status="accepted")
            else:
                machine._emit(type="ontology_edited", action="edit")
        except (PrerequisiteNotMet, AlreadyDone, InvalidEdge):
            assert machine.state == before  # rejected commands change nothing
        assert_invariants(machine.state)
    assert replay(machine.events) == machine.state


def test_model_check_random_command_sequences():
    rng = random.Random(1234)
    for _ in range(500):
        run_random_sequence(rng)


def test_seed_ontology_drives_sense_assignments(store, tmp_path):
    from ikon.ontology import add_concept, add_relation, empty_graph, export_owl

    seed = empty_graph("seeddomain")
    seed = add_concept(seed, "system")
    seed = add_concept(seed, "information store")
    seed = add_relation(seed, "assoc", "c-system", "c-information%20store", "near")
    seed_path = tmp_path / "seed.nt"
    seed_path.write_text(export_owl(seed), encoding="utf-8")

    project = store.create("dom", make_config(seed_ontology=str(seed_path)))
    for stage in ("S1", "S2", "S3"):
        project.run_stage(stage)

    senses_path = project.dir / "senses.tsv"
    assert senses_path.exists()
    rows = [line.split("\t") for line in senses_path.read_text().splitlines()]
    # "system" occurs in sentences mentioning "information", a neighborhood word
    assert rows, "expected at least one sense assignment"
    assert all(row[5] == "c-system" and int(row[6]) >= 1 for row in rows)
    assert "senses.tsv" in project.state.stages["S3"].artifacts
