import pytest

from sift.core import init_project
from sift.errors import (
    AlreadyGated,
    InvalidOption,
    MalformedHog,
    MissingRationale,
    NoOpenGate,
    UnknownStage,
)
from sift.oversight import (
    HogDocument,
    HogEntry,
    HumanDecision,
    load_hog_seed,
    open_gate,
    parse_hog,
    pending_gate,
    relevant_hog_entries,
    resolve_gate,
    serialize_hog,
)
from sift.stages import stage_key


@pytest.fixture(scope="module")
def seed_docs():
    return load_hog_seed()


class TestHogSeed:
    def test_five_documents(self, seed_docs):
        assert [d.sme_field for d in seed_docs] == ["HR", "PR", "Legal", "Privacy", "Compliance"]

    def test_hr_has_at_least_fourteen_entries(self, seed_docs):
        hr = next(d for d in seed_docs if d.sme_field == "HR")
        assert len(hr.entries) >= 14
        assert hr.entries[0].question.startswith("What types of data fall under the purview")

    def test_worked_answers_present(self, seed_docs):
        hr = next(d for d in seed_docs if d.sme_field == "HR")
        pr = next(d for d in seed_docs if d.sme_field == "PR")
        assert "people data" in hr.entries[0].answer
        assert "external examples" in pr.entries[2].question
        assert "Media often identifies" in pr.entries[2].answer

    def test_all_stage_keys_canonical(self, seed_docs):
        from sift.stages import STAGE_TABLE

        valid = {
            stage_key(p, s.name) for p, specs in STAGE_TABLE.items() for s in specs
        }
        for doc in seed_docs:
            for entry in doc.entries:
                assert set(entry.stages) <= valid

    def test_round_trip_identity(self, seed_docs):
        for doc in seed_docs:
            again = parse_hog(serialize_hog(doc))
            assert again.to_dict() == doc.to_dict()


class TestHogParsing:
    def test_empty_file_is_malformed(self):
        with pytest.raises(MalformedHog):
            parse_hog("")

    def test_missing_sme_field_is_malformed(self):
        with pytest.raises(MalformedHog):
            parse_hog("revision: 1\n\n[entry]\nquestion: q\n")

    def test_entry_without_question_is_malformed(self):
        with pytest.raises(MalformedHog):
            parse_hog("sme_field: HR\n\n[entry]\nanswer: a\n")

    def test_no_entries_is_malformed(self):
        with pytest.raises(MalformedHog):
            parse_hog("sme_field: HR\nrevision: 1\n")

    def test_bad_revision_is_malformed(self):
        with pytest.raises(MalformedHog):
            parse_hog("sme_field: HR\nrevision: two\n\n[entry]\nquestion: q\n")

    def test_continuation_lines_join(self):
        doc = parse_hog("sme_field: HR\n\n[entry]\nquestion: first part\n  second part\n")
        assert doc.entries[0].question == "first part second part"


class TestRelevantEntries:
    def test_p1_risk_assessment_includes_questions_two_to_five_and_seven(self, seed_docs):
        hits = relevant_hog_entries(seed_docs, "Information gathering", "Risk assessment")
        hr_questions = [e.question for f, e in hits if f == "HR"]
        for fragment in [
            "What laws/regulations are there for this data",
            "external examples related to ML bias",
            "low/medium/high risk? Are there ways to mitigate",
            "not allowed to look at",
            "vetting is done for 3rd party data",
        ]:
            assert any(fragment in q for q in hr_questions), fragment

    def test_proxy_decision_includes_question_ten(self, seed_docs):
        hits = relevant_hog_entries(seed_docs, "Pre-model", "Decide whether to drop proxy features")
        assert any("proxy features a concern" in e.question for _, e in hits)

    def test_more_data_decision_includes_question_nine(self, seed_docs):
        hits = relevant_hog_entries(seed_docs, "Pre-model", "Decide if more data is needed")
        assert any("necessary approval steps" in e.question for _, e in hits)

    def test_p4_risk_includes_question_thirteen(self, seed_docs):
        hits = relevant_hog_entries(seed_docs, "Outcome-involved", "Risk assessment")
        assert any("outcomes that always carry risk" in e.question for _, e in hits)

    def test_ordered_by_sme_field_then_entry_order(self, seed_docs):
        hits = relevant_hog_entries(seed_docs, "Information gathering", "Risk assessment")
        fields = [f for f, _ in hits]
        assert fields == sorted(fields)

    def test_unknown_stage_raises(self, seed_docs):
        with pytest.raises(UnknownStage):
            relevant_hog_entries(seed_docs, "Information gathering", "Detect sparse group")
        with pytest.raises(UnknownStage):
            relevant_hog_entries(seed_docs, "Nope", "Risk assessment")


def make_project():
    return init_project("Gated", "a project with gates", "s3://x")


class TestGates:
    def test_open_then_resolve(self):
        project = make_project()
        gate = open_gate(
            project,
            "Information gathering",
            "Risk assessment",
            "Assess project risk",
            ["proceed", "terminate"],
        )
        assert pending_gate(project).gate_id == gate.gate_id
        closed = resolve_gate(
            project,
            HumanDecision(gate.gate_id, "proceed", rationale="low risk", decider="pm"),
        )
        assert closed.gate_id == gate.gate_id
        assert pending_gate(project) is None
        assert project.pipeline_state["last_decision"]["decision"] == "proceed"

    def test_open_twice_raises(self):
        project = make_project()
        open_gate(project, "Pre-model", "Prepare data", "prep", ["done"])
        with pytest.raises(AlreadyGated):
            open_gate(project, "Pre-model", "Prepare data", "prep", ["done"])

    def test_open_unknown_stage_raises(self):
        with pytest.raises(UnknownStage):
            open_gate(make_project(), "Pre-model", "Nonsense", "x", ["y"])

    def test_invalid_option_keeps_gate(self):
        project = make_project()
        gate = open_gate(project, "Pre-model", "Decide if more data is needed", "more data?",
                         ["collect more data", "proceed with available data"])
        with pytest.raises(InvalidOption):
            resolve_gate(project, HumanDecision(gate.gate_id, "shrug"))
        assert pending_gate(project) is not None

    def test_risk_gate_requires_rationale(self):
        project = make_project()
        gate = open_gate(project, "Pre-model", "Risk assessment", "risk?", ["proceed", "terminate"])
        with pytest.raises(MissingRationale):
            resolve_gate(project, HumanDecision(gate.gate_id, "proceed", rationale="  "))
        assert pending_gate(project) is not None

    def test_non_risk_gate_allows_empty_rationale(self):
        project = make_project()
        gate = open_gate(project, "Pre-model", "Prepare data", "prep", ["done"])
        resolve_gate(project, HumanDecision(gate.gate_id, "done"))
        assert pending_gate(project) is None

    def test_replay_after_resolution_raises_without_state_change(self):
        project = make_project()
        gate = open_gate(project, "Information gathering", "Verify similarity", "similar?",
                         ["confirm"])
        decision = HumanDecision(gate.gate_id, "confirm")
        resolve_gate(project, decision)
        state_before = dict(project.pipeline_state)
        with pytest.raises(NoOpenGate):
            resolve_gate(project, decision)
        assert project.pipeline_state == state_before

    def test_wrong_gate_id_raises(self):
        project = make_project()
        open_gate(project, "Information gathering", "Verify similarity", "similar?", ["confirm"])
        with pytest.raises(NoOpenGate):
            resolve_gate(project, HumanDecision("bogus", "confirm"))

    def test_gate_survives_project_serialization(self):
        from sift.core import SiftProject

        project = make_project()
        gate = open_gate(project, "Outcome-involved", "Decide if retraining needed", "retrain?",
                         ["retrain", "no retraining"], hog_refs=[("Compliance", 12)])
        revived = SiftProject.from_dict(project.to_dict())
        assert pending_gate(revived).to_dict() == gate.to_dict()

    def test_hog_refs_resolvable(self):
        docs = load_hog_seed()
        project = make_project()
        refs = [("HR", 3)]
        gate = open_gate(project, "Information gathering", "Risk assessment", "risk?",
                         ["proceed", "terminate"], hog_refs=refs)
        for sme_field, idx in gate.hog_refs:
            doc = next(d for d in docs if d.sme_field == sme_field)
            assert 0 <= idx < len(doc.entries)
