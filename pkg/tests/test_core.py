import json

import pytest
from hypothesis import given, strategies as st

from sift import core
from sift.errors import (
    EmptyHistory,
    InvalidLocator,
    InvalidName,
    NegativeIndex,
    OutOfRange,
    UnknownSensitiveFeature,
)


def make_project():
    return core.init_project("Svc2020", "early adopter model for new service", "/tmp/svc.csv")


class TestInitProject:
    def test_fresh_project(self):
        p = make_project()
        assert p.project_id.startswith("Svc2020-")
        assert p.bias_history == []
        assert p.model_history == []
        assert p.status is core.ProjectStatus.ACTIVE
        assert p.model_flow is core.ModelFlow.STANDARD
        assert p.timeout_days is None

    def test_empty_name_rejected(self):
        with pytest.raises(InvalidName):
            core.init_project("", "x", "/tmp/x.csv")

    def test_bad_locator_rejected(self):
        with pytest.raises(InvalidLocator):
            core.init_project("a", "b", "")

    def test_ids_unique(self):
        a = make_project()
        b = make_project()
        assert a.project_id != b.project_id


class TestLatestStep:
    def test_zero_based(self):
        p = make_project()
        for _ in range(3):
            core.add_bias_history_step(p)
        assert core.get_latest_step(p) == 2

    def test_empty_history_errors(self):
        with pytest.raises(EmptyHistory):
            core.get_latest_step(make_project())


class TestAddStep:
    def test_first_step_matches_opening_record(self):
        p = make_project()
        step, warnings = core.add_bias_history_step(
            p,
            {
                "sift_pipeline": "Information gathering",
                "details": "Risk assessment indicates project should proceed through SIFT.",
            },
        )
        assert step == 0 and warnings == []
        rec = p.bias_history[0]
        assert rec.step == 0
        assert rec.sift_pipeline == "Information gathering"
        assert rec.bias_features == []
        assert rec.bias_detection_function == ""
        assert rec.bias_mitigation_function == ""
        assert rec.mitigation_success_status == ""
        assert rec.details == "Risk assessment indicates project should proceed through SIFT."

    def test_step_key_ignored(self):
        p = make_project()
        core.add_bias_history_step(p)
        step, warnings = core.add_bias_history_step(p, {"step": 99, "details": "x"})
        assert step == 1
        assert p.bias_history[1].step == 1
        assert [w.code for w in warnings] == ["step_ignored"]

    def test_monotone_counter(self):
        p = make_project()
        steps = [core.add_bias_history_step(p)[0] for _ in range(5)]
        assert steps == [0, 1, 2, 3, 4]

    def test_earlier_records_untouched(self):
        p = make_project()
        core.add_bias_history_step(p, {"details": "first"})
        before = core.export_bias_history(p)
        core.add_bias_history_step(p, {"details": "second"})
        assert json.loads(before)["bias_history"][0] == p.bias_history[0].to_dict()


class TestInsertAt:
    def test_updates_named_record(self):
        p = make_project()
        core.add_bias_history_step(p)
        core.add_bias_history_step(p)
        warnings = core.insert_bias_history_at(p, 1, {"details": "updated"})
        assert warnings == []
        assert p.bias_history[1].details == "updated"
        assert [r.step for r in p.bias_history] == [0, 1]

    def test_out_of_range_rejected(self):
        p = make_project()
        core.add_bias_history_step(p)
        before = core.export_bias_history(p)
        with pytest.raises(OutOfRange):
            core.insert_bias_history_at(p, core.get_latest_step(p) + 1, {"details": "x"})
        assert core.export_bias_history(p) == before

    def test_negative_index_rejected(self):
        p = make_project()
        core.add_bias_history_step(p)
        with pytest.raises(NegativeIndex):
            core.insert_bias_history_at(p, -1, {"details": "x"})

    def test_unknown_key_is_noop_with_warning(self):
        p = make_project()
        core.add_bias_history_step(p, {"details": "keep"})
        before = core.export_bias_history(p)
        warnings = core.insert_bias_history_at(p, 0, {"bogus_key": "x"})
        assert core.export_bias_history(p) == before
        assert len(warnings) == 1
        assert warnings[0].code == "unknown_key"
        assert warnings[0].message == "bogus_key is not an attribute of bias history"

    def test_empty_history_errors(self):
        with pytest.raises(EmptyHistory):
            core.insert_bias_history_at(make_project(), 0, {"details": "x"})


class TestModelHistory:
    def test_first_record(self):
        p = make_project()
        step, _ = core.add_model_history_step(p, {"seed": 42, "is_deployed": False})
        assert step == 0
        assert p.model_history[0].seed == 42
        assert p.model_history[0].is_deployed is False

    def test_unknown_key_warned(self):
        p = make_project()
        _, warnings = core.add_model_history_step(p, {"nope": 1})
        assert [w.code for w in warnings] == ["unknown_key"]

    def test_steps_increment(self):
        p = make_project()
        assert core.add_model_history_step(p)[0] == 0
        assert core.add_model_history_step(p)[0] == 1


class TestSensSummary:
    def test_literal_example(self):
        data = core.SiftData(sens_features=["income"])
        core.set_sens_features_summary(data, "proxy_features", "income", ["education", "race"])
        assert data.sens_features_summary == {"proxy_features": {"income": ["education", "race"]}}

    def test_creates_category(self):
        data = core.SiftData(sens_features=["race"])
        core.set_sens_features_summary(data, "sparse_groups", "race", ["non-white"])
        assert data.sens_features_summary["sparse_groups"]["race"] == ["non-white"]

    def test_unknown_feature(self):
        data = core.SiftData(sens_features=["race"])
        with pytest.raises(UnknownSensitiveFeature):
            core.set_sens_features_summary(data, "proxy_features", "notasensfeature", [])


class TestExport:
    def test_empty_history(self):
        assert json.loads(core.export_bias_history(make_project())) == {"bias_history": []}

    def test_all_seven_keys_present(self):
        p = make_project()
        core.add_bias_history_step(p, {"sift_pipeline": "Pre-model"})
        (rec,) = json.loads(core.export_bias_history(p))["bias_history"]
        assert tuple(rec.keys()) == core.BIAS_HISTORY_FIELDS

    def test_round_trip(self):
        p = make_project()
        core.add_bias_history_step(
            p,
            {
                "sift_pipeline": "Pre-model",
                "bias_features": ["sex", "race"],
                "bias_detection_function": "computeSampProportion",
                "mitigation_success_status": "TRUE",
                "details": "d",
            },
        )
        parsed = core.parse_bias_history(core.export_bias_history(p))
        assert parsed == p.bias_history


ledger_fields = st.fixed_dictionaries(
    {},
    optional={
        "sift_pipeline": st.sampled_from(core.PIPELINE_NAMES),
        "bias_features": st.lists(st.sampled_from(["sex", "race", "marital_status"]), max_size=3),
        "bias_detection_function": st.sampled_from(["", "computeSampProportion", "computeDispImpact"]),
        "bias_mitigation_function": st.sampled_from(["", "reweighing", "fairPenaltyLogReg"]),
        "mitigation_success_status": st.sampled_from(["", "TRUE", "FALSE"]),
        "details": st.text(max_size=40),
    },
)


@given(st.lists(ledger_fields, max_size=8))
def test_export_parse_identity_on_random_ledgers(steps):
    p = make_project()
    for fields in steps:
        core.add_bias_history_step(p, fields)
    assert core.parse_bias_history(core.export_bias_history(p)) == p.bias_history
    assert [r.step for r in p.bias_history] == list(range(len(steps)))


@given(st.lists(st.integers(min_value=0, max_value=7), min_size=1, max_size=20))
def test_steps_stay_contiguous_under_mixed_mutation(ops):
    p = make_project()
    core.add_bias_history_step(p)
    for op in ops:
        if op % 2:
            core.add_bias_history_step(p, {"details": "a"})
        else:
            core.insert_bias_history_at(p, min(op, core.get_latest_step(p)), {"details": "b"})
    assert [r.step for r in p.bias_history] == list(range(len(p.bias_history)))
