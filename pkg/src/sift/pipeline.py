"""The four-pipeline flow engine.

Each project walks an explicit state machine over the stage catalog in
``stages.py``.  ``advance`` executes exactly one stage: detection stages write
to the bias history, human stages open a gate and block, terminal decisions
write an "Exit SIFT" record and set the final status.  The Model-involved
standard flow runs as one composite step (split, detect, mitigate, train)
ending at its risk-assessment gate, so every ledger write is observable
between client-driven advances.

Decisions come back through ``resolve_and_apply``, which validates the gate,
applies the stage's effects, and repositions the state machine.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

import numpy as np
import pandas as pd

from .config import FlowConfig
from .core import (
    BiasHistoryRecord,
    FittedModelInfo,
    ModelHistoryRecord,
    ProjectStatus,
    SiftProject,
    add_bias_history_step,
    add_model_history_step,
)
from .errors import Gated, HandlerFailure, NotProceeding, SiftError, UnknownStrategy
from .metrics import (
    CHI_SQ_TEST,
    COVARIATE_SHIFT,
    DISP_IMPACT,
    SAMP_PROPORTION,
    compute_chi_sq_test,
    compute_disp_impact,
    compute_samp_proportion,
    detect_covariate_shift,
    detect_marginalized_groups,
)
from .mitigation import (
    FAIR_PENALTY_LOGREG,
    GROUP_THRESHOLDS,
    REWEIGHING,
    fair_penalty_train,
    lookup,
    post_process_thresholds,
    reweigh_preprocess,
    weighted_disp_impact,
)
from .model_lab import SplitSpec, accuracy, classify, predict, split_train_test, train_logreg
from .oversight import HumanDecision, PendingGate, open_gate, pending_gate, resolve_gate
from .stages import (
    EXIT_SIFT,
    INFORMATION_GATHERING,
    MODEL_INVOLVED,
    OUTCOME_INVOLVED,
    PRE_MODEL,
    PROCEED,
    RISK_ASSESSMENT,
    TERMINATE,
    STAGE_TABLE,
    stage_names,
    stage_spec,
)

from .stages import EXIT_AND_REVISE

PROCEED_DETAILS = "Risk assessment indicates project should proceed through SIFT."
TERMINATED_DETAILS = "Project terminated and added to project database."
REVISED_DETAILS = "Project exited for revision and added to project database."
DEPLOY_DETAILS = "Project scheduled for deployment and added to project database."
MORE_DATA_DETAILS = "Get additional data."
MORE_DATA_EXIT_PREFIX = "Team will collect additional data.  "


# ---------------------------------------------------------------------------
# outcomes


@dataclass
class Advanced:
    pipeline: str
    stage: str


@dataclass
class Blocked:
    gate: PendingGate


@dataclass
class Exited:
    status: ProjectStatus


# ---------------------------------------------------------------------------
# state helpers


def init_pipeline_state(project: SiftProject, model_seed: int = 0) -> None:
    project.pipeline_state.update(
        {
            "current_pipeline": INFORMATION_GATHERING,
            "stage_index": 0,
            "model_seed": model_seed,
            "pending_gate": None,
        }
    )


def current_stage(project: SiftProject):
    state = project.pipeline_state
    pipeline = state.get("current_pipeline")
    idx = state.get("stage_index", 0)
    names = stage_names(pipeline)
    if idx >= len(names):
        return pipeline, None
    return pipeline, names[idx]


def _sens_frame(project: SiftProject) -> pd.DataFrame:
    return project.data.raw_data[project.data.sens_features]


def _record(project: SiftProject, **fields) -> int:
    step, _ = add_bias_history_step(project, fields)
    return step


def _persist(project: SiftProject, db) -> None:
    if db is None:
        return
    try:
        db.get_project(project.project_id)
    except SiftError:
        db.add_project(project)
    else:
        db.update_project(project)


def _exit_project(project: SiftProject, db, config: FlowConfig, status: ProjectStatus,
                  details: str) -> Exited:
    _record(project, sift_pipeline=EXIT_SIFT, details=details)
    project.status = status
    if status is ProjectStatus.TERMINATED:
        project.timeout_days = config.timeout_days
        project.terminated_at = datetime.now(timezone.utc).isoformat()
    project.pipeline_state["current_pipeline"] = EXIT_SIFT
    _persist(project, db)
    return Exited(status)


def identify_next_pipeline(project: SiftProject) -> str:
    if project.status is not ProjectStatus.ACTIVE:
        raise NotProceeding(f"project {project.project_id!r} is {project.status.value}")
    if project.pipeline_state.get("p1_risk_decision") != PROCEED:
        raise NotProceeding("information gathering did not conclude with a proceed decision")
    history = project.model_history
    if history and history[0].is_deployed:
        return OUTCOME_INVOLVED
    return PRE_MODEL


# ---------------------------------------------------------------------------
# advance


def advance(project: SiftProject, db, config: FlowConfig):
    """Execute the next stage.  Returns Advanced, Blocked, or Exited."""
    if project.status is not ProjectStatus.ACTIVE:
        raise NotProceeding(f"project {project.project_id!r} is {project.status.value}")
    if pending_gate(project) is not None:
        raise Gated(f"project {project.project_id!r} has an open gate")
    pipeline, stage = current_stage(project)
    if stage is None:
        raise NotProceeding(f"pipeline {pipeline!r} already completed")
    handler = _HANDLERS[(pipeline, stage)]
    try:
        outcome = handler(project, db, config)
    except SiftError:
        raise
    except Exception as exc:  # handler bug or bad data: stay at the stage
        raise HandlerFailure(f"{pipeline} / {stage}: {exc}") from exc
    _persist(project, db)
    return outcome


def _advance_index(project: SiftProject, pipeline: str) -> None:
    state = project.pipeline_state
    state["stage_index"] += 1
    if state["stage_index"] >= len(stage_names(pipeline)):
        # only Information gathering falls through (via Identify next pipeline);
        # the other pipelines end at their risk gate.
        state["stage_index"] = len(stage_names(pipeline))


def _step_done(project: SiftProject, pipeline: str, stage: str) -> Advanced:
    _advance_index(project, pipeline)
    return Advanced(pipeline, stage)


def _open(project, pipeline, stage, prompt, options=None) -> Blocked:
    spec = stage_spec(pipeline, stage)
    gate = open_gate(project, pipeline, stage, prompt, options or list(spec.options))
    return Blocked(gate)


# ---------------------------------------------------------------------------
# Information gathering handlers


def _h_verify_similarity(project, db, config):
    hits = []
    if db is not None:
        hits = [
            h.to_dict()
            for h in db.search_similar(f"{project.name} {project.description}")
            if h.project_id != project.project_id
        ]
    project.pipeline_state["similar_hits"] = hits
    if not hits:
        return _step_done(project, INFORMATION_GATHERING, "Verify similarity")
    options = ["confirm"] + [f"reject:{h['project_id']}" for h in hits]
    return _open(project, INFORMATION_GATHERING, "Verify similarity",
                 "Verify that the retrieved projects are similar to this one.", options)


def _h_identify_sens(project, db, config):
    return _open(project, INFORMATION_GATHERING, "Identify sensitive categories",
                 "Confirm the sensitive feature list for this project.")


def _h_risk(pipeline):
    def handler(project, db, config):
        return _open(project, pipeline, RISK_ASSESSMENT,
                     "Assess the fairness risk of continuing this project.")

    return handler


def _h_identify_next(project, db, config):
    nxt = identify_next_pipeline(project)
    project.pipeline_state["current_pipeline"] = nxt
    project.pipeline_state["stage_index"] = 0
    return Advanced(INFORMATION_GATHERING, "Identify next pipeline")


# ---------------------------------------------------------------------------
# Pre-model handlers


def _h_prepare_data(project, db, config):
    return _open(project, PRE_MODEL, "Prepare data",
                 "Confirm the prepared dataset referenced by the data location.")


def _h_detect_sparse(project, db, config):
    report = compute_samp_proportion(
        project.data.raw_data, project.data.sens_features, min_prop=config.sparse_min_prop
    )
    flagged = report.flagged_features()
    if flagged:
        details = f"Sparse groups detected: {', '.join(flagged)}."
    else:
        details = "No sparse groups detected."
    step = _record(
        project,
        sift_pipeline=PRE_MODEL,
        bias_features=list(project.data.sens_features),
        bias_detection_function=SAMP_PROPORTION,
        details=details,
    )
    project.pipeline_state["sparse_flagged"] = flagged
    project.pipeline_state["sparse_record_step"] = step
    return _step_done(project, PRE_MODEL, "Detect sparse group")


def _h_more_data(project, db, config):
    if not project.pipeline_state.get("sparse_flagged"):
        return _step_done(project, PRE_MODEL, "Decide if more data is needed")
    return _open(project, PRE_MODEL, "Decide if more data is needed",
                 "Sparse groups were detected. Decide whether to collect more data.")


def _h_detect_proxy(project, db, config):
    data = project.data.raw_data
    non_sens = [c for c in project.data.X if c not in project.data.sens_features]
    report = compute_chi_sq_test(
        data,
        project.data.sens_features,
        non_sens,
        alpha=config.proxy_alpha,
        v_min=config.proxy_v_min,
        sift_data=project.data,
    )
    flagged = report.flagged_features()
    if flagged:
        details = f"Proxy features detected: {', '.join(flagged)}."
    else:
        details = "No proxy features detected."
    step = _record(
        project,
        sift_pipeline=PRE_MODEL,
        bias_features=list(project.data.sens_features),
        bias_detection_function=CHI_SQ_TEST,
        details=details,
    )
    project.pipeline_state["proxy_flagged"] = flagged
    project.pipeline_state["proxy_record_step"] = step
    return _step_done(project, PRE_MODEL, "Detect proxy features")


def _h_proxy_decision(project, db, config):
    if not project.pipeline_state.get("proxy_flagged"):
        return _step_done(project, PRE_MODEL, "Decide whether to drop proxy features")
    return _open(project, PRE_MODEL, "Decide whether to drop proxy features",
                 "Proxy features were detected. Decide whether to drop them.")


def _h_detect_marginalized(project, db, config):
    report = detect_marginalized_groups(project.data, config.fairness_range)
    flagged = report.flagged_features()
    if flagged:
        details = f"Marginalized groups detected: {', '.join(flagged)}."
    else:
        details = "No marginalized groups detected."
    _record(
        project,
        sift_pipeline=PRE_MODEL,
        bias_features=list(project.data.sens_features),
        bias_detection_function=DISP_IMPACT,
        details=details,
    )
    project.pipeline_state["marginalized_flagged"] = flagged
    return _step_done(project, PRE_MODEL, "Detect marginalized groups")


# ---------------------------------------------------------------------------
# Model-involved (standard flow as one composite step)


def _train_and_log(project, X_train, y_train, X_test, y_test, weights, seed, train_idx,
                   test_idx, deployed=False):
    info = train_logreg(X_train, y_train, weights=weights)
    scores = predict(info, X_test)
    acc = accuracy(classify(scores), y_test)
    add_model_history_step(
        project,
        {
            "seed": seed,
            "train_index": [int(i) for i in train_idx],
            "test_index": [int(i) for i in test_idx],
            "fitted_model": info,
            "perf_metric": {"name": "accuracy", "value": acc},
            "is_deployed": deployed,
        },
    )
    return info, scores, acc


def _di_by_feature(outcomes, sens_frame: pd.DataFrame, sens_features) -> dict:
    return {
        f: compute_disp_impact(outcomes, sens_frame[f].to_numpy()) for f in sens_features
    }


def _composite_weights(sens_frame: pd.DataFrame, flagged, y) -> np.ndarray:
    """Reweighing weights for the composite of the flagged sensitive features."""
    combo = sens_frame[flagged].astype(str).agg("|".join, axis=1)
    frame = pd.DataFrame({"s": combo.to_numpy(), "y": np.asarray(y)})
    return reweigh_preprocess(frame, "s", "y")


def run_standard_model_flow(project: SiftProject, config: FlowConfig) -> Blocked:
    data = project.data.raw_data
    feats = [c for c in project.data.X if c not in project.data.sens_features]
    X = data[feats].to_numpy(dtype=float)
    y = data[project.data.y].to_numpy(dtype=int)
    sens = _sens_frame(project).reset_index(drop=True)
    seed = int(project.pipeline_state.get("model_seed", 0))
    train_idx, test_idx = split_train_test(len(y), SplitSpec(seed=seed,
                                                             test_fraction=config.test_fraction))
    X_train, y_train = X[train_idx], y[train_idx]
    X_test, y_test = X[test_idx], y[test_idx]
    sens_train = sens.iloc[train_idx].reset_index(drop=True)
    sens_test = sens.iloc[test_idx].reset_index(drop=True)
    fr = config.fairness_range
    sens_features = list(project.data.sens_features)

    # pre-processing detection: training-label disparate impact.  A record is
    # written only when it flags, since a clean result duplicates the
    # Pre-model marginalized-groups check.
    weights = None
    train_di = _di_by_feature(y_train, sens_train, sens_features)
    pre_flagged = [f for f in sens_features if not fr.contains(train_di[f])]
    if pre_flagged:
        _record(
            project,
            sift_pipeline=MODEL_INVOLVED,
            bias_features=sens_features,
            bias_detection_function=DISP_IMPACT,
            details=f"Bias detected in training data: {', '.join(pre_flagged)}.",
        )
        weights = _composite_weights(sens_train, pre_flagged, y_train)
        rechecked = all(
            fr.contains(weighted_disp_impact(y_train, sens_train[f].to_numpy(), weights))
            for f in pre_flagged
        )
        _record(
            project,
            sift_pipeline=MODEL_INVOLVED,
            bias_features=sens_features,
            bias_detection_function=DISP_IMPACT,
            bias_mitigation_function=REWEIGHING,
            mitigation_success_status=rechecked,
            details="Bias detected in training data. Pre-processing strategy implemented.",
        )

    # train model
    info, scores, acc = _train_and_log(
        project, X_train, y_train, X_test, y_test, weights, seed, train_idx, test_idx
    )
    outcomes = classify(scores)
    project.pipeline_state["baseline_accuracy"] = acc

    # post-training outcome detection
    di = _di_by_feature(outcomes, sens_test, sens_features)
    project.pipeline_state["model_di"] = di
    biased = [f for f in sens_features if not fr.contains(di[f])]
    if not biased:
        _record(
            project,
            sift_pipeline=MODEL_INVOLVED,
            bias_features=sens_features,
            bias_detection_function=DISP_IMPACT,
            details="No bias detected in model outcome.",
        )
    else:
        # in-processing mitigation, merged into the detection record
        debias_info, result = fair_penalty_train(
            X_train, y_train, sens_train, X_test, sens_test, fr, weights=weights
        )
        scores2 = predict(debias_info, X_test)
        outcomes2 = classify(scores2)
        acc2 = accuracy(outcomes2, y_test)
        add_model_history_step(
            project,
            {
                "seed": seed,
                "train_index": [int(i) for i in train_idx],
                "test_index": [int(i) for i in test_idx],
                "fitted_model": debias_info,
                "perf_metric": {"name": "accuracy", "value": acc2},
                "is_deployed": False,
            },
        )
        project.pipeline_state["debiased_accuracy"] = acc2
        project.pipeline_state["debias_di"] = _di_by_feature(outcomes2, sens_test, sens_features)
        _record(
            project,
            sift_pipeline=MODEL_INVOLVED,
            bias_features=sens_features,
            bias_detection_function=DISP_IMPACT,
            bias_mitigation_function=FAIR_PENALTY_LOGREG,
            mitigation_success_status=result.success,
            details="Bias detected in model outcome. In-processing strategy implemented.",
        )
        if not result.success:
            # post-processing fallback on the debiased model's scores
            worst = min(
                project.pipeline_state["debias_di"],
                key=lambda f: project.pipeline_state["debias_di"][f],
            )
            outcomes3, thresholds, post_result = post_process_thresholds(
                scores2, sens_test[worst].to_numpy(), fr, y_true=y_test
            )
            post_di = _di_by_feature(outcomes3, sens_test, sens_features)
            success = post_result.success and all(fr.contains(v) for v in post_di.values())
            project.pipeline_state["post_di"] = post_di
            project.pipeline_state["post_thresholds"] = {
                str(k): float(v) for k, v in thresholds.items()
            }
            project.pipeline_state["post_accuracy"] = accuracy(outcomes3, y_test)
            _record(
                project,
                sift_pipeline=MODEL_INVOLVED,
                bias_features=sens_features,
                bias_detection_function=DISP_IMPACT,
                bias_mitigation_function=GROUP_THRESHOLDS,
                mitigation_success_status=success,
                details="Bias detected in model outcome. Post-processing strategy implemented.",
            )

    # block at the closing risk gate
    project.pipeline_state["stage_index"] = stage_names(MODEL_INVOLVED).index(RISK_ASSESSMENT)
    return _open(project, MODEL_INVOLVED, RISK_ASSESSMENT,
                 "Review the model and mitigation results before deployment.")


def plan_from_history(records) -> list:
    """Recover a custom-flow plan (strategy name sequence) from a ledger."""
    return [r.bias_mitigation_function for r in records if r.bias_mitigation_function]


def run_custom_model_flow(project: SiftProject, plan: list, config: FlowConfig) -> Blocked:
    """Run a caller-supplied mitigation plan (validated before any writes)."""
    strategies = [lookup(name) for name in plan]  # raises UnknownStrategy atomically
    data = project.data.raw_data
    feats = [c for c in project.data.X if c not in project.data.sens_features]
    X = data[feats].to_numpy(dtype=float)
    y = data[project.data.y].to_numpy(dtype=int)
    sens = _sens_frame(project).reset_index(drop=True)
    seed = int(project.pipeline_state.get("model_seed", 0))
    train_idx, test_idx = split_train_test(len(y), SplitSpec(seed=seed,
                                                             test_fraction=config.test_fraction))
    X_train, y_train = X[train_idx], y[train_idx]
    X_test, y_test = X[test_idx], y[test_idx]
    sens_train = sens.iloc[train_idx].reset_index(drop=True)
    sens_test = sens.iloc[test_idx].reset_index(drop=True)
    fr = config.fairness_range
    sens_features = list(project.data.sens_features)

    weights = None
    info, scores, acc = _train_and_log(
        project, X_train, y_train, X_test, y_test, weights, seed, train_idx, test_idx
    )
    outcomes = classify(scores)
    project.pipeline_state["baseline_accuracy"] = acc

    for strategy in strategies:
        di = _di_by_feature(outcomes, sens_test, sens_features)
        biased = [f for f in sens_features if not fr.contains(di[f])]
        if not biased:
            _record(
                project,
                sift_pipeline=MODEL_INVOLVED,
                bias_features=sens_features,
                bias_detection_function=DISP_IMPACT,
                details="No bias detected in model outcome.",
            )
            break
        if strategy.name == REWEIGHING:
            weights = _composite_weights(sens_train, biased, y_train)
            info, scores, acc = _train_and_log(
                project, X_train, y_train, X_test, y_test, weights, seed, train_idx, test_idx
            )
            outcomes = classify(scores)
            new_di = _di_by_feature(outcomes, sens_test, sens_features)
            success = all(fr.contains(v) for v in new_di.values())
            details = "Bias detected in model outcome. Pre-processing strategy implemented."
        elif strategy.name == FAIR_PENALTY_LOGREG:
            debias_info, result = fair_penalty_train(
                X_train, y_train, sens_train, X_test, sens_test, fr, weights=weights
            )
            scores = predict(debias_info, X_test)
            outcomes = classify(scores)
            success = result.success
            details = "Bias detected in model outcome. In-processing strategy implemented."
        else:  # group thresholds
            worst = min(di, key=lambda f: di[f])
            outcomes, thresholds, result = post_process_thresholds(
                scores, sens_test[worst].to_numpy(), fr, y_true=y_test
            )
            success = result.success
            details = "Bias detected in model outcome. Post-processing strategy implemented."
        _record(
            project,
            sift_pipeline=MODEL_INVOLVED,
            bias_features=sens_features,
            bias_detection_function=DISP_IMPACT,
            bias_mitigation_function=strategy.name,
            mitigation_success_status=success,
            details=details,
        )
    project.pipeline_state["stage_index"] = stage_names(MODEL_INVOLVED).index(RISK_ASSESSMENT)
    return _open(project, MODEL_INVOLVED, RISK_ASSESSMENT,
                 "Review the model and mitigation results before deployment.")


def _h_model_involved_entry(project, db, config):
    from .core import ModelFlow

    if project.model_flow is ModelFlow.CUSTOM:
        plan = project.pipeline_state.get("custom_plan") or []
        return run_custom_model_flow(project, plan, config)
    return run_standard_model_flow(project, config)


# ---------------------------------------------------------------------------
# Outcome-involved handlers


def _h_detect_shift(project, db, config):
    data = project.data.raw_data
    feats = list(project.data.X)
    prior = project.data.prior_data
    if prior is None:
        prior = project.data.prior_summary
    if prior is None:
        _record(
            project,
            sift_pipeline=OUTCOME_INVOLVED,
            bias_features=list(project.data.sens_features),
            bias_detection_function=COVARIATE_SHIFT,
            details="Covariate shift check skipped: no prior data or summaries available.",
        )
        project.pipeline_state["shift_flagged"] = []
        return _step_done(project, OUTCOME_INVOLVED, "Detect covariate shift")
    report = detect_covariate_shift(prior, data[feats], alpha=config.shift_alpha)
    flagged = report.flagged_features()
    if flagged:
        details = f"Covariate shift detected: {', '.join(flagged)}."
    else:
        details = "No covariate shift detected."
    _record(
        project,
        sift_pipeline=OUTCOME_INVOLVED,
        bias_features=list(project.data.sens_features),
        bias_detection_function=COVARIATE_SHIFT,
        details=details,
    )
    project.pipeline_state["shift_flagged"] = flagged
    return _step_done(project, OUTCOME_INVOLVED, "Detect covariate shift")


def _h_retrain_decision(project, db, config):
    if not project.pipeline_state.get("shift_flagged"):
        return _step_done(project, OUTCOME_INVOLVED, "Decide if retraining needed")
    return _open(project, OUTCOME_INVOLVED, "Decide if retraining needed",
                 "Covariate shift was detected. Decide whether to retrain the model.")


def _h_outcome_detection(project, db, config):
    outcome = np.asarray(project.data.outcome)
    sens = _sens_frame(project)
    fr = config.fairness_range
    binary = classify(outcome) if outcome.dtype.kind == "f" else outcome
    di = _di_by_feature(binary, sens, project.data.sens_features)
    project.pipeline_state["outcome_di"] = di
    biased = [f for f in project.data.sens_features if not fr.contains(di[f])]
    details = ("No bias detected in model outcome." if not biased
               else f"Bias detected in model outcome: {', '.join(biased)}.")
    _record(
        project,
        sift_pipeline=OUTCOME_INVOLVED,
        bias_features=list(project.data.sens_features),
        bias_detection_function=DISP_IMPACT,
        details=details,
    )
    project.pipeline_state["outcome_biased"] = biased
    return _step_done(project, OUTCOME_INVOLVED, "Post-processing detection")


def _h_outcome_mitigation(project, db, config):
    biased = project.pipeline_state.get("outcome_biased") or []
    if not biased:
        return _step_done(project, OUTCOME_INVOLVED, "Post-processing mitigation")
    scores = np.asarray(project.data.outcome, dtype=float)
    sens = _sens_frame(project)
    fr = config.fairness_range
    worst = biased[0]
    outcomes, thresholds, result = post_process_thresholds(
        scores, sens[worst].to_numpy(), fr
    )
    _record(
        project,
        sift_pipeline=OUTCOME_INVOLVED,
        bias_features=list(project.data.sens_features),
        bias_detection_function=DISP_IMPACT,
        bias_mitigation_function=GROUP_THRESHOLDS,
        mitigation_success_status=result.success,
        details="Bias detected in model outcome. Post-processing strategy implemented.",
    )
    return _step_done(project, OUTCOME_INVOLVED, "Post-processing mitigation")


_HANDLERS = {
    (INFORMATION_GATHERING, "Verify similarity"): _h_verify_similarity,
    (INFORMATION_GATHERING, "Identify sensitive categories"): _h_identify_sens,
    (INFORMATION_GATHERING, RISK_ASSESSMENT): _h_risk(INFORMATION_GATHERING),
    (INFORMATION_GATHERING, "Identify next pipeline"): _h_identify_next,
    (PRE_MODEL, "Prepare data"): _h_prepare_data,
    (PRE_MODEL, "Detect sparse group"): _h_detect_sparse,
    (PRE_MODEL, "Decide if more data is needed"): _h_more_data,
    (PRE_MODEL, "Detect proxy features"): _h_detect_proxy,
    (PRE_MODEL, "Decide whether to drop proxy features"): _h_proxy_decision,
    (PRE_MODEL, "Detect marginalized groups"): _h_detect_marginalized,
    (PRE_MODEL, RISK_ASSESSMENT): _h_risk(PRE_MODEL),
    (MODEL_INVOLVED, "Pre-processing detection"): _h_model_involved_entry,
    (MODEL_INVOLVED, RISK_ASSESSMENT): _h_risk(MODEL_INVOLVED),
    (OUTCOME_INVOLVED, "Detect covariate shift"): _h_detect_shift,
    (OUTCOME_INVOLVED, "Decide if retraining needed"): _h_retrain_decision,
    (OUTCOME_INVOLVED, "Post-processing detection"): _h_outcome_detection,
    (OUTCOME_INVOLVED, "Post-processing mitigation"): _h_outcome_mitigation,
    (OUTCOME_INVOLVED, RISK_ASSESSMENT): _h_risk(OUTCOME_INVOLVED),
}


# ---------------------------------------------------------------------------
# gate resolution effects


def resolve_and_apply(project: SiftProject, decision: HumanDecision, db,
                      config: FlowConfig):
    """Resolve the open gate and apply its stage effects.

    Returns Advanced, Blocked (never directly), or Exited.
    """
    gate = resolve_gate(project, decision)
    outcome = _apply_effects(project, gate, decision, db, config)
    _persist(project, db)
    return outcome


def _apply_effects(project, gate, decision, db, config):
    pipeline, stage, label = gate.pipeline, gate.stage, decision.decision

    if stage == "Verify similarity":
        if label.startswith("reject:"):
            rejected = label.split(":", 1)[1]
            project.similar_projects = [
                p for p in project.similar_projects if p != rejected
            ]
            project.pipeline_state["similar_hits"] = [
                h for h in project.pipeline_state.get("similar_hits", [])
                if h["project_id"] != rejected
            ]
        else:
            hits = project.pipeline_state.get("similar_hits", [])
            for h in hits:
                if h["project_id"] not in project.similar_projects:
                    project.similar_projects.append(h["project_id"])
        return _step_done(project, pipeline, stage)

    if stage == "Identify sensitive categories":
        feats = decision.payload.get("sens_features")
        if feats:
            project.data.sens_features = list(feats)
        return _step_done(project, pipeline, stage)

    if stage == RISK_ASSESSMENT:
        detail_suffix = f" Decision: {label} ({decision.decider}). {decision.rationale}"
        if label == TERMINATE:
            prefix = project.pipeline_state.get("exit_prefix", "")
            return _exit_project(project, db, config, ProjectStatus.TERMINATED,
                                 prefix + TERMINATED_DETAILS)
        if label == EXIT_AND_REVISE:
            return _exit_project(project, db, config, ProjectStatus.TERMINATED,
                                 REVISED_DETAILS)
        # proceed
        if pipeline == INFORMATION_GATHERING:
            project.pipeline_state["p1_risk_decision"] = PROCEED
            _record(project, sift_pipeline=INFORMATION_GATHERING, details=PROCEED_DETAILS)
            return _step_done(project, pipeline, stage)
        if pipeline in (MODEL_INVOLVED, OUTCOME_INVOLVED):
            return _exit_project(
                project, db, config, ProjectStatus.SCHEDULED_FOR_DEPLOYMENT, DEPLOY_DETAILS
            )
        # Pre-model risk gate: proceed to Model-involved
        project.pipeline_state["current_pipeline"] = MODEL_INVOLVED
        project.pipeline_state["stage_index"] = 0
        return Advanced(pipeline, stage)

    if stage == "Decide if more data is needed":
        if label == "collect more data":
            from .core import insert_bias_history_at

            step = project.pipeline_state.get("sparse_record_step")
            record = project.bias_history[step]
            insert_bias_history_at(
                project,
                step,
                {
                    "sift_pipeline": record.sift_pipeline,
                    "bias_features": list(record.bias_features),
                    "bias_detection_function": record.bias_detection_function,
                    "details": MORE_DATA_DETAILS,
                },
            )
            project.pipeline_state["exit_prefix"] = MORE_DATA_EXIT_PREFIX
            return _exit_project(
                project, db, config, ProjectStatus.TERMINATED,
                MORE_DATA_EXIT_PREFIX + TERMINATED_DETAILS,
            )
        return _step_done(project, pipeline, stage)

    if stage == "Decide whether to drop proxy features":
        from .core import insert_bias_history_at

        flagged = project.pipeline_state.get("proxy_flagged") or []
        step = project.pipeline_state.get("proxy_record_step")
        record = project.bias_history[step]
        if label == "drop":
            project.data.X = [c for c in project.data.X if c not in flagged]
            details = f"Proxy features detected and dropped: {', '.join(flagged)}."
        else:
            details = f"Proxy features detected and kept: {', '.join(flagged)}."
        insert_bias_history_at(
            project,
            step,
            {
                "sift_pipeline": record.sift_pipeline,
                "bias_features": list(record.bias_features),
                "bias_detection_function": record.bias_detection_function,
                "details": details,
            },
        )
        return _step_done(project, pipeline, stage)

    if stage == "Decide if retraining needed":
        if label == "retrain":
            project.older_versions.append(f"{project.project_id}#r{project.revision}")
            project.pipeline_state["current_pipeline"] = PRE_MODEL
            project.pipeline_state["stage_index"] = 0
            return Advanced(pipeline, stage)
        return _step_done(project, pipeline, stage)

    # Prepare data and other simple confirmations
    return _step_done(project, pipeline, stage)
