"""Scripted marketing scenarios: the discount-targeting projects.

Two replayable walks through the flow engine over synthetic data:

* ``run_project1`` — a 2,000-row subsample with only 5% non-white customers.
  Sparse-group detection fires, the team opts to collect more data, and the
  project terminates with a one-year timeout.  Ledger: three records.
* ``run_project2`` — the full 45,222-row dataset.  No pre-model findings, the
  trained model shows outcome bias on at least one sensitive feature, the
  in-processing penalty fixes it, and the project exits scheduled for
  deployment.  Ledger: six records.

With ``interactive=True`` the risk-assessment and more-data gates are left
open for a human instead of being auto-resolved, while setup confirmations
(similarity, sensitive categories, data preparation) still resolve
automatically.
"""

from __future__ import annotations

import pandas as pd

from .config import FlowConfig
from .core import ModelFlow, SiftProject, init_project
from .oversight import HumanDecision, pending_gate
from .pipeline import Advanced, Blocked, Exited, advance, init_pipeline_state, resolve_and_apply
from .simulate import (
    SENS_FEATURES,
    SimulationConfig,
    build_dataset,
    make_project1_subsample,
    synth_demographics,
)

PROJECT1_SEED = 7
PROJECT2_SEED = 6  # frozen by a seed scan; the replay contract is pinned in tests
FULL_N = 45222

_AUTO_STAGES = {"Verify similarity", "Identify sensitive categories", "Prepare data"}


def _make_project(project_id: str, name: str, description: str, ds, model_seed: int) -> SiftProject:
    project = init_project(name=name, description=description,
                           data_location=f"generated://marketing/{project_id}")
    project.project_id = project_id
    raw = pd.concat(
        [ds.X, ds.sens.reset_index(drop=True), pd.Series(ds.y, name="y")], axis=1
    )
    project.data.raw_data = raw
    project.data.y = "y"
    project.data.X = list(ds.X.columns)
    project.model_flow = ModelFlow.STANDARD
    init_pipeline_state(project, model_seed=model_seed)
    return project


def _scripted_decision(gate, script: dict, interactive: bool):
    """Decision for a gate, or None to leave it open for a human."""
    if interactive and gate.stage not in _AUTO_STAGES:
        return None
    label, rationale, payload = script[gate.stage]
    return HumanDecision(gate.gate_id, label, rationale=rationale, decider="sift-simulation",
                         payload=payload or {})


def _drive(project, db, config, script, interactive):
    while True:
        outcome = advance(project, db, config)
        if isinstance(outcome, Exited):
            return outcome
        if isinstance(outcome, Blocked):
            decision = _scripted_decision(outcome.gate, script, interactive)
            if decision is None:
                return outcome
            outcome = resolve_and_apply(project, decision, db, config)
            if isinstance(outcome, Exited):
                return outcome


def run_project1(db, config: FlowConfig, seed: int = PROJECT1_SEED, n_sub: int = 2000,
                 interactive: bool = False):
    """Replay the terminated subsample project (ledger of three records)."""
    full = build_dataset(synth_demographics(10 * n_sub, seed), SimulationConfig(), seed)
    sub = make_project1_subsample(full, seed, n_sub=n_sub)
    project = _make_project(
        "Svc2020",
        "Service early adopter model",
        "Identify customers likely to be early adopters of the new service "
        "rollout for exclusive promotional discounts, using survey responses "
        "and purchased marketing segmentation data.",
        sub,
        model_seed=seed,
    )
    script = {
        "Verify similarity": ("confirm", "", None),
        "Identify sensitive categories": ("confirm", "", {"sens_features": list(SENS_FEATURES)}),
        "Risk assessment": (
            "proceed",
            "Discount targeting risks disproportional offers across demographic subgroups.",
            None,
        ),
        "Prepare data": ("done", "", None),
        "Decide if more data is needed": (
            "collect more data",
            "Non-white customers are under-represented; a broader survey is needed.",
            None,
        ),
    }
    outcome = _drive(project, db, config, script, interactive)
    return project, outcome


def run_project2(db, config: FlowConfig, seed: int = PROJECT2_SEED, n: int = FULL_N,
                 interactive: bool = False):
    """Replay the deployed follow-up project (ledger of six records)."""
    ds = build_dataset(synth_demographics(n, seed), SimulationConfig(), seed)
    project = _make_project(
        "NewSvc2020",
        "Service early adopter model refresh",
        "Identify customers likely to be early adopters of the new service "
        "rollout for exclusive promotional discounts, rebuilt on the expanded "
        "survey with marketing segmentation data.",
        ds,
        model_seed=seed,
    )
    sens = list(SENS_FEATURES)
    try:
        prior = db.get_project("Svc2020") if db is not None else None
    except Exception:
        prior = None
    if prior is not None and prior.data.sens_features:
        sens = list(prior.data.sens_features)
    script = {
        "Verify similarity": ("confirm", "", None),
        "Identify sensitive categories": ("confirm", "", {"sens_features": sens}),
        "Risk assessment": (
            "proceed",
            "Prior project Svc2020 established the risk profile; proceeding "
            "with the same sensitive features and standard flow.",
            None,
        ),
        "Prepare data": ("done", "", None),
        "Decide if more data is needed": (
            "proceed with available data",
            "",
            None,
        ),
        "Decide whether to drop proxy features": ("keep", "", None),
    }
    outcome = _drive(project, db, config, script, interactive)
    if prior is not None and "Svc2020" in project.similar_projects:
        if "Svc2020" not in project.older_versions:
            project.older_versions.append("Svc2020")
            if db is not None:
                try:
                    db.update_project(project)
                except Exception:
                    pass
    return project, outcome


def simulate_marketing(db, config: FlowConfig, seed: int | None = None, scenario: str = "project2",
                       interactive: bool = False, registry: dict | None = None):
    """Entry point used by the service and CLI.

    When ``registry`` is given, the live project object is stored there under
    its id so callers can keep advancing it (its raw frames are not persisted).
    """
    if scenario == "project1":
        project, outcome = run_project1(db, config, seed=PROJECT1_SEED if seed is None else seed,
                                        interactive=interactive)
    elif scenario == "project2":
        project, outcome = run_project2(db, config, seed=PROJECT2_SEED if seed is None else seed,
                                        interactive=interactive)
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    if registry is not None:
        registry[project.project_id] = project
    gate = pending_gate(project)
    return {
        "project_id": project.project_id,
        "status": project.status.value,
        "records": len(project.bias_history),
        "blocked_at": {"pipeline": gate.pipeline, "stage": gate.stage} if gate else None,
    }
