"""Canonical pipeline/stage catalog shared by oversight and the flow engine.

Each pipeline is an ordered list of stages.  A stage carries two markers:
``H`` (a human decision gate blocks here) and ``B`` (the stage writes to the
bias history).  Gate-bearing stages also enumerate their fixed decision
options so that recorded decisions stay machine-auditable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

INFORMATION_GATHERING = "Information gathering"
PRE_MODEL = "Pre-model"
MODEL_INVOLVED = "Model-involved"
OUTCOME_INVOLVED = "Outcome-involved"
EXIT_SIFT = "Exit SIFT"

RISK_ASSESSMENT = "Risk assessment"

PROCEED = "proceed"
TERMINATE = "terminate"


@dataclass(frozen=True)
class StageSpec:
    name: str
    human: bool = False
    history: bool = False
    options: tuple = ()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "human": self.human,
            "history": self.history,
            "options": list(self.options),
        }


EXIT_AND_REVISE = "exit-and-revise"

_RISK = StageSpec(
    RISK_ASSESSMENT, human=True, history=True, options=(PROCEED, TERMINATE, EXIT_AND_REVISE)
)

STAGE_TABLE = {
    INFORMATION_GATHERING: (
        StageSpec("Verify similarity", human=True, options=("confirm",)),
        StageSpec("Identify sensitive categories", human=True, history=True, options=("confirm",)),
        _RISK,
        StageSpec("Identify next pipeline"),
    ),
    PRE_MODEL: (
        StageSpec("Prepare data", human=True, options=("done",)),
        StageSpec("Detect sparse group", history=True),
        StageSpec(
            "Decide if more data is needed",
            human=True,
            options=("collect more data", "proceed with available data"),
        ),
        StageSpec("Detect proxy features", history=True),
        StageSpec(
            "Decide whether to drop proxy features",
            human=True,
            history=True,
            options=("drop", "keep"),
        ),
        StageSpec("Detect marginalized groups", history=True),
        _RISK,
    ),
    MODEL_INVOLVED: (
        StageSpec("Pre-processing detection", history=True),
        StageSpec("Pre-processing mitigation", history=True),
        StageSpec("Train model"),
        StageSpec("Post-processing detection", history=True),
        StageSpec("In-processing mitigation", history=True),
        StageSpec("Post-processing detection", history=True),
        StageSpec("Post-processing mitigation", history=True),
        _RISK,
    ),
    OUTCOME_INVOLVED: (
        StageSpec("Detect covariate shift", history=True),
        StageSpec(
            "Decide if retraining needed",
            human=True,
            options=("retrain", "no retraining"),
        ),
        StageSpec("Post-processing detection", history=True),
        StageSpec("Post-processing mitigation", history=True),
        _RISK,
    ),
}

PIPELINES = tuple(STAGE_TABLE)


def stage_names(pipeline: str) -> tuple:
    return tuple(s.name for s in STAGE_TABLE[pipeline])


def is_canonical(pipeline: str, stage: str) -> bool:
    return pipeline in STAGE_TABLE and stage in stage_names(pipeline)


def stage_spec(pipeline: str, stage: str) -> StageSpec:
    for spec in STAGE_TABLE[pipeline]:
        if spec.name == stage:
            return spec
    raise KeyError(stage)


def stage_key(pipeline: str, stage: str) -> str:
    """The qualified identifier used in oversight-guide files."""
    return f"{pipeline} :: {stage}"


def stage_table_dict() -> dict:
    return {p: [s.to_dict() for s in specs] for p, specs in STAGE_TABLE.items()}
