"""Core project classes: project, data, bias history, and model history.

The bias history is an append-only ledger. Records are plain dataclasses and
every mutation goes through the functions below, which preserve the step
numbering invariant (steps are always exactly 0..n-1, in order).
"""

from __future__ import annotations

import json
import re
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from .errors import (
    EmptyHistory,
    InvalidLocator,
    InvalidName,
    NegativeIndex,
    OutOfRange,
    UnknownSensitiveFeature,
)


class ProjectStatus(str, Enum):
    ACTIVE = "Active"
    TERMINATED = "Terminated"
    SCHEDULED_FOR_DEPLOYMENT = "ScheduledForDeployment"
    DEPLOYED = "Deployed"


class ModelFlow(str, Enum):
    STANDARD = "Standard"
    CUSTOM = "Custom"


PIPELINE_NAMES = (
    "Information gathering",
    "Pre-model",
    "Model-involved",
    "Outcome-involved",
    "Exit SIFT",
)

BIAS_HISTORY_FIELDS = (
    "step",
    "sift_pipeline",
    "bias_features",
    "bias_detection_function",
    "bias_mitigation_function",
    "mitigation_success_status",
    "details",
)

MODEL_HISTORY_FIELDS = (
    "step",
    "seed",
    "train_index",
    "test_index",
    "fitted_model",
    "perf_metric",
    "is_deployed",
)


@dataclass
class LedgerWarning:
    """Structured diagnostic emitted by ledger mutations (capturable by the API)."""

    code: str
    key: str
    message: str

    def to_dict(self) -> dict:
        return {"code": self.code, "key": self.key, "message": self.message}


@dataclass
class BiasHistoryRecord:
    step: int
    sift_pipeline: str = ""
    bias_features: list = field(default_factory=list)
    bias_detection_function: str = ""
    bias_mitigation_function: str = ""
    mitigation_success_status: str = ""  # "TRUE", "FALSE", or ""
    details: str = ""

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "sift_pipeline": self.sift_pipeline,
            "bias_features": list(self.bias_features),
            "bias_detection_function": self.bias_detection_function,
            "bias_mitigation_function": self.bias_mitigation_function,
            "mitigation_success_status": self.mitigation_success_status,
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BiasHistoryRecord":
        return cls(
            step=int(d["step"]),
            sift_pipeline=d.get("sift_pipeline", ""),
            bias_features=list(d.get("bias_features", [])),
            bias_detection_function=d.get("bias_detection_function", ""),
            bias_mitigation_function=d.get("bias_mitigation_function", ""),
            mitigation_success_status=d.get("mitigation_success_status", ""),
            details=d.get("details", ""),
        )


@dataclass
class FittedModelInfo:
    loss_name: str
    loss_value: float
    tuning_params: dict = field(default_factory=dict)
    model_params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "loss_name": self.loss_name,
            "loss_value": self.loss_value,
            "tuning_params": dict(self.tuning_params),
            "model_params": dict(self.model_params),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModelInfo":
        return cls(
            loss_name=d["loss_name"],
            loss_value=float(d["loss_value"]),
            tuning_params=dict(d.get("tuning_params", {})),
            model_params=dict(d.get("model_params", {})),
        )


@dataclass
class ModelHistoryRecord:
    step: int
    seed: Optional[int] = None
    train_index: list = field(default_factory=list)
    test_index: list = field(default_factory=list)
    fitted_model: Optional[FittedModelInfo] = None
    perf_metric: Optional[dict] = None  # {"name": ..., "value": ...}
    is_deployed: bool = False

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "seed": self.seed,
            "train_index": list(self.train_index),
            "test_index": list(self.test_index),
            "fitted_model": self.fitted_model.to_dict() if self.fitted_model else None,
            "perf_metric": dict(self.perf_metric) if self.perf_metric else None,
            "is_deployed": bool(self.is_deployed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelHistoryRecord":
        fm = d.get("fitted_model")
        return cls(
            step=int(d["step"]),
            seed=d.get("seed"),
            train_index=list(d.get("train_index", [])),
            test_index=list(d.get("test_index", [])),
            fitted_model=FittedModelInfo.from_dict(fm) if fm else None,
            perf_metric=d.get("perf_metric"),
            is_deployed=bool(d.get("is_deployed", False)),
        )


@dataclass
class SiftData:
    """Dataset handles and fairness-relevant annotations for one project.

    ``raw_data`` and ``outcome`` are in-memory handles (pandas objects); the
    stored project document keeps only ``data_location`` references.
    """

    raw_data: Any = None
    prior_data: Any = None  # training-time reference for covariate-shift checks
    prior_summary: Any = None  # summary statistics alternative to prior_data
    data_definitions: dict = field(default_factory=dict)
    y: str = ""
    X: list = field(default_factory=list)
    outcome: Any = None
    sens_features: list = field(default_factory=list)
    sens_features_summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "data_definitions": dict(self.data_definitions),
            "y": self.y,
            "X": list(self.X),
            "sens_features": list(self.sens_features),
            "sens_features_summary": {
                cat: {f: list(v) for f, v in inner.items()}
                for cat, inner in self.sens_features_summary.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SiftData":
        return cls(
            data_definitions=dict(d.get("data_definitions", {})),
            y=d.get("y", ""),
            X=list(d.get("X", [])),
            sens_features=list(d.get("sens_features", [])),
            sens_features_summary={
                cat: {f: list(v) for f, v in inner.items()}
                for cat, inner in d.get("sens_features_summary", {}).items()
            },
        )


@dataclass
class SiftProject:
    name: str
    description: str
    data_location: str
    project_id: str
    data: SiftData = field(default_factory=SiftData)
    bias_history: list = field(default_factory=list)
    model_history: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    model_flow: ModelFlow = ModelFlow.STANDARD
    similar_projects: list = field(default_factory=list)
    older_versions: list = field(default_factory=list)
    status: ProjectStatus = ProjectStatus.ACTIVE
    timeout_days: Optional[float] = None
    terminated_at: Optional[str] = None  # ISO 8601
    pipeline_state: dict = field(default_factory=dict)
    revision: int = 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "data_location": self.data_location,
            "project_id": self.project_id,
            "data": self.data.to_dict(),
            "bias_history": [r.to_dict() for r in self.bias_history],
            "model_history": [r.to_dict() for r in self.model_history],
            "metadata": dict(self.metadata),
            "model_flow": self.model_flow.value,
            "similar_projects": list(self.similar_projects),
            "older_versions": list(self.older_versions),
            "status": self.status.value,
            "timeout_days": self.timeout_days,
            "terminated_at": self.terminated_at,
            "pipeline_state": dict(self.pipeline_state),
            "revision": self.revision,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SiftProject":
        return cls(
            name=d["name"],
            description=d.get("description", ""),
            data_location=d.get("data_location", ""),
            project_id=d["project_id"],
            data=SiftData.from_dict(d.get("data", {})),
            bias_history=[BiasHistoryRecord.from_dict(r) for r in d.get("bias_history", [])],
            model_history=[ModelHistoryRecord.from_dict(r) for r in d.get("model_history", [])],
            metadata=dict(d.get("metadata", {})),
            model_flow=ModelFlow(d.get("model_flow", "Standard")),
            similar_projects=list(d.get("similar_projects", [])),
            older_versions=list(d.get("older_versions", [])),
            status=ProjectStatus(d.get("status", "Active")),
            timeout_days=d.get("timeout_days"),
            terminated_at=d.get("terminated_at"),
            pipeline_state=dict(d.get("pipeline_state") or {}),
            revision=int(d.get("revision", 0)),
        )


_LOCATOR_RE = re.compile(r"^\S.*$")


def _slug(name: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9]+", "-", name).strip("-")
    return slug or "project"


def init_project(name: str, description: str, data_location: str) -> SiftProject:
    """Create a fresh project with a unique id and empty histories."""
    if not name or not name.strip():
        raise InvalidName("project name must be nonempty")
    if not isinstance(data_location, str) or not _LOCATOR_RE.match(data_location or ""):
        raise InvalidLocator(f"cannot parse data location: {data_location!r}")
    project_id = f"{_slug(name)}-{uuid.uuid4().hex[:8]}"
    return SiftProject(
        name=name,
        description=description,
        data_location=data_location,
        project_id=project_id,
    )


def get_latest_step(project: SiftProject) -> int:
    if not project.bias_history:
        raise EmptyHistory("bias history is empty")
    return project.bias_history[-1].step


def _coerce_bias_value(key: str, value):
    if key == "bias_features":
        if value is None:
            return []
        if isinstance(value, (list, tuple, set)):
            return [str(v) for v in value]
        return [str(value)]
    if key == "mitigation_success_status":
        if isinstance(value, bool):
            return "TRUE" if value else "FALSE"
        if value is None:
            return ""
        value = str(value)
        if value not in ("TRUE", "FALSE", ""):
            raise ValueError(f"mitigation_success_status must be TRUE/FALSE/'': {value!r}")
        return value
    return "" if value is None else str(value)


def _apply_bias_fields(record: BiasHistoryRecord, fields: dict) -> list:
    warnings = []
    for key, value in fields.items():
        if key == "step":
            # step numbering is owned by the sequence, never by callers
            warnings.append(
                LedgerWarning("step_ignored", key, "step is assigned by the ledger and was ignored")
            )
            continue
        if key not in BIAS_HISTORY_FIELDS:
            warnings.append(
                LedgerWarning("unknown_key", key, f"{key} is not an attribute of bias history")
            )
            continue
        setattr(record, key, _coerce_bias_value(key, value))
    return warnings


def insert_bias_history_at(project: SiftProject, insert_at: int, fields: dict) -> list:
    """Overwrite fields of an existing record; never moves or renumbers records.

    Returns the list of LedgerWarning for unknown or ignored keys.
    """
    latest = get_latest_step(project)
    if insert_at < 0:
        raise NegativeIndex(f"insert_at must be >= 0, got {insert_at}")
    if insert_at > latest:
        raise OutOfRange(f"cannot insert outside current history range (latest step {latest})")
    return _apply_bias_fields(project.bias_history[insert_at], fields)


def add_bias_history_step(project: SiftProject, fields: Optional[dict] = None):
    """Append the next record and fill it from ``fields``.

    Returns (new step, warnings). A supplied "step" key is ignored.
    """
    step = project.bias_history[-1].step + 1 if project.bias_history else 0
    record = BiasHistoryRecord(step=step)
    project.bias_history.append(record)
    warnings = _apply_bias_fields(record, fields or {})
    return step, warnings


def add_model_history_step(project: SiftProject, fields: Optional[dict] = None):
    """Append the next model-history record; mirrors add_bias_history_step."""
    step = project.model_history[-1].step + 1 if project.model_history else 0
    record = ModelHistoryRecord(step=step)
    project.model_history.append(record)
    warnings = []
    for key, value in (fields or {}).items():
        if key == "step":
            warnings.append(
                LedgerWarning("step_ignored", key, "step is assigned by the ledger and was ignored")
            )
            continue
        if key not in MODEL_HISTORY_FIELDS:
            warnings.append(
                LedgerWarning("unknown_key", key, f"{key} is not an attribute of model history")
            )
            continue
        if key == "fitted_model" and isinstance(value, dict):
            value = FittedModelInfo.from_dict(value)
        setattr(record, key, value)
    return step, warnings


def set_sens_features_summary(data: SiftData, category: str, feature: str, descriptors: list) -> None:
    if feature not in data.sens_features:
        raise UnknownSensitiveFeature(f"{feature!r} is not a registered sensitive feature")
    data.sens_features_summary.setdefault(category, {})[feature] = list(descriptors)


def export_bias_history(project: SiftProject) -> str:
    """Serialize the ledger as a JSON document with all seven fields per record."""
    return json.dumps(
        {"bias_history": [r.to_dict() for r in project.bias_history]},
        indent=2,
    )


def parse_bias_history(text: str) -> list:
    doc = json.loads(text)
    return [BiasHistoryRecord.from_dict(r) for r in doc["bias_history"]]
