"""Human oversight guides (HOGs) and decision gates.

A HOG is a per-SME-field question/answer document keyed to pipeline stages.
Documents live in a small human-editable text format (see docs/hog_format.md);
seed documents for HR, PR, Legal, Privacy, and Compliance ship with the
package.

Gates block a project at a human-marked stage until a decision (label plus
rationale plus decider) is recorded.  A project carries at most one open gate.
"""

from __future__ import annotations

import re
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from typing import Optional

from .core import ProjectStatus, SiftProject
from .errors import (
    AlreadyGated,
    InvalidOption,
    MalformedHog,
    MissingRationale,
    NoOpenGate,
    UnknownStage,
)
from .stages import RISK_ASSESSMENT, is_canonical, stage_key

SME_FIELDS = ("HR", "PR", "Legal", "Privacy", "Compliance")

_KEY_RE = re.compile(r"^(sme_field|revision|author|question|answer|stages|tags):\s?(.*)$")


@dataclass
class HogEntry:
    question: str
    answer: str = ""
    stages: list = field(default_factory=list)
    tags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "answer": self.answer,
            "stages": list(self.stages),
            "tags": list(self.tags),
        }


@dataclass
class HogDocument:
    sme_field: str
    entries: list
    revision: int = 1
    author: str = ""

    def to_dict(self) -> dict:
        return {
            "sme_field": self.sme_field,
            "revision": self.revision,
            "author": self.author,
            "entries": [e.to_dict() for e in self.entries],
        }


def parse_hog(text: str) -> HogDocument:
    """Parse one HOG document from its text format.

    Raises MalformedHog for empty input, missing headers, unknown keys, or a
    document with no entries.
    """
    header = {"sme_field": "", "revision": "1", "author": ""}
    entries = []
    current = None  # dict of raw entry fields while inside an [entry] block
    last_key = None

    def flush():
        if current is None:
            return
        if not current.get("question"):
            raise MalformedHog("entry without a question")
        stages = [s.strip() for s in current.get("stages", "").split(";") if s.strip()]
        tags = [t.strip() for t in current.get("tags", "").split(",") if t.strip()]
        entries.append(
            HogEntry(
                question=current["question"],
                answer=current.get("answer", ""),
                stages=stages,
                tags=tags,
            )
        )

    for raw in text.splitlines():
        line = raw.rstrip()
        if not line.strip():
            continue
        if line.strip() == "[entry]":
            flush()
            current = {}
            last_key = None
            continue
        match = _KEY_RE.match(line)
        if match:
            key, value = match.groups()
            last_key = key
            if current is None:
                if key not in header:
                    raise MalformedHog(f"unexpected key {key!r} before first entry")
                header[key] = value
            else:
                if key in ("sme_field", "revision", "author"):
                    raise MalformedHog(f"header key {key!r} inside an entry")
                current[key] = value
        elif line.startswith((" ", "\t")) and last_key is not None:
            # continuation of the previous value
            target = header if current is None else current
            target[last_key] = f"{target[last_key]} {line.strip()}"
        else:
            raise MalformedHog(f"unparseable line: {line!r}")
    flush()

    if not header["sme_field"]:
        raise MalformedHog("missing sme_field header")
    if not entries:
        raise MalformedHog("document has no entries")
    try:
        revision = int(header["revision"])
    except ValueError as exc:
        raise MalformedHog(f"bad revision {header['revision']!r}") from exc
    return HogDocument(
        sme_field=header["sme_field"],
        entries=entries,
        revision=revision,
        author=header["author"],
    )


def serialize_hog(doc: HogDocument) -> str:
    lines = [f"sme_field: {doc.sme_field}", f"revision: {doc.revision}", f"author: {doc.author}"]
    for entry in doc.entries:
        lines.extend(["", "[entry]", f"question: {entry.question}"])
        if entry.answer:
            lines.append(f"answer: {entry.answer}")
        if entry.stages:
            lines.append(f"stages: {'; '.join(entry.stages)}")
        if entry.tags:
            lines.append(f"tags: {', '.join(entry.tags)}")
    return "\n".join(lines) + "\n"


def load_hog_seed() -> list:
    """Load the packaged seed guides, ordered HR, PR, Legal, Privacy, Compliance."""
    docs = {}
    root = resources.files("sift.data") / "hog"
    for item in root.iterdir():
        if item.name.endswith(".hog"):
            doc = parse_hog(item.read_text())
            docs[doc.sme_field] = doc
    return [docs[f] for f in SME_FIELDS if f in docs]


def relevant_hog_entries(docs: list, pipeline: str, stage: str) -> list:
    """All (sme_field, entry) pairs keyed to the given pipeline stage."""
    if not is_canonical(pipeline, stage):
        raise UnknownStage(f"no stage {stage!r} in pipeline {pipeline!r}")
    key = stage_key(pipeline, stage)
    hits = []
    for doc in sorted(docs, key=lambda d: d.sme_field):
        for entry in doc.entries:
            if key in entry.stages:
                hits.append((doc.sme_field, entry))
    return hits


@dataclass
class PendingGate:
    gate_id: str
    project_id: str
    pipeline: str
    stage: str
    prompt: str
    options: list
    hog_refs: list = field(default_factory=list)  # (sme_field, entry index) pairs

    def to_dict(self) -> dict:
        return {
            "gate_id": self.gate_id,
            "project_id": self.project_id,
            "pipeline": self.pipeline,
            "stage": self.stage,
            "prompt": self.prompt,
            "options": list(self.options),
            "hog_refs": [list(r) for r in self.hog_refs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PendingGate":
        return cls(
            gate_id=d["gate_id"],
            project_id=d["project_id"],
            pipeline=d["pipeline"],
            stage=d["stage"],
            prompt=d["prompt"],
            options=list(d["options"]),
            hog_refs=[tuple(r) for r in d.get("hog_refs", [])],
        )


@dataclass
class HumanDecision:
    gate_id: str
    decision: str
    rationale: str = ""
    decider: str = ""
    timestamp: str = ""
    payload: dict = field(default_factory=dict)  # structured extras, e.g. feature lists

    def __post_init__(self):
        if not self.timestamp:
            self.timestamp = datetime.now(timezone.utc).isoformat()

    def to_dict(self) -> dict:
        return {
            "gate_id": self.gate_id,
            "decision": self.decision,
            "rationale": self.rationale,
            "decider": self.decider,
            "timestamp": self.timestamp,
            "payload": dict(self.payload),
        }


def pending_gate(project: SiftProject) -> Optional[PendingGate]:
    raw = project.pipeline_state.get("pending_gate")
    return PendingGate.from_dict(raw) if raw else None


def open_gate(
    project: SiftProject,
    pipeline: str,
    stage: str,
    prompt: str,
    options: list,
    hog_refs: Optional[list] = None,
) -> PendingGate:
    if not is_canonical(pipeline, stage):
        raise UnknownStage(f"no stage {stage!r} in pipeline {pipeline!r}")
    if project.pipeline_state.get("pending_gate"):
        raise AlreadyGated(f"project {project.project_id!r} already has an open gate")
    gate = PendingGate(
        gate_id=uuid.uuid4().hex,
        project_id=project.project_id,
        pipeline=pipeline,
        stage=stage,
        prompt=prompt,
        options=list(options),
        hog_refs=list(hog_refs or []),
    )
    project.pipeline_state["pending_gate"] = gate.to_dict()
    return gate


def resolve_gate(project: SiftProject, decision: HumanDecision) -> PendingGate:
    """Validate and close the project's open gate; returns the closed gate.

    The caller (the flow engine) applies any stage-specific effects, including
    bias-history writes.  Replaying a decision after resolution raises
    NoOpenGate without changing state.
    """
    gate = pending_gate(project)
    if gate is None or gate.gate_id != decision.gate_id:
        raise NoOpenGate(f"no open gate {decision.gate_id!r} on project {project.project_id!r}")
    if decision.decision not in gate.options:
        raise InvalidOption(f"{decision.decision!r} is not one of {gate.options}")
    if gate.stage == RISK_ASSESSMENT and not decision.rationale.strip():
        raise MissingRationale("risk-assessment decisions require a rationale")
    project.pipeline_state["pending_gate"] = None
    project.pipeline_state["last_decision"] = decision.to_dict()
    return gate
