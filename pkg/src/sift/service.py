"""HTTP/JSON front door for projects, pipeline advancement, gates, and search.

The service is a thin layer over the same internal operations the CLI uses:
it holds a :class:`ProjectDatabase`, a :class:`FlowConfig`, and an in-memory
registry of live project objects (persisted documents do not carry raw data
frames, so advancement of a data-backed project must go through the object
created in this process).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import FlowConfig
from .core import SiftProject, export_bias_history, init_project
from .errors import SiftError
from .oversight import HumanDecision, load_hog_seed, pending_gate, relevant_hog_entries
from .pipeline import Advanced, Blocked, Exited, advance, init_pipeline_state, resolve_and_apply
from .project_db import ProjectDatabase
from .scenarios import simulate_marketing
from .stages import stage_table_dict


@dataclass
class ApiError:
    """Machine-readable error payload; one code per error class."""

    code: str
    message: str
    http_status: int

    def response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.http_status,
            content={"code": self.code, "message": self.message},
        )

    @classmethod
    def from_exception(cls, exc: SiftError) -> "ApiError":
        return cls(code=exc.code, message=str(exc), http_status=exc.http_status)


class CreateProject(BaseModel):
    name: str
    description: str = ""
    data_location: str


class GateDecision(BaseModel):
    decision: str
    rationale: str = ""
    decider: str = ""
    payload: dict = {}


class SimulateRequest(BaseModel):
    seed: Optional[int] = None
    scenario: str = "project2"
    interactive: bool = False


class PurgeRequest(BaseModel):
    now: Optional[str] = None


def outcome_payload(outcome: Any) -> dict:
    if isinstance(outcome, Advanced):
        return {"outcome": "Advanced", "pipeline": outcome.pipeline, "stage": outcome.stage}
    if isinstance(outcome, Blocked):
        return {"outcome": "Blocked", "gate": outcome.gate.to_dict()}
    if isinstance(outcome, Exited):
        return {"outcome": "Exited", "status": outcome.status.value}
    raise TypeError(f"unexpected outcome {outcome!r}")


def create_app(db_location, config: Optional[FlowConfig] = None) -> FastAPI:
    """Build the application bound to one project database."""
    app = FastAPI(title="sift", docs_url=None, redoc_url=None)
    app.state.db = ProjectDatabase(Path(db_location))
    app.state.config = config or FlowConfig()
    app.state.live = {}  # project_id -> SiftProject with raw data attached
    app.state.hog = load_hog_seed()

    db: ProjectDatabase = app.state.db

    def load(project_id: str) -> SiftProject:
        live = app.state.live.get(project_id)
        if live is not None:
            return live
        project = db.get_project(project_id)
        app.state.live[project_id] = project
        return project

    @app.exception_handler(SiftError)
    async def on_sift_error(request: Request, exc: SiftError):
        return ApiError.from_exception(exc).response()

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return ApiError("validation_error", str(exc.errors()), 400).response()

    @app.exception_handler(ValueError)
    async def on_value_error(request: Request, exc: ValueError):
        return ApiError("validation_error", str(exc), 400).response()

    @app.get("/projects")
    def list_projects():
        return {"projects": db.ids()}

    @app.post("/projects", status_code=201)
    def create_project(body: CreateProject):
        project = init_project(body.name, body.description, body.data_location)
        init_pipeline_state(project)
        db.add_project(project)
        app.state.live[project.project_id] = project
        return project.to_dict()

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        return load(project_id).to_dict()

    @app.get("/projects/{project_id}/bias-history")
    def bias_history(project_id: str):
        return json.loads(export_bias_history(load(project_id)))

    @app.get("/projects/{project_id}/similar")
    def similar(project_id: str, k: int = 10, min_score: float = 0.30):
        project = load(project_id)
        query = f"{project.name} {project.description}"
        hits = [
            h.to_dict()
            for h in db.search_similar(query, k=k, min_score=min_score)
            if h.project_id != project_id
        ]
        return {"hits": hits}

    @app.post("/projects/{project_id}/advance")
    def advance_project(project_id: str):
        project = load(project_id)
        outcome = advance(project, db, app.state.config)
        return outcome_payload(outcome)

    @app.get("/projects/{project_id}/gate")
    def get_gate(project_id: str):
        gate = pending_gate(load(project_id))
        if gate is None:
            return ApiError("no_open_gate", f"project {project_id!r} has no open gate", 404).response()
        return gate.to_dict()

    @app.post("/projects/{project_id}/gate/decision")
    def decide_gate(project_id: str, body: GateDecision):
        project = load(project_id)
        gate = pending_gate(project)
        decision = HumanDecision(
            gate_id=gate.gate_id if gate else "",
            decision=body.decision,
            rationale=body.rationale,
            decider=body.decider,
            payload=dict(body.payload),
        )
        outcome = resolve_and_apply(project, decision, db, app.state.config)
        return outcome_payload(outcome)

    @app.get("/hog")
    def hog(pipeline: str, stage: str):
        entries = relevant_hog_entries(app.state.hog, pipeline, stage)
        return {
            "entries": [
                {"sme_field": sme_field, **entry.to_dict()}
                for sme_field, entry in entries
            ]
        }

    @app.get("/stages")
    def stages():
        return stage_table_dict()

    @app.post("/simulate/marketing")
    def simulate(body: SimulateRequest):
        return simulate_marketing(
            db,
            app.state.config,
            seed=body.seed,
            scenario=body.scenario,
            interactive=body.interactive,
            registry=app.state.live,
        )

    @app.post("/admin/purge")
    def purge(body: PurgeRequest):
        now = datetime.fromisoformat(body.now) if body.now else datetime.now().astimezone()
        purged = db.purge_expired(now)
        for pid in purged:
            app.state.live.pop(pid, None)
        return {"purged": purged}

    return app
