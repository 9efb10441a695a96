"""Command-line front door.

Thin client over the same internal operations the HTTP service uses, so both
paths produce identical ledgers for identical decision sequences and seeds.
"""

from __future__ import annotations

import json
import sys
from datetime import datetime
from pathlib import Path

import click

from .config import FlowConfig
from .core import export_bias_history, init_project
from .errors import SiftError
from .oversight import HumanDecision, pending_gate
from .pipeline import advance as advance_stage
from .pipeline import init_pipeline_state, resolve_and_apply
from .project_db import ProjectDatabase
from .scenarios import simulate_marketing
from .service import outcome_payload


def _fail(exc: SiftError) -> None:
    click.echo(f"error [{exc.code}]: {exc}", err=True)
    sys.exit(1)


class Context:
    def __init__(self, db_dir: str, config_file: str | None):
        self.db = ProjectDatabase(Path(db_dir))
        self.config = FlowConfig.from_file(config_file) if config_file else FlowConfig()


@click.group()
@click.option("--db", "db_dir", default="./sift-db", show_default=True,
              help="Project database directory.")
@click.option("--config", "config_file", default=None, type=click.Path(exists=True),
              help="Flow configuration file (JSON).")
@click.pass_context
def main(ctx, db_dir, config_file):
    """Fairness-governance project workflows: ledger, gates, search."""
    try:
        ctx.obj = Context(db_dir, config_file)
    except SiftError as exc:
        _fail(exc)


@main.command()
@click.argument("name")
@click.argument("data_location")
@click.option("--description", default="")
@click.pass_obj
def init(obj, name, data_location, description):
    """Create a new project and store it in the database."""
    try:
        project = init_project(name, description, data_location)
        init_pipeline_state(project)
        obj.db.add_project(project)
    except SiftError as exc:
        _fail(exc)
    click.echo(project.project_id)


@main.command(name="list")
@click.pass_obj
def list_projects(obj):
    """List project ids in the database."""
    for pid in obj.db.ids():
        click.echo(pid)


@main.command()
@click.argument("query")
@click.option("--k", default=10, show_default=True)
@click.option("--min-score", default=0.30, show_default=True)
@click.pass_obj
def similar(obj, query, k, min_score):
    """Search the database for projects similar to QUERY."""
    hits = obj.db.search_similar(query, k=k, min_score=min_score)
    click.echo(json.dumps({"hits": [h.to_dict() for h in hits]}, indent=2))


@main.command()
@click.argument("project_id")
@click.pass_obj
def advance(obj, project_id):
    """Run the next pipeline stage of PROJECT_ID."""
    try:
        project = obj.db.get_project(project_id)
        outcome = advance_stage(project, obj.db, obj.config)
    except SiftError as exc:
        _fail(exc)
    click.echo(json.dumps(outcome_payload(outcome), indent=2))


@main.group()
def gate():
    """Inspect or resolve the open human gate of a project."""


@gate.command()
@click.argument("project_id")
@click.pass_obj
def show(obj, project_id):
    """Print the open gate of PROJECT_ID."""
    try:
        project = obj.db.get_project(project_id)
    except SiftError as exc:
        _fail(exc)
    open_gate = pending_gate(project)
    if open_gate is None:
        click.echo(f"error [no_open_gate]: project {project_id!r} has no open gate", err=True)
        sys.exit(1)
    click.echo(json.dumps(open_gate.to_dict(), indent=2))


@gate.command()
@click.argument("project_id")
@click.argument("decision")
@click.option("--rationale", default="")
@click.option("--decider", default="")
@click.option("--payload", default="{}", help="Structured extras as JSON.")
@click.pass_obj
def decide(obj, project_id, decision, rationale, decider, payload):
    """Resolve the open gate of PROJECT_ID with DECISION."""
    try:
        project = obj.db.get_project(project_id)
        gate_obj = pending_gate(project)
        human = HumanDecision(
            gate_id=gate_obj.gate_id if gate_obj else "",
            decision=decision,
            rationale=rationale,
            decider=decider,
            payload=json.loads(payload),
        )
        outcome = resolve_and_apply(project, human, obj.db, obj.config)
    except SiftError as exc:
        _fail(exc)
    click.echo(json.dumps(outcome_payload(outcome), indent=2))


@main.group()
def history():
    """Bias-history ledger operations."""


@history.command()
@click.argument("project_id")
@click.pass_obj
def export(obj, project_id):
    """Print the bias history of PROJECT_ID in the export format."""
    try:
        project = obj.db.get_project(project_id)
    except SiftError as exc:
        _fail(exc)
    click.echo(export_bias_history(project))


@main.group()
def simulate():
    """Run packaged simulation scenarios."""


@simulate.command()
@click.option("--seed", default=None, type=int)
@click.option("--scenario", default="project2", show_default=True,
              type=click.Choice(["project1", "project2"]))
@click.option("--interactive", is_flag=True, default=False,
              help="Stop at human gates instead of applying scripted decisions.")
@click.pass_obj
def marketing(obj, seed, scenario, interactive):
    """Replay a marketing-model scenario into the database."""
    try:
        summary = simulate_marketing(obj.db, obj.config, seed=seed, scenario=scenario,
                                     interactive=interactive)
    except SiftError as exc:
        _fail(exc)
    click.echo(json.dumps(summary, indent=2))


@main.command()
@click.option("--now", default=None, help="ISO timestamp to purge against (default: current time).")
@click.pass_obj
def purge(obj, now):
    """Delete terminated projects whose timeout has elapsed."""
    when = datetime.fromisoformat(now) if now else datetime.now().astimezone()
    purged = obj.db.purge_expired(when)
    click.echo(json.dumps({"purged": purged}, indent=2))


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_obj
def serve(obj, port, host):
    """Serve the HTTP API over the selected database."""
    import uvicorn

    from .service import create_app

    app = create_app(obj.db.db_location, config=obj.config)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
