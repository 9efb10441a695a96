"""Persistent project database with text-similarity search and timeout purging.

Layout on disk:
    <db_location>/manifest.json          ids and revision counters
    <db_location>/projects/<id>.json     one document per project

Writes are serialized by a per-database advisory lock and performed as
write-temp-then-rename so readers never observe partial documents.
"""

from __future__ import annotations

import json
import math
import os
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

from filelock import FileLock

from .core import ProjectStatus, SiftProject
from .errors import DuplicateId, NotFound
from .textproc import normalize_text


@dataclass
class SimilarityHit:
    project_id: str
    score: float
    verified: bool = False

    def to_dict(self) -> dict:
        return {"project_id": self.project_id, "score": self.score, "verified": self.verified}


def _term_counts(text: str) -> Counter:
    return Counter(normalize_text(text))


def _tfidf_vector(counts: Counter, df: Counter, n_docs: int) -> dict:
    vec = {}
    for term, tf in counts.items():
        idf = math.log((1 + n_docs) / (1 + df.get(term, 0))) + 1.0
        vec[term] = (1.0 + math.log(tf)) * idf
    norm = math.sqrt(sum(v * v for v in vec.values()))
    if norm > 0:
        vec = {t: v / norm for t, v in vec.items()}
    return vec


def cosine(a: dict, b: dict) -> float:
    if len(b) < len(a):
        a, b = b, a
    return sum(v * b.get(t, 0.0) for t, v in a.items())


class ProjectDatabase:
    """Directory-backed store of project documents plus a term-count index."""

    def __init__(self, db_location):
        self.db_location = Path(db_location)
        self.projects_dir = self.db_location / "projects"
        self.projects_dir.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.db_location / "db.lock"))
        self._manifest_path = self.db_location / "manifest.json"
        if not self._manifest_path.exists():
            self._write_json(self._manifest_path, {"projects": {}})
        # incremental index: project_id -> term counts of name + description
        self._index = {}
        self._reindex()

    # storage helpers -----------------------------------------------------
    @staticmethod
    def _write_json(path: Path, payload: dict) -> None:
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(payload, indent=2))
        os.replace(tmp, path)

    def _manifest(self) -> dict:
        return json.loads(self._manifest_path.read_text())

    def _project_path(self, project_id: str) -> Path:
        return self.projects_dir / f"{project_id}.json"

    def _reindex(self) -> None:
        self._index = {}
        for pid in self.ids():
            doc = json.loads(self._project_path(pid).read_text())
            self._index[pid] = _term_counts(f"{doc['name']} {doc['description']}")

    # CRUD ----------------------------------------------------------------
    def ids(self) -> list:
        return sorted(self._manifest()["projects"])

    def add_project(self, project: SiftProject) -> None:
        with self._lock:
            manifest = self._manifest()
            if project.project_id in manifest["projects"]:
                raise DuplicateId(f"project {project.project_id!r} already stored")
            self._write_json(self._project_path(project.project_id), project.to_dict())
            manifest["projects"][project.project_id] = project.revision
            self._write_json(self._manifest_path, manifest)
            self._index[project.project_id] = _term_counts(f"{project.name} {project.description}")

    def get_project(self, project_id: str) -> SiftProject:
        path = self._project_path(project_id)
        if not path.exists():
            raise NotFound(f"no project {project_id!r}")
        return SiftProject.from_dict(json.loads(path.read_text()))

    def update_project(self, project: SiftProject) -> None:
        with self._lock:
            manifest = self._manifest()
            if project.project_id not in manifest["projects"]:
                raise NotFound(f"no project {project.project_id!r}")
            project.revision += 1
            self._write_json(self._project_path(project.project_id), project.to_dict())
            manifest["projects"][project.project_id] = project.revision
            self._write_json(self._manifest_path, manifest)
            self._index[project.project_id] = _term_counts(f"{project.name} {project.description}")

    def link_older_version(self, new_id: str, old_id: str) -> None:
        project = self.get_project(new_id)
        if not self._project_path(old_id).exists():
            raise NotFound(f"no project {old_id!r}")
        if old_id not in project.older_versions:
            project.older_versions.append(old_id)
            self.update_project(project)

    # search ----------------------------------------------------------------
    def search_similar(self, query_text: str, k: int = 10, min_score: float = 0.30) -> list:
        if not self._index:
            return []
        n_docs = len(self._index)
        df = Counter()
        for counts in self._index.values():
            df.update(counts.keys())
        query_vec = _tfidf_vector(_term_counts(query_text), df, n_docs)
        hits = []
        for pid, counts in self._index.items():
            score = cosine(query_vec, _tfidf_vector(counts, df, n_docs))
            if score >= min_score:
                hits.append(SimilarityHit(pid, score))
        hits.sort(key=lambda h: (-h.score, h.project_id))
        return hits[:k]

    # lifecycle ---------------------------------------------------------------
    def purge_expired(self, now: datetime) -> list:
        """Remove terminated projects whose timeout has elapsed; returns purged ids."""
        if now.tzinfo is None:
            now = now.replace(tzinfo=timezone.utc)
        purged = []
        with self._lock:
            manifest = self._manifest()
            for pid in list(manifest["projects"]):
                project = self.get_project(pid)
                if (
                    project.status is ProjectStatus.TERMINATED
                    and project.timeout_days is not None
                    and project.terminated_at is not None
                ):
                    terminated = datetime.fromisoformat(project.terminated_at)
                    if terminated.tzinfo is None:
                        terminated = terminated.replace(tzinfo=timezone.utc)
                    if now - terminated > timedelta(days=project.timeout_days):
                        self._project_path(pid).unlink()
                        del manifest["projects"][pid]
                        self._index.pop(pid, None)
                        purged.append(pid)
            if purged:
                self._write_json(self._manifest_path, manifest)
        return purged
