"""Company-level flow configuration.

Defaults mirror the standard marketing flow: disparate impact inside
(0.8, 1.2), 10% sparse-group floor, Bonferroni-corrected proxy tests at
alpha 0.01 with a Cramér's V floor of 0.5, and the three-step mitigation
sequence.  A JSON file can override any key; unknown keys are rejected so
typos fail loudly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import SchemaError
from .metrics import DISP_IMPACT, FairnessRange
from .mitigation import FAIR_PENALTY_LOGREG, GROUP_THRESHOLDS, REWEIGHING, registry_names


@dataclass
class FlowConfig:
    fairness_range: FairnessRange = field(default_factory=lambda: FairnessRange(0.8, 1.2))
    sparse_min_prop: float = 0.10
    proxy_alpha: float = 0.01
    proxy_v_min: float = 0.5
    detection_metric: str = DISP_IMPACT
    mitigation_sequence: list = field(
        default_factory=lambda: [REWEIGHING, FAIR_PENALTY_LOGREG, GROUP_THRESHOLDS]
    )
    timeout_days: float = 365.0
    shift_alpha: float = 0.01
    test_fraction: float = 0.5

    def __post_init__(self):
        if isinstance(self.fairness_range, (tuple, list)):
            self.fairness_range = FairnessRange(*self.fairness_range)
        known = set(registry_names())
        unknown = [n for n in self.mitigation_sequence if n not in known]
        if unknown:
            raise SchemaError(f"unknown mitigation strategies: {unknown}")

    def to_dict(self) -> dict:
        return {
            "fairness_range": [self.fairness_range.lower, self.fairness_range.upper],
            "sparse_min_prop": self.sparse_min_prop,
            "proxy_alpha": self.proxy_alpha,
            "proxy_v_min": self.proxy_v_min,
            "detection_metric": self.detection_metric,
            "mitigation_sequence": list(self.mitigation_sequence),
            "timeout_days": self.timeout_days,
            "shift_alpha": self.shift_alpha,
            "test_fraction": self.test_fraction,
        }

    @classmethod
    def from_file(cls, path) -> "FlowConfig":
        raw = json.loads(Path(path).read_text())
        if not isinstance(raw, dict):
            raise SchemaError("config file must hold a JSON object")
        valid = {f.name for f in fields(cls)}
        unknown = set(raw) - valid
        if unknown:
            raise SchemaError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)
