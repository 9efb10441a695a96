"""Exception hierarchy shared across the package.

Every error carries a stable ``code`` so the HTTP service and CLI can map
failures to machine-readable responses without string matching.
"""

from __future__ import annotations


class SiftError(Exception):
    """Base class for all package errors."""

    code = "error"
    http_status = 400

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


def _error(name: str, code: str, http_status: int = 400) -> type:
    return type(name, (SiftError,), {"code": code, "http_status": http_status})


# core model
InvalidName = _error("InvalidName", "invalid_name")
InvalidLocator = _error("InvalidLocator", "invalid_locator")
EmptyHistory = _error("EmptyHistory", "empty_history")
OutOfRange = _error("OutOfRange", "out_of_range")
NegativeIndex = _error("NegativeIndex", "negative_index")
UnknownSensitiveFeature = _error("UnknownSensitiveFeature", "unknown_sensitive_feature")

# bias metrics
ConstantColumn = _error("ConstantColumn", "constant_column")
DegenerateTable = _error("DegenerateTable", "degenerate_table")
EmptyGroup = _error("EmptyGroup", "empty_group")
SchemaMismatch = _error("SchemaMismatch", "schema_mismatch")

# mitigation
EmptyCell = _error("EmptyCell", "empty_cell")
NonConvergence = _error("NonConvergence", "non_convergence", 422)
Infeasible = _error("Infeasible", "infeasible", 422)
UnknownStrategy = _error("UnknownStrategy", "unknown_strategy", 404)

# model lab
BadFraction = _error("BadFraction", "bad_fraction")
NonFinite = _error("NonFinite", "non_finite")
Divergence = _error("Divergence", "divergence", 500)
LengthMismatch = _error("LengthMismatch", "length_mismatch")
DimensionMismatch = _error("DimensionMismatch", "dimension_mismatch")

# project database
DuplicateId = _error("DuplicateId", "duplicate_id", 409)
NotFound = _error("NotFound", "not_found", 404)

# oversight
MalformedHog = _error("MalformedHog", "malformed_hog")
UnknownStage = _error("UnknownStage", "unknown_stage", 404)
AlreadyGated = _error("AlreadyGated", "already_gated", 409)
NoOpenGate = _error("NoOpenGate", "no_open_gate", 409)
InvalidOption = _error("InvalidOption", "invalid_option")
MissingRationale = _error("MissingRationale", "missing_rationale")

# pipeline engine
NotProceeding = _error("NotProceeding", "not_proceeding", 409)
Gated = _error("Gated", "gated", 409)
HandlerFailure = _error("HandlerFailure", "handler_failure", 422)

# simulation
SchemaError = _error("SchemaError", "schema_error")
InsufficientRows = _error("InsufficientRows", "insufficient_rows")
