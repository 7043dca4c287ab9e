"""Exception hierarchy shared by every module.

Each error carries a stable machine-readable ``code`` that the HTTP layer
maps into its error envelope, so raising sites never deal with transport
concerns.
"""

from __future__ import annotations


class EsdError(Exception):
    """Base class for all domain errors."""

    code = "internal_error"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message


# --- units ---------------------------------------------------------------

class IncompatibleUnits(EsdError):
    code = "incompatible_units"


class UnknownUnit(IncompatibleUnits):
    code = "unknown_unit"


# --- morphology vocabulary -----------------------------------------------

class MalformedDescriptor(EsdError):
    code = "malformed_descriptor"


class UnknownTerm(EsdError):
    code = "unknown_term"

    def __init__(self, axis: str, token: str, suggestion: str | None = None):
        detail = f"unknown {axis} term {token!r}"
        if suggestion:
            detail += f" (did you mean {suggestion!r}?)"
        super().__init__(detail)
        self.axis = axis
        self.token = token
        self.suggestion = suggestion


class InvalidNumber(EsdError):
    code = "invalid_number"


class DuplicateDefect(EsdError):
    code = "duplicate_defect"


class VersionUnknown(EsdError):
    code = "version_unknown"


# --- records ---------------------------------------------------------------

class MalformedRecord(EsdError):
    code = "malformed_record"


# --- moderation ------------------------------------------------------------

class MissingAttribution(EsdError):
    code = "missing_attribution"


class IllegalTransition(EsdError):
    code = "illegal_transition"


class MissingReason(EsdError):
    code = "missing_reason"


# --- store -------------------------------------------------------------

class NotFound(EsdError):
    code = "not_found"


class IntegrityViolation(EsdError):
    code = "integrity_violation"


class DuplicateAccession(EsdError):
    code = "duplicate_accession"


class ConcurrentRelease(EsdError):
    code = "concurrent_release"


class IoFailure(EsdError):
    code = "io_failure"


# --- query -------------------------------------------------------------

class InvalidFilter(EsdError):
    code = "invalid_filter"


class EmptySelection(EsdError):
    code = "empty_selection"


# --- release -----------------------------------------------------------

class NothingToRelease(EsdError):
    code = "nothing_to_release"


class ConcurrentCut(EsdError):
    code = "concurrent_cut"


class UnknownRelease(NotFound):
    code = "unknown_release"


class UnknownArtifact(NotFound):
    code = "unknown_artifact"
