"""Exception hierarchy shared across the package.

Every error carries a stable machine-readable ``code`` so the CLI and the
HTTP service can report failures without string matching.
"""
from __future__ import annotations


class FmecalabError(Exception):
    """Base class; ``code`` is the machine-readable error class."""

    code = "error"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict:
        out = {"error": self.code, "message": self.message}
        if self.context:
            out["context"] = {k: v for k, v in self.context.items()}
        return out


class NotFoundError(FmecalabError):
    """Unknown id or dataset version."""

    code = "not_found"


class DomainError(FmecalabError):
    """Input outside an operation's domain (bad score, bad ratio, bad shape)."""

    code = "domain"


class ValidationError(FmecalabError):
    """An entity violates its own invariants; names the offending field."""

    code = "validation"


class MappingError(FmecalabError):
    """A flag key has no entry in the merge map."""

    code = "mapping"


class WorkflowError(FmecalabError):
    """Operation not permitted in the round's current state."""

    code = "workflow"


class ConflictError(FmecalabError):
    """Compare-and-swap failure: expected record version is stale."""

    code = "conflict"


class CompletenessError(FmecalabError):
    """Round cannot close: submissions are missing. Context lists the pairs."""

    code = "completeness"


class SchemaError(FmecalabError):
    """Persisted file does not match the documented schema."""

    code = "schema"


class ParseError(FmecalabError):
    """Malformed row or document; context carries file and line."""

    code = "parse"


class ReferentialError(FmecalabError):
    """A stored reference points at an entity that does not exist."""

    code = "referential"


class FormatVersionError(FmecalabError):
    """Bundle format version outside the supported range."""

    code = "format_version"


class IntegrityError(FmecalabError):
    """Recorded content digest does not match the bytes on disk."""

    code = "integrity"


class LockError(FmecalabError):
    """Bundle already held by a live writer."""

    code = "locked"
