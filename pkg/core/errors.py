"""Exception hierarchy for ChabautyLab."""

from typing import Optional


class ChabautyError(Exception):
    """Base error carrying a stable machine-readable code."""

    code = "error"

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> dict:
        """Error object as emitted on stderr by the CLI."""
        return {"code": self.code, "message": self.message, "details": self.details}


class DescriptorParseError(ChabautyError):
    """Descriptor text does not match the atom grammar."""

    code = "parse_error"


class SchemaError(ChabautyError):
    """JSON input does not match the expected schema."""

    code = "schema"


class PreconditionError(ChabautyError):
    """An operation was called outside its domain."""

    code = "precondition"


class AmbientMismatchError(PreconditionError):
    """Two subgroups live in different ambient groups."""

    code = "ambient_mismatch"


class SingularPerturbationError(PreconditionError):
    """The perturbation matrix is not invertible at the requested index."""

    code = "singular_perturbation"


class ResourceCapError(ChabautyError):
    """A configured enumeration or net-size cap was exceeded."""

    code = "resource_cap"
