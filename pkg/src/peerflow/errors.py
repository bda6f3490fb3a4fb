"""Exception types shared across the peerflow package."""


class PeerflowError(Exception):
    """Base class for all peerflow errors."""


class XmlParseError(PeerflowError):
    """Raised for malformed XML input. Carries the byte offset of the failure."""

    def __init__(self, message: str, byte_offset: int | None = None):
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class SchemaError(PeerflowError):
    """Well-formed XML that violates the expected document structure or value ranges."""


class ValidationError(PeerflowError):
    """An argument or value outside its documented domain."""


class GraphDecodeError(PeerflowError):
    """Corrupt graph file. Carries the 1-based line number of the offending line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SolicitationError(PeerflowError):
    """A review action involving a referee who was never solicited, or a record
    that cannot be solicited at all."""

    def __init__(self, message: str, unmatched: list[str] | None = None):
        super().__init__(message)
        self.unmatched = unmatched or []


class HarvestError(PeerflowError):
    """Harvesting failed after retries, or the upstream returned a protocol error."""

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        self.code = code


class ConfigurationError(PeerflowError):
    """Missing or inconsistent service configuration."""
