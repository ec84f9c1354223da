"""Exception hierarchy shared across convoscan modules."""

from __future__ import annotations


class ConvoscanError(Exception):
    """Base class for all errors raised by convoscan."""


class InputError(ConvoscanError):
    """Caller supplied an invalid argument (empty utterance, missing path, ...)."""


class MappingError(ConvoscanError):
    """A native analyzer value could not be mapped into the unified model."""


class ParseError(ConvoscanError):
    """An analyzer report could not be parsed.

    ``byte_offset`` locates the failure in the raw input when known.
    """

    def __init__(self, message: str, byte_offset: int | None = None):
        super().__init__(message)
        self.byte_offset = byte_offset


class RegistryError(ConvoscanError):
    """Analyzer registration conflict or lookup of an unregistered analyzer."""


class SelectionError(ConvoscanError):
    """No registered analyzer is compatible with the requested project."""


class SessionError(ConvoscanError):
    """A conversation session was used after it ended."""


class StateError(ConvoscanError):
    """An operation was applied to a value in the wrong state."""


class StorageError(ConvoscanError):
    """A durable store (queue file, report store) could not be written."""


class FetchError(ConvoscanError):
    """Acquiring a remote scan target failed."""
