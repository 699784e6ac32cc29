"""Shared error types.

Plain ``ValueError`` is used for invalid arguments throughout the package;
these subclasses distinguish malformed serialized data from a structurally
valid document that fails its integrity check.
"""


class FormatError(ValueError):
    """A file or encoded string is malformed; the message names the offending field."""


class ChecksumError(ValueError):
    """A Base58Check payload decoded cleanly but its checksum does not match."""
