"""Shared exception types."""

from __future__ import annotations


class FirmgraphError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FirmgraphError):
    """Invalid or incomplete run configuration."""


class SchemaError(FirmgraphError):
    """A structured input document violates its schema.

    ``path`` points at the offending field, e.g. ``graph.uhttpd.peers[2].type``.
    """

    def __init__(self, message: str, path: str = "") -> None:
        self.path = path
        super().__init__(f"{message} (at {path})" if path else message)
