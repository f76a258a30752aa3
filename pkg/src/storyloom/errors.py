"""Shared exception types."""
from __future__ import annotations


class StoryloomError(Exception):
    """Base class for all storyloom errors."""


class NotFoundError(StoryloomError):
    """A referenced id (entity, location, event, snapshot, ...) does not resolve."""


class RangeError(StoryloomError):
    """A character range falls outside the text bounds."""


class ValidityError(StoryloomError):
    """An input violates a documented precondition."""


class SchemaMismatchError(StoryloomError):
    """A payload does not conform to its response schema.

    ``path`` points at the offending element, e.g. ``actions[0].target``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
