"""
Exception families shared by every feature package.

Feature packages subclass these in `<feature>/exceptions.py`. `message` is a
short snake_case reason (`"invalid_config"`, `"bad_magic"`) that callers and
tests match on; `details` carries the offending values. The harness CLI maps
the two families to exit codes.
"""

from __future__ import annotations


class BaseServiceException(Exception):
    def __init__(self, message: str, details: str | None = None):
        self.message = message
        self.details = details
        super().__init__(self.message)

    def describe(self) -> str:
        return f"{self.message} ({self.details})" if self.details else self.message


class BaseServiceNotFoundException(BaseServiceException):
    """A file or directory the run depends on is missing."""


class BaseServiceUnProcessableException(BaseServiceException):
    """Input outside an operation's domain, or an invalid experiment."""
