from __future__ import annotations

from sddsim.commons.exceptions import (
    BaseServiceNotFoundException,
    BaseServiceUnProcessableException,
)


class JsccException(BaseServiceUnProcessableException):
    pass


class TrainingDivergedException(BaseServiceUnProcessableException):
    """Non-finite loss. `state` carries the diagnostic dump taken at abort."""

    def __init__(
        self, message: str, details: str | None = None, state: dict | None = None
    ):
        super().__init__(message, details)
        self.state = state or {}


class ModelFileException(BaseServiceUnProcessableException):
    pass


class ModelFileNotFoundException(BaseServiceNotFoundException):
    pass
