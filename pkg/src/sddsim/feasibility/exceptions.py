from __future__ import annotations

from sddsim.commons.exceptions import BaseServiceUnProcessableException


class FeasibilityException(BaseServiceUnProcessableException):
    pass
