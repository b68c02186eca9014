from __future__ import annotations

from sddsim.commons.exceptions import BaseServiceUnProcessableException


class SicException(BaseServiceUnProcessableException):
    pass


class SicDivergedException(SicException):
    pass
