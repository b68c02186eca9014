from __future__ import annotations

from sddsim.commons.exceptions import BaseServiceUnProcessableException


class SimConfigException(BaseServiceUnProcessableException):
    pass
