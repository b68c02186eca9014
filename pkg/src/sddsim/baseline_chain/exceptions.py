from __future__ import annotations

from sddsim.commons.exceptions import (
    BaseServiceNotFoundException,
    BaseServiceUnProcessableException,
)


class CodecException(BaseServiceUnProcessableException):
    pass


class LdpcException(BaseServiceUnProcessableException):
    pass


class ModulationException(BaseServiceUnProcessableException):
    pass


class AlistNotFoundException(BaseServiceNotFoundException):
    pass
