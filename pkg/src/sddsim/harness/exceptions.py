from __future__ import annotations

from sddsim.commons.exceptions import (
    BaseServiceNotFoundException,
    BaseServiceUnProcessableException,
)


class ConfigException(BaseServiceUnProcessableException):
    pass


class ConfigNotFoundException(BaseServiceNotFoundException):
    pass


class CorpusException(BaseServiceUnProcessableException):
    pass


class CorpusNotFoundException(BaseServiceNotFoundException):
    pass
