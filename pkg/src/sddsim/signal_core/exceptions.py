from __future__ import annotations

from sddsim.commons.exceptions import BaseServiceUnProcessableException


class SignalDomainException(BaseServiceUnProcessableException):
    """Argument outside an operation's domain (zero power, negative noise...)."""

    pass
