"""
Process-wide logger.

Configured once, level from `Settings.LOG_LEVEL`. Messages are event-style,
`"<event>: key=value ..."`, so a run log greps like a table.
"""

from __future__ import annotations

import logging
from functools import lru_cache

from sddsim.core.settings import settings


@lru_cache
def initialize_logger() -> logging.Logger:
    logging.basicConfig(
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        level=settings.LOG_LEVEL.upper(),
    )
    return logging.getLogger("sddsim")


logger = initialize_logger()
