"""Measure and reproduce underestimation bias in binary classifiers."""
import logging
import os

from underest.kernels import BACKEND

__version__ = "0.1.0"

_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def configure_logging(level: str | None = None) -> None:
    """Route package logs to stderr at the ``UNDEREST_LOG`` level (quiet/info/debug)."""
    name = (level or os.environ.get("UNDEREST_LOG", "quiet")).lower()
    logger = logging.getLogger("underest")
    logger.setLevel(_LEVELS.get(name, logging.WARNING))
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        logger.addHandler(handler)


__all__ = ["BACKEND", "configure_logging", "__version__"]
