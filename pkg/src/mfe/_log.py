"""Package logger configured from the MF_LOG environment variable.

MF_LOG may be one of {error, info, debug}; anything else (or unset)
falls back to 'error' so library use stays quiet by default.
"""

import logging
import os

_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def get_logger(name: str = "mfe") -> logging.Logger:
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("[%(levelname)s] %(name)s: %(message)s"))
        logger.addHandler(handler)
        level = _LEVELS.get(os.environ.get("MF_LOG", "error").lower(), logging.ERROR)
        logger.setLevel(level)
    return logger
