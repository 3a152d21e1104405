"""
Logger - Shared logger factory with a rich console handler.
"""

import logging

from rich.console import Console
from rich.logging import RichHandler

from novarch.config import get_settings

ROOT_LOGGER = "novarch"

_configured = False


def configure_logging(level: str = None) -> logging.Logger:
    """Attach the rich handler to the package root logger (idempotent)."""
    global _configured
    root = logging.getLogger(ROOT_LOGGER)
    root.setLevel((level or get_settings().log_level).upper())
    if not _configured:
        handler = RichHandler(
            console=Console(stderr=True),
            show_time=False,
            show_path=False,
            rich_tracebacks=False,
        )
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    return root


def get_logger(name: str) -> logging.Logger:
    """Logger under the novarch namespace."""
    configure_logging()
    if not name.startswith(ROOT_LOGGER):
        name = f"{ROOT_LOGGER}.{name}"
    return logging.getLogger(name)
