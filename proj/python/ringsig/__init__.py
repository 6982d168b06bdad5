"""Ring-shaped noise-signaling PSK modem."""

from ._core import *  # noqa: F401,F403
from ._core import RingsigError, Scheme  # noqa: F401

__version__ = "0.1.0"
