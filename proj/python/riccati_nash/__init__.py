"""Riccati-Nash solver for linear-quadratic N-player games."""

from ._core import *  # noqa: F401,F403
from ._core import Error, __version__  # noqa: F401
