"""Two-qubit Rydberg-blockade CPHASE gate simulation and optimal control."""

from rydsim._core import *  # noqa: F401,F403
from rydsim._core import __version__  # noqa: F401
