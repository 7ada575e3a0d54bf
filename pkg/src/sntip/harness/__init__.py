"""Sweeps, comparison reports and the command-line interface."""
from .cases import *  # noqa: F401,F403
from .config import *  # noqa: F401,F403
from .report import *  # noqa: F401,F403
from .sweep import *  # noqa: F401,F403
