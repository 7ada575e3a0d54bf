"""Tipping predictions for the Morris-Lecar and sea-ice applications."""
from .ml import *  # noqa: F401,F403
from .seaice import *  # noqa: F401,F403
