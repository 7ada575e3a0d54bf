"""Model definitions: canonical normal form, Morris-Lecar, sea-ice energy balance."""
from .canonical import *  # noqa: F401,F403
from .morris_lecar import *  # noqa: F401,F403
from .seaice import *  # noqa: F401,F403
from . import canonical, morris_lecar, seaice

__all__ = canonical.__all__ + morris_lecar.__all__ + seaice.__all__
