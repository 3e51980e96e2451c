"""toruslift: certified numerics for branes on symplectic tori."""

__version__ = "0.1.0"

from . import errors  # noqa: F401
from .exact import RatMat, rat, ratvec  # noqa: F401
