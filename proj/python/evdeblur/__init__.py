"""Event-based motion deblurring: simulation, EDI recovery, EGER, losses."""

from ._evdeblur import *  # noqa: F401,F403
from ._evdeblur import __doc__  # noqa: F401
