"""Line shapes and free induction decays of spin-1/2 gas in nano-containers.

All frequencies are angular (rad/s) and all times are seconds.
"""

from ._nmrcage import *  # noqa: F401,F403
from ._nmrcage import __version__, DomainError  # noqa: F401
