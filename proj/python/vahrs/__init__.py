"""Velocity-aided tilt and attitude observer bench."""

from vahrs._core import *  # noqa: F401,F403
from vahrs._core import __doc__  # noqa: F401
