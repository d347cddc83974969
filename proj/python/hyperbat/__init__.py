"""Pulsed quadratic quantum battery: closed forms, moment propagation and a Fock-space oracle."""

from ._core import *  # noqa: F401,F403
from ._core import HyperbatError, __doc__  # noqa: F401
