"""Balanced homodyne detection simulator and electronic-noise-free squeezing
estimators.

The compiled core exposes the Gaussian-state algebra, the seeded trace
generator, the subtraction- and covariance-method estimators, and the
experiment drivers. See the project README for the matching CLI and file
formats.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
