"""Certified lower bounds on the approximate coherent state rank.

Single-mode states get Hankel singular-value thresholds (plain and
b-rescaled), finite-rank detection, explicit coherent decompositions and
best-fit witnesses; multimode core states reduce to the single-mode case
through a bunching unitary; coherent decompositions of |1>^n induce
multilinear formulas approximating the matrix permanent.
"""

__version__ = "0.1.0"

from .errors import NumericalFailure, ResourceLimit  # noqa: E402,F401
