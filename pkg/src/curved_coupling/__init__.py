"""Co-adapted couplings of Brownian motions on constant-curvature surfaces and
their lifts to SU(2) and SL(2, R)."""

__version__ = "0.1.0"
