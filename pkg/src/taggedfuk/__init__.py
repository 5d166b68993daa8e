"""Tagged arc systems on graded marked surfaces with order-2 orbifold
points: exact A-infinity structure constants, twisted complexes over
them, and the invariant model of a free-or-branched double cover."""

__version__ = "0.1.0"
