"""Numerical laboratory for the 2D half-plane non-resistive MHD perturbation
system: explicit per-mode solution formulas, contour-deformation inverse
Laplace transforms, time-domain solvers, and decay-rate verification."""

__version__ = "0.1.0"
