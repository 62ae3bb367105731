"""Geodesics, barycenters and inductive means in CAT(0) spaces, with
Monte Carlo checks of Gaussian tail bounds for inductive means."""

__version__ = "0.1.0"
