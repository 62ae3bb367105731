"""Geodesic spaces and CAT(0) diagnostics.

The module-level functions take the space as first argument and dispatch
to its methods; they are the stable public API.
"""

from __future__ import annotations

from ..errors import UnsupportedOperationError
from .base import GeodesicSpace, TangentVector, check_unit_interval
from .euclidean import Euclidean
from .hyperboloid import Hyperboloid, minkowski
from .product import ProductSpace
from .tree import MetricTree, TreePoint, Tripod

__all__ = [
    "GeodesicSpace",
    "TangentVector",
    "Euclidean",
    "Hyperboloid",
    "MetricTree",
    "ProductSpace",
    "TreePoint",
    "Tripod",
    "minkowski",
    "distance",
    "geodesic_point",
    "cat0_midpoint_slack",
    "geodesic_convexity_slack",
    "log_map",
    "exp_map",
    "tangent_norm",
]


def distance(space, p, q):
    return space.distance(p, q)


def geodesic_point(space, p, q, t):
    return space.geodesic_point(p, q, t)


def cat0_midpoint_slack(space, x, y, z):
    """Slack in the CAT(0) midpoint comparison for the triangle (x, y, z).

    Returns ``d(x,y)^2/2 + d(x,z)^2/2 - d(y,z)^2/4 - d(x, m)^2`` where
    ``m`` is the midpoint of y and z. Nonnegative in a CAT(0) space and
    exactly zero in a Hilbert space.
    """
    m = space.geodesic_point(y, z, 0.5)
    return (
        0.5 * space.distance(x, y) ** 2
        + 0.5 * space.distance(x, z) ** 2
        - 0.25 * space.distance(y, z) ** 2
        - space.distance(x, m) ** 2
    )


def geodesic_convexity_slack(space, gamma, eta, t):
    """``(1-t) d(g0, h0) + t d(g1, h1) - d(g(t), h(t))`` for two geodesics.

    ``gamma`` and ``eta`` are given by their endpoint pairs.
    """
    t = check_unit_interval(t)
    g0, g1 = gamma
    h0, h1 = eta
    return (
        (1.0 - t) * space.distance(g0, h0)
        + t * space.distance(g1, h1)
        - space.distance(space.geodesic_point(g0, g1, t), space.geodesic_point(h0, h1, t))
    )


def _smooth(space, op):
    if not isinstance(space, (Hyperboloid, Euclidean)):
        raise UnsupportedOperationError(f"{op} is only defined on hyperboloid and Euclidean spaces")
    return space


def log_map(space, base, target):
    """Initial velocity of the unit-time geodesic from ``base`` to ``target``."""
    return _smooth(space, "log_map").log_map(base, target)


def exp_map(space, base, v):
    return _smooth(space, "exp_map").exp_map(base, v)


def tangent_norm(space, v):
    return _smooth(space, "tangent_norm").tangent_norm(v)
