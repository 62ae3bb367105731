"""Hyperbolic space of curvature -1 in the hyperboloid model.

Points are arrays ``(x0, x1, ..., xm)`` with ``-x0**2 + sum(xi**2) == -1``
and ``x0 > 0``. Distances use ``2 * asinh(|p - q|_M / 2)``, which equals
``arccosh(-<p, q>_M)`` but keeps full relative precision for nearby points.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError, InvalidPointError
from .base import GeodesicSpace, TangentVector, frozen_array

NORM_TOL = 1e-9


def minkowski(x, y):
    """Minkowski bilinear form along the last axis."""
    x = np.asarray(x)
    y = np.asarray(y)
    return np.sum(x[..., 1:] * y[..., 1:], axis=-1) - x[..., 0] * y[..., 0]


def _lift(spatial):
    spatial = np.asarray(spatial, dtype=float)
    x0 = np.sqrt(1.0 + np.sum(spatial * spatial, axis=-1, keepdims=True))
    return np.concatenate([x0, spatial], axis=-1)


def _dist(p, q):
    diff = p - q
    sq = np.maximum(minkowski(diff, diff), 0.0)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(sq))


def _sinhc(d):
    """d / sinh(d), with the removable singularity at 0 filled in."""
    d = np.asarray(d, dtype=float)
    out = np.ones_like(d)
    nz = d > 0
    out[nz] = d[nz] / np.sinh(d[nz])
    return out


class Hyperboloid(GeodesicSpace):
    """The ``dim``-dimensional hyperbolic space H^dim."""

    kind = "hyperboloid"

    def __init__(self, dim):
        dim = int(dim)
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        self.dim = dim

    def __repr__(self):
        return f"Hyperboloid(dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, Hyperboloid) and other.dim == self.dim

    def __hash__(self):
        return hash(("hyperboloid", self.dim))

    @property
    def origin(self):
        o = np.zeros(self.dim + 1)
        o[0] = 1.0
        o.flags.writeable = False
        return o

    def lift(self, spatial):
        """Point with the given spatial coordinates ``(x1, ..., xm)``."""
        spatial = frozen_array(spatial)
        if spatial.shape != (self.dim,):
            raise InvalidPointError(f"expected {self.dim} spatial coordinates")
        out = _lift(spatial)
        out.flags.writeable = False
        return out

    def validate(self, p):
        p = frozen_array(p)
        if p.shape != (self.dim + 1,):
            raise InvalidPointError(f"expected {self.dim + 1} ambient coordinates, got {p.shape}")
        if p[0] <= 0:
            raise InvalidPointError("hyperboloid points need x0 > 0")
        # Absolute tolerance grows with x0**2 since the form is quadratic.
        if abs(minkowski(p, p) + 1.0) > NORM_TOL * max(1.0, p[0] * p[0]):
            raise InvalidPointError("point is not on the hyperboloid <x, x>_M = -1")
        return p

    def key(self, p):
        return tuple(self.validate(p).tolist())

    def distance(self, p, q):
        return float(_dist(self.validate(p), self.validate(q)))

    def tangent_norm(self, v):
        c = v.components if isinstance(v, TangentVector) else np.asarray(v, dtype=float)
        return float(np.sqrt(max(minkowski(c, c), 0.0)))

    def log_map(self, base, target):
        base = self.validate(base)
        target = self.validate(target)
        diff = target - base
        u = diff + minkowski(base, diff) * base
        d = _dist(base, target)
        return TangentVector(base, float(_sinhc(d)) * u)

    def exp_map(self, base, v):
        base = self.validate(base)
        if not isinstance(v, TangentVector):
            v = TangentVector(base, v)
        if v.base.shape != base.shape or not np.allclose(v.base, base, rtol=1e-12, atol=1e-12):
            raise DomainError("tangent vector is attached at a different base point")
        c = v.components
        if abs(minkowski(base, c)) > NORM_TOL * max(1.0, float(np.abs(c).max(initial=0.0)) * base[0]):
            raise DomainError("vector is not tangent to the hyperboloid at the base point")
        n = self.tangent_norm(c)
        if n == 0.0:
            return base
        out = np.cosh(n) * base + (np.sinh(n) / n) * c
        out = _lift(out[1:])
        out.flags.writeable = False
        return out

    def _geodesic(self, p, q, t):
        v = self.log_map(p, q)
        return self.exp_map(p, TangentVector(p, t * v.components))

    # -- batched kernels -----------------------------------------------------

    def pack(self, points):
        return np.array([self.validate(p) for p in points], dtype=float).reshape(-1, self.dim + 1)

    def unpack(self, packed):
        packed = np.asarray(packed, dtype=float).reshape(-1, self.dim + 1)
        return [self.validate(row) for row in _lift(packed[:, 1:])]

    def batch_distance(self, P, Q):
        return _dist(np.atleast_2d(P), np.atleast_2d(Q))

    def batch_geodesic(self, P, Q, t):
        """Closed-form geodesic ``(sinh((1-t)d) p + sinh(td) q) / sinh d``."""
        P = np.atleast_2d(P)
        Q = np.atleast_2d(Q)
        t = np.asarray(t, dtype=float)
        d = _dist(P, Q)
        small = d < 1e-300
        ds = np.where(small, 1.0, d)
        sd = np.sinh(ds)
        wp = np.where(small, 1.0 - t, np.sinh((1.0 - t) * ds) / sd)
        wq = np.where(small, t, np.sinh(t * ds) / sd)
        out = wp[..., None] * P + wq[..., None] * Q
        return _lift(out[..., 1:])

    def batch_log(self, base, targets):
        """Log map of many targets at a single base point, as an (k, m+1) array."""
        targets = np.atleast_2d(targets)
        diff = targets - base
        u = diff + minkowski(base, diff)[:, None] * base
        return _sinhc(_dist(base, targets))[:, None] * u

    def random_points(self, rng, k, scale=1.0):
        """Points at geodesic distance ``<= scale`` from the origin."""
        direction = rng.normal(size=(k, self.dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = scale * rng.uniform(size=(k, 1))
        spatial = np.sinh(radius) * direction
        return [self.validate(row) for row in _lift(spatial)]
