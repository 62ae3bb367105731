"""Finite-dimensional Euclidean space, the flat model of a Hilbert space."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError, InvalidPointError
from .base import GeodesicSpace, TangentVector, frozen_array


class Euclidean(GeodesicSpace):
    kind = "euclidean"

    def __init__(self, dim):
        dim = int(dim)
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        self.dim = dim

    def __repr__(self):
        return f"Euclidean(dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, Euclidean) and other.dim == self.dim

    def __hash__(self):
        return hash(("euclidean", self.dim))

    def validate(self, p):
        p = frozen_array(np.atleast_1d(np.asarray(p, dtype=float)))
        if p.shape != (self.dim,):
            raise InvalidPointError(f"expected {self.dim} coordinates, got shape {p.shape}")
        return p

    def key(self, p):
        return tuple(self.validate(p).tolist())

    def distance(self, p, q):
        return float(np.linalg.norm(self.validate(p) - self.validate(q)))

    def _geodesic(self, p, q, t):
        out = p + t * (q - p)
        out.flags.writeable = False
        return out

    def tangent_norm(self, v):
        c = v.components if isinstance(v, TangentVector) else np.asarray(v, dtype=float)
        return float(np.linalg.norm(c))

    def log_map(self, base, target):
        base = self.validate(base)
        return TangentVector(base, self.validate(target) - base)

    def exp_map(self, base, v):
        base = self.validate(base)
        if not isinstance(v, TangentVector):
            v = TangentVector(base, v)
        if v.base.shape != base.shape or not np.array_equal(v.base, base):
            raise DomainError("tangent vector is attached at a different base point")
        out = base + v.components
        out.flags.writeable = False
        return out

    def pack(self, points):
        return np.array([self.validate(p) for p in points], dtype=float).reshape(-1, self.dim)

    def unpack(self, packed):
        packed = np.asarray(packed, dtype=float).reshape(-1, self.dim)
        return [self.validate(row) for row in packed]

    def batch_distance(self, P, Q):
        return np.linalg.norm(np.atleast_2d(P) - np.atleast_2d(Q), axis=-1)

    def batch_geodesic(self, P, Q, t):
        P = np.atleast_2d(P)
        Q = np.atleast_2d(Q)
        t = np.asarray(t, dtype=float)
        return P + t[..., None] * (Q - P) if t.ndim else P + t * (Q - P)

    def random_points(self, rng, k, scale=1.0):
        return [self.validate(row) for row in rng.uniform(-scale, scale, size=(k, self.dim))]
