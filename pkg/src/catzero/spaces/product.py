"""n-fold products of a base space with the l1 (sum) metric."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidPointError
from .base import GeodesicSpace


class ProductSpace(GeodesicSpace):
    """``base`` x ... x ``base`` (``n`` factors) with ``d = sum_i d_base``.

    Componentwise geodesics are geodesics for the l1 metric, though not
    the only ones, so this space is geodesic but not CAT(0).
    """

    kind = "product"

    def __init__(self, base, n):
        n = int(n)
        if n < 1:
            raise ValueError("a product needs at least one factor")
        self.base = base
        self.n = n

    def __repr__(self):
        return f"ProductSpace({self.base!r}, n={self.n})"

    def __eq__(self, other):
        return isinstance(other, ProductSpace) and (self.base, self.n) == (other.base, other.n)

    def __hash__(self):
        return hash(("product", self.base, self.n))

    def validate(self, p):
        try:
            factors = tuple(p)
        except TypeError:
            raise InvalidPointError("product points are sequences of factor points") from None
        if len(factors) != self.n:
            raise InvalidPointError(f"expected {self.n} factors, got {len(factors)}")
        return tuple(self.base.validate(x) for x in factors)

    def key(self, p):
        return tuple(self.base.key(x) for x in self.validate(p))

    def distance(self, p, q):
        p = self.validate(p)
        q = self.validate(q)
        return float(sum(self.base.distance(x, y) for x, y in zip(p, q)))

    def _geodesic(self, p, q, t):
        return tuple(self.base.geodesic_point(x, y, t) for x, y in zip(p, q))

    def pack(self, points):
        return np.array(
            [self.base.pack(self.validate(p)).ravel() for p in points], dtype=float
        )

    def _split(self, packed):
        packed = np.atleast_2d(packed)
        return packed.reshape(len(packed), self.n, -1)

    def unpack(self, packed):
        return [tuple(self.base.unpack(row)) for row in self._split(packed)]

    def batch_distance(self, P, Q):
        P, Q = self._split(P), self._split(Q)
        k, n, c = P.shape
        d = self.base.batch_distance(P.reshape(k * n, c), Q.reshape(k * n, c))
        return d.reshape(k, n).sum(axis=1)

    def batch_geodesic(self, P, Q, t):
        P, Q = self._split(P), self._split(Q)
        k, n, c = P.shape
        t = np.broadcast_to(np.asarray(t, dtype=float), (k,))
        out = self.base.batch_geodesic(P.reshape(k * n, c), Q.reshape(k * n, c), np.repeat(t, n))
        return out.reshape(k, n * c)

    def random_points(self, rng, k, scale=1.0):
        return [tuple(self.base.random_points(rng, self.n, scale)) for _ in range(k)]
