"""Common interface of the geodesic spaces."""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, InvalidPointError


def check_unit_interval(t):
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"geodesic parameter must lie in [0, 1], got {t!r}")
    return t


class GeodesicSpace(abc.ABC):
    """A uniquely geodesic metric space with scalar and batched kernels.

    Scalar methods work on individual point objects. The ``batch_*``
    methods work on *packed* points: 2-D float arrays with one row per
    point, as produced by :meth:`pack`. Monte Carlo code only ever uses
    the packed form.
    """

    kind: str = "abstract"

    @abc.abstractmethod
    def validate(self, p):
        """Return the canonical form of ``p`` or raise InvalidPointError."""

    @abc.abstractmethod
    def key(self, p):
        """Hashable key; equal keys mean equal points."""

    @abc.abstractmethod
    def distance(self, p, q) -> float:
        ...

    @abc.abstractmethod
    def _geodesic(self, p, q, t):
        ...

    def geodesic_point(self, p, q, t):
        """Point at parameter ``t`` on the constant-speed geodesic p -> q."""
        t = check_unit_interval(t)
        p = self.validate(p)
        q = self.validate(q)
        if t == 0.0:
            return p
        if t == 1.0:
            return q
        return self._geodesic(p, q, t)

    @abc.abstractmethod
    def pack(self, points) -> np.ndarray:
        ...

    @abc.abstractmethod
    def unpack(self, packed) -> list:
        ...

    @abc.abstractmethod
    def batch_distance(self, P, Q) -> np.ndarray:
        ...

    @abc.abstractmethod
    def batch_geodesic(self, P, Q, t) -> np.ndarray:
        ...

    @abc.abstractmethod
    def random_points(self, rng, k, scale=1.0) -> list:
        """Draw ``k`` points for randomized diagnostics."""

    def same_point(self, p, q):
        return self.key(self.validate(p)) == self.key(self.validate(q))


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Tangent vector ``components`` attached at ``base``."""

    base: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        base = np.array(self.base, dtype=float)
        comp = np.array(self.components, dtype=float)
        if base.shape != comp.shape or base.ndim != 1:
            raise InvalidPointError("tangent vector and base must be 1-D arrays of equal length")
        base.flags.writeable = False
        comp.flags.writeable = False
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "components", comp)

    def __eq__(self, other):
        if not isinstance(other, TangentVector):
            return NotImplemented
        return np.array_equal(self.base, other.base) and np.array_equal(
            self.components, other.components
        )

    __hash__ = None


def frozen_array(x, ndim=1):
    a = np.array(x, dtype=float)
    if a.ndim != ndim:
        raise InvalidPointError(f"expected a {ndim}-D coordinate array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidPointError("coordinates must be finite")
    a.flags.writeable = False
    return a
