"""Finitely supported probability measures and counter-based sampling."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CatZeroError, DomainError, ValidationError

WEIGHT_SUM_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class FiniteMeasure:
    """Probability measure with finitely many atoms on a geodesic space.

    Build instances with :func:`make_measure`, which validates, merges
    duplicate atoms and renormalizes.
    """

    space: object
    points: tuple
    weights: np.ndarray

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.points, self.weights.tolist()))

    def __eq__(self, other):
        if not isinstance(other, FiniteMeasure):
            return NotImplemented
        return (
            self.space == other.space
            and [self.space.key(p) for p in self.points] == [other.space.key(p) for p in other.points]
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    @cached_property
    def packed(self):
        out = self.space.pack(self.points)
        out.flags.writeable = False
        return out

    @cached_property
    def cumulative(self):
        """Cumulative weights used to map uniforms to atom indices."""
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        c.flags.writeable = False
        return c

    def support_diameter(self):
        return support_diameter(self)

    def second_moment(self, x):
        return second_moment(self, x)


def make_measure(space, atoms):
    """Validate ``atoms`` (an iterable of ``(point, weight)``) into a measure.

    Weights must be positive and sum to 1 within ``1e-6``; they are then
    rescaled to sum to 1. Atoms that are the same point after
    canonicalization are merged by adding their weights; the first
    occurrence fixes the atom's position in the list.
    """
    merged = {}
    order = []
    for i, atom in enumerate(atoms):
        try:
            point, weight = atom
        except (TypeError, ValueError):
            raise ValidationError(f"atom {i} must be a (point, weight) pair") from None
        try:
            point = space.validate(point)
        except CatZeroError as exc:
            raise ValidationError(f"atom {i}: {exc}") from exc
        weight = float(weight)
        if not np.isfinite(weight) or weight <= 0:
            raise ValidationError(f"atom {i} has non-positive weight {weight!r}")
        key = space.key(point)
        if key in merged:
            merged[key][1] += weight
        else:
            merged[key] = [point, weight]
            order.append(key)
    if not order:
        raise ValidationError("a measure needs at least one atom")
    weights = np.array([merged[k][1] for k in order])
    total = weights.sum()
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValidationError(f"weights sum to {total!r}, expected 1")
    weights = weights / total
    weights.flags.writeable = False
    return FiniteMeasure(space, tuple(merged[k][0] for k in order), weights)


def uniform_measure(space, points):
    points = list(points)
    return make_measure(space, [(p, 1.0 / len(points)) for p in points])


def dirac(space, point):
    return make_measure(space, [(point, 1.0)])


def support_diameter(measure):
    """Largest distance between two atoms; 0 for a point mass."""
    space = measure.space
    pts = measure.points
    best = 0.0
    for p, q in itertools.combinations(pts, 2):
        best = max(best, space.distance(p, q))
    return best


def second_moment(measure, x):
    """``sum_i w_i d(x, y_i)^2``."""
    x = measure.space.validate(x)
    d = measure.space.batch_distance(measure.space.pack([x]), measure.packed)
    return float(np.dot(measure.weights, d * d))


# -- sampling ---------------------------------------------------------------


def counter_uniforms(seed, start, count):
    """Uniforms on [0, 1) at stream positions ``start .. start+count-1``.

    Position ``k`` always yields the same double for a given seed, no matter
    how the positions are split into calls. Backed by numpy's Philox, a
    counter-based generator: position ``k`` is the ``k``-th 64-bit output
    of ``Philox(key=seed)``.
    """
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    start = int(start)
    if start < 0 or count < 0:
        raise DomainError("stream positions are nonnegative")
    bitgen = np.random.Philox(key=seed)
    # Philox emits four 64-bit words per counter step.
    bitgen.advance(start // 4)
    gen = np.random.Generator(bitgen)
    skip = start % 4
    out = gen.random(skip + count)
    return out[skip:]


def atom_index(cumulative, u):
    return np.minimum(np.searchsorted(cumulative, u, side="right"), len(cumulative) - 1)


@dataclass(frozen=True)
class SampleStream:
    """Reproducible i.i.d. draws from ``measure``.

    Draw ``k`` is a pure function of ``(seed, counter + k)``.
    """

    measure: FiniteMeasure
    seed: int
    counter: int = 0

    def indices(self, k, count=1):
        u = counter_uniforms(self.seed, self.counter + k, count)
        return atom_index(self.measure.cumulative, u)

    def draw(self, k):
        return self.measure.points[int(self.indices(k)[0])]


def draw(stream, k):
    return stream.draw(k)
