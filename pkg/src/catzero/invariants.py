"""Exact metric-measure invariants of small finite mm-spaces.

Everything here is a supremum or infimum over subsets, evaluated by
enumerating all ``2**n`` subsets as bitmasks (bit ``i`` = point ``i``).
Per-subset tables (mass, diameter, distance to the subset, open
neighbourhood) are filled by the recurrence "subset = lower bits plus the
top bit", which keeps everything vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, SizeError, ValidationError

MASS_TOL = 1e-12
METRIC_TOL = 1e-12
MAX_ENUMERATION = 15
MAX_PUSHFORWARD = 20


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FiniteMMSpace:
    """Finite metric space with a probability vector on its points."""

    dist: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        d = _frozen(self.dist)
        w = _frozen(self.weights)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
            raise ValidationError("distance matrix must be square and nonempty")
        if w.shape != (d.shape[0],):
            raise ValidationError("one weight per point is required")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(w))):
            raise ValidationError("entries must be finite")
        if np.any(w < 0) or abs(w.sum() - 1.0) > MASS_TOL:
            raise ValidationError("weights must be nonnegative and sum to 1")
        if np.any(np.diag(d) != 0) or np.any(d < 0) or not np.allclose(d, d.T, rtol=0, atol=METRIC_TOL):
            raise ValidationError("distance matrix must be symmetric, nonnegative, zero on the diagonal")
        if np.any(d[:, None, :] > d[:, :, None] + d[None, :, :] + METRIC_TOL):
            raise ValidationError("distance matrix violates the triangle inequality")
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return len(self.weights)

    def __eq__(self, other):
        if not isinstance(other, FiniteMMSpace):
            return NotImplemented
        return np.array_equal(self.dist, other.dist) and np.array_equal(self.weights, other.weights)

    __hash__ = None

    def diameter(self):
        return float(self.dist.max())

    @classmethod
    def from_points(cls, points, weights, metric=None):
        """Build from coordinates with the Euclidean (or a custom) metric."""
        points = np.asarray(points, dtype=float)
        if metric is None:
            diff = points[:, None, :] - points[None, :, :]
            dist = np.sqrt(np.sum(diff * diff, axis=-1))
        else:
            dist = np.array([[metric(a, b) for b in points] for a in points])
        return cls(dist, weights)


@dataclass(frozen=True, eq=False)
class PushforwardMeasure:
    """Image of a finite measure under a real-valued function."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        w = _frozen(self.weights)
        if v.ndim != 1 or v.shape != w.shape or v.size == 0:
            raise ValidationError("values and weights must be equal-length, nonempty 1-D arrays")
        if np.any(w < 0) or abs(w.sum() - 1.0) > MASS_TOL:
            raise ValidationError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    def mean(self):
        return float(np.dot(self.weights, self.values))


def pushforward(X: FiniteMMSpace, values):
    return PushforwardMeasure(values, X.weights)


# -- subset tables ----------------------------------------------------------


def _check_size(n, limit=MAX_ENUMERATION):
    if n > limit:
        raise SizeError(f"exact enumeration is capped at {limit} points, got {n}")


def _subset_mass(w):
    mass = np.zeros(1 << len(w))
    for i, wi in enumerate(w):
        lo = 1 << i
        mass[lo : 2 * lo] = mass[:lo] + wi
    return mass


def _subset_diameter(d):
    n = len(d)
    diam = np.zeros(1 << n)
    for i in range(n):
        lo = 1 << i
        far = np.zeros(lo)  # far[mask] = max_{j in mask} d(i, j) over masks of bits < i
        for j in range(i):
            m = 1 << j
            far[m : 2 * m] = np.maximum(far[:m], d[i, j])
        diam[lo : 2 * lo] = np.maximum(diam[:lo], far)
    return diam


def _subset_gap(d):
    """gap[mask, x] = min_{i in mask} d(i, x); +inf for the empty mask."""
    n = len(d)
    gap = np.full((1 << n, n), np.inf)
    for i in range(n):
        lo = 1 << i
        gap[lo : 2 * lo] = np.minimum(gap[:lo], d[i])
    return gap


def _bits(mask, n):
    return tuple(i for i in range(n) if mask >> i & 1)


# -- invariants -------------------------------------------------------------


def partial_diameter(mu, mass):
    """Smallest diameter of a set carrying at least ``mass``.

    ``mu`` is a :class:`FiniteMMSpace` or a :class:`PushforwardMeasure`.
    Returns 0 for ``mass <= 0`` (the empty set qualifies) and ``inf`` when
    no set reaches ``mass``.
    """
    mass = float(mass)
    if mass <= 0:
        return 0.0
    target = mass - MASS_TOL
    if isinstance(mu, PushforwardMeasure):
        _check_size(len(mu.values), MAX_PUSHFORWARD)
        order = np.argsort(mu.values, kind="stable")
        v = mu.values[order]
        w = mu.weights[order]
        # An optimal set is an interval of the sorted values.
        best = math.inf
        for i in range(len(v)):
            acc = 0.0
            for j in range(i, len(v)):
                acc += w[j]
                if acc >= target:
                    best = min(best, float(v[j] - v[i]))
                    break
        return best
    _check_size(mu.n)
    masses = _subset_mass(mu.weights)
    ok = masses >= target
    if not ok.any():
        return math.inf
    return float(_subset_diameter(mu.dist)[ok].min())


class Separation(NamedTuple):
    value: float
    first: tuple
    second: tuple
    attainable: bool


def separation(X: FiniteMMSpace, kappa1, kappa2) -> Separation:
    """Separation distance with the optimal pair of sets.

    For each candidate first set A1 (every subset with enough mass), the
    best A2 takes points in decreasing order of ``d(A1, x)`` until it has
    mass ``kappa2``; the gap is the last distance taken. When either mass
    threshold exceeds the total mass no pair qualifies and the result is
    0 with ``attainable=False``.
    """
    if kappa1 <= 0 or kappa2 <= 0:
        raise DomainError("mass thresholds must be positive")
    _check_size(X.n)
    n = X.n
    total = float(X.weights.sum())
    if kappa1 > total + MASS_TOL or kappa2 > total + MASS_TOL:
        return Separation(0.0, (), (), False)
    masses = _subset_mass(X.weights)
    cand = np.flatnonzero(masses >= kappa1 - MASS_TOL)
    cand = cand[cand != 0]
    gap = _subset_gap(X.dist)[cand]
    order = np.argsort(-gap, axis=1, kind="stable")
    sorted_gap = np.take_along_axis(gap, order, axis=1)
    cum = np.cumsum(X.weights[order], axis=1)
    stop = np.argmax(cum >= kappa2 - MASS_TOL, axis=1)
    rows = np.arange(len(cand))
    values = sorted_gap[rows, stop]
    k = int(np.argmax(values))
    first = _bits(int(cand[k]), n)
    second = tuple(sorted(int(i) for i in order[k, : stop[k] + 1]))
    return Separation(float(values[k]), first, second, True)


def separation_distance(X, kappa1, kappa2):
    return separation(X, kappa1, kappa2).value


def closed_ball_radius(dists, weights, level):
    """Smallest ``rho`` whose closed ball holds mass ``>= level``."""
    if level <= MASS_TOL:
        return 0.0
    order = np.argsort(dists, kind="stable")
    cum = np.cumsum(np.asarray(weights)[order])
    hit = np.flatnonzero(cum >= level - MASS_TOL)
    if hit.size == 0:
        return math.inf
    return float(np.asarray(dists)[order][hit[0]])


def central_radius(nu, kappa):
    """Radius of the smallest closed ball about the barycenter with mass ``1 - kappa``.

    ``nu`` is a :class:`~catzero.measures.FiniteMeasure` or a
    :class:`PushforwardMeasure`; the barycenter of a real pushforward is
    its mean.
    """
    if not 0 < kappa <= 1:
        raise DomainError("kappa must lie in (0, 1]")
    if isinstance(nu, PushforwardMeasure):
        dists = np.abs(nu.values - nu.mean())
        return closed_ball_radius(dists, nu.weights, 1.0 - kappa)
    from .means import barycenter

    space = nu.space
    b = barycenter(nu).point
    dists = space.batch_distance(space.pack([b]), nu.packed)
    return closed_ball_radius(dists, nu.weights, 1.0 - kappa)


def concentration_function(X: FiniteMMSpace, r):
    """``sup { mu(X \\ A_r) : mu(A) >= 1/2 }`` with ``A_r`` the open r-neighbourhood."""
    if r <= 0:
        raise DomainError("r must be positive")
    _check_size(X.n)
    n = X.n
    near = [int(sum(1 << j for j in range(n) if X.dist[i, j] < r)) for i in range(n)]
    nbhd = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        lo = 1 << i
        nbhd[lo : 2 * lo] = nbhd[:lo] | near[i]
    masses = _subset_mass(X.weights)
    full = (1 << n) - 1
    ok = masses >= 0.5 - MASS_TOL
    outside = masses[full ^ nbhd[ok]]
    return float(max(outside.max(initial=0.0), 0.0))


def is_lipschitz(X: FiniteMMSpace, values, const=1.0, tol=1e-12):
    values = np.asarray(values, dtype=float)
    return bool(np.all(np.abs(values[:, None] - values[None, :]) <= const * X.dist + tol))


def witness_functions(X: FiniteMMSpace, kappa):
    """1-Lipschitz test functions used for observable-diameter lower bounds.

    Distance to each set of an optimal ``Sep(X; kappa, kappa)`` pair, and
    distance to every single point.
    """
    sep = separation(X, kappa, kappa)
    out = []
    for s in (sep.first, sep.second):
        if s:
            out.append(X.dist[list(s)].min(axis=0))
    out.extend(X.dist[i].copy() for i in range(X.n))
    return out


class ObsDiamBound(NamedTuple):
    bound: float
    witness: np.ndarray


def obsdiam_witness_lower_bound(X: FiniteMMSpace, kappa, kappa_prime) -> ObsDiamBound:
    """Lower bound on the observable diameter ``ObsDiam_R(X; -kappa')``.

    Evaluates ``diam(f_* mu, 1 - kappa')`` for each witness ``f`` and keeps
    the largest. Exact computation would need a supremum over all
    1-Lipschitz functions.
    """
    if not kappa > kappa_prime > 0:
        raise DomainError("need kappa > kappa' > 0")
    _check_size(X.n)
    best = (-math.inf, None)
    for f in witness_functions(X, kappa):
        if not is_lipschitz(X, f):
            raise AssertionError("witness function is not 1-Lipschitz")
        val = partial_diameter(pushforward(X, f), 1.0 - kappa_prime)
        if val > best[0]:
            best = (val, f)
    return ObsDiamBound(float(best[0]), best[1])
