"""Inductive means and barycenters.

The inductive mean of ``y1, ..., yn`` is built one point at a time:
``s1 = y1`` and ``sk`` is the point at parameter ``1/k`` on the geodesic
from ``s(k-1)`` to ``yk``. In a non-linear space it depends on the order
of the points. The barycenter of a measure is the unique minimizer of
``x -> sum_i w_i d(x, y_i)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, UnsupportedOperationError
from .measures import FiniteMeasure, second_moment, support_diameter
from .spaces import Euclidean, Hyperboloid, MetricTree, TreePoint, minkowski

KARCHER_TOL = 1e-12
KARCHER_MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class BarycenterResult:
    point: object
    objective: float
    iterations: int
    converged: bool


def inductive_mean(space, points):
    points = list(points)
    if not points:
        raise DomainError("the inductive mean of an empty sequence is undefined")
    s = space.validate(points[0])
    for k, y in enumerate(points[1:], start=2):
        s = space.geodesic_point(s, y, 1.0 / k)
    return s


def inductive_mean_batch(space, atoms, index):
    """Inductive means of many sequences at once.

    Parameters
    ----------
    space : GeodesicSpace
    atoms : ndarray, shape (A, c)
        Packed points the sequences are drawn from.
    index : ndarray of int, shape (k, n)
        Row ``j`` lists the atoms of sequence ``j`` in order.

    Returns
    -------
    ndarray, shape (k, c)
        Packed inductive means.
    """
    atoms = np.asarray(atoms, dtype=float)
    index = np.asarray(index)
    if index.ndim != 2 or index.shape[1] == 0:
        raise DomainError("index must be a (sequences, length >= 1) array")
    s = atoms[index[:, 0]]
    for i in range(1, index.shape[1]):
        s = space.batch_geodesic(s, atoms[index[:, i]], 1.0 / (i + 1))
    return s


# -- barycenters ------------------------------------------------------------


def _tree_barycenter(tree, packed, weights):
    """Exact minimizer of the second moment on a finite tree.

    On an edge ``[u, v]`` of length L, an atom that is not on the edge lies
    behind u or behind v, so its distance to the point at offset ``x`` is
    ``x + d(u, y)`` or ``L - x + d(v, y)``; an atom on the edge is at
    ``|x - a|``. The objective is therefore ``sum_i w_i (x - c_i)^2`` for
    fixed centres ``c_i``, minimized at the clipped weighted mean.
    """
    edges = packed[:, 0].astype(np.intp)
    offsets = packed[:, 1]
    best = None
    for e in range(tree.num_edges):
        u, v, length = tree._eu[e], tree._ev[e], tree._len[e]
        du = tree.distances_from_vertex(u, packed)
        dv = tree.distances_from_vertex(v, packed)
        c = np.where(edges == e, offsets, np.where(du <= dv, -du, length + dv))
        x = min(max(float(np.dot(weights, c)), 0.0), float(length))
        obj = float(np.dot(weights, (x - c) ** 2))
        if best is None or obj < best[0]:
            best = (obj, e, x)
    return tree.validate(TreePoint(best[1], best[2]))


def _karcher(space, packed, weights, tol, max_iter):
    x = packed[int(np.argmax(weights))].copy()
    grad_norm = np.inf
    best = (np.inf, x)
    for it in range(max_iter + 1):
        logs = space.batch_log(x, packed)
        grad = weights @ logs
        grad_norm = float(np.sqrt(max(minkowski(grad, grad), 0.0)))
        if grad_norm < best[0]:
            best = (grad_norm, x)
        if grad_norm <= tol:
            return space.validate(x), it, True
        if it == max_iter:
            break
        # Step by the inverse of the weighted bound d coth d on the Hessian of d^2/2.
        d = np.sqrt(np.maximum(minkowski(logs, logs), 0.0))
        curv = np.ones_like(d)
        nz = d > 1e-8
        curv[nz] = d[nz] / np.tanh(d[nz])
        x = np.array(space.exp_map(x, grad / float(weights @ curv)))
    raise ConvergenceError(
        f"Karcher iteration did not reach gradient norm {tol} in {max_iter} steps "
        f"(best {best[0]:.3e})",
        best=space.validate(best[1]),
    )


def barycenter(measure: FiniteMeasure, tol=KARCHER_TOL, max_iter=KARCHER_MAX_ITER) -> BarycenterResult:
    """Barycenter of a finitely supported measure.

    Exact on trees and Euclidean spaces. On the hyperboloid, runs the
    fixed-point iteration ``x <- exp_x(tau * sum_i w_i log_x(y_i))`` from
    the heaviest atom until the Riemannian gradient norm is ``<= tol``.
    The step ``tau = 1 / sum_i w_i d_i coth(d_i)`` is 1 for tight clusters
    and shrinks for spread-out ones, where the unit step overshoots.

    Raises
    ------
    ConvergenceError
        If the hyperboloid iteration does not converge; ``.best`` holds
        the iterate with the smallest gradient norm.
    """
    space = measure.space
    weights = measure.weights
    iterations = 0
    if len(measure) == 1:
        point = measure.points[0]
    elif isinstance(space, Euclidean):
        point = space.validate(weights @ measure.packed)
    elif isinstance(space, MetricTree):
        point = _tree_barycenter(space, measure.packed, weights)
    elif isinstance(space, Hyperboloid):
        point, iterations, _ = _karcher(space, measure.packed, weights, tol, max_iter)
    else:
        raise UnsupportedOperationError(f"no barycenter solver for {space!r}")
    return BarycenterResult(point, second_moment(measure, point), iterations, True)


def expectation(pushforward: FiniteMeasure):
    """Expectation of a space-valued random variable, given its law."""
    return barycenter(pushforward).point


def variance_slack(measure, z, bary=None):
    """``int d(z,x)^2 - d(b,x)^2 dnu(x) - d(z,b)^2``; nonnegative in CAT(0)."""
    b = barycenter(measure).point if bary is None else bary
    space = measure.space
    return second_moment(measure, z) - second_moment(measure, b) - space.distance(z, b) ** 2


def support_proximity_slack(measure, bary=None):
    """``diam(supp nu) - d(b(nu), supp nu)``."""
    b = barycenter(measure).point if bary is None else bary
    space = measure.space
    nearest = float(np.min(space.batch_distance(space.pack([b]), measure.packed)))
    return support_diameter(measure) - nearest
