"""Finite metric trees (R-trees with finitely many edges)."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidPointError, ValidationError
from .base import GeodesicSpace


@dataclass(frozen=True, order=True)
class TreePoint:
    """A point on edge ``edge`` at distance ``offset`` from the edge's first endpoint."""

    edge: int
    offset: float


class MetricTree(GeodesicSpace):
    """A finite tree with positive edge lengths and its path metric.

    Parameters
    ----------
    vertices : sequence of hashable
        Vertex ids, unique.
    edges : sequence of (u, v, length)
        Edge ``i`` joins ``u`` to ``v``; offsets on it are measured from ``u``.

    Points off the vertex set are :class:`TreePoint` instances. A point
    sitting on a vertex is stored on the incident edge with the smallest
    index, so every point has exactly one representation.
    """

    kind = "tree"

    def __init__(self, vertices, edges):
        vertices = list(vertices)
        if not vertices:
            raise ValidationError("a tree needs at least one vertex")
        index = {}
        for v in vertices:
            if v in index:
                raise ValidationError(f"duplicate vertex id {v!r}")
            index[v] = len(index)
        if len(edges) != len(vertices) - 1:
            raise ValidationError(
                f"a tree on {len(vertices)} vertices has {len(vertices) - 1} edges, got {len(edges)}"
            )
        if not edges:
            # A one-vertex tree has no place to put a TreePoint; reject it.
            raise ValidationError("a tree needs at least one edge")

        self.vertices = tuple(vertices)
        self._index = index
        nv = len(vertices)
        eu = np.empty(len(edges), dtype=np.intp)
        ev = np.empty(len(edges), dtype=np.intp)
        lengths = np.empty(len(edges), dtype=float)
        adj = [[] for _ in range(nv)]
        self._edge_lookup = {}
        for i, edge in enumerate(edges):
            try:
                u, v, length = edge
            except (TypeError, ValueError):
                raise ValidationError(f"edge {i} must be a (u, v, length) triple") from None
            if u not in index or v not in index:
                raise ValidationError(f"edge {i} references an unknown vertex")
            length = float(length)
            if not np.isfinite(length) or length <= 0:
                raise ValidationError(f"edge {i} has non-positive length {length!r}")
            iu, iv = index[u], index[v]
            if iu == iv:
                raise ValidationError(f"edge {i} is a loop")
            eu[i], ev[i], lengths[i] = iu, iv, length
            adj[iu].append((iv, i))
            adj[iv].append((iu, i))
            self._edge_lookup[(u, v)] = (i, False)
            self._edge_lookup[(v, u)] = (i, True)
        self.edges = tuple((vertices[a], vertices[b], float(c)) for a, b, c in zip(eu, ev, lengths))

        dist = np.full((nv, nv), np.inf)
        toward = np.full((nv, nv), -1, dtype=np.intp)  # toward[w, y]: neighbour of w on the path to y
        for root in range(nv):
            dist[root, root] = 0.0
            queue = deque([root])
            seen = {root}
            while queue:
                w = queue.popleft()
                for nb, e in adj[w]:
                    if nb in seen:
                        continue
                    seen.add(nb)
                    dist[root, nb] = dist[root, w] + lengths[e]
                    toward[nb, root] = w
                    queue.append(nb)
            if len(seen) != nv:
                raise ValidationError("edge list is not connected")
        # BFS from either end sums the path in a different order; keep one.
        dist = np.triu(dist) + np.triu(dist, 1).T
        edge_ids = np.arange(len(edges))
        edge_of = np.full((nv, nv), -1, dtype=np.intp)
        edge_of[eu, ev] = edge_ids
        edge_of[ev, eu] = edge_ids

        self._eu, self._ev, self._len = eu, ev, lengths
        self._dist, self._toward, self._edge_of = dist, toward, edge_of
        # Canonical home of each vertex: its incident edge of smallest index.
        first = np.full(nv, np.iinfo(np.intp).max, dtype=np.intp)
        np.minimum.at(first, eu, edge_ids)
        np.minimum.at(first, ev, edge_ids)
        self._first_edge = first
        self._vertex_point_cache = tuple(self._vertex_point_from_index(a) for a in range(nv))

    # -- construction helpers ------------------------------------------------

    def __repr__(self):
        return f"MetricTree(vertices={len(self.vertices)}, edges={len(self.edges)})"

    def __eq__(self, other):
        return (
            isinstance(other, MetricTree)
            and self.vertices == other.vertices
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.vertices, self.edges))

    @property
    def num_edges(self):
        return len(self.edges)

    def edge_length(self, edge):
        return float(self._len[edge])

    def edge_index(self, u, v):
        """Return ``(index, reversed)`` of the edge joining ``u`` and ``v``."""
        try:
            return self._edge_lookup[(u, v)]
        except KeyError:
            raise InvalidPointError(f"no edge joins {u!r} and {v!r}") from None

    def _vertex_point_from_index(self, a):
        e = int(self._first_edge[a])
        offset = 0.0 if self._eu[e] == a else float(self._len[e])
        return TreePoint(e, offset)

    def vertex_point(self, vertex):
        try:
            return self._vertex_point_cache[self._index[vertex]]
        except KeyError:
            raise InvalidPointError(f"unknown vertex {vertex!r}") from None

    def vertex_distance(self, u, v):
        return float(self._dist[self._index[u], self._index[v]])

    def point(self, edge, offset):
        return self.validate(TreePoint(edge, offset))

    # -- scalar kernels ------------------------------------------------------

    def validate(self, p):
        if isinstance(p, tuple) and not isinstance(p, TreePoint) and len(p) == 2:
            p = TreePoint(*p)
        if not isinstance(p, TreePoint):
            raise InvalidPointError(f"expected a TreePoint, got {type(p).__name__}")
        try:
            e = int(p.edge)
        except (TypeError, ValueError):
            raise InvalidPointError(f"edge id {p.edge!r} is not an integer") from None
        if e != p.edge or not 0 <= e < len(self.edges):
            raise InvalidPointError(f"unknown edge {p.edge!r}")
        length = self._len[e]
        a = float(p.offset)
        if not np.isfinite(a):
            raise InvalidPointError("offset must be finite")
        slack = 1e-12 * (1.0 + length)
        if a < -slack or a > length + slack:
            raise InvalidPointError(f"offset {a} outside [0, {length}] on edge {e}")
        if a <= 0.0:
            return self._vertex_point_cache[self._eu[e]]
        if a >= length:
            return self._vertex_point_cache[self._ev[e]]
        if type(p.edge) is int and type(p.offset) is float:
            return p
        return TreePoint(e, a)

    def key(self, p):
        p = self.validate(p)
        return (p.edge, p.offset)

    def _ends(self, p):
        """Endpoint vertices of p's edge with p's distance to each."""
        e = p.edge
        return (self._eu[e], self._ev[e]), (p.offset, self._len[e] - p.offset)

    def _route(self, p, q):
        (pu, pv), (dpu, dpv) = self._ends(p)
        (qu, qv), (dqu, dqv) = self._ends(q)
        D = self._dist
        best = None
        for x, dpx in ((pu, dpu), (pv, dpv)):
            for y, dqy in ((qu, dqu), (qv, dqv)):
                total = (dpx + dqy) + D[x, y]
                if best is None or total < best[0]:
                    best = (total, x, dpx, y, dqy)
        return best

    def distance(self, p, q):
        p = self.validate(p)
        q = self.validate(q)
        if p.edge == q.edge:
            return abs(p.offset - q.offset)
        return float(self._route(p, q)[0])

    def _geodesic(self, p, q, t):
        if p.edge == q.edge:
            return self.validate(TreePoint(p.edge, p.offset + t * (q.offset - p.offset)))
        d, x, dpx, y, dqy = self._route(p, q)
        s = t * d
        rem = (1.0 - t) * d
        if s <= dpx:
            off = p.offset - s if x == self._eu[p.edge] else p.offset + s
            return self.validate(TreePoint(p.edge, min(max(off, 0.0), self._len[p.edge])))
        if rem <= dqy:
            off = q.offset - rem if y == self._eu[q.edge] else q.offset + rem
            return self.validate(TreePoint(q.edge, min(max(off, 0.0), self._len[q.edge])))
        along = s - dpx
        D = self._dist
        w = x
        while True:
            nxt = self._toward[w, y]
            if D[x, nxt] >= along or nxt == y:
                e = self._edge_of[w, nxt]
                off = min(max(along - D[x, w], 0.0), self._len[e])
                if self._eu[e] != w:
                    off = self._len[e] - off
                return self.validate(TreePoint(int(e), float(off)))
            w = nxt

    def neighbours(self, p, h):
        """Points at distance ``h`` from ``p`` in every direction leaving ``p``.

        ``h`` must not exceed the distance from ``p`` to the nearest vertex
        other than ``p`` itself.
        """
        p = self.validate(p)
        e, a, length = p.edge, p.offset, self._len[p.edge]
        if 0.0 < a < length:
            return [TreePoint(e, a - h), TreePoint(e, a + h)]
        w = self._eu[e] if a == 0.0 else self._ev[e]
        out = []
        for f in np.flatnonzero((self._eu == w) | (self._ev == w)):
            f = int(f)
            out.append(self.validate(TreePoint(f, h if self._eu[f] == w else self._len[f] - h)))
        return out

    # -- batched kernels -----------------------------------------------------

    def pack(self, points):
        pts = [self.validate(p) for p in points]
        out = np.empty((len(pts), 2))
        for i, p in enumerate(pts):
            out[i] = (p.edge, p.offset)
        return out

    def unpack(self, packed):
        packed = np.asarray(packed, dtype=float).reshape(-1, 2)
        return [self.validate(TreePoint(int(e), float(a))) for e, a in packed]

    def _batch_route(self, P, Q):
        e1 = P[:, 0].astype(np.intp)
        e2 = Q[:, 0].astype(np.intp)
        a1, a2 = P[:, 1], Q[:, 1]
        nv = len(self.vertices)
        flat = self._dist.ravel()
        dp = (a1, self._len[e1] - a1)
        dq = (a2, self._len[e2] - a2)
        xs = (self._eu[e1], self._ev[e1])
        ys = (self._eu[e2], self._ev[e2])
        # Candidate routes leave p through endpoint xs[i] and enter q through ys[j].
        d = i = j = None
        for ii in (0, 1):
            row = xs[ii] * nv
            for jj in (0, 1):
                c = (dp[ii] + dq[jj]) + flat[row + ys[jj]]
                if d is None:
                    d = c
                    i = np.zeros(len(c), dtype=bool)
                    j = np.zeros(len(c), dtype=bool)
                else:
                    better = c < d
                    d = np.where(better, c, d)
                    i = np.where(better, bool(ii), i)
                    j = np.where(better, bool(jj), j)
        return (
            e1, a1, e2, a2, d,
            i, np.where(i, dp[1], dp[0]), np.where(i, xs[1], xs[0]),
            j, np.where(j, dq[1], dq[0]), np.where(j, ys[1], ys[0]),
        )

    def batch_distance(self, P, Q):
        P = np.atleast_2d(P)
        Q = np.atleast_2d(Q)
        P, Q = np.broadcast_arrays(P, Q)
        e1, a1, e2, a2, d, *_ = self._batch_route(P, Q)
        return np.where(e1 == e2, np.abs(a1 - a2), d)

    def batch_geodesic(self, P, Q, t):
        P = np.atleast_2d(P)
        Q = np.atleast_2d(Q)
        P, Q = np.broadcast_arrays(P, Q)
        t = np.broadcast_to(np.asarray(t, dtype=float), (len(P),))
        e1, a1, e2, a2, d, i, dpx, x, j, dqy, y = self._batch_route(P, Q)
        s = t * d
        rem = (1.0 - t) * d

        edge = np.empty(len(P), dtype=np.intp)
        off = np.empty(len(P))

        same = e1 == e2
        first = ~same & (s <= dpx)
        second = ~same & ~first & (rem <= dqy)
        middle = ~(same | first | second)

        edge[same] = e1[same]
        off[same] = a1[same] + t[same] * (a2[same] - a1[same])

        edge[first] = e1[first]
        off[first] = np.where(i[first], a1[first] + s[first], a1[first] - s[first])

        edge[second] = e2[second]
        off[second] = np.where(j[second], a2[second] + rem[second], a2[second] - rem[second])

        idx = np.flatnonzero(middle)
        if idx.size:
            along = s[idx] - dpx[idx]
            xm, ym = x[idx], y[idx]
            w = xm.copy()
            pending = np.ones(idx.size, dtype=bool)
            while pending.any():
                k = np.flatnonzero(pending)
                nxt = self._toward[w[k], ym[k]]
                stop = (self._dist[xm[k], nxt] >= along[k]) | (nxt == ym[k])
                done = k[stop]
                if done.size:
                    e = self._edge_of[w[done], nxt[stop]]
                    o = np.clip(along[done] - self._dist[xm[done], w[done]], 0.0, self._len[e])
                    o = np.where(self._eu[e] == w[done], o, self._len[e] - o)
                    edge[idx[done]] = e
                    off[idx[done]] = o
                    pending[done] = False
                w[k[~stop]] = nxt[~stop]
        off = np.clip(off, 0.0, self._len[edge])
        return np.column_stack([edge.astype(float), off])

    def distances_from_vertex(self, vertex_index, packed):
        """Distance from vertex (by internal index) to every packed point."""
        e = packed[:, 0].astype(np.intp)
        a = packed[:, 1]
        return np.minimum(
            self._dist[vertex_index, self._eu[e]] + a,
            self._dist[vertex_index, self._ev[e]] + self._len[e] - a,
        )

    def random_points(self, rng, k, scale=1.0):
        probs = self._len / self._len.sum()
        edges = rng.choice(len(self._len), size=k, p=probs)
        offs = rng.uniform(0.0, 1.0, size=k) * self._len[edges]
        snap = rng.uniform(size=k) < 0.1
        offs = np.where(snap, np.where(rng.uniform(size=k) < 0.5, 0.0, self._len[edges]), offs)
        return [self.validate(TreePoint(int(e), float(a))) for e, a in zip(edges, offs)]


class Tripod(MetricTree):
    """Three segments of equal length glued at a common origin.

    Vertex ``0`` is the origin and vertex ``i`` the far end of branch ``i``;
    branch ``i`` is edge ``i - 1``, directed away from the origin.
    """

    def __init__(self, length=1.0):
        super().__init__([0, 1, 2, 3], [(0, i, length) for i in (1, 2, 3)])
        self.length = float(length)

    def branch_point(self, branch, offset):
        if branch not in (1, 2, 3):
            raise InvalidPointError(f"tripod branches are 1, 2, 3; got {branch!r}")
        return self.validate(TreePoint(branch - 1, offset))

    def branch_of(self, p):
        """Return ``(branch, offset)``; the origin reports branch 0."""
        p = self.validate(p)
        if p.offset == 0.0:
            return 0, 0.0
        return p.edge + 1, p.offset

    @property
    def origin(self):
        return self.vertex_point(0)

    def __repr__(self):
        return f"Tripod(length={self.length})"
