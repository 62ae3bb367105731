"""Randomized invariant suites behind ``catzero verify``.

Each suite draws its instances from a generator seeded by the suite seed,
evaluates one family of inequalities and returns per-space pass counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import montecarlo as mc
from .invariants import (
    FiniteMMSpace,
    central_radius,
    obsdiam_witness_lower_bound,
    partial_diameter,
    pushforward,
    separation_distance,
    witness_functions,
)
from .means import support_proximity_slack, variance_slack
from .measures import make_measure, uniform_measure
from .spaces import (
    Euclidean,
    Hyperboloid,
    MetricTree,
    Tripod,
    cat0_midpoint_slack,
    geodesic_convexity_slack,
)

SLACK_TOL = 1e-9
FLAT_TOL = 1e-10
HYPERBOLOID_SCALE = 2.0

SUITES = ("cat0", "convexity", "lipschitz", "variance", "sturm", "invariants", "crad", "drift")


@dataclass
class SuiteResult:
    name: str
    counts: dict = field(default_factory=dict)  # label -> [passed, total]
    failures: list = field(default_factory=list)

    def record(self, label, ok, detail=None):
        c = self.counts.setdefault(label, [0, 0])
        c[0] += bool(ok)
        c[1] += 1
        if not ok and detail is not None and len(self.failures) < 20:
            self.failures.append(f"{label}: {detail}")

    @property
    def passed(self):
        return sum(c[0] for c in self.counts.values())

    @property
    def total(self):
        return sum(c[1] for c in self.counts.values())

    @property
    def ok(self):
        return self.passed == self.total

    def summary(self):
        lines = [f"{self.name}: {self.passed}/{self.total} pass"]
        for label, (p, t) in self.counts.items():
            lines.append(f"  {label}: {p}/{t}")
        lines.extend(f"  FAIL {f}" for f in self.failures)
        return "\n".join(lines)


# -- random instances ---------------------------------------------------------


def random_tree(rng, vertices=10, min_length=0.2, max_length=2.0):
    """Random recursive tree: vertex ``k`` hangs off a uniformly chosen earlier vertex."""
    edges = [
        (int(rng.integers(0, k)), k, float(rng.uniform(min_length, max_length)))
        for k in range(1, vertices)
    ]
    return MetricTree(range(vertices), edges)


def suite_spaces(rng):
    """The three geodesic spaces every suite runs on, with their sampling scale."""
    return [
        ("tree", random_tree(rng), 1.0),
        ("hyperboloid", Hyperboloid(2), HYPERBOLOID_SCALE),
        ("euclidean", Euclidean(3), 1.0),
    ]


def random_measure(space, rng, max_atoms=8, scale=1.0):
    k = int(rng.integers(1, max_atoms + 1))
    points = space.random_points(rng, k, scale)
    weights = rng.dirichlet(np.ones(k))
    return make_measure(space, zip(points, weights / weights.sum()))


def random_mm_space(rng, n=None, max_n=10):
    """Random finite mm-space: planar points or a tree metric, Dirichlet weights."""
    if n is None:
        n = int(rng.integers(1, max_n + 1))
    w = rng.dirichlet(np.ones(n))
    w = w / w.sum()
    if n == 1 or rng.uniform() < 0.5:
        return FiniteMMSpace.from_points(rng.uniform(0, 1, size=(n, 2)), w)
    tree = random_tree(rng, n)
    d = np.array([[tree.vertex_distance(a, b) for b in range(n)] for a in range(n)])
    return FiniteMMSpace(d, w)


def tripod_leaves():
    t = Tripod()
    return uniform_measure(t, [t.branch_point(i, 1.0) for i in (1, 2, 3)])


def hyperbolic_triangle(radius=0.5, dim=2):
    """Uniform measure on three points at distance ``radius`` from the origin, 120 degrees apart."""
    h = Hyperboloid(dim)
    pts = []
    for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3):
        spatial = np.zeros(dim)
        spatial[:2] = math.sinh(radius) * math.cos(a), math.sinh(radius) * math.sin(a)
        pts.append(h.lift(spatial))
    return uniform_measure(h, pts)


def fair_coin(dim=1):
    e = Euclidean(dim)
    one = np.zeros(dim)
    one[0] = 1.0
    return uniform_measure(e, [np.zeros(dim), one])


# -- geometry suites ----------------------------------------------------------


def suite_cat0(seed, count=10_000, **_):
    rng = np.random.default_rng(seed)
    res = SuiteResult("cat0")
    for label, space, scale in suite_spaces(rng):
        x, y, z = (space.random_points(rng, count, scale) for _ in range(3))
        for a, b, c in zip(x, y, z):
            s = cat0_midpoint_slack(space, a, b, c)
            ok = abs(s) <= FLAT_TOL if label == "euclidean" else s >= -SLACK_TOL
            res.record(label, ok, f"slack {s:.3e}")
    return res


def suite_convexity(seed, count=10_000, **_):
    rng = np.random.default_rng(seed)
    res = SuiteResult("convexity")
    for label, space, scale in suite_spaces(rng):
        g0, g1, h0, h1 = (space.random_points(rng, count, scale) for _ in range(4))
        ts = rng.uniform(size=count)
        for a, b, c, d, t in zip(g0, g1, h0, h1, ts):
            s = geodesic_convexity_slack(space, (a, b), (c, d), float(t))
            res.record(label, s >= -SLACK_TOL, f"slack {s:.3e}")
    return res


def suite_lipschitz(seed, pairs=1000, max_n=16, **_):
    rng = np.random.default_rng(seed)
    res = SuiteResult("lipschitz")
    for label, space, scale in suite_spaces(rng):
        for n in range(1, max_n + 1):
            ratio = mc.lipschitz_ratio_test(space, n, pairs, int(rng.integers(2**63)))
            res.record(label, ratio <= 1.0 / n + SLACK_TOL, f"n={n} ratio {ratio:.6g}")
    return res


def suite_variance(seed, count=1000, **_):
    rng = np.random.default_rng(seed)
    res = SuiteResult("variance")
    for label, space, scale in suite_spaces(rng):
        for _ in range(count):
            nu = random_measure(space, rng, scale=scale)
            z = space.random_points(rng, 1, scale)[0]
            v = variance_slack(nu, z)
            ok = abs(v) <= FLAT_TOL if label == "euclidean" else v >= -SLACK_TOL
            res.record(f"{label} variance", ok, f"slack {v:.3e}")
            p = support_proximity_slack(nu)
            res.record(f"{label} support", p >= -SLACK_TOL, f"slack {p:.3e}")
    return res


# -- Monte Carlo suites -------------------------------------------------------


def suite_sturm(seed, trials=10_000, ns=(1, 2, 5, 10, 50), workers=1, **_):
    res = SuiteResult("sturm")
    for label, nu in (("tree", tripod_leaves()), ("hyperboloid", hyperbolic_triangle())):
        for n in ns:
            chk = mc.check_sturm_inequality(mc.ExperimentConfig(nu, n, trials, seed=seed), workers)
            res.record(label, chk.holds, f"n={n} lhs {chk.lhs_ci} rhs {chk.rhs_exact}")
    nu = fair_coin()
    for n in ns:
        chk = mc.check_sturm_inequality(mc.ExperimentConfig(nu, n, trials, seed=seed), workers)
        target = 1.0 / (4 * n)
        ok = chk.lhs_ci[0] <= target <= chk.lhs_ci[1] and abs(chk.rhs_exact - target) <= 1e-15
        res.record("euclidean", ok, f"n={n} lhs {chk.lhs_ci} target {target}")
    return res


def suite_crad(seed, trials=10_000, ns=(25, 100), kappas=(0.1, 0.25, 0.5), workers=1, **_):
    res = SuiteResult("crad")
    nu = tripod_leaves()
    for n in ns:
        for est in mc.estimate_crad_of_mean(mc.ExperimentConfig(nu, n, trials, seed=seed), kappas, workers):
            res.record("tree", est.computed and est.holds, f"n={n} kappa={est.kappa} {est.lower} > {est.bound}")
    return res


def suite_drift(seed, trials=10_000, ns=(25, 100), workers=1, **_):
    res = SuiteResult("drift")
    nu = tripod_leaves()
    for n in ns:
        est = mc.estimate_mean_drift(mc.ExperimentConfig(nu, n, trials, seed=seed), workers)
        res.record("tree", est.holds, f"n={n} {est.estimate} > {est.bound} + {est.slack}")
    return res


# -- mm-space suite -----------------------------------------------------------

SEP_KAPPAS = (0.1, 0.2, 0.3, 0.4)
HALF_KAPPAS = (0.5, 0.6, 0.75, 0.9, 1.0)


def _line_space(values, weights):
    """Finite subset of the real line carrying the pushforward of ``weights``."""
    uniq, inv = np.unique(np.asarray(values), return_inverse=True)
    w = np.bincount(inv, weights=weights)
    return FiniteMMSpace(np.abs(uniq[:, None] - uniq[None, :]), w / w.sum())


def check_mm_space(X, rng, res, tol=1e-12):
    """Run the mm-invariant lemmas on one space, recording into ``res``."""
    for k1 in HALF_KAPPAS:
        for k2 in HALF_KAPPAS:
            if k2 > 0.5:
                s = separation_distance(X, k1, k2)
                res.record("sep vanishes", s == 0.0, f"Sep({k1},{k2}) = {s}")
    for k in SEP_KAPPAS:
        sep = separation_distance(X, k, k)
        ob = obsdiam_witness_lower_bound(X, k, k / 2)
        res.record("witness >= sep", ob.bound >= sep - tol, f"kappa={k} {ob.bound} < {sep}")
        for f in witness_functions(X, k):
            nu = pushforward(X, f)
            pd = partial_diameter(nu, 1.0 - k)
            cr = central_radius(nu, k)
            res.record("diam <= 2 crad", pd <= 2 * cr + tol, f"kappa={k} {pd} > 2*{cr}")
    for alpha in (0.5, 2.0):
        scaled = FiniteMMSpace(alpha * X.dist, X.weights)
        x0 = int(rng.integers(X.n))
        image = _line_space(alpha * X.dist[x0], X.weights)
        for k1 in SEP_KAPPAS:
            for k2 in SEP_KAPPAS:
                base = separation_distance(X, k1, k2)
                for Y in (scaled, image):
                    s = separation_distance(Y, k1, k2)
                    res.record("lipschitz image", s <= alpha * base + tol, f"alpha={alpha} {s} > {alpha}*{base}")


def suite_invariants(seed, count=20, max_n=10, **_):
    rng = np.random.default_rng(seed)
    res = SuiteResult("invariants")
    for _ in range(count):
        check_mm_space(random_mm_space(rng, max_n=max_n), rng, res)
    return res


RUNNERS = {
    "cat0": suite_cat0,
    "convexity": suite_convexity,
    "lipschitz": suite_lipschitz,
    "variance": suite_variance,
    "sturm": suite_sturm,
    "invariants": suite_invariants,
    "crad": suite_crad,
    "drift": suite_drift,
}


def run_suite(name, seed, workers=1, **kwargs):
    return RUNNERS[name](seed, workers=workers, **kwargs)
