"""Monte Carlo experiments on inductive means of i.i.d. samples.

Trial ``t`` draws its ``n`` samples from stream positions ``t*n .. t*n+n-1``
of a counter-based generator keyed by the experiment seed. Trials are
processed in fixed-size blocks whose boundaries depend only on ``n``, so
every trial is computed by the same array operations whatever the number
of workers. Aggregates are integer counts or ``math.fsum`` sums, both
order independent, which makes reports bit-identical across worker counts.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np
from scipy import stats

from . import bounds
from .errors import DomainError
from .invariants import closed_ball_radius
from .means import barycenter, inductive_mean_batch
from .measures import FiniteMeasure, atom_index, counter_uniforms, second_moment, support_diameter
from .spaces import Euclidean, Hyperboloid, MetricTree

BLOCK_DRAWS = 1 << 25
UNIFORM_CHUNK = 1 << 20
MAX_BLOCK_TRIALS = 16384


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    measure: FiniteMeasure
    n: int
    trials: int
    r_grid: tuple = (0.0,)
    seed: int = 0
    confidence: float = 0.99

    def __post_init__(self):
        object.__setattr__(self, "r_grid", tuple(float(r) for r in self.r_grid))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError("trials must be a positive integer")
        if any(r < 0 for r in self.r_grid) or list(self.r_grid) != sorted(self.r_grid):
            raise DomainError("r_grid must be sorted ascending and nonnegative")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if not 0 < self.confidence < 1:
            raise DomainError("confidence must lie in (0, 1)")

    def describe(self):
        """JSON-friendly summary (the measure is summarised, not embedded)."""
        return {
            "space": repr(self.measure.space),
            "atoms": len(self.measure),
            "n": self.n,
            "trials": self.trials,
            "r_grid": list(self.r_grid),
            "seed": self.seed,
            "confidence": self.confidence,
        }


def block_size(n):
    return max(1, min(MAX_BLOCK_TRIALS, BLOCK_DRAWS // n))


def _simulate_block(space, atoms, cumulative, n, seed, bounds_):
    start, stop = bounds_
    index = np.empty((stop - start, n), dtype=np.min_scalar_type(len(atoms)))
    rows = max(1, UNIFORM_CHUNK // n)
    for lo in range(start, stop, rows):
        hi = min(lo + rows, stop)
        u = counter_uniforms(seed, lo * n, (hi - lo) * n).reshape(hi - lo, n)
        index[lo - start : hi - start] = atom_index(cumulative, u)
    return inductive_mean_batch(space, atoms, index)


def _run_blocks(func, trials, size, workers):
    blocks = [(s, min(s + size, trials)) for s in range(0, trials, size)]
    if workers is None or workers <= 1 or len(blocks) == 1:
        return [func(b) for b in blocks]
    with ProcessPoolExecutor(max_workers=min(workers, len(blocks))) as pool:
        return list(pool.map(func, blocks))


def simulate_inductive_means(measure, n, trials, seed, workers=1):
    """Packed inductive means ``s_n(Y_1, ..., Y_n)``, one row per trial."""
    func = partial(
        _simulate_block, measure.space, np.asarray(measure.packed), np.asarray(measure.cumulative), n, seed
    )
    return np.concatenate(_run_blocks(func, trials, block_size(n), workers))


def clopper_pearson(k, trials, confidence):
    """Exact two-sided binomial confidence interval for ``k`` successes."""
    alpha = 1.0 - confidence
    lo = 0.0 if k == 0 else float(stats.beta.ppf(alpha / 2, k, trials - k + 1))
    hi = 1.0 if k == trials else float(stats.beta.ppf(1 - alpha / 2, k + 1, trials - k))
    return lo, hi


def manifold_dimension(space):
    if isinstance(space, (Hyperboloid, Euclidean)):
        return space.dim
    return None


def theory_bound(space, n, r, diam):
    if isinstance(space, MetricTree):
        return bounds.rtree_tail_bound(n, r, diam)
    return bounds.hadamard_tail_bound(n, r, diam, manifold_dimension(space))


def _point_json(space, p):
    return [float(x) for x in space.pack([p])[0]]


# -- tail experiment ----------------------------------------------------------


@dataclass(frozen=True)
class TailRow:
    r: float
    exceed_count: int
    empirical: float
    ci_low: float
    ci_high: float
    bound: float

    @property
    def dominated(self):
        """The theory bound is not contradicted: it is at least ``ci_low``."""
        return self.bound >= self.ci_low


CSV_COLUMNS = ("r", "exceed_count", "empirical", "ci_low", "ci_high", "bound")


def _fmt(x):
    return str(x) if isinstance(x, int) else format(x, ".17g")


@dataclass(frozen=True)
class TailReport:
    rows: tuple
    diameter: float
    space_kind: str
    barycenter: tuple
    n: int
    trials: int
    seed: int
    confidence: float
    bound_name: str
    dimension: int | None = None
    extra: dict = field(default_factory=dict, compare=True)

    @property
    def violations(self):
        return [row.r for row in self.rows if not row.dominated]

    @property
    def passed(self):
        return not self.violations

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_dict(self):
        d = asdict(self)
        d["rows"] = [asdict(r) for r in self.rows]
        d["barycenter"] = list(self.barycenter)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["rows"] = tuple(TailRow(**r) for r in d["rows"])
        d["barycenter"] = tuple(d["barycenter"])
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def run_tail_experiment(cfg: ExperimentConfig, workers=1) -> TailReport:
    """Estimate ``P(d(s_n, b(nu)) >= r)`` for every ``r`` in the grid.

    Each row carries the exceedance count, a Clopper-Pearson interval at
    ``cfg.confidence`` and the matching theory bound (R-tree bound on
    trees, Hadamard bound with ``m`` = dimension otherwise).
    """
    if not cfg.r_grid:
        raise DomainError("r_grid is empty")
    measure = cfg.measure
    space = measure.space
    b = barycenter(measure).point
    diam = support_diameter(measure)
    cloud = simulate_inductive_means(measure, cfg.n, cfg.trials, cfg.seed, workers)
    dist = space.batch_distance(cloud, space.pack([b]))
    rows = []
    for r in cfg.r_grid:
        k = int(np.count_nonzero(dist >= r))
        lo, hi = clopper_pearson(k, cfg.trials, cfg.confidence)
        rows.append(TailRow(r, k, k / cfg.trials, lo, hi, theory_bound(space, cfg.n, r, diam)))
    return TailReport(
        rows=tuple(rows),
        diameter=diam,
        space_kind=space.kind,
        barycenter=tuple(_point_json(space, b)),
        n=cfg.n,
        trials=cfg.trials,
        seed=cfg.seed,
        confidence=cfg.confidence,
        bound_name="rtree" if isinstance(space, MetricTree) else "hadamard",
        dimension=manifold_dimension(space),
    )


# -- second-moment inequality ---------------------------------------------------


@dataclass(frozen=True)
class SturmCheck:
    lhs_estimate: float
    lhs_ci: tuple
    rhs_exact: float
    sample_variance: float

    @property
    def holds(self):
        return self.rhs_exact >= self.lhs_ci[0]


def _normal_z(confidence):
    return float(stats.norm.ppf(0.5 + confidence / 2.0))


def check_sturm_inequality(cfg: ExperimentConfig, workers=1) -> SturmCheck:
    """Compare ``E d(s_n, b)^2`` (sampled) with ``(1/n) int d(y, b)^2 dnu`` (exact).

    The interval on the left side is the normal approximation
    ``mean +- z * sqrt(sample variance / trials)``.
    """
    measure = cfg.measure
    space = measure.space
    b = barycenter(measure).point
    rhs = second_moment(measure, b) / cfg.n
    cloud = simulate_inductive_means(measure, cfg.n, cfg.trials, cfg.seed, workers)
    sq = space.batch_distance(cloud, space.pack([b])) ** 2
    mean = math.fsum(sq) / cfg.trials
    var = math.fsum((sq - mean) ** 2) / max(cfg.trials - 1, 1)
    half = _normal_z(cfg.confidence) * math.sqrt(var / cfg.trials)
    return SturmCheck(mean, (mean - half, mean + half), rhs, var)


# -- Lipschitz property ---------------------------------------------------------


def lipschitz_ratio_test(space, n, pairs, seed):
    """Largest ``d(s_n(x), s_n(y)) / d_l1(x, y)`` over random tuple pairs.

    Half of the pairs are independent tuples; the other half differ in a
    single random coordinate, where the ratio is typically closest to
    ``1/n``. Pairs with ``x == y`` are skipped.
    """
    if n < 1 or pairs < 1:
        raise DomainError("n and pairs must be positive")
    rng = np.random.default_rng(seed)
    x = space.pack(space.random_points(rng, pairs * n)).reshape(pairs, n, -1)
    y = space.pack(space.random_points(rng, pairs * n)).reshape(pairs, n, -1)
    local = np.arange(pairs) % 2 == 1
    changed = rng.integers(0, n, size=pairs)
    copy = local[:, None] & (np.arange(n)[None, :] != changed[:, None])
    y = np.where(copy[..., None], x, y)
    c = x.shape[-1]
    flat_x = x.reshape(pairs * n, c)
    flat_y = y.reshape(pairs * n, c)
    l1 = space.batch_distance(flat_x, flat_y).reshape(pairs, n).sum(axis=1)
    index = np.arange(pairs * n).reshape(pairs, n)
    sx = inductive_mean_batch(space, flat_x, index)
    sy = inductive_mean_batch(space, flat_y, index)
    d = space.batch_distance(sx, sy)
    ok = l1 > 0
    if not ok.any():
        return 0.0
    return float(np.max(d[ok] / l1[ok]))


# -- central radius and mean drift ----------------------------------------------


def _cloud_barycenter(space, cloud):
    from .measures import make_measure

    uniq, counts = np.unique(cloud, axis=0, return_counts=True)
    points = space.unpack(uniq)
    return barycenter(make_measure(space, zip(points, counts / counts.sum()))).point


@dataclass(frozen=True)
class CradEstimate:
    kappa: float
    empirical: float | None
    lower: float | None
    bound: float
    computed: bool

    @property
    def holds(self):
        return not self.computed or self.lower <= self.bound


def estimate_crad_of_mean(cfg: ExperimentConfig, kappas, workers=1):
    """Empirical central radius of the law of ``s_n`` against its bound.

    The barycenter of the simulated ``s_n`` cloud stands in for the
    barycenter of the law. ``lower`` is a distribution-free lower
    confidence limit for the quantile (an order statistic chosen with the
    binomial distribution). Levels with ``kappa * trials < 50`` are not
    computed.
    """
    measure = cfg.measure
    space = measure.space
    diam = support_diameter(measure)
    cloud = simulate_inductive_means(measure, cfg.n, cfg.trials, cfg.seed, workers)
    b = _cloud_barycenter(space, cloud)
    dist = np.sort(space.batch_distance(cloud, space.pack([b])))
    w = np.full(len(dist), 1.0 / len(dist))
    out = []
    for kappa in kappas:
        bound = bounds.crad_bound(cfg.n, kappa, diam) if diam > 0 else 0.0
        if kappa * cfg.trials < 50:
            out.append(CradEstimate(kappa, None, None, bound, False))
            continue
        emp = closed_ball_radius(dist, w, 1.0 - kappa)
        rank = int(stats.binom.ppf(1.0 - cfg.confidence, cfg.trials, 1.0 - kappa))
        lower = float(dist[max(rank, 1) - 1])
        out.append(CradEstimate(kappa, emp, min(lower, emp), bound, True))
    return out


@dataclass(frozen=True)
class DriftEstimate:
    estimate: float
    slack: float
    bound: float

    @property
    def holds(self):
        return self.estimate <= self.bound + self.slack


def estimate_mean_drift(cfg: ExperimentConfig, workers=1) -> DriftEstimate:
    """Distance from the expected inductive mean to ``b(nu)``, with its bound.

    The expected inductive mean is estimated by the barycenter of the
    simulated cloud; ``slack`` is ``z * sqrt(mean squared spread / trials)``.
    """
    if cfg.trials < 1000:
        raise DomainError("mean drift needs at least 1000 trials")
    measure = cfg.measure
    space = measure.space
    b = barycenter(measure).point
    diam = support_diameter(measure)
    cloud = simulate_inductive_means(measure, cfg.n, cfg.trials, cfg.seed, workers)
    mean_point = _cloud_barycenter(space, cloud)
    spread = space.batch_distance(cloud, space.pack([mean_point])) ** 2
    slack = _normal_z(cfg.confidence) * math.sqrt(math.fsum(spread) / cfg.trials / cfg.trials)
    return DriftEstimate(space.distance(mean_point, b), slack, bounds.mean_drift_bound(cfg.n, diam))


# -- product concentration ------------------------------------------------------


@dataclass(frozen=True)
class ProductRow:
    r: float
    exceed_count: int
    empirical: float
    ci_low: float
    ci_high: float
    bound: float

    @property
    def dominated(self):
        return self.bound >= self.ci_low


@dataclass(frozen=True)
class ProductConcentrationReport:
    diameters: tuple
    trials: int
    seed: int
    rows: tuple

    @property
    def passed(self):
        return all(r.dominated for r in self.rows)


def check_product_concentration(diameters, trials, r_grid, seed, confidence=0.99):
    """Tail of ``|f - E f|`` for ``f = sum x_i`` on a product of two-point spaces.

    Factor ``i`` is ``{0, D_i}`` with equal weights; ``f`` is 1-Lipschitz for
    the l1 metric and ``E f = sum D_i / 2``.
    """
    diam = np.asarray([float(d) for d in diameters])
    if diam.size == 0 or np.any(diam <= 0):
        raise DomainError("diameters must be positive")
    k = diam.size
    centred = diam / 2.0
    size = max(1, UNIFORM_CHUNK // k)
    dev = []
    for start in range(0, trials, size):
        stop = min(start + size, trials)
        u = counter_uniforms(seed, start * k, (stop - start) * k).reshape(stop - start, k)
        signs = np.where(u < 0.5, -1.0, 1.0)
        dev.append(np.abs(signs @ centred))
    dev = np.concatenate(dev)
    rows = []
    for r in r_grid:
        c = int(np.count_nonzero(dev >= r))
        lo, hi = clopper_pearson(c, trials, confidence)
        rows.append(ProductRow(float(r), c, c / trials, lo, hi, bounds.ledoux_deviation_bound(r, diam)))
    return ProductConcentrationReport(tuple(diam.tolist()), trials, seed, tuple(rows))
