"""Closed-form tail bounds and constants.

The evaluators return the raw formula values, which may exceed 1; they
are never clamped to probabilities. A support diameter of 0 is accepted
and treated as the limit ``D -> 0+`` (the tail vanishes for ``r > 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

SQRT_PI = math.sqrt(math.pi)
RTREE_PREFACTOR = 4.0 * math.exp(4.0 / 75.0)


@dataclass(frozen=True)
class BoundQuery:
    n: int
    r: float
    diam: float
    m: int | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        if self.r < 0:
            raise DomainError("r must be nonnegative")
        if self.diam <= 0:
            raise DomainError("diameter must be positive")
        if self.m is not None and (int(self.m) != self.m or self.m < 1):
            raise DomainError("m must be a positive integer")


@dataclass(frozen=True)
class ConcentrationProfile:
    """Gaussian concentration ``alpha_X(r) <= C exp(-c r^2)``."""

    C: float
    c: float

    def __post_init__(self):
        if self.C <= 0 or self.c <= 0:
            raise DomainError("concentration constants must be positive")


def _gauss(n, r, diam, scale):
    """``exp(-n r^2 / (scale D^2))`` with the D -> 0 limit."""
    if r < 0:
        raise DomainError("r must be nonnegative")
    if diam < 0:
        raise DomainError("diameter must be nonnegative")
    if r == 0:
        return 1.0
    if diam == 0:
        return 0.0
    return math.exp(-n * r * r / (scale * diam * diam))


def rtree_tail_bound(n, r, diam):
    """``4 e^{4/75} exp(-n r^2 / (150 D^2))``: tail of the inductive mean in an R-tree."""
    return RTREE_PREFACTOR * _gauss(n, r, diam, 150.0)


def claim_tail_bound(n, r, diam):
    """``4 exp(-n r^2 / (75 D^2))``, deviation from the mean of the inductive mean."""
    return 4.0 * _gauss(n, r, diam, 75.0)


def _exponent_term(m):
    return math.exp((m + 1) / (4 * m - 2))


def hadamard_constants(m):
    """Return ``(A_m, tilde A_m)`` for an m-dimensional Hadamard manifold."""
    if int(m) != m or m < 1:
        raise DomainError("m must be a positive integer")
    e = _exponent_term(m)
    a = math.exp(1.0 / (2 * m)) * (1.0 + SQRT_PI * e * math.exp(math.pi**2) / 2.0)
    a_tilde = math.exp(1.0 / (4 * m)) * (1.0 + SQRT_PI * e)
    return a, a_tilde


def hadamard_constants_limit():
    """Limits of ``(A_m, tilde A_m)`` as m -> infinity."""
    e = math.exp(0.25)
    return 1.0 + SQRT_PI / 2.0 * e * math.exp(math.pi**2), 1.0 + SQRT_PI * e


def hadamard_tail_branches(n, r, diam, m):
    a, a_tilde = hadamard_constants(m)
    return a * _gauss(n, r, diam, 16.0 * m), a_tilde * _gauss(n, r, diam, 32.0 * m)


def hadamard_tail_bound(n, r, diam, m):
    """``min{A_m exp(-n r^2/(16 D^2 m)), tilde A_m exp(-n r^2/(32 D^2 m))}``."""
    return min(hadamard_tail_branches(n, r, diam, m))


def hadamard_bound_branch(n, r, diam, m):
    """Which branch attains the minimum: ``"A"`` or ``"A_tilde"`` (ties go to ``"A_tilde"``)."""
    first, second = hadamard_tail_branches(n, r, diam, m)
    return "A" if first < second else "A_tilde"


def _sum_sq(diameters):
    diameters = [float(d) for d in diameters]
    if not diameters or any(d <= 0 for d in diameters):
        raise DomainError("diameters must be a nonempty list of positive numbers")
    return math.fsum(d * d for d in diameters)


def ledoux_deviation_bound(r, diameters):
    """``2 exp(-r^2 / (2 sum D_i^2))`` for 1-Lipschitz functions on an l1 product."""
    if r < 0:
        raise DomainError("r must be nonnegative")
    return 2.0 * math.exp(-r * r / (2.0 * _sum_sq(diameters)))


def ledoux_concentration_bound(r, diameters):
    """``exp(-r^2 / (8 sum D_i^2))``, bound on the concentration function of the product."""
    if r < 0:
        raise DomainError("r must be nonnegative")
    return math.exp(-r * r / (8.0 * _sum_sq(diameters)))


def crad_bound(n, kappa, diam):
    """Bound on the central radius of the inductive-mean law.

    Uses ``5 D sqrt((2/n) log(4/kappa))`` for ``kappa < 1/2`` and
    ``5 D sqrt((3/n) log(4/kappa))`` otherwise.
    """
    if not 0 < kappa < 1:
        raise DomainError("kappa must lie in (0, 1)")
    if n < 1:
        raise DomainError("n must be positive")
    factor = 2.0 if kappa < 0.5 else 3.0
    return 5.0 * diam * math.sqrt(factor / n * math.log(4.0 / kappa))


def mean_drift_bound(n, diam):
    """``2 D / sqrt(n)``, the bound on ``d(E s_n, b(nu))``."""
    if n < 1:
        raise DomainError("n must be positive")
    if diam < 0:
        raise DomainError("diameter must be nonnegative")
    return 2.0 * diam / math.sqrt(n)


def general_hadamard_constants(profile: ConcentrationProfile, m):
    if int(m) != m or m < 1:
        raise DomainError("m must be a positive integer")
    e = _exponent_term(m)
    C = profile.C
    pc2 = (math.pi * C) ** 2
    a = 1.0 + SQRT_PI * e / 2.0 * max(math.exp(pc2 / 2.0), 2.0 * C * math.exp(pc2))
    a_tilde = 1.0 + SQRT_PI * C * e
    return a, a_tilde


def general_hadamard_bound(r, profile: ConcentrationProfile, m):
    """Tail of a 1-Lipschitz map from a concentrated mm-space into a Hadamard manifold."""
    if r < 0:
        raise DomainError("r must be nonnegative")
    a, a_tilde = general_hadamard_constants(profile, m)
    c = profile.c
    return min(a * math.exp(-c / (8.0 * m) * r * r), a_tilde * math.exp(-c / (16.0 * m) * r * r))


def tail_bound(kind, n, r, diam, m=None):
    """Theory curve for ``kind`` in {"tree", "hyperboloid", "euclidean"}."""
    if kind == "tree":
        return rtree_tail_bound(n, r, diam)
    if m is None:
        raise DomainError("manifold dimension is required for Hadamard bounds")
    return hadamard_tail_bound(n, r, diam, m)
