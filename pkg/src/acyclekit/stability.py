"""Metrics on finite real multisets and the matching-stability inequality.

Point measures here are finite multisets of reals with counting queries.  The
L_p matching distance between equal-size multisets is the infimum over
bijections of the summed p-th-power displacements (sup displacement at
p = infinity, mismatch count at p = 0); on the line the sorted matching is
optimal for every p >= 1 and for the sup version.  The vague metric is the
standard series over hat-function test integrals, truncated at a configurable
depth with tail error below 2^-J.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable

from .complexes import SimplicialComplex, WeightedFiltration
from .errors import ValidationError

__all__ = [
    "PointMeasure",
    "StabilityResult",
    "bottleneck_distance",
    "hat_function",
    "hat_interval",
    "lp_matching_distance",
    "stability_check",
    "vague_metric",
]


@dataclass(frozen=True)
class PointMeasure:
    """A finite multiset of reals with interval counting queries."""

    values: tuple[float, ...]

    @classmethod
    def of(cls, values: Iterable[float]) -> "PointMeasure":
        return cls(values=tuple(sorted(float(v) for v in values)))

    @property
    def total(self) -> int:
        return len(self.values)

    def count(self, lo: float = -math.inf, hi: float = math.inf) -> int:
        """Points in the half-open interval (lo, hi]."""
        return bisect_right(self.values, hi) - bisect_right(self.values, lo)

    def count_above(self, c: float) -> int:
        return len(self.values) - bisect_right(self.values, c)

    def count_closed(self, lo: float, hi: float) -> int:
        return bisect_right(self.values, hi) - bisect_left(self.values, lo)

    def integrate(self, h: Callable[[float], float]) -> float:
        return math.fsum(h(x) for x in self.values)

    def scaled(self, fn: Callable[[float], float]) -> "PointMeasure":
        return PointMeasure.of(fn(x) for x in self.values)

    def contains_multiset(self, other: "PointMeasure") -> bool:
        """Whether every value of ``other`` occurs here with enough multiplicity."""
        mine = Counter(self.values)
        theirs = Counter(other.values)
        return all(mine[v] >= k for v, k in theirs.items())

    def __len__(self) -> int:
        return len(self.values)


def _as_sorted(m: PointMeasure | Iterable[float]) -> tuple[float, ...]:
    if isinstance(m, PointMeasure):
        return m.values
    return tuple(sorted(float(v) for v in m))


def lp_matching_distance(a, b, p) -> float:
    """Optimal bijection cost between two real multisets.

    Returns +inf when the sizes differ (no bijection exists).  For
    1 <= p < inf the cost is the sum of |x - y|^p over the sorted pairing,
    which is optimal on the line; p = inf takes the max instead of the sum;
    p = 0 counts unmatched values under the convention 0^0 = 0, so it is the
    size minus the largest exactly-equal submatching.
    """
    av, bv = _as_sorted(a), _as_sorted(b)
    if len(av) != len(bv):
        return math.inf
    if p == 0:
        ca, cb = Counter(av), Counter(bv)
        matched = sum(min(k, cb[v]) for v, k in ca.items())
        return float(len(av) - matched)
    if p == math.inf:
        return max((abs(x - y) for x, y in zip(av, bv)), default=0.0)
    if not (isinstance(p, (int, float)) and p >= 1):
        raise ValidationError(f"p must be 0, an integer >= 1, or inf; got {p!r}")
    return math.fsum(abs(x - y) ** p for x, y in zip(av, bv))


def bottleneck_distance(a, b) -> float:
    """Sup-displacement matching distance; +inf when sizes differ."""
    return lp_matching_distance(a, b, math.inf)


def _zigzag(u: int) -> int:
    # 0, 1, -1, 2, -2, ...
    return (u + 1) // 2 if u % 2 else -(u // 2)


def hat_interval(j: int) -> tuple[float, float]:
    """The j-th core interval (half-integer endpoints, fixed diagonal order)."""
    if j < 1:
        raise ValidationError("hat index starts at 1")
    t = j - 1
    w = int((math.isqrt(8 * t + 1) - 1) // 2)
    v = t - w * (w + 1) // 2
    u = w - v
    lo = _zigzag(u) * 0.5
    hi = lo + (v + 1) * 0.5
    return lo, hi


HAT_LIPSCHITZ = 4.0  # flanks ramp over width 1/4


def hat_function(j: int) -> Callable[[float], float]:
    """Trapezoid equal to 1 on the j-th core interval, ramping to 0 over 1/4."""
    lo, hi = hat_interval(j)

    def h(x: float) -> float:
        if x <= lo - 0.25 or x >= hi + 0.25:
            return 0.0
        if x < lo:
            return (x - (lo - 0.25)) * 4.0
        if x > hi:
            return ((hi + 0.25) - x) * 4.0
        return 1.0

    return h


def vague_metric(a, b, truncation: int = 40) -> float:
    """Truncated series metric for vague convergence of point measures.

    Sums (1 - exp(-|a(h_j) - b(h_j)|)) / 2^j over the fixed hat family for
    j <= truncation; the value lies in [0, 1) and the truncation error is at
    most 2^-truncation.
    """
    if truncation < 1:
        raise ValidationError("truncation must be >= 1")
    am = a if isinstance(a, PointMeasure) else PointMeasure.of(a)
    bm = b if isinstance(b, PointMeasure) else PointMeasure.of(b)
    terms = []
    for j in range(1, truncation + 1):
        h = hat_function(j)
        gap = abs(am.integrate(h) - bm.integrate(h))
        terms.append((1.0 - math.exp(-gap)) / 2.0**j)
    return math.fsum(terms)


@dataclass(frozen=True)
class StabilityResult:
    """Both sides of the matching-stability inequality for one (f, g, p)."""

    dim: int
    p: float
    lhs_death: float
    lhs_birth: float
    rhs: float

    @property
    def holds(self) -> bool:
        slack = 1e-9 * max(1.0, abs(self.rhs))
        return max(self.lhs_death, self.lhs_birth) <= self.rhs + slack


def stability_check(
    K: SimplicialComplex,
    f_weights,
    g_weights,
    d: int,
    p,
    *,
    backend: str | None = None,
) -> StabilityResult:
    """Evaluate the stability inequality for two filtrations of the same complex.

    The matching distance between the dimension d-1 death multisets, and
    between the dimension d birth multisets, must each be bounded by the
    summed p-th-power weight differences over the d-faces.
    """
    from .persistence import run_incremental

    wf_f = f_weights if isinstance(f_weights, WeightedFiltration) else WeightedFiltration(K, f_weights)
    wf_g = g_weights if isinstance(g_weights, WeightedFiltration) else WeightedFiltration(K, g_weights)
    bd_f = run_incremental(K, wf_f, backend=backend)
    bd_g = run_incremental(K, wf_g, backend=backend)
    lhs_death = lp_matching_distance(bd_f.death_multiset(d - 1), bd_g.death_multiset(d - 1), p)
    lhs_birth = lp_matching_distance(bd_f.birth_multiset(d), bd_g.birth_multiset(d), p)
    diffs = [abs(wf_f.weight(face) - wf_g.weight(face)) for face in K.faces(d)]
    if p == 0:
        rhs = float(sum(1 for v in diffs if v != 0.0))
    elif p == math.inf:
        rhs = max(diffs, default=0.0)
    else:
        rhs = math.fsum(v**p for v in diffs)
    return StabilityResult(dim=d, p=p, lhs_death=lhs_death, lhs_birth=lhs_birth, rhs=rhs)
