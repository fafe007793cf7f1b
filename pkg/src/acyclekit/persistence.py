"""Incremental persistence over a weighted filtration.

Faces stream in the fixed total order; per dimension, the boundary column of
each face reduces against the previously stored basis.  An independent column
marks a negative face (a death in dimension d-1), a dependent one a positive
face (a birth in dimension d).  The pivot row of a negative face identifies
the positive face whose class it kills, which yields the paired diagram.

Deaths in dimension -1 are kept: the augmentation class dies when the first
vertex arrives, so D_-1 holds exactly the first face's weight.  Unpaired
positive faces map to death +inf; the weight multisets exclude them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from ._kernels import get_backend
from .complexes import SimplicialComplex, WeightedFiltration
from .errors import DivergingLifetimeError, PreconditionError, ValidationError

__all__ = [
    "BirthDeathMultisets",
    "DiagramPoint",
    "LifetimeSummary",
    "PersistenceDiagram",
    "build_diagram",
    "lifetime_identity_check",
    "lifetime_sum",
    "run_incremental",
]


@dataclass(frozen=True)
class BirthDeathMultisets:
    """Per-dimension birth and death weight multisets (sorted tuples)."""

    births: Mapping[int, tuple[float, ...]]
    deaths: Mapping[int, tuple[float, ...]]

    def birth_multiset(self, d: int) -> tuple[float, ...]:
        return self.births.get(d, ())

    def death_multiset(self, d: int) -> tuple[float, ...]:
        return self.deaths.get(d, ())


def _classified_pivots(
    K: SimplicialComplex,
    wf: WeightedFiltration,
    d: int,
    *,
    rank_cap: int = -1,
    backend: str | None = None,
) -> np.ndarray:
    rows = wf.facet_rank_rows(d)
    n_rows = 1 if d == 0 else K.f(d - 1)
    return get_backend(backend).reduce_filtration(rows, n_rows, rank_cap)


def run_incremental(
    K: SimplicialComplex,
    wf: WeightedFiltration,
    *,
    rank_caps: Mapping[int, int] | None = None,
    backend: str | None = None,
) -> BirthDeathMultisets:
    """Birth/death weight multisets of the filtration, per dimension.

    ``rank_caps`` optionally bounds the boundary rank per dimension (only
    sound when the cap is the true rank of the full boundary operator, e.g.
    the closed form on complete skeletons); columns past the cap are
    classified positive without reduction.
    """
    births: dict[int, list[float]] = {}
    deaths: dict[int, list[float]] = {}
    for d in sorted(K.f_vector()):
        cap = -1 if rank_caps is None else rank_caps.get(d, -1)
        pivots = _classified_pivots(K, wf, d, rank_cap=cap, backend=backend)
        w = wf.weights_in_order(d)
        neg = pivots >= 0
        deaths.setdefault(d - 1, []).extend(w[neg].tolist())
        births.setdefault(d, []).extend(w[~neg].tolist())
    return BirthDeathMultisets(
        births={d: tuple(sorted(v)) for d, v in births.items()},
        deaths={d: tuple(sorted(v)) for d, v in deaths.items()},
    )


@dataclass(frozen=True)
class DiagramPoint:
    """One diagram point: projected weights plus discrete filtration indices.

    ``birth_index``/``death_index`` are global total-order positions; -1
    stands for the augmentation (before everything) or for no death.
    """

    dim: int
    birth: float
    death: float
    birth_index: int
    death_index: int


@dataclass(frozen=True)
class PersistenceDiagram:
    points: tuple[DiagramPoint, ...]

    def in_dim(self, d: int) -> tuple[DiagramPoint, ...]:
        return tuple(p for p in self.points if p.dim == d)

    def births(self, d: int) -> tuple[float, ...]:
        return tuple(sorted(p.birth for p in self.in_dim(d)))

    def deaths(self, d: int, *, finite_only: bool = True) -> tuple[float, ...]:
        vals = [p.death for p in self.in_dim(d)]
        if finite_only:
            vals = [v for v in vals if math.isfinite(v)]
        return tuple(sorted(vals))

    def to_csv_rows(self, *, include_augmentation: bool = False) -> list[tuple[int, float, float]]:
        rows = []
        for p in self.points:
            if p.dim == -1 and not include_augmentation:
                continue
            rows.append((p.dim, p.birth, p.death))
        return rows


def build_diagram(
    K: SimplicialComplex, wf: WeightedFiltration, *, backend: str | None = None
) -> PersistenceDiagram:
    """Paired persistence diagram via pivot pairing on the total order.

    Projected birth/death multisets agree with :func:`run_incremental`; with
    tied weights, projected points may land on the diagonal.
    """
    dims = sorted(K.f_vector())
    points: list[DiagramPoint] = []
    killed: dict[int, set[int]] = {d: set() for d in dims}
    positives: dict[int, list[int]] = {d: [] for d in dims}
    for d in dims:
        pivots = _classified_pivots(K, wf, d, backend=backend)
        faces = wf.faces_in_order(d)
        w = wf.weights_in_order(d)
        if d - 1 in dims:
            low_faces = wf.faces_in_order(d - 1)
            low_w = wf.weights_in_order(d - 1)
        for j, piv in enumerate(pivots):
            if piv < 0:
                positives[d].append(j)
                continue
            if d == 0:
                points.append(
                    DiagramPoint(
                        dim=-1,
                        birth=-math.inf,
                        death=float(w[j]),
                        birth_index=-1,
                        death_index=wf.rank(faces[j]),
                    )
                )
            else:
                killed[d - 1].add(int(piv))
                points.append(
                    DiagramPoint(
                        dim=d - 1,
                        birth=float(low_w[piv]),
                        death=float(w[j]),
                        birth_index=wf.rank(low_faces[piv]),
                        death_index=wf.rank(faces[j]),
                    )
                )
    for d in dims:
        faces = wf.faces_in_order(d)
        w = wf.weights_in_order(d)
        for j in positives[d]:
            if j not in killed[d]:
                points.append(
                    DiagramPoint(
                        dim=d,
                        birth=float(w[j]),
                        death=math.inf,
                        birth_index=wf.rank(faces[j]),
                        death_index=-1,
                    )
                )
    points.sort(key=lambda p: (p.dim, p.birth, p.death, p.birth_index))
    return PersistenceDiagram(points=tuple(points))


@dataclass(frozen=True)
class LifetimeSummary:
    """Lifetime sum of one diagram dimension, computed two ways.

    Both routes run in exact rational arithmetic over the stored doubles, so
    the residual is free of summation-order noise: a nonzero residual means
    the face classification itself is inconsistent, never rounding.
    """

    dim: int
    pairing_sum: float
    betti_integral: float
    residual: float


def _step_integral_exact(births: tuple[float, ...], deaths: tuple[float, ...]) -> Fraction:
    """Exact integral of the Betti step function from its jump multisets.

    The function jumps +1 at each birth and -1 at each death; with equally
    many of each it vanishes eventually and the integral is the finite sum of
    level * interval-length over consecutive distinct jump times.
    """
    events: dict[Fraction, int] = {}
    for t in births:
        ft = Fraction(t)
        events[ft] = events.get(ft, 0) + 1
    for t in deaths:
        ft = Fraction(t)
        events[ft] = events.get(ft, 0) - 1
    times = sorted(events)
    total = Fraction(0)
    level = 0
    for t, t_next in zip(times, times[1:]):
        level += events[t]
        total += level * (t_next - t)
    return total


def lifetime_sum(
    K: SimplicialComplex,
    wf: WeightedFiltration,
    d: int,
    *,
    multisets: BirthDeathMultisets | None = None,
    backend: str | None = None,
) -> LifetimeSummary:
    """Lifetime sum in dimension d via pairing and via the Betti integral.

    Requires non-negative weights and beta_d(K) = 0 so the integral is finite.
    """
    if d < 0:
        raise ValidationError("lifetime dimension must be >= 0")
    # monotonicity puts the global minimum weight on a vertex
    if any(wf.weight(f) < 0 for f in K.faces(0)):
        raise ValidationError("weights must be non-negative")
    bd = multisets if multisets is not None else run_incremental(K, wf, backend=backend)
    births = bd.birth_multiset(d)
    deaths = bd.death_multiset(d)
    if len(births) != len(deaths):
        raise DivergingLifetimeError(
            f"beta_{d}(K) = {len(births) - len(deaths)} != 0: lifetime integral diverges"
        )
    pairing = sum(map(Fraction, deaths), Fraction(0)) - sum(map(Fraction, births), Fraction(0))
    integral = _step_integral_exact(births, deaths)
    return LifetimeSummary(
        dim=d,
        pairing_sum=float(pairing),
        betti_integral=float(integral),
        residual=float(abs(pairing - integral)),
    )


def lifetime_identity_check(
    K: SimplicialComplex,
    wf: WeightedFiltration,
    d: int,
    *,
    backend: str | None = None,
) -> float:
    """Residual of the lifetime identity in dimension d-1.

    The lifetime sum L_{d-1} must equal w(M_d) + w(M_{d-1}) - w(F^{d-1}),
    where M_k is the k-dimensional minimal spanning acycle.  Requires
    beta_{d-1}(K) = beta_{d-2}(K) = 0 so both acycles exist.
    """
    from .homology import betti_numbers
    from .spanning import kruskal_msa

    if d < 1:
        raise ValidationError("identity needs d >= 1")
    bv = betti_numbers(K, max(d - 1, 0), backend=backend)
    if bv[d - 1] != 0 or bv[d - 2] != 0:
        raise PreconditionError(
            f"need beta_{d - 1}(K) = beta_{d - 2}(K) = 0, got {bv[d - 1]}, {bv[d - 2]}"
        )
    bd = run_incremental(K, wf, backend=backend)
    summary = lifetime_sum(K, wf, d - 1, multisets=bd, backend=backend)
    if summary.residual != 0.0:
        return summary.residual
    lhs = sum(map(Fraction, bd.death_multiset(d - 1)), Fraction(0)) - sum(
        map(Fraction, bd.birth_multiset(d - 1)), Fraction(0)
    )
    m_d = kruskal_msa(K, wf, d, backend=backend)
    m_dm1 = kruskal_msa(K, wf, d - 1, backend=backend)

    def exact_total(faces) -> Fraction:
        return sum((Fraction(wf.weight(f)) for f in faces), Fraction(0))

    rhs = exact_total(m_d.faces) + exact_total(m_dm1.faces) - exact_total(K.faces(d - 1))
    return float(abs(lhs - rhs))
