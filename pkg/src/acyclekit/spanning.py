"""Spanning acycles: size formulas, greedy constructions, and property checks.

A spanning acycle in dimension d is a set S of d-faces with
beta_{d-1}(K^{d-1} u S) = 0 (spanning) and beta_d(K^{d-1} u S) = 0 (acyclic);
for d = 1 on a connected graph this is a spanning tree.  Every maximal acycle
has the same cardinality gamma_d(K), and minimal ones are produced by greedy
algorithms exactly as for trees: the global greedy pass keeps each face whose
boundary is independent of the boundaries kept so far, the local one grows
from a seed codimension-1 face through the coface adjacency.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from itertools import combinations, islice
from math import comb

import numpy as np

from ._kernels import Gf2Reducer, get_backend
from .complexes import Face, SimplicialComplex, WeightedFiltration
from .errors import (
    HypergraphDisconnectedError,
    InvariantViolationError,
    NoSpanningAcycleError,
    TooLargeError,
    ValidationError,
)
from .homology import (
    Gf2Matrix,
    TrackingReducer,
    betti_numbers,
    boundary_bits,
    boundary_matrix,
    gf2_rank,
)

__all__ = [
    "SpanningAcycle",
    "StructuralReport",
    "brute_force_msa",
    "char_msa_check",
    "gamma_d",
    "hypergraph_adjacency",
    "hypergraph_connected",
    "kruskal_msa",
    "mv_gamma_identity_check",
    "prim_msa",
    "structural_property_suite",
]


@dataclass(frozen=True)
class SpanningAcycle:
    """A spanning acycle: its dimension, faces (lex-sorted), and total weight."""

    dim: int
    faces: tuple[Face, ...]
    total_weight: float

    @property
    def face_set(self) -> frozenset[Face]:
        return frozenset(self.faces)

    def __len__(self) -> int:
        return len(self.faces)


def gamma_d(K: SimplicialComplex, d: int, *, backend: str | None = None) -> int:
    """Cardinality of every maximal acycle of d-faces.

    Computed two ways and cross-asserted: as the drop in beta_{d-1} from the
    (d-1)-skeleton to the d-skeleton, and as the rank of the d-th boundary
    operator (the boundary space rank one dimension down).
    """
    if d < 0:
        raise ValidationError("gamma dimension must be >= 0")
    bv_low = betti_numbers(K.skeleton(d - 1), max(d - 1, 0), backend=backend) if d >= 1 else None
    bv_d = betti_numbers(K.skeleton(d), max(d - 1, 0), backend=backend)
    if d >= 1:
        via_betti = bv_low[d - 1] - bv_d[d - 1]
    else:
        # the (-1)-skeleton is empty, whose beta_-1 is 1
        via_betti = 1 - bv_d[-1]
    via_rank = gf2_rank(boundary_matrix(K, d), backend=backend)
    if via_betti != via_rank:
        raise InvariantViolationError(
            f"gamma_{d} mismatch: skeleton-Betti route {via_betti} != boundary-rank route {via_rank}"
        )
    return via_rank


def _require_spanning_exists(K: SimplicialComplex, d: int, *, backend: str | None = None) -> None:
    if d >= 1:
        b = betti_numbers(K, d - 1, backend=backend)[d - 1]
    else:
        b = betti_numbers(K, 0, backend=backend)[-1]
    if b != 0:
        raise NoSpanningAcycleError(
            f"beta_{d - 1}(K) = {b} != 0: no spanning acycle in dimension {d}"
        )


def kruskal_msa(
    K: SimplicialComplex,
    wf: WeightedFiltration,
    d: int,
    *,
    backend: str | None = None,
    _known_gamma: int | None = None,
) -> SpanningAcycle:
    """Minimal spanning acycle by the global greedy pass.

    Walks d-faces in filtration order and keeps each negative face, i.e. one
    whose boundary column is independent of the kept boundaries; stops once
    gamma_d faces are kept.  Unique when the d-face weights are distinct;
    under ties, minimal with respect to the fixed total order.
    ``_known_gamma`` skips the existence checks when the acycle size is known
    in closed form (complete skeletons); the output size is still asserted.
    """
    if _known_gamma is not None:
        target = _known_gamma
    else:
        _require_spanning_exists(K, d, backend=backend)
        target = gamma_d(K, d, backend=backend)
    n_rows = 1 if d == 0 else K.f(d - 1)
    pivots = get_backend(backend).reduce_filtration(wf.facet_rank_rows(d), n_rows, target)
    faces_in_order = wf.faces_in_order(d)
    chosen = [faces_in_order[j] for j in np.flatnonzero(pivots >= 0)]
    if len(chosen) != target:
        raise InvariantViolationError(f"greedy pass kept {len(chosen)} faces, expected {target}")
    w = wf.total_weight(chosen)
    return SpanningAcycle(dim=d, faces=tuple(sorted(chosen)), total_weight=w)


def _kruskal_with_order(
    K: SimplicialComplex,
    wf: WeightedFiltration,
    d: int,
    order: list[Face],
    *,
    backend: str | None = None,
) -> SpanningAcycle:
    """Greedy pass over an explicit d-face processing order (tie re-break)."""
    target = gamma_d(K, d, backend=backend)
    n_rows = 1 if d == 0 else K.f(d - 1)
    red = Gf2Reducer(n_rows, backend=backend)
    chosen: list[Face] = []
    for f in order:
        if len(chosen) == target:
            break
        if red.add(_facet_lex_rows(K, f)) >= 0:
            chosen.append(f)
    if len(chosen) != target:
        raise InvariantViolationError("explicit-order greedy pass fell short")
    return SpanningAcycle(dim=d, faces=tuple(sorted(chosen)), total_weight=wf.total_weight(chosen))


def _facet_lex_rows(K: SimplicialComplex, face: Face) -> list[int]:
    d = len(face) - 1
    if d == 0:
        return [0]
    return [K.index(face[:i] + face[i + 1 :]) for i in range(len(face))]


def hypergraph_adjacency(K: SimplicialComplex, d: int) -> dict[Face, set[Face]]:
    """Adjacency of the graph on (d-1)-faces joined when their union is a d-face."""
    if d < 1:
        raise ValidationError("hypergraph adjacency needs d >= 1")
    adj: dict[Face, set[Face]] = {f: set() for f in K.faces(d - 1)}
    for f in K.faces(d):
        facets = [f[:i] + f[i + 1 :] for i in range(len(f))]
        for a, b in combinations(facets, 2):
            adj[a].add(b)
            adj[b].add(a)
    return adj


def hypergraph_connected(K: SimplicialComplex, d: int) -> bool:
    """Breadth-first connectivity of the coface adjacency on (d-1)-faces."""
    adj = hypergraph_adjacency(K, d)
    if not adj:
        return True
    start = next(iter(adj))
    seen = {start}
    queue = [start]
    while queue:
        cur = queue.pop()
        for nxt in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(adj)


def prim_msa(
    K: SimplicialComplex,
    wf: WeightedFiltration,
    d: int,
    seed_face: Face | None = None,
    *,
    backend: str | None = None,
) -> SpanningAcycle:
    """Minimal spanning acycle by the local greedy pass from a seed face.

    Maintains a frontier of marked (d-1)-faces; repeatedly takes the cheapest
    unconsidered coface of the frontier (by the total order), keeps it when
    negative, and extends the frontier by its facets.  Requires the coface
    adjacency to be connected.  With distinct d-face weights the output equals
    the global greedy pass face-for-face; under ties the weight multisets agree.
    """
    if d < 1:
        raise ValidationError("local greedy pass needs d >= 1")
    if not hypergraph_connected(K, d):
        raise HypergraphDisconnectedError(f"coface adjacency on {d - 1}-faces is disconnected")
    _require_spanning_exists(K, d, backend=backend)
    target = gamma_d(K, d, backend=backend)
    if seed_face is None:
        seed = K.faces(d - 1)[0]
    else:
        seed = tuple(seed_face)
        if seed not in K or len(seed) != d:
            raise ValidationError(f"seed must be a (d-1)-face of K, got {seed}")

    cofaces: dict[Face, list[Face]] = {f: [] for f in K.faces(d - 1)}
    for f in K.faces(d):
        for i in range(len(f)):
            cofaces[f[:i] + f[i + 1 :]].append(f)

    red = Gf2Reducer(K.f(d - 1), backend=backend)
    chosen: list[Face] = []
    marked: set[Face] = set()
    frontier: set[Face] = set()
    heap: list[tuple[int, Face]] = []

    def extend(vertex_face: Face) -> None:
        if vertex_face in frontier:
            return
        frontier.add(vertex_face)
        for cf in cofaces[vertex_face]:
            if cf not in marked:
                heapq.heappush(heap, (wf.dim_rank(cf), cf))

    extend(seed)
    while heap and len(chosen) < target:
        _, tau = heapq.heappop(heap)
        if tau in marked:
            continue
        marked.add(tau)
        if red.add(_facet_lex_rows(K, tau)) >= 0:
            chosen.append(tau)
        for i in range(len(tau)):
            extend(tau[:i] + tau[i + 1 :])
    if len(chosen) != target:
        raise InvariantViolationError("local greedy pass exhausted the frontier early")
    return SpanningAcycle(dim=d, faces=tuple(sorted(chosen)), total_weight=wf.total_weight(chosen))


def brute_force_msa(
    K: SimplicialComplex,
    wf: WeightedFiltration,
    d: int,
    *,
    cap: int = 2_000_000,
    chunk: int = 65_536,
    backend: str | None = None,
) -> SpanningAcycle:
    """Oracle: enumerate all gamma_d-subsets of d-faces and keep the best.

    A subset qualifies when beta_{d-1}(K^{d-1} u S) = 0 and
    beta_d(K^{d-1} u S) = 0, both evaluated from the subset's boundary rank
    against the (d-1)-skeleton Betti number.  Returns the minimum-weight
    qualifying subset; ties resolve to the total-order-least face set.  Raises
    when C(f_d, gamma_d) exceeds ``cap``.
    """
    _require_spanning_exists(K, d, backend=backend)
    target = gamma_d(K, d, backend=backend)
    faces = list(wf.faces_in_order(d))
    n = len(faces)
    space = comb(n, target)
    if space > cap:
        raise TooLargeError(f"C({n},{target}) = {space} exceeds cap {cap}")
    if d >= 1:
        beta_low_skeleton = betti_numbers(K.skeleton(d - 1), max(d - 1, 0), backend=backend)[d - 1]
    else:
        beta_low_skeleton = 1  # empty complex: the augmentation class is alive
    if beta_low_skeleton != target:
        # a full-rank subset must pull beta_{d-1} all the way to 0
        raise InvariantViolationError("skeleton Betti number inconsistent with subset size")
    kern = get_backend(backend)
    n_rows = 1 if d == 0 else K.f(d - 1)
    cols = np.zeros((n, max(1, (n_rows + 63) >> 6)), dtype=np.uint64)
    for j, f in enumerate(faces):
        for r in _facet_lex_rows(K, f):
            cols[j, r >> 6] ^= np.uint64(1 << (r & 63))
    weights = wf.weights_in_order(d)

    best: tuple[float, tuple[int, ...]] | None = None
    it = combinations(range(n), target)
    while True:
        batch = list(islice(it, chunk))
        if not batch:
            break
        subsets = np.array(batch, dtype=np.int64).reshape(len(batch), target)
        # qualifying subset: beta_d = |S| - rank = 0 (acyclic), and then
        # beta_{d-1} = beta_{d-1}(K^{d-1}) - rank = 0 (spanning)
        ranks = kern.rank_of_subsets(cols, subsets, n_rows)
        for row in np.flatnonzero(ranks == target):
            idx = batch[int(row)]
            wsum = math.fsum(weights[j] for j in idx)
            if best is None or wsum < best[0]:
                best = (wsum, idx)
    if best is None:
        raise NoSpanningAcycleError("no qualifying subset found")
    chosen = [faces[j] for j in best[1]]
    return SpanningAcycle(dim=d, faces=tuple(sorted(chosen)), total_weight=best[0])


def mv_gamma_identity_check(
    K1: SimplicialComplex, K2: SimplicialComplex, d: int, *, backend: str | None = None
) -> tuple[int, int, int]:
    """Check the inclusion-exclusion identity for gamma_d on a complex pair.

    gamma_d(K1) + gamma_d(K2) must equal gamma_d(K1 u K2) + gamma_d(K1 n K2)
    plus the rank of the kernel of the inclusion-induced map from the
    (d-1)-homology of the intersection into the direct sum for the two parts.
    The kernel rank is computed directly from homology representatives:
    cycle-basis vectors of the intersection reduced against its boundary
    image, then tested for boundary membership inside K1 and K2 jointly.
    Returns (lhs, rhs, kernel_rank) and raises when the identity fails.
    """
    K0 = K1.intersection(K2)
    KU = K1.union(K2)
    g1 = gamma_d(K1, d, backend=backend)
    g2 = gamma_d(K2, d, backend=backend)
    gu = gamma_d(KU, d, backend=backend)
    g0 = gamma_d(K0, d, backend=backend)
    kernel_rank = _inclusion_kernel_rank(K0, K1, K2, d - 1)
    lhs = g1 + g2
    rhs = gu + g0 + kernel_rank
    if lhs != rhs:
        raise InvariantViolationError(
            f"gamma identity failed: {g1}+{g2} != {gu}+{g0}+{kernel_rank}"
        )
    return lhs, rhs, kernel_rank


def _homology_representatives(K: SimplicialComplex, h: int) -> list[int]:
    """Independent cycle representatives of the h-th homology, as index bitsets.

    Kernel vectors of the h-th boundary operator come from the tracking
    reducer's dependency certificates; each is kept only when independent of
    the boundary image of (h+1)-chains.
    """
    if h < 0:
        # the augmentation line: its homology is nontrivial only for the
        # empty complex, which never arises as an intersection of interest
        return [] if K.f(0) else [1]
    tr = TrackingReducer()
    cycles: list[int] = []
    for f in K.faces(h):
        p, combo = tr.process(boundary_bits(K, f))
        if p < 0:
            cycles.append(combo)
    image = TrackingReducer()
    for f in K.faces(h + 1):
        image.process(boundary_bits(K, f))
    reps = []
    for z in cycles:
        p, _ = image.process(z)
        if p >= 0:
            reps.append(z)
    return reps


def _embed_bits(src: SimplicialComplex, dst: SimplicialComplex, h: int, bits: int, offset: int) -> int:
    out = 0
    faces = src.faces(h)
    i = 0
    while bits:
        if bits & 1:
            out ^= 1 << (dst.index(faces[i]) + offset)
        bits >>= 1
        i += 1
    return out


def _inclusion_kernel_rank(
    K0: SimplicialComplex, K1: SimplicialComplex, K2: SimplicialComplex, h: int
) -> int:
    """Rank of the kernel of H_h(K0) -> H_h(K1) + H_h(K2) under inclusions."""
    if h < 0:
        # the augmentation class of K0 survives only when K0 is empty, and
        # maps to zero exactly when both sides are non-empty
        return 1 if (K0.f(0) == 0 and K1.f(0) > 0 and K2.f(0) > 0) else 0
    reps = _homology_representatives(K0, h)
    if not reps:
        return 0
    n1 = K1.f(h)
    joint = TrackingReducer()
    for f in K1.faces(h + 1):
        joint.process(boundary_bits(K1, f))
    for f in K2.faces(h + 1):
        joint.process(_embed_bits(K2, K2, h, boundary_bits(K2, f), n1))
    image_rank = 0
    for z in reps:
        stacked = _embed_bits(K0, K1, h, z, 0) ^ _embed_bits(K0, K2, h, z, n1)
        p, _ = joint.process(stacked)
        if p >= 0:
            image_rank += 1
    return len(reps) - image_rank


def char_msa_check(
    K: SimplicialComplex, wf: WeightedFiltration, d: int, *, backend: str | None = None
) -> bool:
    """Membership characterization of the minimal spanning acycle.

    For every d-face, membership in the greedy output must match a direct
    span test of its boundary against the boundaries of the strictly earlier
    d-faces (batch rank comparisons, not the streaming pass).
    """
    msa = kruskal_msa(K, wf, d, backend=backend).face_set
    faces = wf.faces_in_order(d)
    n_rows = 1 if d == 0 else K.f(d - 1)
    cols = [_facet_lex_rows(K, f) for f in faces]
    for i, f in enumerate(faces):
        before = Gf2Matrix.from_columns(cols[:i], n_rows)
        with_f = Gf2Matrix.from_columns(cols[: i + 1], n_rows)
        independent = gf2_rank(with_f, backend=backend) > gf2_rank(before, backend=backend)
        if independent != (f in msa):
            return False
    return True


@dataclass
class StructuralReport:
    """Outcome of the exchange/cycle/cut/sub-complex property sweep."""

    dim: int
    exchange_checked: int = 0
    cycle_checked: int = 0
    cut_checked: int = 0
    subcomplex_checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _is_spanning_acycle(
    K: SimplicialComplex, d: int, faces: list[Face], target: int, *, backend: str | None = None
) -> bool:
    if len(faces) != target:
        return False
    n_rows = 1 if d == 0 else K.f(d - 1)
    m = Gf2Matrix.from_columns([_facet_lex_rows(K, f) for f in faces], n_rows)
    return gf2_rank(m, backend=backend) == target


def structural_property_suite(
    K: SimplicialComplex,
    wf: WeightedFiltration,
    d: int,
    *,
    rng: np.random.Generator | None = None,
    subcomplex_samples: int = 4,
    backend: str | None = None,
) -> StructuralReport:
    """Exhaustively verify the basic exchange/cycle/cut/sub-complex properties.

    Meant for small complexes (f_d <= ~20).  Failures are collected as
    human-readable counterexample strings; an empty list means all pass.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    report = StructuralReport(dim=d)
    msa = kruskal_msa(K, wf, d, backend=backend)
    m_faces = list(msa.faces)
    m_set = msa.face_set
    target = len(m_faces)

    tracker = TrackingReducer()
    for f in m_faces:
        tracker.process(boundary_bits(K, f))

    for sigma in K.faces(d):
        if sigma in m_set:
            continue
        p, combo = tracker.probe(boundary_bits(K, sigma))
        if p >= 0:
            report.failures.append(f"face {sigma} independent of the spanning acycle")
            continue
        cycle = [sigma] + [m_faces[i] for i in range(len(m_faces)) if combo >> i & 1]
        # exchange: swapping sigma for any acycle face on its cycle stays spanning
        for sigma1 in cycle[1:]:
            swapped = [f for f in m_faces if f != sigma1] + [sigma]
            report.exchange_checked += 1
            if not _is_spanning_acycle(K, d, swapped, target, backend=backend):
                report.failures.append(f"exchange failed swapping {sigma1} for {sigma}")
        # cycle property: a strict-max-weight face of a cycle avoids the acycle
        report.cycle_checked += 1
        wmax = max(wf.weight(f) for f in cycle)
        strict_max = [f for f in cycle if wf.weight(f) == wmax]
        if len(strict_max) == 1 and strict_max[0] in m_set:
            report.failures.append(f"cycle property failed at {strict_max[0]}")

    # cut property on coface cuts: the cheapest coface of every (d-1)-face
    # belongs to the acycle of a total order breaking its ties first
    for tau in K.faces(d - 1) if d >= 1 else []:
        cof = [f for f in K.faces(d) if set(tau) <= set(f)]
        if not cof:
            continue
        report.cut_checked += 1
        wmin = min(wf.weight(f) for f in cof)
        candidates = [f for f in cof if wf.weight(f) == wmin]
        sigma0 = min(candidates, key=wf.dim_rank)
        if len(candidates) == 1 and sigma0 in m_set:
            continue
        order = sorted(
            wf.faces_in_order(d),
            key=lambda f: (wf.weight(f), 0 if f == sigma0 else 1, wf.dim_rank(f)),
        )
        biased = _kruskal_with_order(K, wf, d, order, backend=backend)
        if sigma0 not in biased.face_set:
            report.failures.append(f"cut property failed for coface cut of {tau}")

    # sub-complex property: the acycle restricted to a spanning sub-complex
    # sits inside that sub-complex's own minimal spanning acycle
    d_faces = list(K.faces(d))
    for _ in range(subcomplex_samples):
        perm = list(rng.permutation(len(d_faces)))
        red = Gf2Reducer(1 if d == 0 else K.f(d - 1), backend=backend)
        subset: list[Face] = []
        for j in perm:
            f = d_faces[j]
            if red.add(_facet_lex_rows(K, f)) >= 0:
                subset.append(f)
            elif rng.random() < 0.3:
                subset.append(f)
            if red.rank == target and rng.random() < 0.5:
                break
        if red.rank != target:
            continue
        K1 = SimplicialComplex(
            {**{k: K.faces(k) for k in range(d)}, d: subset}, validate=False
        )
        wf1 = WeightedFiltration(
            K1, {f: wf.weight(f) for f in K1.all_faces()}, tie_break=wf.tie_break, validate=False
        )
        report.subcomplex_checked += 1
        m1 = kruskal_msa(K1, wf1, d, backend=backend).face_set
        restricted = m_set & set(subset)
        if not restricted <= m1:
            report.failures.append("sub-complex property failed on a sampled restriction")
    return report
