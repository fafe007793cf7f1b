"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from acyclekit.complexes import SimplicialComplex, WeightedFiltration, complete_skeleton, total_order


@pytest.fixture
def k3():
    """Triangle boundary graph (hand-worked fixture): edges 0.1/0.2/0.3."""
    K = complete_skeleton(3, 1)
    w = {f: 0.0 for f in K.faces(0)}
    w[(1, 2)] = 0.1
    w[(1, 3)] = 0.2
    w[(2, 3)] = 0.3
    return K, total_order(K, w)


@pytest.fixture
def tetra():
    """Complete 2-skeleton on 4 vertices, triangles 0.1..0.4, lower faces 0."""
    K = complete_skeleton(4, 2)
    w = {f: 0.0 for f in list(K.faces(0)) + list(K.faces(1))}
    for i, f in enumerate(K.faces(2)):
        w[f] = round(0.1 * (i + 1), 10)
    return K, total_order(K, w)


def uniform_weights(K: SimplicialComplex, d: int, rng: np.random.Generator) -> dict:
    """Zero below dimension d, i.i.d. uniform on the d-faces."""
    w = {f: 0.0 for k in range(d) for f in K.faces(k)}
    for f, u in zip(K.faces(d), rng.random(K.f(d))):
        w[f] = float(u)
    return w


def uniform_model(n: int, d: int, seed: int) -> tuple[SimplicialComplex, WeightedFiltration]:
    """Complete d-skeleton with uniform top weights (test-local construction)."""
    K = complete_skeleton(n, d)
    rng = np.random.Generator(np.random.Philox(seed))
    return K, WeightedFiltration(K, uniform_weights(K, d, rng))


def random_top_subcomplex(
    n: int, d: int, n_faces: int, rng: np.random.Generator
) -> tuple[SimplicialComplex, WeightedFiltration]:
    """Complete (d-1)-skeleton plus a random subset of d-faces, random weights."""
    full = list(combinations(range(1, n + 1), d + 1))
    take = rng.choice(len(full), size=min(n_faces, len(full)), replace=False)
    skeleton = complete_skeleton(n, d - 1)
    K = SimplicialComplex(
        {**{k: skeleton.faces(k) for k in range(d)}, d: [full[i] for i in sorted(take)]},
        validate=False,
    )
    w = {f: 0.0 for k in range(d) for f in K.faces(k)}
    for f, u in zip(K.faces(d), rng.random(K.f(d))):
        w[f] = float(u)
    return K, WeightedFiltration(K, w)


# -- independent oracles ------------------------------------------------------


def span_rank_oracle(columns: list[int]) -> int:
    """GF(2) rank by enumerating the whole span: rank = log2(#combinations)."""
    span = {0}
    for c in columns:
        span |= {c ^ s for s in span}
    assert len(span) & (len(span) - 1) == 0
    return len(span).bit_length() - 1


def boundary_columns_oracle(K: SimplicialComplex, d: int) -> list[int]:
    """Boundary columns of the d-faces as int bitsets over (d-1)-face indices."""
    cols = []
    for f in K.faces(d):
        if d == 0:
            cols.append(1)
            continue
        bits = 0
        for i in range(len(f)):
            bits ^= 1 << K.index(f[:i] + f[i + 1 :])
        cols.append(bits)
    return cols


def betti_oracle(K: SimplicialComplex, d_max: int) -> dict[int, int]:
    """Reduced Betti numbers from the span-enumeration rank oracle."""
    ranks = {}
    for j in range(0, d_max + 2):
        ranks[j] = span_rank_oracle(boundary_columns_oracle(K, j)) if K.f(j) else 0
    out = {-1: 1 - ranks[0]}
    for d in range(0, d_max + 1):
        out[d] = (K.f(d) - ranks[d]) - ranks[d + 1]
    return out
