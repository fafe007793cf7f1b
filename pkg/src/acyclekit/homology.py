"""GF(2) ranks, reduced Betti numbers, and positive/negative face classification.

All homology here is reduced: the augmentation line in dimension -1 is always
present, so a single point has every Betti number zero and the empty complex
has beta_-1 = 1.  Reduced Betti numbers follow from two ranks per dimension,
beta_d = nullity(boundary_d) - rank(boundary_{d+1}).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from ._kernels import Gf2Reducer, get_backend, n_words_for, pack_columns
from .complexes import Face, SimplicialComplex, WeightedFiltration, as_face, boundary_chain
from .errors import PreconditionError, ValidationError

NEGATIVE = "negative"
POSITIVE = "positive"

__all__ = [
    "NEGATIVE",
    "POSITIVE",
    "BettiVector",
    "Gf2Matrix",
    "TrackingReducer",
    "betti_numbers",
    "boundary_matrix",
    "classify_face",
    "gf2_rank",
    "incremental_betti",
]


@dataclass(frozen=True)
class Gf2Matrix:
    """A GF(2) matrix stored as packed 64-bit-word column bitsets."""

    words: np.ndarray  # (ncols, nwords), uint64
    nrows: int
    ncols: int

    @classmethod
    def from_columns(cls, columns: Iterable[Iterable[int]], nrows: int) -> "Gf2Matrix":
        cols = [list(c) for c in columns]
        for c in cols:
            if any(r < 0 or r >= nrows for r in c):
                raise ValidationError("column has a set bit outside [0, nrows)")
        words = pack_columns(cols, nrows)
        return cls(words=words, nrows=int(nrows), ncols=words.shape[0])


def boundary_matrix(K: SimplicialComplex, d: int) -> Gf2Matrix:
    """Matrix of the d-th boundary operator.

    Columns are the d-faces and rows the (d-1)-faces, both in lexicographic
    index order; dimension 0 has the single augmentation row.
    """
    if d < 0:
        raise ValidationError("boundary dimension must be >= 0")
    n_cols = K.f(d)
    n_rows = 1 if d == 0 else K.f(d - 1)
    rows = K.facet_rows(d)
    words = np.zeros((n_cols, n_words_for(n_rows)), dtype=np.uint64)
    for j in range(n_cols):
        for r in rows[j]:
            words[j, r >> 6] ^= np.uint64(1 << (int(r) & 63))
    return Gf2Matrix(words=words, nrows=max(1, n_rows), ncols=n_cols)


def gf2_rank(M: Gf2Matrix, *, backend: str | None = None) -> int:
    """Rank over GF(2); nullity is ncols - rank."""
    if M.ncols == 0:
        return 0
    pivots = get_backend(backend).reduce_packed(M.words, M.nrows, -1)
    return int((pivots >= 0).sum())


@dataclass(frozen=True)
class BettiVector:
    """Reduced Betti numbers with the cycle/boundary ranks behind them.

    ``betti[-1]`` is reported explicitly: 1 for the empty complex, else 0.
    """

    betti: Mapping[int, int]
    cycle_ranks: Mapping[int, int]
    boundary_ranks: Mapping[int, int]
    face_counts: Mapping[int, int]

    def __getitem__(self, d: int) -> int:
        return self.betti.get(d, 0)

    def euler_residual(self) -> int:
        """Difference of the two sides of the Euler-Poincare identity.

        chi = sum (-1)^j f_j must equal (1 - beta_-1) + sum_{j>=0} (-1)^j beta_j;
        the beta_-1 correction keeps the identity valid for the empty complex.
        """
        chi = sum((-1) ** j * n for j, n in self.face_counts.items() if j >= 0)
        rhs = (1 - self.betti.get(-1, 0)) + sum(
            (-1) ** j * b for j, b in self.betti.items() if j >= 0
        )
        return chi - rhs


def betti_numbers(K: SimplicialComplex, d_max: int | None = None, *, backend: str | None = None) -> BettiVector:
    """Reduced Betti numbers of K for -1 <= d <= d_max."""
    if d_max is None:
        d_max = max(K.dim, 0)
    ranks: dict[int, int] = {}
    for j in range(0, d_max + 2):
        ranks[j] = gf2_rank(boundary_matrix(K, j), backend=backend) if K.f(j) else 0
    betti = {-1: 1 - ranks[0]}
    z = {-1: 1}
    b = {-1: ranks[0]}
    f = {-1: 1}
    for d in range(0, d_max + 1):
        z[d] = K.f(d) - ranks[d]
        b[d] = ranks[d + 1]
        betti[d] = z[d] - b[d]
        f[d] = K.f(d)
    return BettiVector(betti=betti, cycle_ranks=z, boundary_ranks=b, face_counts=f)


def _facet_indices(K: SimplicialComplex, face: Face) -> list[int]:
    d = len(face) - 1
    if d == 0:
        return [0]
    return [K.index(face[:i] + face[i + 1 :]) for i in range(len(face))]


def classify_face(K: SimplicialComplex, sigma: Iterable[int], *, backend: str | None = None) -> str:
    """Classify an insertable face as negative or positive with respect to K.

    The face must not be in K while all its facets are.  It is negative
    exactly when its boundary is not already a boundary of K's top chains
    (insertion then drops beta_{d-1} by one); positive when the boundary is
    spanned (insertion raises beta_d by one).
    """
    f = as_face(sigma)
    d = len(f) - 1
    if f in K:
        raise PreconditionError(f"face {f} already in complex")
    if d >= 1:
        for i in range(len(f)):
            if f[:i] + f[i + 1 :] not in K:
                raise PreconditionError(f"facet {f[:i] + f[i + 1:]} of {f} missing")
    n_rows = 1 if d == 0 else K.f(d - 1)
    red = Gf2Reducer(n_rows, backend=backend)
    for g in K.faces(d):
        red.add(_facet_indices(K, g))
    pivot = red.probe(_facet_indices(K, f))
    return POSITIVE if pivot < 0 else NEGATIVE


def incremental_betti(
    K: SimplicialComplex, wf: WeightedFiltration, *, backend: str | None = None
) -> Iterator[tuple[Face, BettiVector]]:
    """Stream reduced Betti vectors along the filtration, one insertion at a time.

    Every step flips exactly one entry by one: a negative d-face lowers
    beta_{d-1}, a positive one raises beta_d.  The final vector matches
    ``betti_numbers(K)``.
    """
    betti: dict[int, int] = {-1: 1}
    z: dict[int, int] = {-1: 1}
    b: dict[int, int] = {-1: 0}
    f: dict[int, int] = {-1: 1}
    reducers: dict[int, Gf2Reducer] = {}
    for face in wf.order:
        d = len(face) - 1
        if d not in reducers:
            reducers[d] = Gf2Reducer(1 if d == 0 else K.f(d - 1), backend=backend)
        for key in (d - 1, d):
            betti.setdefault(key, 0)
            z.setdefault(key, 0)
            b.setdefault(key, 0)
        f[d] = f.get(d, 0) + 1
        pivot = reducers[d].add(_facet_indices(K, face))
        if pivot >= 0:
            betti[d - 1] -= 1
            b[d - 1] += 1
        else:
            betti[d] += 1
            z[d] += 1
        yield face, BettiVector(
            betti=dict(betti),
            cycle_ranks=dict(z),
            boundary_ranks=dict(b),
            face_counts=dict(f),
        )


class TrackingReducer:
    """GF(2) column reducer over arbitrary-precision int bitsets that records,
    for every column, which previously added columns it reduced against.

    ``process`` consumes the next column (its ordinal is the running count)
    and returns ``(pivot, combo)`` where ``combo`` is an int bitset over
    ordinals: for a zero reduction it is a kernel vector of the processed
    columns, the dependency certificate behind cycle extraction and homology
    representatives.
    """

    def __init__(self):
        self._by_pivot: dict[int, tuple[int, int]] = {}
        self._n = 0

    @property
    def rank(self) -> int:
        return len(self._by_pivot)

    @property
    def n_processed(self) -> int:
        return self._n

    def _run(self, col: int, combo: int) -> tuple[int, int]:
        while col:
            p = col.bit_length() - 1
            hit = self._by_pivot.get(p)
            if hit is None:
                return p, col, combo
            col ^= hit[0]
            combo ^= hit[1]
        return -1, 0, combo

    def process(self, col: int) -> tuple[int, int]:
        ordinal = self._n
        self._n += 1
        p, reduced, combo = self._run(int(col), 1 << ordinal)
        if p >= 0:
            self._by_pivot[p] = (reduced, combo)
        return p, combo

    def probe(self, col: int) -> tuple[int, int]:
        """Reduce without storing or consuming an ordinal."""
        p, _, combo = self._run(int(col), 0)
        return p, combo


def chain_to_bits(K: SimplicialComplex, chain_faces: Iterable[Face]) -> int:
    """Encode a set of same-dimension faces of K as an int bitset of indices."""
    bits = 0
    for f in chain_faces:
        bits ^= 1 << K.index(tuple(f))
    return bits


def bits_to_faces(K: SimplicialComplex, d: int, bits: int) -> list[Face]:
    faces = K.faces(d)
    out = []
    i = 0
    while bits:
        if bits & 1:
            out.append(faces[i])
        bits >>= 1
        i += 1
    return out


def boundary_bits(K: SimplicialComplex, face: Face) -> int:
    """Boundary column of a face as an int bitset over (d-1)-face indices."""
    d = len(face) - 1
    if d == 0:
        return 1
    return chain_to_bits(K, boundary_chain(face).support)
