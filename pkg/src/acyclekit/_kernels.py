"""GF(2) column-reduction kernels.

Columns are GF(2) vectors packed little-endian into 64-bit words: bit ``r`` of
a column lives in word ``r >> 6`` at position ``r & 63``.  All linear algebra
in the package runs through left-to-right column elimination keyed on each
column's highest set bit, with a pivot-row to owner-column map.  The same pass
serves rank queries, span-membership tests, and filtration pairing.

Two interchangeable backends implement the inner loops:

* ``"numba"`` -- ``@njit``-compiled kernels, the default when numba is
  importable;
* ``"numpy"`` -- a pure numpy/Python fallback with identical semantics.

Set the environment variable ``ACYCLEKIT_PURE_NUMPY=1`` before import to force
the fallback.  ``benchmarks/bench_reduction.py`` times one backend against the
other on representative workloads.
"""

from __future__ import annotations

import os
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

PURE_NUMPY_ENV = "ACYCLEKIT_PURE_NUMPY"

__all__ = [
    "PURE_NUMPY_ENV",
    "Backend",
    "Gf2Reducer",
    "available_backends",
    "default_backend_name",
    "get_backend",
    "n_words_for",
    "pack_columns",
    "pack_rows",
]


def n_words_for(n_rows: int) -> int:
    """Number of 64-bit words needed to hold ``n_rows`` bits (at least 1)."""
    return max(1, (int(n_rows) + 63) >> 6)


def pack_rows(rows: Iterable[int], n_words: int) -> np.ndarray:
    """Pack a set of row indices into a single word-array column."""
    out = np.zeros(n_words, dtype=np.uint64)
    for r in rows:
        out[r >> 6] ^= np.uint64(1 << (r & 63))
    return out


def pack_columns(columns: Iterable[Iterable[int]], n_rows: int) -> np.ndarray:
    """Pack an iterable of row-index columns into an (n_cols, n_words) array."""
    n_words = n_words_for(n_rows)
    cols = list(columns)
    out = np.zeros((len(cols), n_words), dtype=np.uint64)
    for j, rows in enumerate(cols):
        for r in rows:
            out[j, r >> 6] ^= np.uint64(1 << (r & 63))
    return out


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------


def _np_top_bit(words: np.ndarray) -> int:
    nz = np.flatnonzero(words)
    if nz.size == 0:
        return -1
    k = int(nz[-1])
    return (k << 6) + int(words[k]).bit_length() - 1


def _np_reduce_step(work: np.ndarray, cols: np.ndarray, owner: np.ndarray) -> int:
    while True:
        p = _np_top_bit(work)
        if p < 0:
            return -1
        o = int(owner[p])
        if o < 0:
            return p
        work ^= cols[o]


def _np_reduce_packed(cols: np.ndarray, n_rows: int, rank_cap: int = -1) -> np.ndarray:
    cols = cols.copy()
    n_cols = cols.shape[0]
    owner = np.full(max(1, n_rows), -1, dtype=np.int64)
    pivots = np.full(n_cols, -2, dtype=np.int64)
    rank = 0
    for j in range(n_cols):
        if 0 <= rank_cap <= rank:
            break
        work = cols[j]
        while True:
            p = _np_top_bit(work)
            if p < 0:
                pivots[j] = -1
                break
            if owner[p] < 0:
                owner[p] = j
                pivots[j] = p
                rank += 1
                break
            work ^= cols[owner[p]]
    return pivots


def _np_build_columns(facet_rows: np.ndarray, n_words: int) -> np.ndarray:
    n_cols, k = facet_rows.shape
    cols = np.zeros((n_cols, n_words), dtype=np.uint64)
    if n_cols == 0:
        return cols
    word_idx = facet_rows >> 6
    bits = (np.uint64(1) << (facet_rows & 63).astype(np.uint64)).astype(np.uint64)
    rows = np.arange(n_cols)
    for i in range(k):
        np.bitwise_xor.at(cols, (rows, word_idx[:, i]), bits[:, i])
    return cols


def _np_reduce_filtration(facet_rows: np.ndarray, n_rows: int, rank_cap: int = -1) -> np.ndarray:
    cols = _np_build_columns(facet_rows, n_words_for(n_rows))
    return _np_reduce_packed(cols, n_rows, rank_cap)


def _np_rank_of_subsets(cols: np.ndarray, subsets: np.ndarray, n_rows: int) -> np.ndarray:
    m, k = subsets.shape
    out = np.empty(m, dtype=np.int64)
    owner = np.full(max(1, n_rows), -1, dtype=np.int64)
    n_words = cols.shape[1]
    local = np.empty((k, n_words), dtype=np.uint64)
    for s in range(m):
        rank = 0
        touched = []
        for a in range(k):
            work = local[rank]
            work[:] = cols[subsets[s, a]]
            while True:
                p = _np_top_bit(work)
                if p < 0:
                    break
                o = int(owner[p])
                if o < 0:
                    owner[p] = rank
                    touched.append(p)
                    rank += 1
                    break
                work ^= local[o]
        out[s] = rank
        for p in touched:
            owner[p] = -1
    return out


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------


def _build_numba():  # pragma: no cover - exercised indirectly
    from numba import njit

    @njit(cache=True, nogil=True)
    def top_bit(words):
        for k in range(words.shape[0] - 1, -1, -1):
            w = words[k]
            if w != np.uint64(0):
                b = -1
                while w != np.uint64(0):
                    w >>= np.uint64(1)
                    b += 1
                return (k << 6) + b
        return -1

    @njit(cache=True, nogil=True)
    def reduce_step(work, cols, owner):
        n_words = work.shape[0]
        while True:
            p = top_bit(work)
            if p < 0:
                return -1
            o = owner[p]
            if o < 0:
                return p
            for t in range(n_words):
                work[t] ^= cols[o, t]

    @njit(cache=True, nogil=True)
    def reduce_packed(cols_in, n_rows, rank_cap):
        n_cols, n_words = cols_in.shape
        cols = cols_in.copy()
        owner = np.full(max(1, n_rows), -1, dtype=np.int64)
        pivots = np.full(n_cols, -2, dtype=np.int64)
        rank = 0
        for j in range(n_cols):
            if 0 <= rank_cap <= rank:
                break
            work = cols[j]
            while True:
                p = top_bit(work)
                if p < 0:
                    pivots[j] = -1
                    break
                o = owner[p]
                if o < 0:
                    owner[p] = j
                    pivots[j] = p
                    rank += 1
                    break
                for t in range(n_words):
                    work[t] ^= cols[o, t]
        return pivots

    @njit(cache=True, nogil=True)
    def reduce_filtration(facet_rows, n_rows, rank_cap):
        n_cols, k = facet_rows.shape
        n_words = max(1, (n_rows + 63) >> 6)
        cols = np.zeros((n_cols, n_words), dtype=np.uint64)
        owner = np.full(max(1, n_rows), -1, dtype=np.int64)
        pivots = np.full(n_cols, -2, dtype=np.int64)
        rank = 0
        for j in range(n_cols):
            if 0 <= rank_cap <= rank:
                break
            work = cols[j]
            for i in range(k):
                r = facet_rows[j, i]
                work[r >> 6] ^= np.uint64(1) << np.uint64(r & 63)
            while True:
                p = top_bit(work)
                if p < 0:
                    pivots[j] = -1
                    break
                o = owner[p]
                if o < 0:
                    owner[p] = j
                    pivots[j] = p
                    rank += 1
                    break
                for t in range(n_words):
                    work[t] ^= cols[o, t]
        return pivots

    @njit(cache=True, nogil=True)
    def rank_of_subsets(cols, subsets, n_rows):
        m, k = subsets.shape
        n_words = cols.shape[1]
        out = np.empty(m, dtype=np.int64)
        owner = np.full(max(1, n_rows), -1, dtype=np.int64)
        local = np.empty((k, n_words), dtype=np.uint64)
        touched = np.empty(k, dtype=np.int64)
        for s in range(m):
            rank = 0
            n_touched = 0
            for a in range(k):
                work = local[rank] if rank < k else local[k - 1]
                for t in range(n_words):
                    work[t] = cols[subsets[s, a], t]
                while True:
                    p = top_bit(work)
                    if p < 0:
                        break
                    o = owner[p]
                    if o < 0:
                        owner[p] = rank
                        touched[n_touched] = p
                        n_touched += 1
                        rank += 1
                        break
                    for t in range(n_words):
                        work[t] ^= local[o, t]
            out[s] = rank
            for i in range(n_touched):
                owner[touched[i]] = -1
        return out

    return {
        "reduce_step": reduce_step,
        "reduce_packed": reduce_packed,
        "reduce_filtration": reduce_filtration,
        "rank_of_subsets": rank_of_subsets,
    }


class Backend(NamedTuple):
    """Bundle of kernel entry points for one implementation."""

    name: str
    reduce_step: Callable
    reduce_packed: Callable
    reduce_filtration: Callable
    rank_of_subsets: Callable


def _as_backend(name: str, fns: dict) -> Backend:
    return Backend(
        name=name,
        reduce_step=fns["reduce_step"],
        reduce_packed=fns["reduce_packed"],
        reduce_filtration=fns["reduce_filtration"],
        rank_of_subsets=fns["rank_of_subsets"],
    )


_BACKENDS: dict[str, Backend] = {
    "numpy": _as_backend(
        "numpy",
        {
            "reduce_step": _np_reduce_step,
            "reduce_packed": _np_reduce_packed,
            "reduce_filtration": _np_reduce_filtration,
            "rank_of_subsets": _np_rank_of_subsets,
        },
    )
}

if not os.environ.get(PURE_NUMPY_ENV):
    try:
        _BACKENDS["numba"] = _as_backend("numba", _build_numba())
    except ImportError:  # pragma: no cover - depends on environment
        pass

_DEFAULT = "numba" if "numba" in _BACKENDS else "numpy"


def available_backends() -> tuple[str, ...]:
    """Names of the kernel backends usable in this process."""
    return tuple(sorted(_BACKENDS))


def default_backend_name() -> str:
    return _DEFAULT


def get_backend(name: str | None = None) -> Backend:
    """Resolve a backend by name; ``None`` picks the process default."""
    if name is None:
        name = _DEFAULT
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}") from None


class Gf2Reducer:
    """Streaming GF(2) column reducer with a persistent pivot map.

    Columns arrive one at a time as row-index sets.  ``add`` reduces the new
    column against the stored basis; an independent column is kept and its
    pivot row returned, a dependent one returns -1.  ``probe`` answers the
    same span-membership question without mutating the state.
    """

    def __init__(self, n_rows: int, backend: str | None = None):
        self.n_rows = int(n_rows)
        self._n_words = n_words_for(n_rows)
        self._owner = np.full(max(1, self.n_rows), -1, dtype=np.int64)
        self._cols = np.zeros((16, self._n_words), dtype=np.uint64)
        self._count = 0
        self._step = get_backend(backend).reduce_step

    @property
    def rank(self) -> int:
        return self._count

    def _reduce(self, rows: Sequence[int]) -> tuple[np.ndarray, int]:
        work = pack_rows(rows, self._n_words)
        pivot = int(self._step(work, self._cols, self._owner))
        return work, pivot

    def probe(self, rows: Sequence[int]) -> int:
        """Pivot the column would take, or -1 if it lies in the current span."""
        return self._reduce(rows)[1]

    def add(self, rows: Sequence[int]) -> int:
        """Reduce a column and keep it when independent; return its pivot or -1."""
        work, pivot = self._reduce(rows)
        if pivot >= 0:
            if self._count == self._cols.shape[0]:
                grown = np.zeros((2 * self._count, self._n_words), dtype=np.uint64)
                grown[: self._count] = self._cols
                self._cols = grown
            self._cols[self._count] = work
            self._owner[pivot] = self._count
            self._count += 1
        return pivot
