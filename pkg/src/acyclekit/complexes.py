"""Weighted simplicial complexes: construction, validation, orders, file I/O.

A face is a strictly increasing tuple of non-negative integer vertex ids; its
dimension is one less than its length.  A :class:`SimplicialComplex` is a
downward-closed family of faces grouped by dimension, immutable after
construction and therefore safe to share across threads.  A
:class:`WeightedFiltration` couples monotone face weights with a deterministic
total order extending the weight partial order; the same order is reused by
every downstream computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .errors import (
    MalformedFaceError,
    MissingFaceError,
    MissingWeightError,
    NonMonotoneWeightsError,
    ValidationError,
)

Face = tuple[int, ...]

__all__ = [
    "Chain",
    "Face",
    "SimplicialComplex",
    "WeightedFiltration",
    "as_face",
    "boundary_chain",
    "build_complex",
    "complete_skeleton",
    "dump_complex",
    "dumps_complex",
    "load_complex",
    "loads_complex",
    "sublevel_complex",
    "total_order",
]


def as_face(vertices: Iterable[int]) -> Face:
    """Normalize a vertex collection into a face tuple, validating it."""
    vs = tuple(sorted(vertices))
    if not vs:
        raise MalformedFaceError("a face needs at least one vertex")
    for v in vs:
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 0:
            raise MalformedFaceError(f"vertex ids must be non-negative integers, got {v!r}")
    if len(set(vs)) != len(vs):
        raise MalformedFaceError(f"duplicate vertex inside face {vs}")
    return tuple(int(v) for v in vs)


def _facets(face: Face) -> list[Face]:
    return [face[:i] + face[i + 1 :] for i in range(len(face))]


@dataclass(frozen=True)
class Chain:
    """A GF(2) chain of one dimension, represented by its support.

    Addition is symmetric difference of supports.  Dimension -1 is the
    augmentation line: its only face is the empty tuple.
    """

    dim: int
    support: frozenset[Face]

    def __post_init__(self):
        for f in self.support:
            if len(f) != self.dim + 1:
                raise ValidationError(f"face {f} has dimension {len(f) - 1}, chain has {self.dim}")

    def __add__(self, other: "Chain") -> "Chain":
        if self.dim != other.dim:
            raise ValidationError("cannot add chains of different dimensions")
        return Chain(self.dim, self.support ^ other.support)

    __xor__ = __add__

    def is_zero(self) -> bool:
        return not self.support

    def boundary(self) -> "Chain":
        out: frozenset[Face] = frozenset()
        for f in self.support:
            out = out ^ boundary_chain(f).support
        return Chain(self.dim - 1, out)


def boundary_chain(face: Iterable[int]) -> Chain:
    """GF(2) boundary of a single face.

    In dimension >= 1 the support is the set of facets (signs vanish over
    GF(2)).  A vertex maps to the augmentation chain supported on the empty
    face, encoding that the zeroth boundary of every vertex is 1.
    """
    f = as_face(face)
    d = len(f) - 1
    if d == 0:
        return Chain(-1, frozenset({()}))
    return Chain(d - 1, frozenset(_facets(f)))


class SimplicialComplex:
    """A downward-closed set of faces over integer vertex labels.

    Faces are kept in lexicographic order per dimension, and each face gets a
    per-dimension index assigned once at construction; those indices double as
    boundary-matrix row/column ids everywhere else in the package.
    """

    __slots__ = ("_faces", "_index", "_facet_rows")

    def __init__(self, faces_by_dim: Mapping[int, Iterable[Face]], *, validate: bool = True):
        faces: dict[int, tuple[Face, ...]] = {}
        for d, fs in faces_by_dim.items():
            fs = tuple(sorted(fs))
            if fs:
                faces[int(d)] = fs
        self._faces = faces
        self._index = {d: {f: i for i, f in enumerate(fs)} for d, fs in faces.items()}
        self._facet_rows: dict[int, np.ndarray] = {}
        if validate:
            self._validate()

    def _validate(self) -> None:
        for d, fs in self._faces.items():
            for f in fs:
                if len(f) != d + 1:
                    raise ValidationError(f"face {f} filed under dimension {d}")
                as_face(f)
                if d >= 1:
                    lower = self._index.get(d - 1, {})
                    for g in _facets(f):
                        if g not in lower:
                            raise MissingFaceError(f"sub-face {g} of {f} missing: complex not closed")

    # -- queries ----------------------------------------------------------

    @property
    def dim(self) -> int:
        """Largest face dimension; -1 for the empty complex."""
        return max(self._faces, default=-1)

    def faces(self, d: int) -> tuple[Face, ...]:
        return self._faces.get(d, ())

    def f(self, d: int) -> int:
        """Face count in dimension d."""
        return len(self._faces.get(d, ()))

    def f_vector(self) -> dict[int, int]:
        return {d: len(fs) for d, fs in sorted(self._faces.items())}

    def n_faces(self) -> int:
        return sum(len(fs) for fs in self._faces.values())

    def all_faces(self) -> Iterator[Face]:
        for d in sorted(self._faces):
            yield from self._faces[d]

    def vertices(self) -> tuple[int, ...]:
        return tuple(f[0] for f in self.faces(0))

    def index(self, face: Face) -> int:
        """Per-dimension lexicographic index of a face."""
        d = len(face) - 1
        try:
            return self._index[d][face]
        except KeyError:
            raise MissingFaceError(f"face {face} not in complex") from None

    def __contains__(self, face) -> bool:
        f = tuple(face)
        return f in self._index.get(len(f) - 1, {})

    def __len__(self) -> int:
        return self.n_faces()

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplicialComplex) and self._faces == other._faces

    def __hash__(self):
        return hash(tuple(sorted((d, fs) for d, fs in self._faces.items())))

    def __repr__(self) -> str:
        fv = ",".join(f"f{d}={n}" for d, n in self.f_vector().items())
        return f"SimplicialComplex({fv or 'empty'})"

    def facet_rows(self, d: int) -> np.ndarray:
        """Lexicographic (d-1)-face indices of each d-face's facets.

        Shape (f_d, d+1); dimension 0 maps every vertex to the single
        augmentation row 0.
        """
        if d not in self._facet_rows:
            fs = self.faces(d)
            if d == 0:
                rows = np.zeros((len(fs), 1), dtype=np.int64)
            else:
                lower = self._index.get(d - 1, {})
                rows = np.empty((len(fs), d + 1), dtype=np.int64)
                for j, f in enumerate(fs):
                    for i, g in enumerate(_facets(f)):
                        rows[j, i] = lower[g]
            self._facet_rows[d] = rows
        return self._facet_rows[d]

    # -- constructions ----------------------------------------------------

    def skeleton(self, d: int) -> "SimplicialComplex":
        return SimplicialComplex(
            {k: fs for k, fs in self._faces.items() if k <= d}, validate=False
        )

    def union(self, other: "SimplicialComplex") -> "SimplicialComplex":
        dims = set(self._faces) | set(other._faces)
        return SimplicialComplex(
            {d: set(self.faces(d)) | set(other.faces(d)) for d in dims}, validate=False
        )

    def intersection(self, other: "SimplicialComplex") -> "SimplicialComplex":
        dims = set(self._faces) & set(other._faces)
        return SimplicialComplex(
            {d: set(self.faces(d)) & set(other.faces(d)) for d in dims}, validate=False
        )

    def with_faces(self, extra: Iterable[Face]) -> "SimplicialComplex":
        """Complex with extra faces added; closure is re-validated."""
        by_dim: dict[int, set[Face]] = {d: set(fs) for d, fs in self._faces.items()}
        for f in extra:
            f = as_face(f)
            by_dim.setdefault(len(f) - 1, set()).add(f)
        return SimplicialComplex(by_dim)


def build_complex(face_list: Iterable[Iterable[int]]) -> SimplicialComplex:
    """Downward closure of the given faces.

    Idempotent: feeding back a complex's own face list reproduces it.
    """
    by_dim: dict[int, set[Face]] = {}
    for raw in face_list:
        f = as_face(raw)
        for k in range(1, len(f) + 1):
            for sub in combinations(f, k):
                by_dim.setdefault(k - 1, set()).add(sub)
    return SimplicialComplex(by_dim, validate=False)


def complete_skeleton(n: int, d: int) -> SimplicialComplex:
    """All faces of dimension <= d on vertices 1..n, so f_k = C(n, k+1)."""
    if n < 1:
        raise ValidationError("need at least one vertex")
    if d < 0:
        raise ValidationError("dimension must be >= 0")
    verts = range(1, n + 1)
    by_dim = {k: list(combinations(verts, k + 1)) for k in range(min(d, n - 1) + 1)}
    return SimplicialComplex(by_dim, validate=False)


_TIE_KEYS: dict[str, Callable[[Face], tuple]] = {
    "lex": lambda f: f,
    "revlex": lambda f: tuple(-v for v in reversed(f)),
}


class WeightedFiltration:
    """Monotone face weights plus a total order extending them.

    The order sorts by (weight, dimension, tie-break key over the vertex
    tuple), which refines the weight partial order and keeps every face after
    its sub-faces.  ``tie_break`` may be ``"lex"`` (default) or ``"revlex"``;
    outputs that are unique in the weights (per-dimension weight multisets of
    deaths, spanning-acycle weights, ...) must agree across the two.
    """

    def __init__(
        self,
        complex_: SimplicialComplex,
        weights: Mapping[Face, float],
        *,
        tie_break: str = "lex",
        validate: bool = True,
    ):
        if tie_break not in _TIE_KEYS:
            raise ValidationError(f"unknown tie_break {tie_break!r}")
        self.complex = complex_
        self.tie_break = tie_break
        self._weights = {f: float(w) for f, w in weights.items()}
        if validate:
            self._validate()
        self._global_order: tuple[Face, ...] | None = None
        self._global_rank: dict[Face, int] | None = None
        self._dim_perm: dict[int, np.ndarray] = {}
        self._dim_faces: dict[int, tuple[Face, ...]] = {}
        self._dim_weights: dict[int, np.ndarray] = {}
        self._dim_rank: dict[int, dict[Face, int]] = {}
        self._dim_facet_rank_rows: dict[int, np.ndarray] = {}
        self._by_index: dict[int, np.ndarray] = {}

    def _validate(self) -> None:
        K = self.complex
        for f in K.all_faces():
            if f not in self._weights:
                raise MissingWeightError(f"face {f} has no weight")
        for d in sorted(K.f_vector()):
            if d == 0:
                continue
            for f in K.faces(d):
                wf = self._weights[f]
                for g in _facets(f):
                    if self._weights[g] > wf:
                        raise NonMonotoneWeightsError(
                            f"w{f}={wf} is below w{g}={self._weights[g]}"
                        )

    # -- order queries -----------------------------------------------------

    @property
    def order(self) -> tuple[Face, ...]:
        """All faces in the total order (ascending weight, dim, tie key)."""
        if self._global_order is None:
            key = _TIE_KEYS[self.tie_break]
            self._global_order = tuple(
                sorted(
                    self.complex.all_faces(),
                    key=lambda f: (self._weights[f], len(f), key(f)),
                )
            )
        return self._global_order

    def rank(self, face: Face) -> int:
        """Position of a face in the total order (the discrete filtration index)."""
        if self._global_rank is None:
            self._global_rank = {f: i for i, f in enumerate(self.order)}
        return self._global_rank[tuple(face)]

    def weight(self, face: Face) -> float:
        try:
            return self._weights[tuple(face)]
        except KeyError:
            raise MissingWeightError(f"face {tuple(face)} has no weight") from None

    def total_weight(self, faces: Iterable[Face]) -> float:
        return math.fsum(self._weights[tuple(f)] for f in faces)

    def _ensure_dim(self, d: int) -> None:
        """Per-dimension filtration order as a permutation of the lex face list."""
        if d in self._dim_perm:
            return
        w = self.weights_by_index(d)
        if self.tie_break == "lex":
            # faces(d) is lex-sorted, so a stable argsort realizes the tie-break
            perm = np.argsort(w, kind="stable")
        else:
            faces = self.complex.faces(d)
            key = _TIE_KEYS[self.tie_break]
            perm = np.array(
                sorted(range(len(faces)), key=lambda j: (w[j], key(faces[j]))),
                dtype=np.int64,
            )
        self._dim_perm[d] = perm
        self._dim_weights[d] = w[perm]

    def faces_in_order(self, d: int) -> tuple[Face, ...]:
        """d-faces sorted by the total order."""
        if d not in self._dim_faces:
            self._ensure_dim(d)
            faces = self.complex.faces(d)
            self._dim_faces[d] = tuple(faces[j] for j in self._dim_perm[d])
        return self._dim_faces[d]

    def weights_in_order(self, d: int) -> np.ndarray:
        self._ensure_dim(d)
        return self._dim_weights[d]

    def dim_rank(self, face: Face) -> int:
        """Position of a face in the order restricted to its own dimension."""
        d = len(face) - 1
        if d not in self._dim_rank:
            self._dim_rank[d] = {f: i for i, f in enumerate(self.faces_in_order(d))}
        return self._dim_rank[d][tuple(face)]

    def facet_rank_rows(self, d: int) -> np.ndarray:
        """Facet row ids of each d-face, in filtration order on both axes.

        Row space is the (d-1)-faces indexed by their within-dimension
        filtration rank (dimension 0 uses the single augmentation row), and
        the j-th row of the result describes the j-th d-face in filtration
        order.  This is the input the reduction kernels consume.
        """
        if d not in self._dim_facet_rank_rows:
            self._ensure_dim(d)
            perm = self._dim_perm[d]
            if d == 0:
                rows = np.zeros((len(perm), 1), dtype=np.int64)
            else:
                self._ensure_dim(d - 1)
                low_perm = self._dim_perm[d - 1]
                inv = np.empty(len(low_perm), dtype=np.int64)
                inv[low_perm] = np.arange(len(low_perm), dtype=np.int64)
                rows = inv[self.complex.facet_rows(d)][perm]
            self._dim_facet_rank_rows[d] = rows
        return self._dim_facet_rank_rows[d]

    def weights_by_index(self, d: int) -> np.ndarray:
        """Weights of d-faces in lexicographic (index) order."""
        if d not in self._by_index:
            self._by_index[d] = np.array(
                [self._weights[f] for f in self.complex.faces(d)], dtype=np.float64
            )
        return self._by_index[d]

    # -- sublevels ----------------------------------------------------------

    def sublevel(self, t: float) -> SimplicialComplex:
        """The subcomplex of faces with weight <= t (monotonicity closes it)."""
        by_dim: dict[int, list[Face]] = {}
        for d in sorted(self.complex.f_vector()):
            kept = [f for f in self.complex.faces(d) if self._weights[f] <= t]
            if kept:
                by_dim[d] = kept
        return SimplicialComplex(by_dim, validate=False)

    def faces_strictly_before(self, face: Face) -> list[Face]:
        """Faces preceding the given face in the total order."""
        r = self.rank(face)
        return list(self.order[:r])

    def __repr__(self) -> str:
        return f"WeightedFiltration({self.complex!r}, tie_break={self.tie_break!r})"


def total_order(
    K: SimplicialComplex, weights: Mapping[Face, float], *, tie_break: str = "lex"
) -> WeightedFiltration:
    """Validate weights on K and fix the deterministic total order."""
    return WeightedFiltration(K, weights, tie_break=tie_break)


def sublevel_complex(K: SimplicialComplex, wf: WeightedFiltration, t: float) -> SimplicialComplex:
    """The sublevel complex at level t of a validated filtration of K."""
    if wf.complex is not K and wf.complex != K:
        raise ValidationError("filtration was built for a different complex")
    return wf.sublevel(t)


# ---------------------------------------------------------------------------
# file format: one face per line, `dim v0 v1 ... vdim weight`, '#' comments
# ---------------------------------------------------------------------------


def dumps_complex(wf: WeightedFiltration) -> str:
    """Serialize a weighted complex deterministically (dimension, then lex)."""
    lines = ["# acyclekit complex file: dim v0 v1 ... vdim weight"]
    K = wf.complex
    for d in sorted(K.f_vector()):
        for f in K.faces(d):
            verts = " ".join(str(v) for v in f)
            lines.append(f"{d} {verts} {wf.weight(f)!r}")
    return "\n".join(lines) + "\n"


def dump_complex(path, wf: WeightedFiltration) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_complex(wf))


def loads_complex(text: str, *, auto_close_zero: bool = False) -> WeightedFiltration:
    """Parse the text complex format.

    Missing sub-faces are an error unless ``auto_close_zero`` is set, in which
    case they are added with weight 0.
    """
    by_dim: dict[int, set[Face]] = {}
    weights: dict[Face, float] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            d = int(parts[0])
            verts = tuple(int(p) for p in parts[1:-1])
            w = float(parts[-1])
        except (ValueError, IndexError):
            raise ValidationError(f"line {ln}: cannot parse {raw!r}") from None
        if len(verts) != d + 1:
            raise ValidationError(f"line {ln}: dimension {d} face needs {d + 1} vertices")
        f = as_face(verts)
        if f in weights:
            raise ValidationError(f"line {ln}: duplicate face {f}")
        by_dim.setdefault(d, set()).add(f)
        weights[f] = w
    if auto_close_zero:
        for d in range(max(by_dim, default=0), 0, -1):
            for f in list(by_dim.get(d, ())):
                for g in _facets(f):
                    if g not in by_dim.setdefault(d - 1, set()):
                        by_dim[d - 1].add(g)
                        weights[g] = 0.0
    K = SimplicialComplex(by_dim)
    return WeightedFiltration(K, weights)


def load_complex(path, *, auto_close_zero: bool = False) -> WeightedFiltration:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_complex(fh.read(), auto_close_zero=auto_close_zero)
