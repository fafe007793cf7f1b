"""Random weighted complexes and the scaling maps for their extremal statistics.

The uniform model puts weight 0 on every face below the top dimension of a
complete d-skeleton and i.i.d. uniform [0,1] weights on the d-faces, so its
sublevel complexes match the usual binomial random d-complex face-for-face.
The perturbed model draws the d-face weights from a generic strictly
increasing distribution and adds per-face noise; noise norms and any
monotonicity clamping are reported back as diagnostics.

All randomness flows through a counter-based 64-bit generator keyed by the
seed; weights are a deterministic function of (seed, face index) regardless
of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .complexes import Face, SimplicialComplex, WeightedFiltration, complete_skeleton
from .errors import InvariantViolationError, PreconditionError, ValidationError
from .stability import PointMeasure

__all__ = [
    "CLAMP_FLOOR",
    "CustomNoise",
    "Distribution",
    "EXPONENTIAL1",
    "IidScaledNoise",
    "PerturbedModelParams",
    "SharedShiftNoise",
    "UNIFORM01",
    "UniformModelParams",
    "critical_threshold",
    "default_scale_sequence",
    "distribution_by_name",
    "gen_perturbed_complex",
    "gen_uniform_complex",
    "nearest_face_distances",
    "nearest_face_values",
    "perturbed_weight_arrays",
    "scale_point_set",
]

CLAMP_FLOOR = 1e-12  # perturbed weights stay strictly above the 0 of lower faces


@dataclass(frozen=True)
class Distribution:
    """A strictly increasing CDF with inverse, for generic base weights."""

    name: str
    cdf: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    lipschitz: float

    def validate(self) -> None:
        qs = np.array([0.1, 0.4, 0.6, 0.9])
        xs = self.inverse(qs)
        if not np.all(np.diff(xs) > 0):
            raise ValidationError(f"distribution {self.name!r} has a non-increasing inverse")
        back = self.cdf(xs)
        if not np.allclose(back, qs, atol=1e-9):
            raise ValidationError(f"distribution {self.name!r}: cdf does not invert inverse")


UNIFORM01 = Distribution(
    name="uniform",
    cdf=lambda x: np.clip(x, 0.0, 1.0),
    inverse=lambda u: np.asarray(u, dtype=np.float64),
    lipschitz=1.0,
)

EXPONENTIAL1 = Distribution(
    name="exponential",
    cdf=lambda x: -np.expm1(-np.maximum(x, 0.0)),
    inverse=lambda u: -np.log1p(-np.asarray(u, dtype=np.float64)),
    lipschitz=1.0,
)

_DISTRIBUTIONS = {"uniform": UNIFORM01, "exponential": EXPONENTIAL1}


def distribution_by_name(name: str) -> Distribution:
    try:
        return _DISTRIBUTIONS[name]
    except KeyError:
        raise ValidationError(f"unknown distribution {name!r}") from None


@dataclass(frozen=True)
class UniformModelParams:
    """Complete d-skeleton on n vertices, uniform [0,1] top weights."""

    n: int
    d: int
    seed: int

    def validate(self) -> None:
        if self.d < 1:
            raise ValidationError("top dimension must be >= 1")
        if self.n < self.d + 1:
            raise ValidationError(f"need n >= d + 1, got n={self.n}, d={self.d}")


def default_scale_sequence(n: int) -> float:
    """The default noise scale a_n = n (log n)^2, growing faster than n log n."""
    return n * math.log(n) ** 2


@dataclass(frozen=True)
class IidScaledNoise:
    """Per-face i.i.d. draws divided by a_n (default n (log n)^2)."""

    law: str = "normal"
    a_n: float | None = None

    def sample(self, rng: np.random.Generator, n: int, count: int) -> np.ndarray:
        if self.law == "normal":
            raw = rng.standard_normal(count)
        elif self.law == "uniform":
            raw = rng.uniform(-1.0, 1.0, count)
        else:
            raise ValidationError(f"unknown noise law {self.law!r}")
        a = self.a_n if self.a_n is not None else default_scale_sequence(n)
        return raw / a


@dataclass(frozen=True)
class SharedShiftNoise:
    """The same deterministic shift on every d-face."""

    shift: float

    def sample(self, rng: np.random.Generator, n: int, count: int) -> np.ndarray:
        return np.full(count, float(self.shift))


@dataclass(frozen=True)
class CustomNoise:
    """Arbitrary per-face noise via a (rng, count) -> array callable."""

    sampler: Callable[[np.random.Generator, int], np.ndarray]

    def sample(self, rng: np.random.Generator, n: int, count: int) -> np.ndarray:
        out = np.asarray(self.sampler(rng, count), dtype=np.float64)
        if out.shape != (count,):
            raise ValidationError("custom noise sampler returned wrong shape")
        return out


NoiseModel = IidScaledNoise | SharedShiftNoise | CustomNoise


@dataclass(frozen=True)
class PerturbedModelParams:
    """Generic i.i.d. top weights plus per-face perturbations."""

    n: int
    d: int
    seed: int
    base: Distribution = UNIFORM01
    noise: NoiseModel | None = None

    def validate(self) -> None:
        UniformModelParams(self.n, self.d, self.seed).validate()
        self.base.validate()


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _skeleton_zero_weights(K: SimplicialComplex, d: int) -> dict[Face, float]:
    w: dict[Face, float] = {}
    for k in range(d):
        for f in K.faces(k):
            w[f] = 0.0
    return w


def _check_distinct(values: np.ndarray) -> None:
    if len(np.unique(values)) != len(values):
        raise InvariantViolationError("duplicate top-face weights: RNG misuse")


def gen_uniform_complex(
    params: UniformModelParams, *, complex_: SimplicialComplex | None = None
) -> tuple[SimplicialComplex, WeightedFiltration]:
    """Sample the uniform model; deterministic per seed.

    ``complex_`` may pass in a prebuilt complete skeleton to avoid
    reconstructing it across trials.
    """
    params.validate()
    K = complex_ if complex_ is not None else complete_skeleton(params.n, params.d)
    u = _rng(params.seed).random(K.f(params.d))
    _check_distinct(u)
    weights = _skeleton_zero_weights(K, params.d)
    for f, w in zip(K.faces(params.d), u):
        weights[f] = float(w)
    return K, WeightedFiltration(K, weights, validate=False)


def perturbed_weight_arrays(
    params: PerturbedModelParams,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, dict]:
    """Base weights, perturbed weights, applied noise, and diagnostics.

    Arrays are indexed by the lexicographic d-face index.  The perturbed
    weights are floored just above 0 to preserve monotonicity against the
    zero-weight lower skeleton; the count of clamped faces is reported.
    The applied noise (after clamping) feeds the recorded norms.
    """
    params.validate()
    m = math.comb(params.n, params.d + 1)
    rng = _rng(params.seed)
    u = rng.random(m)
    _check_distinct(u)
    phi = np.asarray(params.base.inverse(u), dtype=np.float64)
    if params.noise is None:
        eps = np.zeros(m)
    else:
        eps = np.asarray(params.noise.sample(rng, params.n, m), dtype=np.float64)
    raw = phi + eps
    phi_prime = np.maximum(raw, CLAMP_FLOOR)
    clamped = int((raw < CLAMP_FLOOR).sum())
    applied = phi_prime - phi
    diagnostics = {
        "eps_inf": float(np.max(np.abs(applied))) if m else 0.0,
        "eps_l1": float(np.sum(np.abs(applied))),
        "clamped": clamped,
    }
    return phi, phi_prime, applied, diagnostics


def gen_perturbed_complex(
    params: PerturbedModelParams, *, complex_: SimplicialComplex | None = None
) -> tuple[SimplicialComplex, WeightedFiltration, dict]:
    """Sample the perturbed model; returns the filtration plus noise diagnostics."""
    K = complex_ if complex_ is not None else complete_skeleton(params.n, params.d)
    _, phi_prime, _, diagnostics = perturbed_weight_arrays(params)
    weights = _skeleton_zero_weights(K, params.d)
    for f, w in zip(K.faces(params.d), phi_prime):
        weights[f] = float(w)
    return K, WeightedFiltration(K, weights, validate=False), diagnostics


def nearest_face_values(K: SimplicialComplex, wf: WeightedFiltration, d: int) -> np.ndarray:
    """Minimum coface weight per (d-1)-face, by lexicographic index."""
    if d < 1:
        raise ValidationError("nearest-face distances need d >= 1")
    n_low = K.f(d - 1)
    out = np.full(n_low, np.inf)
    w = wf.weights_by_index(d)
    rows = K.facet_rows(d)
    if rows.size:
        np.minimum.at(out, rows.ravel(), np.repeat(w, d + 1))
    if np.any(np.isinf(out)):
        missing = K.faces(d - 1)[int(np.flatnonzero(np.isinf(out))[0])]
        raise PreconditionError(f"face {missing} has no coface")
    return out


def nearest_face_distances(K: SimplicialComplex, wf: WeightedFiltration, d: int) -> PointMeasure:
    """The multiset of nearest-coface weights over the (d-1)-faces."""
    return PointMeasure.of(nearest_face_values(K, wf, d))


def scale_point_set(
    P: PointMeasure, n: int, d: int, F: Distribution | None = None
) -> PointMeasure:
    """Apply x -> n F(x) - d log n + log(d!) (F = identity when absent)."""
    if n < 2:
        raise ValidationError("scaling needs n >= 2")
    shift = -d * math.log(n) + math.lgamma(d + 1)
    if F is None:
        return PointMeasure.of(n * x + shift for x in P.values)
    vals = F.cdf(np.asarray(P.values, dtype=np.float64))
    return PointMeasure.of(n * v + shift for v in vals)


def critical_threshold(n: int, d: int, c: float) -> float:
    """The weight level whose scaled image is c: (d log n + c - log d!)/n."""
    return (d * math.log(n) + c - math.lgamma(d + 1)) / n
