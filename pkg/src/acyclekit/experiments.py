"""Monte-Carlo estimation of the desk-scale limit behaviour.

Each trial of a batch samples one random weighted complex and extracts three
point sets: nearest-coface weights of the codimension-1 faces, death times of
the codimension-1 homology, and minimal-spanning-acycle weights.  The exact
per-trial identities (death multiset equals acycle weight multiset;
nearest-face multiset contained in the deaths) are asserted on every trial,
never statistically.  Scaled by x -> n F(x) - d log n + log(d!), the extremal
points of all three processes approach a Poisson process with intensity
e^-x dx, which the experiment functions quantify via counts, factorial
moments, and chi-square goodness of fit.

Statistical outputs always carry (estimate, target, standard error); the
pass band is 3 standard errors unless a tighter absolute tolerance applies.
Trials derive their seeds deterministically from the master seed, so reports
are reproducible run to run.  ``ACYCLEKIT_THREADS`` caps trial parallelism.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .complexes import SimplicialComplex, WeightedFiltration, complete_skeleton
from .errors import InvariantViolationError, ValidationError
from .persistence import run_incremental
from .random_models import (
    Distribution,
    NoiseModel,
    PerturbedModelParams,
    UNIFORM01,
    UniformModelParams,
    gen_uniform_complex,
    nearest_face_values,
    perturbed_weight_arrays,
)
from .spanning import kruskal_msa
from .stability import PointMeasure, bottleneck_distance

THREADS_ENV = "ACYCLEKIT_THREADS"

__all__ = [
    "ExperimentReport",
    "GapTrend",
    "PerturbationSummary",
    "TrialBatch",
    "betti_isolated_gap",
    "derive_trial_seed",
    "estimate_factorial_moments",
    "frieze_lifetime_experiment",
    "growth_rate_experiment",
    "perturbation_convergence_experiment",
    "poisson_gof",
    "run_perturbed_batch",
    "run_uniform_batch",
    "ZETA_3",
]

ZETA_3 = 1.2020569031595943  # sum k^-3, the limiting spanning-tree weight


@dataclass(frozen=True)
class ExperimentReport:
    """One estimated statistic against its analytic target."""

    name: str
    estimate: float
    target: float
    se: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {
            "statistic": self.name,
            "estimate": self.estimate,
            "target": self.target,
            "se": self.se,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def derive_trial_seed(master_seed: int, trial: int) -> int:
    """Deterministic 64-bit child seed for one trial of a batch."""
    ss = np.random.SeedSequence([int(master_seed) & ((1 << 63) - 1), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _map_trials(fn, trials: int, threads: int | None):
    k = _thread_count(threads)
    if k <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, range(trials)))


@dataclass(frozen=True)
class TrialBatch:
    """Scaled per-trial point processes of one model at one size."""

    n: int
    d: int
    trials: int
    master_seed: int
    model: str
    nearest: tuple[PointMeasure, ...]
    deaths: tuple[PointMeasure, ...]
    msa: tuple[PointMeasure, ...]
    lifetimes: tuple[float, ...]
    noise_sup: tuple[float, ...] | None = None  # n * applied sup-norm, per trial
    noise_l1: tuple[float, ...] | None = None  # applied 1-norm, per trial
    db_to_base: tuple[float, ...] | None = None
    db_bound: tuple[float, ...] | None = None
    clamped: tuple[int, ...] | None = None
    base: "TrialBatch | None" = None

    def process(self, which: str) -> tuple[PointMeasure, ...]:
        try:
            return {"nearest": self.nearest, "deaths": self.deaths, "msa": self.msa}[which]
        except KeyError:
            raise ValidationError(f"unknown process {which!r}") from None


def _scale_array(values: np.ndarray, n: int, d: int, F: Distribution | None) -> PointMeasure:
    shift = -d * math.log(n) + math.lgamma(d + 1)
    if F is not None:
        values = F.cdf(np.asarray(values, dtype=np.float64))
    return PointMeasure.of(n * np.asarray(values, dtype=np.float64) + shift)


def _trial_processes(
    K: SimplicialComplex,
    wf: WeightedFiltration,
    n: int,
    d: int,
    gamma: int,
    F: Distribution | None,
    backend: str | None,
) -> tuple[PointMeasure, PointMeasure, PointMeasure, float]:
    """One trial's scaled (nearest, deaths, msa) processes and lifetime sum.

    The persistence pass classifies every face by full reduction; the greedy
    acycle pass re-reduces with the early stop at gamma.  Their weight
    multisets must match exactly, and the nearest-face multiset must embed in
    the deaths; both are hard assertions.
    """
    c_vals = nearest_face_values(K, wf, d)
    bd = run_incremental(K, wf, backend=backend)
    deaths = bd.death_multiset(d - 1)
    births = bd.birth_multiset(d - 1)
    acycle = kruskal_msa(K, wf, d, backend=backend, _known_gamma=gamma)
    msa_weights = sorted(wf.weight(f) for f in acycle.faces)
    if list(deaths) != msa_weights:
        raise InvariantViolationError("death multiset differs from spanning-acycle weights")
    # several (d-1)-faces may share one minimizing coface, so the containment
    # of nearest-face values in the deaths is a support statement
    if not set(c_vals.tolist()) <= set(deaths):
        raise InvariantViolationError("nearest-face values not contained in deaths")
    lifetime = math.fsum(deaths) - math.fsum(births)
    return (
        _scale_array(c_vals, n, d, F),
        _scale_array(np.asarray(deaths), n, d, F),
        _scale_array(np.asarray(msa_weights), n, d, F),
        lifetime,
    )


def run_uniform_batch(
    n: int,
    d: int,
    trials: int,
    master_seed: int,
    *,
    threads: int | None = None,
    backend: str | None = None,
) -> TrialBatch:
    """Independent trials of the uniform model at one size."""
    K = complete_skeleton(n, d)
    gamma = math.comb(n - 1, d)

    def one(t: int):
        seed = derive_trial_seed(master_seed, t)
        _, wf = gen_uniform_complex(UniformModelParams(n, d, seed), complex_=K)
        return _trial_processes(K, wf, n, d, gamma, None, backend)

    rows = _map_trials(one, trials, threads)
    return TrialBatch(
        n=n,
        d=d,
        trials=trials,
        master_seed=master_seed,
        model="uniform",
        nearest=tuple(r[0] for r in rows),
        deaths=tuple(r[1] for r in rows),
        msa=tuple(r[2] for r in rows),
        lifetimes=tuple(r[3] for r in rows),
    )


def run_perturbed_batch(
    n: int,
    d: int,
    trials: int,
    master_seed: int,
    noise: NoiseModel | None,
    *,
    base_dist: Distribution = UNIFORM01,
    threads: int | None = None,
    backend: str | None = None,
) -> TrialBatch:
    """Coupled trials of the perturbed model and its noise-free twin.

    Each trial draws the base weights once, runs the full pipeline on both
    weight vectors, records the scaled-process bottleneck distance between
    the perturbed and base death processes, and the stability bound
    lipschitz * n * sup-noise it must respect.
    """
    K = complete_skeleton(n, d)
    gamma = math.comb(n - 1, d)
    zero_lower = {f: 0.0 for k in range(d) for f in K.faces(k)}
    dfaces = K.faces(d)

    def one(t: int):
        seed = derive_trial_seed(master_seed, t)
        params = PerturbedModelParams(n, d, seed, base=base_dist, noise=noise)
        phi, phi_prime, applied, diag = perturbed_weight_arrays(params)
        out = []
        for arr in (phi, phi_prime):
            weights = dict(zero_lower)
            for f, w in zip(dfaces, arr):
                weights[f] = float(w)
            wf = WeightedFiltration(K, weights, validate=False)
            out.append(_trial_processes(K, wf, n, d, gamma, base_dist, backend))
        base_row, pert_row = out
        db = bottleneck_distance(pert_row[1], base_row[1])
        bound = base_dist.lipschitz * n * diag["eps_inf"]
        return base_row, pert_row, db, bound, n * diag["eps_inf"], diag["clamped"], diag["eps_l1"]

    rows = _map_trials(one, trials, threads)
    base = TrialBatch(
        n=n,
        d=d,
        trials=trials,
        master_seed=master_seed,
        model=f"base[{base_dist.name}]",
        nearest=tuple(r[0][0] for r in rows),
        deaths=tuple(r[0][1] for r in rows),
        msa=tuple(r[0][2] for r in rows),
        lifetimes=tuple(r[0][3] for r in rows),
    )
    return TrialBatch(
        n=n,
        d=d,
        trials=trials,
        master_seed=master_seed,
        model=f"perturbed[{base_dist.name}]",
        nearest=tuple(r[1][0] for r in rows),
        deaths=tuple(r[1][1] for r in rows),
        msa=tuple(r[1][2] for r in rows),
        lifetimes=tuple(r[1][3] for r in rows),
        noise_sup=tuple(r[4] for r in rows),
        noise_l1=tuple(r[6] for r in rows),
        db_to_base=tuple(r[2] for r in rows),
        db_bound=tuple(r[3] for r in rows),
        clamped=tuple(r[5] for r in rows),
        base=base,
    )


def _mean_se(samples: np.ndarray) -> tuple[float, float]:
    m = float(np.mean(samples))
    if len(samples) < 2:
        return m, 0.0
    return m, float(np.std(samples, ddof=1) / math.sqrt(len(samples)))


def _interval_mass(intervals: Sequence[tuple[float, float]]) -> float:
    """Integral of e^-x over a disjoint union of intervals (a, b]."""
    return math.fsum(math.exp(-a) - (0.0 if math.isinf(b) else math.exp(-b)) for a, b in intervals)


def estimate_factorial_moments(
    batch: TrialBatch,
    intervals: Sequence[tuple[float, float]],
    ell_max: int,
    *,
    process: str = "deaths",
) -> list[ExperimentReport]:
    """Factorial moments of interval counts against the Poisson closed form.

    For a Poisson count with mean lambda the ell-th factorial moment is
    lambda^ell; here lambda is the integral of e^-x over the interval union.
    """
    if batch.trials < 2:
        raise ValidationError("need at least two trials")
    counts = np.array(
        [sum(m.count(a, b) for a, b in intervals) for m in batch.process(process)],
        dtype=np.float64,
    )
    lam = _interval_mass(intervals)
    reports = []
    for ell in range(1, ell_max + 1):
        samples = counts.copy()
        for k in range(1, ell):
            samples = samples * (counts - k)
        est, se = _mean_se(samples)
        target = lam**ell
        tol = 3 * se
        reports.append(
            ExperimentReport(
                name=f"factorial_moment_l{ell}",
                estimate=est,
                target=target,
                se=se,
                tolerance=tol,
                passed=abs(est - target) <= tol,
                details={"intervals": list(intervals), "process": process},
            )
        )
    return reports


def poisson_gof(batch: TrialBatch, c: float, *, process: str = "deaths") -> ExperimentReport:
    """Counts in (c, inf) against the Poisson law with mean e^-c.

    Reports the count mean (3-SE band) plus variance and a chi-square
    statistic over the pooled bins {0, 1, 2, >=3}.
    """
    lam = math.exp(-c)
    counts = np.array([m.count_above(c) for m in batch.process(process)], dtype=np.float64)
    est, se = _mean_se(counts)
    var = float(np.var(counts, ddof=1)) if batch.trials > 1 else 0.0
    observed = np.array(
        [
            int(np.sum(counts == 0)),
            int(np.sum(counts == 1)),
            int(np.sum(counts == 2)),
            int(np.sum(counts >= 3)),
        ],
        dtype=np.float64,
    )
    pmf = [math.exp(-lam) * lam**k / math.factorial(k) for k in range(3)]
    expected = np.array(pmf + [max(1.0 - sum(pmf), 0.0)]) * batch.trials
    # a bin the target law cannot reach is an immediate rejection if occupied
    terms = []
    for o, e in zip(observed, expected):
        if e > 0:
            terms.append((o - e) ** 2 / e)
        elif o > 0:
            terms.append(math.inf)
    chi2_stat = float(sum(terms))
    p_value = float(stats.chi2.sf(chi2_stat, df=len(observed) - 1))
    tol = 3 * se
    passed = abs(est - lam) <= tol and p_value > 0.01
    return ExperimentReport(
        name=f"poisson_gof_c{c:g}",
        estimate=est,
        target=lam,
        se=se,
        tolerance=tol,
        passed=passed,
        details={
            "variance": var,
            "chi2": chi2_stat,
            "p_value": p_value,
            "bins_observed": observed.tolist(),
            "bins_expected": expected.tolist(),
            "process": process,
        },
    )


@dataclass(frozen=True)
class GapTrend:
    """Per-size gap between codim-1 homology rank and isolated-face count."""

    reports: tuple[ExperimentReport, ...]
    non_increasing_within_2se: bool


def betti_isolated_gap(
    n_list: Sequence[int],
    d: int,
    c: float,
    trials: int,
    master_seed: int,
    *,
    threads: int | None = None,
    backend: str | None = None,
) -> GapTrend:
    """Mean absolute gap |beta_{d-1} - N_{d-1}| at the critical threshold, per n.

    At the sublevel whose scaled image is c, beta_{d-1} equals the number of
    deaths above the threshold and N_{d-1} the number of nearest-face values
    above it, so the gap reads off the scaled processes directly.
    """
    reports = []
    means = []
    ses = []
    for i, n in enumerate(n_list):
        if n < d + 2:
            raise ValidationError(f"need n >= d + 2, got {n}")
        batch = run_uniform_batch(
            n, d, trials, derive_trial_seed(master_seed, i), threads=threads, backend=backend
        )
        gaps = np.array(
            [
                abs(dm.count_above(c) - cm.count_above(c))
                for dm, cm in zip(batch.deaths, batch.nearest)
            ],
            dtype=np.float64,
        )
        est, se = _mean_se(gaps)
        means.append(est)
        ses.append(se)
        reports.append(
            ExperimentReport(
                name=f"betti_isolated_gap_n{n}",
                estimate=est,
                target=0.0,
                se=se,
                tolerance=math.inf,
                passed=est >= 0.0,
                details={"n": n, "c": c},
            )
        )
    ok = all(
        means[i + 1] <= means[i] + 2 * math.hypot(ses[i], ses[i + 1])
        for i in range(len(means) - 1)
    )
    return GapTrend(reports=tuple(reports), non_increasing_within_2se=ok)


def frieze_lifetime_experiment(
    n: int,
    trials: int,
    master_seed: int,
    *,
    abs_tolerance: float = 0.05,
    threads: int | None = None,
    backend: str | None = None,
) -> ExperimentReport:
    """Mean total spanning-tree weight against the zeta(3) limit (d = 1)."""
    batch = run_uniform_batch(n, 1, trials, master_seed, threads=threads, backend=backend)
    samples = np.array(batch.lifetimes, dtype=np.float64)
    est, se = _mean_se(samples)
    target = ZETA_3
    passed = abs(est - target) <= abs_tolerance and abs(est - target) <= 3 * se
    return ExperimentReport(
        name=f"frieze_zeta3_n{n}",
        estimate=est,
        target=target,
        se=se,
        tolerance=min(abs_tolerance, 3 * se),
        passed=passed,
        details={"n": n, "trials": trials},
    )


def growth_rate_experiment(
    n_list: Sequence[int],
    d: int,
    trials: int,
    master_seed: int,
    *,
    band: float = 3.0,
    threads: int | None = None,
    backend: str | None = None,
) -> ExperimentReport:
    """Lifetime-sum growth check: E[L]/n^(d-1) stays within a bounded band."""
    if d < 2:
        raise ValidationError("growth-rate experiment needs d >= 2")
    ratios = {}
    details = {}
    for i, n in enumerate(n_list):
        batch = run_uniform_batch(
            n, d, trials, derive_trial_seed(master_seed, i), threads=threads, backend=backend
        )
        samples = np.array(batch.lifetimes, dtype=np.float64) / n ** (d - 1)
        est, se = _mean_se(samples)
        ratios[n] = est
        details[f"n{n}"] = {"ratio": est, "se": se}
    spread = max(ratios.values()) / min(ratios.values())
    return ExperimentReport(
        name=f"growth_rate_d{d}",
        estimate=spread,
        target=1.0,
        se=0.0,
        tolerance=band,
        passed=spread <= band and min(ratios.values()) > 0,
        details=details,
    )


@dataclass(frozen=True)
class PerturbationSummary:
    """Per-size stability of the perturbed processes."""

    noise_reports: tuple[ExperimentReport, ...]
    gof_reports: tuple[ExperimentReport, ...]
    db_fraction_ok: float
    db_worst_margin: float
    batches: tuple[TrialBatch, ...]

    @property
    def all_bounds_hold(self) -> bool:
        return self.db_fraction_ok == 1.0


def perturbation_convergence_experiment(
    n_list: Sequence[int],
    d: int,
    noise: NoiseModel | None,
    c: float,
    trials: int,
    master_seed: int,
    *,
    base_dist: Distribution = UNIFORM01,
    threads: int | None = None,
    backend: str | None = None,
) -> PerturbationSummary:
    """Perturbed-process convergence: noise decay, fit, and per-trial bounds.

    For every trial the bottleneck distance between the scaled perturbed and
    base death processes must not exceed lipschitz * n * sup-noise; the
    fraction of trials respecting it and the worst margin are reported, along
    with a goodness-of-fit report for the perturbed process at level c.
    """
    noise_reports = []
    gof_reports = []
    ok = 0
    total = 0
    worst = -math.inf
    batches = []
    for i, n in enumerate(n_list):
        batch = run_perturbed_batch(
            n,
            d,
            trials,
            derive_trial_seed(master_seed, i),
            noise,
            base_dist=base_dist,
            threads=threads,
            backend=backend,
        )
        batches.append(batch)
        sup = np.array(batch.noise_sup, dtype=np.float64)
        est, se = _mean_se(sup)
        noise_reports.append(
            ExperimentReport(
                name=f"noise_sup_n{n}",
                estimate=est,
                target=0.0,
                se=se,
                tolerance=math.inf,
                passed=True,
                details={"n": n, "clamped_total": int(sum(batch.clamped))},
            )
        )
        gof_reports.append(poisson_gof(batch, c))
        for db, bound in zip(batch.db_to_base, batch.db_bound):
            total += 1
            slack = 1e-9 * max(1.0, bound)
            if db <= bound + slack:
                ok += 1
            worst = max(worst, db - bound)
    return PerturbationSummary(
        noise_reports=tuple(noise_reports),
        gof_reports=tuple(gof_reports),
        db_fraction_ok=ok / total if total else 1.0,
        db_worst_margin=worst,
        batches=tuple(batches),
    )
