"""Command-line front end.

Subcommands: ``homology`` (Betti vector), ``persistence`` (diagram CSV),
``msa`` (spanning-acycle faces and weights as JSON), ``stability`` (matching
distances for two weightings), ``simulate`` (write a .complex file), and
``experiment`` (Monte-Carlo reports as CSV plus an optional SVG histogram).

Every output embeds the run configuration and library version.  Exit codes:
0 success, 1 validation or usage error, 2 computation succeeded but a
checked identity or tolerance failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .complexes import dump_complex, load_complex
from .errors import AcycleKitError, ValidationError
from .experiments import (
    betti_isolated_gap,
    estimate_factorial_moments,
    frieze_lifetime_experiment,
    growth_rate_experiment,
    perturbation_convergence_experiment,
    poisson_gof,
    run_uniform_batch,
)
from .homology import betti_numbers
from .persistence import build_diagram, run_incremental
from .random_models import (
    IidScaledNoise,
    PerturbedModelParams,
    SharedShiftNoise,
    UniformModelParams,
    distribution_by_name,
    gen_perturbed_complex,
    gen_uniform_complex,
)
from .spanning import brute_force_msa, kruskal_msa, prim_msa
from .stability import stability_check

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ASSERTION = 2

__all__ = ["main"]


def _config_of(args: argparse.Namespace) -> dict:
    # destination paths are not provenance: identical computations must
    # produce byte-identical artifacts wherever they are written
    skip = {"func", "out", "svg"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(cfg.items())}


def _emit_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_preamble(config: dict) -> list[str]:
    return [
        f"# version: acyclekit {__version__}",
        f"# config: {json.dumps(config, sort_keys=True, default=str)}",
    ]


def _emit_csv(lines: list[str], path: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(x: float) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return repr(float(x))


def _parse_noise(spec: str | None):
    if spec in (None, "", "none"):
        return None
    parts = spec.split(":")
    if parts[0] == "shared_shift":
        if len(parts) != 2:
            raise ValidationError("shared_shift noise needs a shift, e.g. shared_shift:0.01")
        return SharedShiftNoise(shift=float(parts[1]))
    if parts[0] == "iid_scaled":
        a_n = float(parts[1]) if len(parts) > 1 and parts[1] else None
        law = parts[2] if len(parts) > 2 else "normal"
        return IidScaledNoise(law=law, a_n=a_n)
    raise ValidationError(f"unknown noise spec {spec!r}")


# -- subcommands -------------------------------------------------------------


def _cmd_homology(args) -> int:
    wf = load_complex(args.infile, auto_close_zero=args.auto_close_zero)
    bv = betti_numbers(wf.complex, args.dmax)
    payload = {
        "version": __version__,
        "config": _config_of(args),
        "betti": {str(d): b for d, b in sorted(bv.betti.items())},
        "cycle_ranks": {str(d): b for d, b in sorted(bv.cycle_ranks.items())},
        "boundary_ranks": {str(d): b for d, b in sorted(bv.boundary_ranks.items())},
        "euler_residual": bv.euler_residual(),
    }
    _emit_json(payload, args.out)
    return EXIT_OK if bv.euler_residual() == 0 else EXIT_ASSERTION


def _cmd_persistence(args) -> int:
    wf = load_complex(args.infile, auto_close_zero=args.auto_close_zero)
    diagram = build_diagram(wf.complex, wf)
    bd = run_incremental(wf.complex, wf)
    lines = _csv_preamble(_config_of(args))
    lines.append("dim,birth,death")
    for dim, birth, death in diagram.to_csv_rows(include_augmentation=args.include_augmentation):
        lines.append(f"{dim},{_fmt(birth)},{_fmt(death)}")
    _emit_csv(lines, args.out)
    # projected diagram multisets must match the incremental multisets
    for d in sorted(wf.complex.f_vector()):
        if diagram.births(d) != bd.birth_multiset(d):
            return EXIT_ASSERTION
        if diagram.deaths(d, finite_only=True) != bd.death_multiset(d):
            return EXIT_ASSERTION
    return EXIT_OK


def _cmd_msa(args) -> int:
    wf = load_complex(args.infile, auto_close_zero=args.auto_close_zero)
    algo = {"kruskal": kruskal_msa, "prim": prim_msa, "brute": brute_force_msa}[args.algorithm]
    acycle = algo(wf.complex, wf, args.d)
    payload = {
        "version": __version__,
        "config": _config_of(args),
        "dim": acycle.dim,
        "faces": [list(f) for f in acycle.faces],
        "weights": [wf.weight(f) for f in acycle.faces],
        "total_weight": acycle.total_weight,
    }
    _emit_json(payload, args.out)
    return EXIT_OK


def _cmd_stability(args) -> int:
    wf_f = load_complex(args.infile, auto_close_zero=args.auto_close_zero)
    wf_g = load_complex(args.g, auto_close_zero=args.auto_close_zero)
    if wf_g.complex != wf_f.complex:
        raise ValidationError("the two files must weight the same complex")
    p = math.inf if args.p == "inf" else int(args.p)
    res = stability_check(wf_f.complex, wf_f, wf_g, args.d, p)
    payload = {
        "version": __version__,
        "config": _config_of(args),
        "lhs_death": res.lhs_death,
        "lhs_birth": res.lhs_birth,
        "rhs": res.rhs,
        "holds": res.holds,
    }
    _emit_json(payload, args.out)
    return EXIT_OK if res.holds else EXIT_ASSERTION


def _cmd_simulate(args) -> int:
    if args.model == "uniform":
        if args.noise:
            raise ValidationError("noise applies to the perturbed model only")
        _, wf = gen_uniform_complex(UniformModelParams(args.n, args.d, args.seed))
    else:
        params = PerturbedModelParams(
            args.n,
            args.d,
            args.seed,
            base=distribution_by_name(args.base),
            noise=_parse_noise(args.noise),
        )
        _, wf, diagnostics = gen_perturbed_complex(params)
        sys.stderr.write(f"# noise diagnostics: {json.dumps(diagnostics, sort_keys=True)}\n")
    dump_complex(args.out, wf)
    return EXIT_OK


_EXPERIMENTS = ("poisson", "factorial", "betti-gap", "frieze", "growth", "perturbation")


def _svg_histogram(values: list[float], path: str, *, bins: int = 24, lo: float = -4.0, hi: float = 6.0, trials: int = 1, config: dict | None = None) -> None:
    """Static SVG: histogram of scaled death times with the e^-x density curve."""
    width, height, margin = 640, 360, 40
    clipped = [v for v in values if lo <= v <= hi]
    edges = [lo + (hi - lo) * i / bins for i in range(bins + 1)]
    counts = [0] * bins
    for v in clipped:
        k = min(int((v - lo) / (hi - lo) * bins), bins - 1)
        counts[k] += 1
    # expected count per bin under intensity e^-x, pooled over trials
    expected = [trials * (math.exp(-edges[i]) - math.exp(-edges[i + 1])) for i in range(bins)]
    peak = max(max(counts, default=1), max(expected), 1.0)
    plot_w, plot_h = width - 2 * margin, height - 2 * margin

    def x_at(v: float) -> float:
        return margin + (v - lo) / (hi - lo) * plot_w

    def y_at(c: float) -> float:
        return height - margin - c / peak * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f"<!-- acyclekit {__version__} config: {json.dumps(config or {}, sort_keys=True, default=str)} -->",
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
    ]
    for i, c in enumerate(counts):
        if c == 0:
            continue
        x0, x1 = x_at(edges[i]), x_at(edges[i + 1])
        parts.append(
            f'<rect x="{x0:.2f}" y="{y_at(c):.2f}" width="{x1 - x0:.2f}" '
            f'height="{height - margin - y_at(c):.2f}" fill="#7799cc" stroke="#335588"/>'
        )
    pts = " ".join(
        f"{x_at((edges[i] + edges[i + 1]) / 2):.2f},{y_at(expected[i]):.2f}" for i in range(bins)
    )
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#cc3333" stroke-width="2"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def _cmd_experiment(args) -> int:
    cfg = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    merged = dict(cfg)
    for key in ("n", "d", "T", "c", "seed", "noise", "out", "svg"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    name = args.name or merged.get("experiment")
    if name not in _EXPERIMENTS:
        raise ValidationError(f"experiment must be one of {_EXPERIMENTS}, got {name!r}")
    n = int(merged.get("n", 50))
    d = int(merged.get("d", 1))
    trials = int(merged.get("T", 100))
    c = float(merged.get("c", 0.0))
    seed = int(merged.get("seed", 0))
    out = merged.get("out")
    config = {"experiment": name, "n": n, "d": d, "T": trials, "c": c, "seed": seed,
              "noise": merged.get("noise"), "version": __version__}

    reports = []
    batch = None
    if name == "poisson":
        batch = run_uniform_batch(n, d, trials, seed)
        reports.append(poisson_gof(batch, c))
    elif name == "factorial":
        batch = run_uniform_batch(n, d, trials, seed)
        reports.extend(
            estimate_factorial_moments(batch, [(c, math.inf)], 2)
            + estimate_factorial_moments(batch, [(1.0, 2.0)], 2)
        )
    elif name == "betti-gap":
        n_list = merged.get("n_list", [max(d + 2, n // 4), max(d + 2, n // 2), n])
        trend = betti_isolated_gap([int(x) for x in n_list], d, c, trials, seed)
        reports.extend(trend.reports)
    elif name == "frieze":
        reports.append(frieze_lifetime_experiment(n, trials, seed))
    elif name == "growth":
        n_list = merged.get("n_list", [8, 12, 16])
        reports.append(growth_rate_experiment([int(x) for x in n_list], max(d, 2), trials, seed))
    elif name == "perturbation":
        summary = perturbation_convergence_experiment(
            [n], d, _parse_noise(merged.get("noise")) or IidScaledNoise(), c, trials, seed
        )
        reports.extend(summary.noise_reports)
        reports.extend(summary.gof_reports)
        reports.append(
            _bound_report(summary.db_fraction_ok, summary.db_worst_margin)
        )
        batch = summary.batches[0]

    lines = _csv_preamble(config)
    lines.append("experiment,n,d,T,c,seed,statistic,estimate,target,se,tolerance,passed")
    for r in reports:
        lines.append(
            f"{name},{n},{d},{trials},{c:g},{seed},{r.name},"
            f"{_fmt(r.estimate)},{_fmt(r.target)},{_fmt(r.se)},{_fmt(r.tolerance)},{r.passed}"
        )
    _emit_csv(lines, out)
    svg = merged.get("svg")
    if svg and batch is not None:
        pooled = [v for m in batch.deaths for v in m.values]
        _svg_histogram(pooled, svg, trials=trials, config=config)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_ASSERTION


def _bound_report(fraction_ok: float, worst_margin: float):
    from .experiments import ExperimentReport

    return ExperimentReport(
        name="bottleneck_bound_fraction",
        estimate=fraction_ok,
        target=1.0,
        se=0.0,
        tolerance=0.0,
        passed=fraction_ok == 1.0,
        details={"worst_margin": worst_margin},
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acyclekit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"acyclekit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--in", dest="infile", required=True, help="input .complex file")
        p.add_argument("--auto-close-zero", action="store_true",
                       help="add missing sub-faces with weight 0 instead of failing")
        p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("homology", help="reduced Betti numbers of a complex file")
    add_common(p)
    p.add_argument("--dmax", type=int, default=None)
    p.set_defaults(func=_cmd_homology)

    p = sub.add_parser("persistence", help="persistence diagram as CSV")
    add_common(p)
    p.add_argument("--include-augmentation", action="store_true",
                   help="also emit the dimension -1 diagram row")
    p.set_defaults(func=_cmd_persistence)

    p = sub.add_parser("msa", help="minimal spanning acycle as JSON")
    add_common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--algorithm", choices=("kruskal", "prim", "brute"), default="kruskal")
    p.set_defaults(func=_cmd_msa)

    p = sub.add_parser("stability", help="matching distances between two weightings")
    add_common(p)
    p.add_argument("--g", required=True, help="second .complex file (same faces)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", default="inf", help="0, a positive integer, or inf")
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("simulate", help="sample a random weighted complex to a file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--model", choices=("uniform", "perturbed"), default="uniform")
    p.add_argument("--base", default="uniform", help="base distribution for the perturbed model")
    p.add_argument("--noise", default=None,
                   help="noise spec: shared_shift:C or iid_scaled[:a_n[:law]]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("experiment", help="run a Monte-Carlo experiment, emit CSV reports")
    p.add_argument("name", nargs="?", choices=_EXPERIMENTS, help="experiment name")
    p.add_argument("--config", help="JSON config file; flags override its entries")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise")
    p.add_argument("--out")
    p.add_argument("--svg", help="also write an SVG histogram of scaled death times")
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AcycleKitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
