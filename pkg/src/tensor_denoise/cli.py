"""``tensor-denoise`` command-line entry point.

Exit status: 0 success, 2 invalid configuration, 3 numerical or invariant
failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (calibrate_mu, empirical_rank1_bound, rank_bound_value,
                     scaled_theorem1_bound)
from .config import COMMANDS, ConfigError, RunConfig, build_config, parse_pairs, worker_count
from .decompose import AlsOptions
from .experiments import (InvariantViolation, dimension_sweep, fit_power_law, mean_by,
                          rank_sweep)
from .formats import FormatKind
from .records import write_records

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


def _als_options(cfg: RunConfig, default_restarts: int = 1) -> AlsOptions:
    return AlsOptions(cfg.max_sweeps, cfg.rel_tol, cfg.restarts or default_restarts, cfg.seed)


def _write_summary(out: Path, summary: dict) -> None:
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")


def _check_guarantee(records) -> None:
    bad = [r.trial_index for r in records if r.hypothesis_holds and not r.guarantee_holds]
    if bad:
        raise InvariantViolation(f"derivation-chain inequality failed on trials {bad}")


def run_sweep_dim(cfg: RunConfig, out: Path) -> dict:
    records = dimension_sweep(cfg.M_exponent, cfg.d_list or None, cfg.ratios, cfg.seeds,
                              cfg.seed, _als_options(cfg), cfg.multigrid, cfg.knorm_restarts,
                              worker_count(cfg))
    _check_guarantee(records)
    write_records(out / "records.jsonl", records, cfg.echo())
    M = 2 ** cfg.M_exponent
    rows = []
    for (d, ratio), eps in mean_by(records, lambda r: (r.d, r.noise_ratio)).items():
        sub = [r for r in records if r.d == d and r.noise_ratio == ratio]
        nn = float(np.mean([r.noise_norm for r in sub]))
        row = {"d": d, "ratio": ratio, "mean_epsilon": eps, "mean_noise_norm": nn,
               "mean_residual": float(np.mean([r.residual for r in sub])),
               "hypothesis_failures": sum(not r.hypothesis_holds for r in sub)}
        if nn > 0:
            row["empirical_bound"] = empirical_rank1_bound(d, M, nn)
            if M ** (1 / d) >= 2:
                row["scaled_theorem1_bound_mu1"] = scaled_theorem1_bound(d, M, nn)
        rows.append(row)
    if cfg.plots:
        from .plotting import plot_dimension_sweep
        plot_dimension_sweep(records, out / "dimension_sweep.svg")
    return {"rows": rows, "records": len(records)}


def run_sweep_rank(cfg: RunConfig, out: Path) -> dict:
    kind = FormatKind.parse(cfg.format)
    opts = _als_options(cfg, 5) if kind is FormatKind.CANONICAL else None
    records, fit = rank_sweep(kind, cfg.shape, cfg.ranks, cfg.ratio, cfg.seeds, cfg.seed, opts,
                              worker_count(cfg))
    _check_guarantee(records)
    write_records(out / "records.jsonl", records, cfg.echo())
    d, M = len(cfg.shape), int(np.prod(cfg.shape))
    rows = []
    for R, eps in mean_by(records, lambda r: r.rank).items():
        nn = float(np.mean([r.noise_norm for r in records if r.rank == R]))
        bound = rank_bound_value(kind, d, M, R, nn)
        rows.append({"rank": R, "mean_epsilon": eps, "mean_noise_norm": nn,
                     "rank_bound": None if bound.overflow else bound.value})
    if cfg.plots:
        from .plotting import plot_rank_sweep
        plot_rank_sweep(records, out / "rank_sweep.svg", fit)
    print(f"alpha = {fit.alpha:.6g}")
    return {"rows": rows, "fit": {"C": fit.C, "alpha": fit.alpha, "r_squared": fit.r_squared},
            "records": len(records)}


def run_verify_theory(cfg: RunConfig, out: Path) -> dict:
    from . import theory

    reports = [
        theory.verify_cosine_lemma(cfg.trials, seed=cfg.seed),
        theory.verify_kron_condition(cfg.trials, seed=cfg.seed),
        theory.verify_two_column_svd(cfg.trials, seed=cfg.seed),
        theory.verify_tail_bound(cfg.trials, seed=cfg.seed),
    ]
    omegas = [4, 16, 64, 256]
    dist = theory.conditioned_distance_sweep(omegas, pairs=5, seed=cfg.seed)
    monotone = bool(np.all(np.diff(dist, axis=1) <= 0))
    slopes = [theory.loglog_slope(omegas, row) for row in dist]
    summary = {
        "witnesses": [{"name": r.name, "trials": r.trials, "violations": r.violations,
                       "worst_margin": r.worst_margin} for r in reports],
        "conditioned_approximation": {"omegas": omegas, "distances": dist.tolist(),
                                      "monotone": monotone, "slopes": slopes},
    }
    for r in reports:
        print(f"{r.name}: {r.trials} trials, {r.violations} violations")
    print(f"conditioned approximation: monotone={monotone}, max slope={max(slopes):.3f}")
    _write_summary(out, summary)
    if not all(r.passed for r in reports) or not monotone or max(slopes) > -0.2:
        raise InvariantViolation("a theory witness failed; see summary.json")
    return summary


def run_steering(cfg: RunConfig, out: Path) -> dict:
    from .steering import steering_demo

    results = steering_demo(cfg.seeds, cfg.steering_M, cfg.steering_d, cfg.ratio, cfg.seed)
    records = [r for r, _ in results]
    write_records(out / "records.jsonl", records, cfg.echo())
    wins = sum(r.epsilon < r.noise_norm for r in records)
    worst = max(s for _, s in results)
    print(f"rank-one check: worst second singular value {worst:.3e}")
    print(f"eps < ||N||: {wins}/{len(records)}")
    return {"worst_second_singular_value": worst, "eps_below_noise": wins,
            "trials": len(records),
            "mean_eps_over_noise": float(np.mean([r.epsilon / r.noise_norm for r in records]))}


def run_calibrate_mu(cfg: RunConfig, out: Path) -> dict:
    ratios = [r for r in cfg.ratios if r > 0]
    if not ratios:
        raise ConfigError("calibrate-mu needs a positive noise ratio")
    records = dimension_sweep(cfg.M_exponent, cfg.d_list or None, ratios, cfg.seeds, cfg.seed,
                              _als_options(cfg), cfg.multigrid, cfg.knorm_restarts,
                              worker_count(cfg))
    write_records(out / "records.jsonl", records, cfg.echo())
    cal = calibrate_mu(records, cfg.coverage)
    print(f"mu = {cal.mu:.6g} (lower estimate, t = {cal.t:.4g}, coverage {cal.coverage:.3f})")
    return {"mu": cal.mu, "t": cal.t, "nominal_coverage": cal.nominal_coverage,
            "coverage": cal.coverage, "n_records": cal.n_records, "dims": list(cal.dims),
            "lower_estimate": cal.lower_estimate}


def _read_points(cfg: RunConfig) -> list[tuple[float, float]]:
    pairs = list(cfg.points)
    if cfg.input:
        text = Path(cfg.input).read_text(encoding="utf-8")
        pairs += [ln for ln in text.replace(",", " ").splitlines() if ln.strip()
                  and not ln.lstrip().startswith("#")]
    points = []
    for p in pairs:
        parts = p.replace(":", " ").split()
        if len(parts) != 2:
            raise ConfigError(f"cannot read point {p!r}; use r:eps")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigError(f"cannot read point {p!r}") from None
    return points


def run_fit(cfg: RunConfig, out: Path | None) -> dict:
    points = _read_points(cfg)
    try:
        fit = fit_power_law(points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(f"alpha = {fit.alpha:.6g}")
    print(f"C = {fit.C:.6g}")
    print(f"r_squared = {fit.r_squared:.6g}")
    return {"C": fit.C, "alpha": fit.alpha, "r_squared": fit.r_squared, "points": points}


_RUNNERS = {
    "sweep-dim": run_sweep_dim, "sweep-rank": run_sweep_rank,
    "verify-theory": run_verify_theory, "steering": run_steering,
    "calibrate-mu": run_calibrate_mu, "fit": run_fit,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tensor-denoise",
        description="Noise-filtering experiments for low-rank tensor approximation.",
        epilog="Settings: built-in defaults < --config FILE < key=value arguments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", metavar="FILE")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--plots", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("overrides", nargs="*", metavar="key=value")
    return p


def run(cfg: RunConfig) -> int:
    """Execute a validated config; returns the exit status."""
    try:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        summary = _RUNNERS[cfg.command](cfg, out)
        if cfg.command != "verify-theory":
            summary = {"command": cfg.command, "library_version": __version__,
                       "config": cfg.to_dict(), **summary}
            _write_summary(out, summary)
    except ConfigError as exc:
        print(f"tensor-denoise: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"tensor-denoise: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"tensor-denoise: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # parameter errors raised by the library itself
        print(f"tensor-denoise: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_intermixed_args(argv)
    try:
        overrides = parse_pairs(args.overrides)
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["out"] = args.out
        if args.plots:
            overrides["plots"] = True
        cfg = build_config(args.command, args.config, overrides)
    except ConfigError as exc:
        print(f"tensor-denoise: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
