"""Denoising trials, dimension and rank sweeps, and power-law fits.

A trial draws a random low-rank truth ``T``, adds Gaussian noise ``N``,
projects ``T + N`` back onto the low-rank set and records the filtration
error ``eps = ||P(T + N) - T||_F`` alongside the projection residual and
``||N||_F``.

Seeding: seed index ``k`` of a sweep uses ``seed = trial_seed(master, k)``
for every configuration, so trials with the same seed index are paired
across dimensions and noise ratios.  Inside a trial the truth, noise and
solver draw from independent streams keyed by :data:`rng.TRUTH`,
:data:`rng.NOISE` and :data:`rng.SOLVER`.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .bounds import divisor_dimensions
from .decompose import AlsOptions, als_cp, default_schedule, hosvd, multigrid_als_rank1, tt_svd
from .formats import FormatKind, random_lowrank
from .noise import (NoiseMode, NoiseSpec, add_noise, check_hypothesis, filtration_error,
                    guarantee_bound, knorm_lower_bound)
from .core import fro_norm
from .rng import SOLVER, TRUTH, trial_seed

# Absolute slack on the triangle-inequality checks, relative to the norms involved.
_TRIANGLE_RTOL = 1e-10


class InvariantViolation(ArithmeticError):
    """A trial broke an inequality that holds in exact arithmetic."""


@dataclass(frozen=True)
class ExperimentRecord:
    format: FormatKind
    shape: tuple[int, ...]
    rank: int
    seed: int
    noise_ratio: float
    epsilon: float
    noise_norm: float
    residual: float
    hypothesis_holds: bool
    wall_time: float
    trial_index: int = 0
    algorithm: str = "als"
    guarantee_holds: bool = True
    knorm_estimate: Optional[float] = None
    phi: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "format", FormatKind.parse(self.format))
        object.__setattr__(self, "shape", tuple(int(m) for m in self.shape))
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")

    @property
    def d(self) -> int:
        return len(self.shape)

    @property
    def M(self) -> int:
        return int(np.prod(self.shape))

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["format"] = self.format.value
        out["shape"] = list(self.shape)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentRecord":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown record fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class PowerLawFit:
    """``eps ~ C * r**alpha`` fitted in log-log space."""

    C: float
    alpha: float
    r_squared: float

    def __call__(self, r):
        return self.C * np.asarray(r, dtype=np.float64) ** self.alpha


def fit_power_law(points: Iterable[tuple[float, float]]) -> PowerLawFit:
    """Least-squares line through ``(ln r, ln eps)``."""
    pts = np.asarray(list(points), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (r, eps) pairs")
    if len(np.unique(pts[:, 0])) < 3:
        raise ValueError("a power-law fit needs at least 3 distinct r values")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise ValueError("power-law points must be positive and finite")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    alpha, log_c = np.polyfit(x, y, 1)
    pred = alpha * x + log_c
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - pred) ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 else 1.0 - ss_res / ss_tot
    return PowerLawFit(float(math.exp(log_c)), float(alpha), r2)


def _project(kind: FormatKind, noisy: np.ndarray, R: int, opts: AlsOptions):
    if kind is FormatKind.CANONICAL:
        cp, rep = als_cp(noisy, R, opts)
        return cp.to_dense(), rep.residual
    if kind is FormatKind.TUCKER:
        tk, rep = hosvd(noisy, R)
        return tk.to_dense(), rep.residual
    tt, rep = tt_svd(noisy, R)
    return tt.to_dense(), rep.residual


def check_triangle(epsilon: float, residual: float, noise_norm: float) -> None:
    """Raise :class:`InvariantViolation` unless both triangle inequalities hold."""
    slack = _TRIANGLE_RTOL * (epsilon + residual + noise_norm) + 1e-300
    if epsilon > residual + noise_norm + slack:
        raise InvariantViolation(f"eps {epsilon} > residual {residual} + ||N|| {noise_norm}")
    if abs(epsilon - residual) > noise_norm + slack:
        raise InvariantViolation(f"|eps - residual| = {abs(epsilon - residual)} > ||N|| {noise_norm}")


def run_trial(kind: FormatKind | str, shape: Sequence[int], R: int, ratio: float, seed: int,
              opts: AlsOptions | None = None, multigrid_fallback: bool = False,
              knorm_restarts: int = 0, trial_index: int = 0) -> ExperimentRecord:
    """One denoising trial; ``ratio = 0`` runs without noise."""
    kind = FormatKind.parse(kind)
    shape = tuple(int(m) for m in shape)
    if ratio < 0:
        raise ValueError("noise ratio must be >= 0")
    start = time.perf_counter()
    truth = random_lowrank(kind, shape, R, trial_seed(seed, TRUTH)).to_dense()
    if ratio > 0:
        noisy, noise = add_noise(truth, NoiseSpec(NoiseMode.TARGET_RATIO, ratio, seed))
    else:
        noisy, noise = truth.copy(), np.zeros_like(truth)
    noise_norm = fro_norm(noise)

    base = opts or AlsOptions()
    opts = replace(base, seed=trial_seed(seed, SOLVER))
    approx, residual = _project(kind, noisy, R, opts)
    algorithm = {FormatKind.CANONICAL: "als", FormatKind.TUCKER: "hosvd",
                 FormatKind.TENSOR_TRAIN: "tt_svd"}[kind]
    holds = check_hypothesis(residual, noise_norm)
    if (not holds and multigrid_fallback and kind is FormatKind.CANONICAL and R == 1
            and len(default_schedule(len(shape))) > 1 and len(set(shape)) == 1):
        cp, rep = multigrid_als_rank1(noisy, default_schedule(len(shape)), opts)
        if rep.residual < residual:
            approx, residual, algorithm = cp.to_dense().reshape(shape), rep.residual, "multigrid_als"
            holds = check_hypothesis(residual, noise_norm)

    eps = filtration_error(approx, truth)
    check_triangle(eps, residual, noise_norm)
    guarantee = guarantee_bound(residual, noise_norm, approx, truth, noise)
    knorm = None
    if knorm_restarts > 0 and noise_norm > 0:
        knorm = knorm_lower_bound(noise, knorm_restarts, seed=trial_seed(seed, SOLVER + 1))
    return ExperimentRecord(kind, shape, R, int(seed), float(ratio), eps, noise_norm, residual,
                            holds, time.perf_counter() - start, trial_index, algorithm,
                            guarantee, knorm)


def _run_all(jobs: list[dict], workers: int) -> list[ExperimentRecord]:
    if workers <= 1:
        records = [run_trial(**job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda job: run_trial(**job), jobs))
    return sorted(records, key=lambda r: r.trial_index)


def dimension_sweep(M_exponent: int, d_list: Sequence[int] | None = None,
                    ratios: Sequence[float] = (0.1,), seeds: int = 20, master_seed: int = 0,
                    opts: AlsOptions | None = None, multigrid_fallback: bool = True,
                    knorm_restarts: int = 0, workers: int = 1) -> list[ExperimentRecord]:
    """Rank-one trials on ``2**M_exponent`` elements arranged as ``d``-way cubes.

    ``d_list`` defaults to every divisor ``d >= 2`` of ``M_exponent``.  One
    record per ``(d, ratio, seed index)``, ordered by that nesting.  A plain
    ALS run that misses the hypothesis is retried with the multigrid
    bootstrap unless ``multigrid_fallback`` is off; the better fit is kept.
    """
    d_list = divisor_dimensions(M_exponent) if d_list is None else [int(d) for d in d_list]
    bad = [d for d in d_list if d < 1 or M_exponent % d]
    if bad:
        raise ValueError(f"dimensions {bad} do not divide the exponent {M_exponent}")
    if seeds < 1:
        raise ValueError("seeds must be >= 1")
    jobs = []
    for d in d_list:
        shape = (2 ** (M_exponent // d),) * d
        for ratio in ratios:
            for k in range(seeds):
                jobs.append(dict(kind=FormatKind.CANONICAL, shape=shape, R=1, ratio=float(ratio),
                                 seed=trial_seed(master_seed, k), opts=opts,
                                 multigrid_fallback=multigrid_fallback,
                                 knorm_restarts=knorm_restarts, trial_index=len(jobs)))
    return _run_all(jobs, workers)


# Random ALS starts sometimes stall in poor local minima at R > 1;
# five restarts per trial removes the outliers from the rank sweep.
CP_SWEEP_RESTARTS = 5


def mean_by(records: Iterable[ExperimentRecord], key) -> dict:
    groups: dict = {}
    for r in records:
        groups.setdefault(key(r), []).append(r.epsilon)
    return {k: float(np.mean(v)) for k, v in sorted(groups.items())}


def rank_sweep(kind: FormatKind | str, shape: Sequence[int], R_list: Sequence[int],
               ratio: float = 0.1, seeds: int = 20, master_seed: int = 0,
               opts: AlsOptions | None = None, workers: int = 1
               ) -> tuple[list[ExperimentRecord], PowerLawFit]:
    """Trials over ranks at fixed shape, plus a power-law fit of mean ``eps`` vs ``R``."""
    kind = FormatKind.parse(kind)
    R_list = [int(R) for R in R_list]
    if len(R_list) < 3 or any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise ValueError("R_list must be strictly ascending with at least 3 entries")
    for R in R_list:
        random_lowrank(kind, shape, R, 0)  # raises on unrepresentable ranks
    if opts is None and kind is FormatKind.CANONICAL:
        opts = AlsOptions(restarts=CP_SWEEP_RESTARTS)
    jobs = []
    for R in R_list:
        for k in range(seeds):
            jobs.append(dict(kind=kind, shape=tuple(shape), R=R, ratio=float(ratio),
                             seed=trial_seed(master_seed, k), opts=opts, trial_index=len(jobs)))
    records = _run_all(jobs, workers)
    means = mean_by(records, lambda r: r.rank)
    return records, fit_power_law(means.items())
