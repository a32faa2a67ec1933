"""Approximation operators onto low-rank sets.

* :func:`als_cp` -- alternating least squares for the canonical format;
* :func:`hosvd` -- classical (non sequentially truncated) HOSVD for Tucker;
* :func:`tt_svd` -- left-to-right TT-SVD with a uniform rank cap;
* :func:`multigrid_als_rank1` -- coarse-to-fine ALS bootstrap for rank-one
  fits of very high-order tensors.

Every operator returns the structured result together with an
:class:`ApproxReport` carrying the residual ``||P(t) - t||_F``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import fro_norm, khatri_rao, mode_product, truncated_svd, unfold
from .formats import CPTensor, TTTensor, TuckerTensor, cp_to_dense
from .rng import stream

# Gram matrices with a larger condition number get a ridge term.
_SINGULAR_COND = 1e12
_RIDGE = 1e-14


class AlsInit(str, enum.Enum):
    RANDOM_GAUSSIAN = "random"
    PROVIDED = "provided"


@dataclass(frozen=True)
class AlsOptions:
    """ALS hyperparameters.

    The iteration stops once ``|r_k - r_{k-1}| < rel_tol * ||t||_F`` where
    ``r_k`` is the residual after sweep ``k``.  Restart ``i`` draws its
    initial factors from ``stream(seed, i)``.
    """

    max_sweeps: int = 200
    rel_tol: float = 1e-8
    restarts: int = 1
    seed: int = 0
    init: AlsInit = AlsInit.RANDOM_GAUSSIAN

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        object.__setattr__(self, "init", AlsInit(self.init))


@dataclass(frozen=True)
class ApproxReport:
    ranks: tuple[int, ...]
    residual: float
    sweeps_used: int = 0
    converged: bool = True
    history: tuple[float, ...] = field(default=(), repr=False)


def _check_finite(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise ValueError("input tensor has non-finite entries")
    return t


def _gram_solve(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``x @ gram = rhs`` with a ridge on numerically singular grams."""
    if gram.shape[0] == 1:
        return rhs / gram[0, 0] if gram[0, 0] > 0 else rhs
    if gram.shape[0] > 1 and np.linalg.cond(gram) > _SINGULAR_COND:
        gram = gram + _RIDGE * np.trace(gram) / gram.shape[0] * np.eye(gram.shape[0])
    return np.linalg.solve(gram, rhs.T).T


def _normalize_columns(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.sqrt(np.einsum("ij,ij->j", a, a))
    safe = np.where(norms > 0, norms, 1.0)
    return a / safe, norms


def _als_run(t, unfoldings, factors, max_sweeps, rel_tol):
    d = t.ndim
    R = factors[0].shape[1]
    norm_t = fro_norm(t)
    factors = [_normalize_columns(f)[0] for f in factors]
    grams = [f.T @ f for f in factors]
    weights = np.ones(R)
    history = []
    converged = False
    for sweep in range(max_sweeps):
        for n in range(d):
            others = [factors[k] for k in range(d) if k != n]
            mttkrp = unfoldings[n] @ khatri_rao(others)
            gram = np.ones((R, R))
            for k in range(d):
                if k != n:
                    gram *= grams[k]
            factors[n], weights = _normalize_columns(_gram_solve(gram, mttkrp))
            grams[n] = factors[n].T @ factors[n]
        model = cp_to_dense(CPTensor(tuple(factors), weights))
        history.append(fro_norm(t - model))
        if sweep > 0 and abs(history[-2] - history[-1]) < rel_tol * max(norm_t, 1e-300):
            converged = True
            break
        if history[-1] <= 1e-15 * norm_t:
            converged = True
            break
    return CPTensor(tuple(factors), weights), history, converged


def als_cp(t: np.ndarray, R: int, opts: AlsOptions | None = None,
           init: CPTensor | Sequence[np.ndarray] | None = None
           ) -> tuple[CPTensor, ApproxReport]:
    """Rank-``R`` CP approximation by alternating least squares.

    Modes are updated in order 0..d-1; after each update the factor columns
    are rescaled to unit norm and the scale is carried in the weights.  With
    ``restarts > 1`` the run with the smallest residual is returned (ties go
    to the lowest restart index).  When ``opts.init`` is ``PROVIDED``,
    restart 0 starts from ``init`` and later restarts are random.
    """
    opts = opts or AlsOptions()
    t = _check_finite(t)
    if R < 1:
        raise ValueError("R must be >= 1")
    if opts.init is AlsInit.PROVIDED and init is None:
        raise ValueError("init factors required when opts.init is PROVIDED")
    if init is not None:
        init_factors = init.factors if isinstance(init, CPTensor) else tuple(init)
        if tuple(f.shape for f in init_factors) != tuple((m, R) for m in t.shape):
            raise ValueError("initial factors do not match the tensor shape and rank")

    unfoldings = [unfold(t, n) for n in range(t.ndim)]
    best = None
    for restart in range(opts.restarts):
        if restart == 0 and opts.init is AlsInit.PROVIDED:
            factors = [np.array(f, dtype=np.float64) for f in init_factors]
        else:
            rng = stream(opts.seed, restart)
            factors = [rng.standard_normal((m, R)) for m in t.shape]
        cp, history, converged = _als_run(t, unfoldings, factors, opts.max_sweeps, opts.rel_tol)
        if best is None or history[-1] < best[1][-1]:
            best = (cp, history, converged)
    cp, history, converged = best
    report = ApproxReport((R,), history[-1], len(history), converged, tuple(history))
    return cp, report


def hosvd(t: np.ndarray, R: int | Sequence[int]) -> tuple[TuckerTensor, ApproxReport]:
    """Classical HOSVD: independent truncated SVDs of every unfolding of ``t``."""
    t = _check_finite(t)
    ranks = (R,) * t.ndim if np.isscalar(R) else tuple(R)
    if len(ranks) != t.ndim or any(not 1 <= r <= m for r, m in zip(ranks, t.shape)):
        raise ValueError(f"Tucker ranks {ranks} out of range for shape {t.shape}")
    factors = tuple(truncated_svd(unfold(t, s), r).u for s, r in enumerate(ranks))
    core = t
    for s, u in enumerate(factors):
        core = mode_product(core, u.T, s)
    tucker = TuckerTensor(core, factors)
    residual = fro_norm(t - tucker.to_dense())
    return tucker, ApproxReport(tuple(ranks), residual)


def tt_svd(t: np.ndarray, R: int) -> tuple[TTTensor, ApproxReport]:
    """TT-SVD with every TT rank capped at ``R``."""
    t = _check_finite(t)
    if R < 1:
        raise ValueError("R must be >= 1")
    shape = t.shape
    d = len(shape)
    cores = []
    rank = 1
    rest = t.reshape(1, -1)
    for s in range(d - 1):
        mat = rest.reshape(rank * shape[s], -1)
        r = min(R, *mat.shape)
        svd = truncated_svd(mat, r)
        cores.append(svd.u.reshape(rank, shape[s], r))
        rest = svd.s[:, None] * svd.v.T
        rank = r
    cores.append(rest.reshape(rank, shape[-1], 1))
    tt = TTTensor(tuple(cores))
    residual = fro_norm(t - tt.to_dense())
    return tt, ApproxReport(tt.ranks, residual)


def split_factor(v: np.ndarray, parts: int) -> tuple[list[np.ndarray], float]:
    """Best rank-one Kronecker split of ``v`` into ``parts`` equal-length unit vectors.

    ``v`` is reshaped into a ``parts``-way cube and approximated by a rank-one
    TT-SVD (one rank-one matrix SVD per split).  Returns the unit vectors and
    the scale such that ``scale * kron(vectors) ~= v``.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    m = int(round(v.size ** (1.0 / parts)))
    if m ** parts != v.size:
        raise ValueError(f"length {v.size} is not a {parts}-th power")
    if parts == 1:
        norm = float(np.linalg.norm(v))
        return [v / norm if norm > 0 else v.copy()], norm
    tt, _ = tt_svd(v.reshape((m,) * parts), 1)
    vectors, scale = [], 1.0
    for core in tt.cores:
        u = core.reshape(-1)
        norm = float(np.linalg.norm(u))
        vectors.append(u / norm if norm > 0 else u)
        scale *= norm
    return vectors, scale


def _level_size(M: int, d: int) -> int:
    m = int(round(M ** (1.0 / d)))
    for cand in (m - 1, m, m + 1):
        if cand >= 1 and cand ** d == M:
            return cand
    raise ValueError(f"{M} elements cannot be arranged as a {d}-way cube")


def default_schedule(d: int) -> list[int]:
    """Coarse-to-fine dimension counts ending at ``d``, halving while possible."""
    levels = [d]
    while levels[0] % 2 == 0 and levels[0] > 3:
        levels.insert(0, levels[0] // 2)
    return levels


def multigrid_als_rank1(t: np.ndarray, schedule: Sequence[int],
                        opts: AlsOptions | None = None) -> tuple[CPTensor, ApproxReport]:
    """Rank-one ALS bootstrapped from coarse to fine dimension counts.

    ``t`` is reshaped into a cube with ``schedule[0]`` modes and fitted by
    plain ALS.  Each factor is then split (:func:`split_factor`) into
    ``schedule[l+1] / schedule[l]`` shorter factors, which initialize ALS on
    the next, finer cube.  The returned CP tensor lives on the finest cube.
    """
    opts = opts or AlsOptions()
    t = _check_finite(t)
    schedule = [int(s) for s in schedule]
    if not schedule or any(s < 1 for s in schedule):
        raise ValueError("schedule must be a non-empty list of positive dimension counts")
    for a, b in zip(schedule, schedule[1:]):
        if b <= a or b % a:
            raise ValueError(f"schedule {schedule} must be strictly increasing with each entry dividing the next")
    M = t.size
    sizes = [_level_size(M, d) for d in schedule]

    level_opts = AlsOptions(opts.max_sweeps, opts.rel_tol, opts.restarts, opts.seed)
    cp, report = als_cp(t.reshape((sizes[0],) * schedule[0]), 1, level_opts)
    sweeps = report.sweeps_used
    history = list(report.history)
    for level in range(1, len(schedule)):
        parts = schedule[level] // schedule[level - 1]
        # only directions matter: ALS normalizes its starting factors
        init = [piece.reshape(-1, 1)
                for f in cp.factors for piece in split_factor(f[:, 0], parts)[0]]
        fine_opts = AlsOptions(opts.max_sweeps, opts.rel_tol, 1, opts.seed, AlsInit.PROVIDED)
        cp, report = als_cp(t.reshape((sizes[level],) * schedule[level]), 1, fine_opts, init)
        sweeps += report.sweeps_used
        history.extend(report.history)
    return cp, ApproxReport((1,), report.residual, sweeps, report.converged, tuple(history))
