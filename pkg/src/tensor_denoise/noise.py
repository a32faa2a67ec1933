"""Noise injection and the quantities measured on every denoising trial."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import fro_norm, inner, vectorize
from .decompose import AlsOptions, als_cp
from .formats import CPTensor
from .rng import NOISE, stream, trial_seed

# Residuals within this absolute margin of ||N||_F still count as "holds".
HYPOTHESIS_SLACK = 1e-12
GUARANTEE_RTOL = 1e-9


class NoiseMode(str, enum.Enum):
    UNIT_VARIANCE = "unit_variance"
    TARGET_RATIO = "target_ratio"


@dataclass(frozen=True)
class NoiseSpec:
    """i.i.d. Gaussian noise, either N(0, 1) entries or rescaled so that
    ``||N||_F = ratio * ||T||_F`` exactly."""

    mode: NoiseMode = NoiseMode.TARGET_RATIO
    ratio: float = 0.1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", NoiseMode(self.mode))
        if self.mode is NoiseMode.TARGET_RATIO and not self.ratio > 0:
            raise ValueError("ratio must be > 0 for TARGET_RATIO noise")


def add_noise(t: np.ndarray, spec: NoiseSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(t + noise, noise)`` with noise drawn from ``stream(spec.seed, NOISE)``."""
    t = np.asarray(t, dtype=np.float64)
    noise = stream(spec.seed, NOISE).standard_normal(t.shape)
    if spec.mode is NoiseMode.TARGET_RATIO:
        noise *= spec.ratio * fro_norm(t) / fro_norm(noise)
    return t + noise, noise


def filtration_error(approx: np.ndarray, truth: np.ndarray) -> float:
    """``||approx - truth||_F``, the error left after denoising."""
    if np.shape(approx) != np.shape(truth):
        raise ValueError(f"shape mismatch: {np.shape(approx)} vs {np.shape(truth)}")
    return fro_norm(np.asarray(approx) - np.asarray(truth))


def check_hypothesis(residual: float, noise_norm: float) -> bool:
    """True when the approximation fits the noisy data at least as well as the truth."""
    if residual < 0 or noise_norm < 0:
        raise ValueError("residual and noise norm must be non-negative")
    return residual <= noise_norm + HYPOTHESIS_SLACK


def guarantee_bound(residual: float, noise_norm: float, approx: np.ndarray,
                    truth: np.ndarray, noise: np.ndarray) -> bool:
    """Check ``eps**2 <= 2 (approx - truth, noise)_F`` on a trial.

    Expanding ``||approx - (truth + noise)||^2`` shows this inequality is
    equivalent to the hypothesis, so a ``False`` means an arithmetic bug.
    Trials where the hypothesis fails are vacuously ``True``.  The slack is
    ``1e-9`` relative to the size of the terms plus what
    :data:`HYPOTHESIS_SLACK` lets through.
    """
    if not check_hypothesis(residual, noise_norm):
        return True
    diff = np.asarray(approx) - np.asarray(truth)
    eps_sq = inner(diff, diff)
    rhs = 2.0 * inner(diff, noise)
    scale = eps_sq + noise_norm ** 2 + residual ** 2
    slack = GUARANTEE_RTOL * scale + 2 * HYPOTHESIS_SLACK * noise_norm + HYPOTHESIS_SLACK ** 2
    return bool(eps_sq <= rhs + slack)


def span_projection_norm(n: np.ndarray, columns: np.ndarray) -> float:
    """Norm of the orthogonal projection of ``vec(n)`` onto the column span."""
    q, r = np.linalg.qr(columns)
    keep = np.abs(np.diag(r)) > 1e-13 * max(np.abs(np.diag(r)).max(), 1e-300)
    return float(np.linalg.norm(q[:, keep].T @ vectorize(n)))


def cp_columns(cp: CPTensor) -> np.ndarray:
    """Vectorized rank-one terms of ``cp`` as columns of an ``M x R`` matrix."""
    cols = cp.factors[0]
    for f in cp.factors[1:]:
        cols = (cols[:, None, :] * f[None, :, :]).reshape(-1, cp.rank)
    return cols


def tangent_span_norm(n: np.ndarray, vectors) -> float:
    """Norm of the projection of ``n`` onto ``span{w, t}`` for the best tangent ``t``.

    ``w = x_1 (x) ... (x) x_d`` with unit ``x_s``.  The tangent space of the
    rank-one set at ``w`` is an orthogonal sum of ``span{w}`` and the
    subspaces ``x_1 (x) .. (x) x_s^perp (x) .. (x) x_d``.  Spans of ``w`` and a
    tangent direction are limits of rank-two spans, so the value is a valid
    lower estimate of the restricted norm.
    """
    n = np.asarray(n, dtype=np.float64)
    xs = [np.asarray(v, dtype=np.float64) / np.linalg.norm(v) for v in vectors]
    total = 0.0
    for s in range(n.ndim):
        g = n
        for k in reversed(range(n.ndim)):
            if k != s:
                g = np.tensordot(g, xs[k], axes=([k], [0]))
        along = float(g @ xs[s])
        total += float(g @ g) - along * along
    return float(np.sqrt(along * along + total))


def _contract_except(n: np.ndarray, xs, keep) -> np.ndarray:
    out = n
    for k in reversed(range(n.ndim)):
        if k not in keep:
            out = np.tensordot(out, xs[k], axes=([k], [0]))
    return out


def polish_tangent_span(n: np.ndarray, vectors, max_sweeps: int = 30,
                        tol: float = 1e-10) -> float:
    """Block-coordinate ascent on :func:`tangent_span_norm` from ``vectors``.

    With the other factors fixed, the squared score is the quadratic form
    ``x^T A x`` in factor ``x_k`` with
    ``A = sum_{s != k} H_sk^T H_sk - (d - 1) g_k g_k^T`` (plus a constant),
    where ``H_sk`` contracts ``n`` with every factor except ``s`` and ``k``
    and ``g_k`` with every factor except ``k``.  Each step takes the top
    eigenvector of ``A``, so the score never decreases.
    """
    n = np.asarray(n, dtype=np.float64)
    d = n.ndim
    xs = [np.asarray(v, dtype=np.float64) / np.linalg.norm(v) for v in vectors]
    score = tangent_span_norm(n, xs)
    if d < 2:
        return score
    for _ in range(max_sweeps):
        for k in range(d):
            g = _contract_except(n, xs, {k})
            a = -(d - 1) * np.outer(g, g)
            for s in range(d):
                if s != k:
                    h = _contract_except(n, xs, {s, k})
                    h = h if s < k else h.T
                    a += h.T @ h
            xs[k] = np.linalg.eigh(a)[1][:, -1]
        new = tangent_span_norm(n, xs)
        if new - score <= tol * max(score, 1e-300):
            score = max(score, new)
            break
        score = new
    return score


def knorm_lower_bound(noise: np.ndarray, restarts: int = 10,
                      algorithm: Callable[[np.ndarray, int], CPTensor] | None = None,
                      seed: int = 0, opts: AlsOptions | None = None,
                      polish: bool = True) -> float:
    """Lower estimate of the restricted norm ``sup (N, V)_F`` over unit rank-<=2 ``V``.

    Each restart fits a rank-two CP tensor to ``noise`` and scores the span
    of its two rank-one terms by the norm of the projection of ``noise``
    onto it; any such span gives a valid lower bound.  Each term is also
    scored through :func:`tangent_span_norm`, which captures the degenerate
    limits that ALS approaches when no best rank-two fit exists; with
    ``polish`` that score is locally maximized from every term.  The best score over
    restarts is returned, so the value never decreases as ``restarts``
    grows.  ``algorithm(noise, restart_index)`` may replace the default
    rank-two ALS.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    noise = np.asarray(noise, dtype=np.float64)
    if algorithm is None:
        base = opts or AlsOptions(max_sweeps=500, rel_tol=1e-12)

        def algorithm(n, i):
            o = AlsOptions(base.max_sweeps, base.rel_tol, 1, trial_seed(seed, i))
            return als_cp(n, 2, o)[0]

    best = 0.0
    for i in range(restarts):
        cp = algorithm(noise, i)
        best = max(best, span_projection_norm(noise, cp_columns(cp)))
        for r in range(cp.rank):
            vectors = [f[:, r] for f in cp.factors]
            score = polish_tangent_span if polish else tangent_span_norm
            best = max(best, score(noise, vectors))
    return min(best, fro_norm(noise))
