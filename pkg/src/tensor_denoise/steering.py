"""Tensorized steering vectors ``h(phi)_k = exp(i k phi)``.

Any tensorization of ``h`` is an exact rank-one complex tensor: with C-order
strides ``st_s`` the entry at ``(j_1, ..., j_d)`` is
``prod_s exp(i st_s j_s phi)``.  The library is real valued, so the tensor
is carried as the pair ``(Re h, Im h)``; rank checks go through the real
block embedding ``[[Re, -Im], [Im, Re]]`` of each unfolding, whose
singular values are those of the complex unfolding, each repeated twice.
"""

from __future__ import annotations

import math
import time
from typing import Sequence

import numpy as np

from .core import fro_norm, singular_values, unfold
from .formats import FormatKind
from .experiments import ExperimentRecord, check_triangle
from .noise import check_hypothesis
from .rng import NOISE, stream


def steering_tensor(phi: float, M: int, shape: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    shape = tuple(int(m) for m in shape)
    if int(np.prod(shape)) != M:
        raise ValueError(f"shape {shape} does not hold M = {M} elements")
    k = np.arange(M, dtype=np.float64) * phi
    return np.cos(k).reshape(shape), np.sin(k).reshape(shape)


def block_embedding(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    return np.block([[re, -im], [im, re]])


def complex_second_singular_values(re: np.ndarray, im: np.ndarray) -> list[float]:
    """Second complex singular value of every mode unfolding of ``re + i im``.

    Read off the block embedding as its third singular value (index 2),
    since each complex singular value appears there twice.
    """
    out = []
    for mode in range(re.ndim):
        s = singular_values(block_embedding(unfold(re, mode), unfold(im, mode)))
        out.append(float(s[2]) if s.size > 2 else 0.0)
    return out


def is_rank_one(re: np.ndarray, im: np.ndarray, tol: float = 1e-10) -> bool:
    return max(complex_second_singular_values(re, im)) <= tol


def complex_rank1_als(t: np.ndarray, max_sweeps: int = 100, rel_tol: float = 1e-12
                      ) -> tuple[np.ndarray, float]:
    """Best rank-one fit of a complex tensor by higher-order power iteration.

    Starts from the leading left singular vector of every unfolding.
    Returns the dense approximation and its residual.
    """
    t = np.asarray(t, dtype=np.complex128)
    d = t.ndim
    factors = [np.linalg.svd(unfold(t, s), full_matrices=False)[0][:, 0] for s in range(d)]
    norm_t = float(np.linalg.norm(t))
    prev = math.inf
    for _ in range(max_sweeps):
        for s in range(d):
            v = t
            # contract all other modes with conjugated factors, highest mode first
            for k in reversed(range(d)):
                if k != s:
                    v = np.tensordot(v, factors[k].conj(), axes=([k], [0]))
            n = np.linalg.norm(v)
            factors[s] = v / n if n > 0 else v
        approx = _outer(factors) * np.vdot(_outer(factors), t)
        res = float(np.linalg.norm(t - approx))
        if abs(prev - res) < rel_tol * max(norm_t, 1e-300):
            break
        prev = res
    return approx, res


def _outer(vectors: Sequence[np.ndarray]) -> np.ndarray:
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def steering_trial(phi: float, shape: Sequence[int], ratio: float, seed: int,
                   trial_index: int = 0) -> ExperimentRecord:
    """Denoise a noisy steering tensor by complex rank-one recovery.

    Noise is Gaussian on both parts, rescaled so that
    ``||(N_re, N_im)||_F = ratio * ||(Re h, Im h)||_F``.
    """
    if not ratio > 0:
        raise ValueError("ratio must be > 0")
    shape = tuple(int(m) for m in shape)
    start = time.perf_counter()
    re, im = steering_tensor(phi, int(np.prod(shape)), shape)
    truth = re + 1j * im
    raw = stream(seed, NOISE).standard_normal((2,) + shape)
    raw *= ratio * math.sqrt(fro_norm(re) ** 2 + fro_norm(im) ** 2) / fro_norm(raw)
    noise = raw[0] + 1j * raw[1]
    approx, residual = complex_rank1_als(truth + noise)
    eps = float(np.linalg.norm(approx - truth))
    noise_norm = float(np.linalg.norm(noise))
    check_triangle(eps, residual, noise_norm)
    return ExperimentRecord(FormatKind.CANONICAL, shape, 1, int(seed), float(ratio), eps,
                            noise_norm, residual, check_hypothesis(residual, noise_norm),
                            time.perf_counter() - start, trial_index, "complex_hopm",
                            phi=float(phi))


def steering_demo(trials: int = 20, M: int = 256, d: int = 4, ratio: float = 0.1,
                  seed: int = 0) -> list[tuple[ExperimentRecord, float]]:
    """Random-angle trials; each entry pairs a record with the worst second
    singular value of the clean tensor's unfoldings."""
    m = round(M ** (1.0 / d))
    if m ** d != M:
        raise ValueError(f"M = {M} is not a {d}-th power")
    shape = (m,) * d
    phis = stream(seed).uniform(0.0, 2 * math.pi, size=trials)
    out = []
    for i, phi in enumerate(phis):
        re, im = steering_tensor(phi, M, shape)
        sigma2 = max(complex_second_singular_values(re, im))
        out.append((steering_trial(phi, shape, ratio, seed * 1_000_003 + i, i), sigma2))
    return out
