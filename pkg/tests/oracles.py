"""Brute-force reference solutions for 2 x 2 x 2 tensors.

Unit 2-vectors are parametrized by one angle, so a rank-one term needs
three angles.  Each oracle scores a large batch of random angle vectors
in one vectorized pass and polishes the best few with a local optimizer.
"""

import numpy as np
from scipy.optimize import minimize


def _unit(a):
    return np.stack([np.cos(a), np.sin(a)], -1)


def _rank_one(p):
    x, y, z = _unit(p[..., 0]), _unit(p[..., 1]), _unit(p[..., 2])
    return np.einsum("...i,...j,...k->...ijk", x, y, z).reshape(p.shape[:-1] + (8,))


def _polish(f, starts, top):
    best = 0.0
    scores = f(starts)
    for i in np.argsort(scores)[-top:]:
        res = minimize(lambda p: -f(p)[0], starts[i], method="BFGS", options={"gtol": 1e-12})
        best = max(best, -res.fun, scores[i])
    return best


def rank1_residual_oracle(t, starts=10_000, top=5, seed=0):
    """``||t||^2 - max (t, x (x) y (x) z)^2`` over unit vectors, square-rooted."""
    n = np.asarray(t, dtype=np.float64).reshape(-1)

    def score(p):
        return (_rank_one(np.atleast_2d(p)) @ n) ** 2

    P = np.random.default_rng(seed).uniform(0, np.pi, (starts, 3))
    return float(np.sqrt(max(n @ n - _polish(score, P, top), 0.0)))


def knorm_oracle(t, starts=10_000, top=5, seed=0):
    """Largest projection of ``t`` onto a span of two rank-one terms.

    Two families are searched: spans of two distinct rank-one terms, and
    their degenerate limits ``span{w, tangent}`` at a single rank-one ``w``.
    """
    n = np.asarray(t, dtype=np.float64).reshape(-1)

    def span_score(p):
        p = np.atleast_2d(p)
        w1, w2 = _rank_one(p[:, :3]), _rank_one(p[:, 3:])
        q2 = w2 - np.sum(w1 * w2, -1)[:, None] * w1
        nq = np.linalg.norm(q2, axis=-1)
        b = np.where(nq > 1e-7, (q2 @ n) / np.maximum(nq, 1e-300), 0.0)
        return (w1 @ n) ** 2 + b ** 2

    def tangent_score(p):
        p = np.atleast_2d(p)
        out = (_rank_one(p) @ n) ** 2
        for k in range(3):
            q = p.copy()
            q[:, k] += np.pi / 2
            out += (_rank_one(q) @ n) ** 2
        return out

    rng = np.random.default_rng(seed)
    best = max(_polish(tangent_score, rng.uniform(0, np.pi, (starts, 3)), top),
               _polish(span_score, rng.uniform(0, np.pi, (starts, 6)), top))
    return float(np.sqrt(min(best, n @ n)))
