"""Numerical witnesses for the rank-two geometry behind the rank-one bound.

The objects here are pairs of Kronecker-structured unit vectors
``w_j = w_j^(1) (x) ... (x) w_j^(d)`` and the 2-dimensional subspaces they
span.  Each function either evaluates a closed form (two-column SVD, the
cosine-product condition number) or builds the explicit construction used
to approximate an ill-conditioned pair by a well-conditioned one; the
``verify_*`` drivers check the corresponding inequalities on random trials.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .core import SVDResult, kron, singular_values
from .rng import stream


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def cosine(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.dot(x, y) / (np.linalg.norm(x) * np.linalg.norm(y)))


def approximate_cosine_gap(x, y, x_hat, y_hat) -> tuple[float, float]:
    """Return ``(|cos(x, y) - cos(x_hat, y_hat)|, 2 eta_x + 2 eta_y)``.

    ``eta_x = ||x - x_hat|| / ||x||`` and likewise for ``y``; the gap never
    exceeds the bound.
    """
    x, y, x_hat, y_hat = (np.asarray(v, dtype=np.float64).reshape(-1) for v in (x, y, x_hat, y_hat))
    for v in (x, y, x_hat, y_hat):
        if not np.linalg.norm(v) > 0:
            raise ValueError("vectors must be nonzero")
    eta_x = np.linalg.norm(x - x_hat) / np.linalg.norm(x)
    eta_y = np.linalg.norm(y - y_hat) / np.linalg.norm(y)
    gap = abs(cosine(x, y) - cosine(x_hat, y_hat))
    return gap, float(2 * eta_x + 2 * eta_y)


def cond_from_cosine(gamma: float) -> float:
    """cond_2 of ``[w1 w2]`` with unit columns and ``w1 . w2 = gamma``."""
    g = abs(gamma)
    if g >= 1:
        return math.inf
    return math.sqrt((1 + g) / (1 - g))


def kron_columns(factors: Sequence[np.ndarray]) -> np.ndarray:
    """The ``M x 2`` matrix ``[kron(w_1^(s)) kron(w_2^(s))]``."""
    return np.stack([kron([f[:, j] for f in factors]) for j in range(2)], axis=1)


def kron_condition_check(factors: Sequence[np.ndarray]) -> tuple[float, list[float]]:
    """Condition numbers of the Kronecker pair and of each per-mode pair.

    Uses ``w1 . w2 = prod_s (w1^(s) . w2^(s))`` and ``lambda = 1 +- |gamma|``
    for the Gram matrix, so ``cond_full <= min(per_dim)`` always.
    """
    gammas = []
    for f in factors:
        f = np.asarray(f, dtype=np.float64)
        if f.ndim != 2 or f.shape[1] != 2:
            raise ValueError("each factor must be an m x 2 matrix")
        if not np.allclose(np.linalg.norm(f, axis=0), 1.0, atol=1e-12):
            raise ValueError("factor columns must have unit norm")
        gammas.append(float(f[:, 0] @ f[:, 1]))
    return cond_from_cosine(float(np.prod(gammas))), [cond_from_cosine(g) for g in gammas]


def kron_condition_gram(factors: Sequence[np.ndarray]) -> float:
    """cond_2 of the explicit Kronecker pair from its Gram eigenvalues."""
    w = kron_columns(factors)
    lam = np.linalg.eigvalsh(w.T @ w)
    return math.sqrt(lam[-1] / lam[0]) if lam[0] > 0 else math.inf


def two_column_svd(c1: np.ndarray, c2: np.ndarray) -> SVDResult:
    """Closed-form thin SVD of ``[c1 c2]`` for unit vectors ``c1``, ``c2``.

    Singular values are ``||c1 + c2|| / sqrt(2)`` and ``||c1 - c2|| / sqrt(2)``
    with left vectors along ``c1 + c2`` and ``c1 - c2``.  When
    ``||c1 + c2|| < ||c1 - c2||`` the sign of ``c2`` is flipped first and the
    right factor corrected, so the result is always an SVD of ``[c1 c2]``.
    """
    c1 = np.asarray(c1, dtype=np.float64).reshape(-1)
    c2 = np.asarray(c2, dtype=np.float64).reshape(-1)
    if not (abs(np.linalg.norm(c1) - 1) < 1e-10 and abs(np.linalg.norm(c2) - 1) < 1e-10):
        raise ValueError("columns must have unit norm")
    sign = 1.0
    if np.linalg.norm(c1 + c2) < np.linalg.norm(c1 - c2):
        sign, c2 = -1.0, -c2
    plus, minus = c1 + c2, c1 - c2
    n_plus, n_minus = np.linalg.norm(plus), np.linalg.norm(minus)
    u1 = plus / n_plus
    if n_minus > 1e-15:
        u2 = minus / n_minus
    else:
        # rank one: complete u1 to an orthonormal pair
        e = np.zeros_like(u1)
        e[np.argmin(np.abs(u1))] = 1.0
        u2 = _unit(e - (e @ u1) * u1)
        n_minus = 0.0
    h = 1 / math.sqrt(2)
    v = np.array([[h, h], [h, -h]])
    v[1] *= sign
    return SVDResult(np.stack([u1, u2], axis=1), np.array([n_plus * h, n_minus * h]), v)


@dataclass(frozen=True)
class Rank2FactorPair:
    """Per-mode orthonormal pairs ``(a_s, b_s)`` and mixing ``alpha_s`` in ``(0, 1]``.

    Columns are ``w1^(s) = (a + alpha b) / sqrt(1 + alpha^2)`` and
    ``w2^(s) = (a - alpha b) / sqrt(1 + alpha^2)``; each per-mode pair has
    condition number ``1 / alpha_s``.
    """

    a: tuple[np.ndarray, ...]
    b: tuple[np.ndarray, ...]
    alpha: np.ndarray

    @property
    def d(self) -> int:
        return len(self.a)

    def columns(self, s: int, alpha: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        al = self.alpha[s] if alpha is None else alpha
        c = 1 / math.sqrt(1 + al * al)
        return c * (self.a[s] + al * self.b[s]), c * (self.a[s] - al * self.b[s])

    def factors(self, alpha: Sequence[float] | None = None) -> list[np.ndarray]:
        alpha = self.alpha if alpha is None else alpha
        return [np.stack(self.columns(s, alpha[s]), axis=1) for s in range(self.d)]

    @property
    def w1(self) -> list[np.ndarray]:
        return [self.columns(s)[0] for s in range(self.d)]

    @property
    def w2(self) -> list[np.ndarray]:
        return [self.columns(s)[1] for s in range(self.d)]

    def cond_per_dim(self) -> np.ndarray:
        return 1.0 / self.alpha

    @classmethod
    def from_factors(cls, factors: Sequence[np.ndarray]) -> "Rank2FactorPair":
        """Recover ``(a, b, alpha)`` from unit-column ``m x 2`` factors.

        The second column is negated where needed so that
        ``||w1 + w2|| >= ||w1 - w2||`` (this does not change the span).
        """
        a, b, alpha = [], [], []
        for f in factors:
            c1, c2 = f[:, 0], f[:, 1]
            if np.linalg.norm(c1 + c2) < np.linalg.norm(c1 - c2):
                c2 = -c2
            plus, minus = c1 + c2, c1 - c2
            a.append(plus / np.linalg.norm(plus))
            b.append(minus / np.linalg.norm(minus))
            alpha.append(np.linalg.norm(minus) / np.linalg.norm(plus))
        return build_rank2_pair(a, b, alpha)


def build_rank2_pair(a_list, b_list, alpha_list) -> Rank2FactorPair:
    a = tuple(np.asarray(v, dtype=np.float64).reshape(-1) for v in a_list)
    b = tuple(np.asarray(v, dtype=np.float64).reshape(-1) for v in b_list)
    alpha = np.asarray(alpha_list, dtype=np.float64).reshape(-1)
    if not (len(a) == len(b) == alpha.size) or not a:
        raise ValueError("a, b and alpha need the same positive length")
    for s, (x, y) in enumerate(zip(a, b)):
        if x.shape != y.shape:
            raise ValueError(f"a_{s} and b_{s} differ in length")
        if abs(np.linalg.norm(x) - 1) > 1e-12 or abs(np.linalg.norm(y) - 1) > 1e-12:
            raise ValueError(f"a_{s} and b_{s} must be unit vectors")
        if abs(x @ y) > 1e-12:
            raise ValueError(f"a_{s} and b_{s} must be orthogonal")
    if np.any(alpha <= 0) or np.any(alpha > 1):
        raise ValueError("alpha values must lie in (0, 1]")
    return Rank2FactorPair(a, b, alpha)


def random_orthonormal_pair(rng: np.random.Generator, m: int) -> tuple[np.ndarray, np.ndarray]:
    q, _ = np.linalg.qr(rng.standard_normal((m, 2)))
    return q[:, 0], q[:, 1]


def random_rank2_pair(rng: np.random.Generator, d: int, m: int, alpha) -> Rank2FactorPair:
    pairs = [random_orthonormal_pair(rng, m) for _ in range(d)]
    return build_rank2_pair([p[0] for p in pairs], [p[1] for p in pairs], alpha)


def kron_pair_basis(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Orthonormal basis ``[q1 q2]`` along ``w1 + w2`` and ``w1 - w2``."""
    w1 = kron([f[:, 0] for f in factors])
    w2 = kron([f[:, 1] for f in factors])
    return np.stack([_unit(w1 + w2), _unit(w1 - w2)], axis=1)


def projector_distance(q: np.ndarray, q_tilde: np.ndarray) -> float:
    """``||Q Q^T - Qt Qt^T||_2`` for orthonormal bases of equal dimension.

    Computed as ``||(I - Q Q^T) Qt||_2``, the sine of the largest principal
    angle, which avoids cancellation for nearby subspaces.
    """
    resid = q_tilde - q @ (q.T @ q_tilde)
    return float(singular_values(resid)[0])


@dataclass(frozen=True)
class SubspacePair:
    q: np.ndarray
    q_tilde: np.ndarray
    distance: float
    cond_tilde: float
    beta: np.ndarray


def conditioned_approximation(pair: Rank2FactorPair, omega: float) -> SubspacePair:
    """Replace an ill-conditioned Kronecker pair by one with ``cond <= omega``.

    With every ``alpha_s < 1/omega`` the mixing vector is rescaled to
    ``beta = alpha / (omega * max(alpha))``, which keeps its direction and
    raises the largest entry to ``1/omega``.  If some ``alpha_s >= 1/omega``
    the pair is already well conditioned and returned unchanged.  The
    condition number of the new pair is certified from its explicit
    singular values.
    """
    if not (pair.d >= 2 and omega >= pair.d):
        raise ValueError("conditioned_approximation needs omega >= d >= 2")
    q = kron_pair_basis(pair.factors())
    if np.any(pair.alpha >= 1.0 / omega):
        beta = pair.alpha.copy()
        q_tilde = q
    else:
        beta = pair.alpha / (omega * np.max(pair.alpha))
        q_tilde = kron_pair_basis(pair.factors(beta))
    s = singular_values(kron_columns(pair.factors(beta)))
    cond = float(s[0] / s[1]) if s[1] > 0 else math.inf
    if cond > omega * (1 + 1e-9):
        raise ArithmeticError(f"constructed pair has cond {cond} > omega {omega}")
    distance = 0.0 if q_tilde is q else projector_distance(q, q_tilde)
    return SubspacePair(q, q_tilde, distance, cond, beta)


def tail_expansion(pair: Rank2FactorPair) -> tuple[float, float]:
    """``(||e_tail||_2, ||alpha||_2)`` from the full Kronecker expansion.

    ``(kron(a_s + alpha_s b_s) - kron(a_s - alpha_s b_s)) / 2`` is the sum
    over odd-sized mode subsets; subtracting the first-order terms
    ``sum_s alpha_s z_s`` leaves the tail.
    """
    plus = kron([pair.a[s] + pair.alpha[s] * pair.b[s] for s in range(pair.d)])
    minus = kron([pair.a[s] - pair.alpha[s] * pair.b[s] for s in range(pair.d)])
    first = np.zeros_like(plus)
    for s in range(pair.d):
        first += pair.alpha[s] * kron([pair.b[k] if k == s else pair.a[k] for k in range(pair.d)])
    tail = 0.5 * (plus - minus) - first
    return float(np.linalg.norm(tail)), float(np.linalg.norm(pair.alpha))


def tail_norm_exact(alpha: Sequence[float]) -> float:
    """``sqrt(sum over odd subsets S, |S| >= 3, of prod alpha_s^2)``."""
    alpha = np.asarray(alpha, dtype=np.float64)
    total = 0.0
    for k in range(3, alpha.size + 1, 2):
        for subset in itertools.combinations(range(alpha.size), k):
            total += float(np.prod(alpha[list(subset)] ** 2))
    return math.sqrt(total)


def unbounded_example() -> np.ndarray:
    """The 8 x 2 orthonormal basis with entries 1 and 1/sqrt(3) (rows 0; 1, 3, 7)."""
    q = np.zeros((8, 2))
    q[0, 0] = 1.0
    q[[1, 3, 7], 1] = 1 / math.sqrt(3)
    return q


def best_conditioned_fit(q_hat: np.ndarray, shape: Sequence[int], omega: float,
                         starts: int = 64, seed: int = 0) -> float:
    """Smallest ``||(I - P_W) Q_hat||_F`` over Kronecker pairs with ``cond(W) <= omega``.

    Multi-start SLSQP over the raw per-mode column vectors; the condition
    constraint is ``|prod_s cos_s| <= (omega^2 - 1) / (omega^2 + 1)``.
    """
    shape = tuple(int(m) for m in shape)
    d = len(shape)
    gamma_max = (omega * omega - 1) / (omega * omega + 1)
    splits = np.cumsum([0] + [2 * m for m in shape])

    def unpack(x):
        return [x[splits[s]:splits[s + 1]].reshape(2, shape[s]).T for s in range(d)]

    def gamma(x):
        return float(np.prod([cosine(f[:, 0], f[:, 1]) for f in unpack(x)]))

    def objective(x):
        factors = [f / np.linalg.norm(f, axis=0) for f in unpack(x)]
        w = kron_columns(factors)
        q, r = np.linalg.qr(w)
        if abs(r[1, 1]) < 1e-14:
            q = q[:, :1]
        return 2.0 - float(np.sum((q.T @ q_hat) ** 2))

    constraints = [{"type": "ineq", "fun": lambda x: gamma_max ** 2 - gamma(x) ** 2}]
    rng = stream(seed)
    best = math.inf
    for _ in range(starts):
        x0 = rng.standard_normal(splits[-1])
        res = minimize(objective, x0, method="SLSQP", constraints=constraints,
                       options={"maxiter": 500, "ftol": 1e-14})
        if gamma(res.x) ** 2 <= gamma_max ** 2 + 1e-9:
            best = min(best, max(res.fun, 0.0))
    return math.sqrt(best)


# --- randomized verification drivers -----------------------------------


@dataclass(frozen=True)
class WitnessReport:
    name: str
    trials: int
    violations: int
    worst_margin: float

    @property
    def passed(self) -> bool:
        return self.trials > 0 and self.violations == 0


def verify_cosine_lemma(trials: int = 1000, dim: int = 8, seed: int = 0) -> WitnessReport:
    rng = stream(seed, 1)
    violations, worst = 0, -math.inf
    for _ in range(trials):
        x, y = rng.standard_normal(dim), rng.standard_normal(dim)
        scale = 10 ** rng.uniform(-3, 0.5, size=2)
        x_hat = x + scale[0] * np.linalg.norm(x) * _unit(rng.standard_normal(dim))
        y_hat = y + scale[1] * np.linalg.norm(y) * _unit(rng.standard_normal(dim))
        if not (np.linalg.norm(x_hat) > 0 and np.linalg.norm(y_hat) > 0):
            continue
        gap, bound = approximate_cosine_gap(x, y, x_hat, y_hat)
        worst = max(worst, gap - bound)
        violations += gap > bound + 1e-12
    return WitnessReport("approximate_cosine", trials, violations, worst)


def verify_kron_condition(trials: int = 1000, seed: int = 0) -> WitnessReport:
    """Condition-number inequality plus agreement of the two cond computations."""
    rng = stream(seed, 2)
    violations, worst = 0, -math.inf
    for _ in range(trials):
        d = int(rng.integers(1, 5))
        m = int(rng.integers(2, 5))
        factors = [rng.standard_normal((m, 2)) for _ in range(d)]
        factors = [f / np.linalg.norm(f, axis=0) for f in factors]
        full, per_dim = kron_condition_check(factors)
        gram = kron_condition_gram(factors)
        worst = max(worst, full - min(per_dim))
        bad = full > min(per_dim) * (1 + 1e-12)
        bad |= abs(full - gram) > 1e-10 * max(full, 1.0)
        violations += bool(bad)
    return WitnessReport("kron_condition", trials, violations, worst)


def verify_two_column_svd(trials: int = 1000, seed: int = 0) -> WitnessReport:
    rng = stream(seed, 3)
    violations, worst = 0, -math.inf
    for _ in range(trials):
        m = int(rng.integers(2, 9))
        c1, c2 = _unit(rng.standard_normal(m)), _unit(rng.standard_normal(m))
        closed = two_column_svd(c1, c2)
        numeric = singular_values(np.stack([c1, c2], axis=1))
        err = float(np.max(np.abs(closed.s - numeric)))
        recon = float(np.max(np.abs(closed.reconstruct() - np.stack([c1, c2], axis=1))))
        worst = max(worst, err, recon)
        violations += err > 1e-10 or recon > 1e-10
    return WitnessReport("two_column_svd", trials, violations, worst)


def verify_tail_bound(trials: int = 1000, d: int = 3, ms: Sequence[int] = (2, 3, 4),
                      seed: int = 0) -> WitnessReport:
    """``||e_tail|| / ||alpha|| <= 2 ||alpha||`` whenever ``||alpha|| < 0.9``."""
    rng = stream(seed, 4)
    violations, worst = 0, -math.inf
    for i in range(trials):
        m = ms[i % len(ms)]
        direction = np.abs(rng.standard_normal(d)) + 1e-3
        alpha = direction / np.linalg.norm(direction) * rng.uniform(0.01, 0.9)
        alpha = np.minimum(alpha, 1.0)
        pair = random_rank2_pair(rng, d, m, alpha)
        tail, anorm = tail_expansion(pair)
        lhs, rhs = tail / anorm, 2 * anorm
        worst = max(worst, lhs - rhs)
        violations += lhs > rhs + 1e-12
    return WitnessReport("tail_bound", trials, violations, worst)


def conditioned_distance_sweep(omegas: Sequence[float], pairs: int = 5, d: int = 3,
                               m: int = 4, seed: int = 0) -> np.ndarray:
    """Projector distances, shape ``(pairs, len(omegas))``.

    Every pair has all ``alpha_s`` below ``1 / (2 max(omegas))`` so it is in
    the ill-conditioned branch for every ``omega`` of the sweep.
    """
    rng = stream(seed, 5)
    top = 1.0 / (2.0 * max(omegas))
    out = np.empty((pairs, len(omegas)))
    for i in range(pairs):
        pair = random_rank2_pair(rng, d, m, rng.uniform(0.1, 1.0, size=d) * top)
        for j, omega in enumerate(omegas):
            out[i, j] = conditioned_approximation(pair, omega).distance
    return out


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
