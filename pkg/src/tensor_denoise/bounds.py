"""Closed-form error bounds and their calibration against experiments.

All evaluators work in log space and exponentiate at the end so that the
Tucker ``R**d`` factor and the net cardinality do not overflow early.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .formats import FormatKind


class BoundKind(str, enum.Enum):
    THEOREM1 = "theorem1"
    EMPIRICAL_RANK1 = "empirical_rank1"
    RANK_CP = "rank_cp"
    RANK_TT = "rank_tt"
    RANK_TUCKER = "rank_tucker"
    NET_LOG_CARDINALITY = "net_log_cardinality"


@dataclass(frozen=True)
class BoundValue:
    value: float
    kind: BoundKind
    inputs: dict = field(default_factory=dict)
    overflow: bool = False


def _cube_side(d: int, M: int) -> int:
    m = int(round(M ** (1.0 / d)))
    for cand in (m - 1, m, m + 1):
        if cand >= 1 and cand ** d == M:
            return cand
    raise ValueError(f"M = {M} is not an integer d-th power for d = {d}")


def theorem1_bound(m: int, d: int, mu: float, t: float) -> float:
    """``mu * sqrt(m d^2 ln m) + t``: the rank-two restricted-norm threshold
    for a standard Gaussian ``m x ... x m`` tensor."""
    if m < 2:
        raise ValueError("theorem1_bound needs m >= 2 (ln m must be positive)")
    if d < 2 or mu <= 0 or t < 0:
        raise ValueError("theorem1_bound needs d >= 2, mu > 0, t >= 0")
    log_core = 0.5 * (math.log(m) + 2 * math.log(d) + math.log(math.log(m)))
    return mu * math.exp(log_core) + t


def theorem1_tail_probability(t: float, m: int, d: int, clamp: bool = True) -> float:
    """``exp(-t^2/4) + 2 exp(-m^(d/2)/8)``, clamped to ``[0, 1]`` by default."""
    if t < 0:
        raise ValueError("t must be >= 0")
    raw = math.exp(-t * t / 4) + 2 * math.exp(-math.exp(0.5 * d * math.log(m)) / 8)
    return min(max(raw, 0.0), 1.0) if clamp else raw


def empirical_rank1_bound(d: int, M: int, noise_norm: float) -> float:
    """Fitted rank-one law ``sqrt(d M^(1/d) / M) * noise_norm``."""
    m = _cube_side(d, M)
    return math.exp(0.5 * (math.log(d) + math.log(m) - math.log(M))) * noise_norm


def scaled_theorem1_bound(d: int, M: int, noise_norm: float, mu: float = 1.0) -> float:
    """Gaussian rank-two threshold (``t = 0``) rescaled by ``noise_norm / sqrt(M)``,
    i.e. ``mu * sqrt(d M^(1/d) ln M / M) * noise_norm``."""
    m = _cube_side(d, M)
    return theorem1_bound(m, d, mu, 0.0) * noise_norm / math.sqrt(M)


_RANK_POWER = {
    FormatKind.CANONICAL: lambda R, d: math.log(R),
    FormatKind.TENSOR_TRAIN: lambda R, d: 2 * math.log(R),
    FormatKind.TUCKER: lambda R, d: d * math.log(R),
}
_RANK_KIND = {
    FormatKind.CANONICAL: BoundKind.RANK_CP,
    FormatKind.TENSOR_TRAIN: BoundKind.RANK_TT,
    FormatKind.TUCKER: BoundKind.RANK_TUCKER,
}


def rank_bound_value(kind: FormatKind | str, d: int, M: int, R: int,
                     noise_norm: float) -> BoundValue:
    """Rank-dependent empirical law with an overflow flag.

    ``sqrt(d * R^k * M^(1/d) * log d / M) * noise_norm`` with ``k = 1``
    (CP), ``2`` (TT) or ``d`` (Tucker).
    """
    kind = FormatKind.parse(kind)
    if R < 1 or d < 2 or M < 1:
        raise ValueError("rank_bound needs R >= 1, d >= 2, M >= 1")
    log_value = 0.5 * (math.log(d) + _RANK_POWER[kind](R, d) + math.log(M) / d
                       + math.log(math.log(d)) - math.log(M))
    inputs = {"d": d, "M": M, "R": R, "noise_norm": noise_norm}
    if noise_norm == 0:
        return BoundValue(0.0, _RANK_KIND[kind], inputs)
    log_total = log_value + math.log(noise_norm)
    if log_total > math.log(np.finfo(float).max):
        return BoundValue(math.inf, _RANK_KIND[kind], inputs, overflow=True)
    return BoundValue(math.exp(log_total), _RANK_KIND[kind], inputs)


def rank_bound(kind: FormatKind | str, d: int, M: int, R: int, noise_norm: float) -> float:
    return rank_bound_value(kind, d, M, R, noise_norm).value


def net_log_cardinality(m: int, d: int, omega: float, zeta: float) -> float:
    """Natural log of the constructive net size ``(6 omega^2 / zeta)^(2 m d)``."""
    if not (d >= 2 and omega >= d and 0 < zeta <= 1 and m >= 1):
        raise ValueError("net_log_cardinality needs omega >= d >= 2, 0 < zeta <= 1, m >= 1")
    return 2 * m * d * math.log(6 * omega * omega / zeta)


@dataclass(frozen=True)
class MuCalibration:
    """Result of :func:`calibrate_mu`.

    ``mu`` is a lower estimate: the supremum proxies are themselves lower
    bounds on the restricted norm.
    """

    mu: float
    t: float
    nominal_coverage: float
    coverage: float
    n_records: int
    dims: tuple[int, ...]
    lower_estimate: bool = True


def coverage_t(coverage: float = 0.95) -> float:
    """``t`` with ``exp(-t^2/4) = 1 - coverage``."""
    if not 0 < coverage < 1:
        raise ValueError("coverage must lie in (0, 1)")
    return 2.0 * math.sqrt(-math.log(1.0 - coverage))


def sup_estimate(record) -> float:
    """Restricted-norm proxy of a record, in units of the noise standard deviation.

    Uses the record's rank-two knorm estimate when present and ``eps / 2``
    (valid whenever the hypothesis holds) otherwise; the larger one wins.
    """
    M = int(np.prod(record.shape))
    sigma = record.noise_norm / math.sqrt(M)
    candidates = []
    if record.knorm_estimate is not None:
        candidates.append(record.knorm_estimate)
    if record.hypothesis_holds:
        candidates.append(record.epsilon / 2)
    if not candidates or sigma <= 0:
        raise ValueError("record carries no usable supremum estimate")
    return max(candidates) / sigma


def calibrate_mu(records: Iterable, coverage: float = 0.95) -> MuCalibration:
    """Smallest ``mu`` putting every record's supremum proxy under the bound.

    ``t`` is fixed so the tail term ``exp(-t^2/4)`` equals ``1 - coverage``.
    Records must have cubic shapes (``m`` equal across modes).
    """
    records = list(records)
    if len(records) < 10:
        raise ValueError("calibrate_mu needs at least 10 records")
    dims = sorted({len(r.shape) for r in records})
    if len(dims) < 3:
        raise ValueError("calibrate_mu needs records spanning at least 3 values of d")
    t = coverage_t(coverage)
    ratios = []
    for r in records:
        m, d = r.shape[0], len(r.shape)
        if any(s != m for s in r.shape):
            raise ValueError("calibrate_mu needs cubic record shapes")
        ratios.append((sup_estimate(r) - t) / theorem1_bound(m, d, 1.0, 0.0))
    mu = max(ratios)
    if not mu > 0:
        raise ValueError("every estimate lies below t; the data cannot pin mu")
    covered = sum(
        sup_estimate(r) <= theorem1_bound(r.shape[0], len(r.shape), mu, t) * (1 + 1e-12)
        for r in records
    )
    return MuCalibration(mu, t, coverage, covered / len(records), len(records), tuple(dims))


def divisor_dimensions(exponent: int) -> list[int]:
    """Dimension counts ``d >= 2`` with ``d | exponent`` (so ``m = 2^(exponent/d)``)."""
    return [d for d in range(2, exponent + 1) if exponent % d == 0]


def evaluate_bounds(d: int, M: int, noise_norm: float,
                    ranks: Sequence[int] = (1,)) -> list[BoundValue]:
    """Every bound for one configuration, for reports."""
    m = _cube_side(d, M)
    out = [
        BoundValue(empirical_rank1_bound(d, M, noise_norm), BoundKind.EMPIRICAL_RANK1,
                   {"d": d, "M": M, "noise_norm": noise_norm}),
    ]
    if m >= 2:
        out.append(BoundValue(scaled_theorem1_bound(d, M, noise_norm), BoundKind.THEOREM1,
                              {"d": d, "M": M, "m": m, "mu": 1.0, "t": 0.0,
                               "noise_norm": noise_norm}))
    for R in ranks:
        for kind in FormatKind:
            out.append(rank_bound_value(kind, d, M, R, noise_norm))
    return out
