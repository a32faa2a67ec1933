"""CP, Tucker and tensor-train representations.

Each format is a frozen dataclass around numpy arrays; ``to_dense`` (or the
module-level ``*_to_dense`` functions) contracts it back to a C-ordered
dense tensor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import fro_norm, mode_product
from .rng import stream


class FormatKind(str, enum.Enum):
    CANONICAL = "cp"
    TUCKER = "tucker"
    TENSOR_TRAIN = "tt"

    @classmethod
    def parse(cls, value: "str | FormatKind") -> "FormatKind":
        if isinstance(value, cls):
            return value
        aliases = {
            "cp": cls.CANONICAL, "canonical": cls.CANONICAL,
            "tucker": cls.TUCKER,
            "tt": cls.TENSOR_TRAIN, "tensor_train": cls.TENSOR_TRAIN,
            "tensortrain": cls.TENSOR_TRAIN,
        }
        try:
            return aliases[str(value).lower().replace("-", "_")]
        except KeyError:
            raise ValueError(f"unknown format {value!r}") from None


@dataclass(frozen=True)
class CPTensor:
    """Sum of ``R`` weighted rank-one terms.

    ``factors[s]`` has shape ``(m_s, R)``.  In normalized form every factor
    column has unit 2-norm and the scale sits in ``weights``.
    """

    factors: tuple[np.ndarray, ...]
    weights: np.ndarray

    def __post_init__(self):
        factors = tuple(np.asarray(f, dtype=np.float64) for f in self.factors)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if not factors:
            raise ValueError("CPTensor needs at least one factor")
        rank = factors[0].shape[1] if factors[0].ndim == 2 else -1
        if rank < 1 or any(f.ndim != 2 or f.shape[1] != rank for f in factors):
            raise ValueError("all factors must be matrices with the same R >= 1 columns")
        if weights.shape != (rank,):
            raise ValueError(f"expected {rank} weights, got {weights.shape}")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "weights", weights)

    @property
    def rank(self) -> int:
        return self.weights.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def ndim(self) -> int:
        return len(self.factors)

    def normalized(self) -> "CPTensor":
        norms = [np.linalg.norm(f, axis=0) for f in self.factors]
        scale = np.prod(norms, axis=0)
        safe = [np.where(n > 0, n, 1.0) for n in norms]
        factors = tuple(f / n for f, n in zip(self.factors, safe))
        return CPTensor(factors, self.weights * scale)

    def to_dense(self) -> np.ndarray:
        return cp_to_dense(self)


@dataclass(frozen=True)
class TuckerTensor:
    """Core of shape ``(R_1, ..., R_d)`` times orthonormal factors ``(m_s, R_s)``."""

    core: np.ndarray
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        core = np.asarray(self.core, dtype=np.float64)
        factors = tuple(np.asarray(f, dtype=np.float64) for f in self.factors)
        if core.ndim != len(factors):
            raise ValueError("core dimension count must equal the number of factors")
        for s, f in enumerate(factors):
            if f.ndim != 2 or f.shape[1] != core.shape[s]:
                raise ValueError(f"factor {s} has shape {f.shape}, core mode is {core.shape[s]}")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "factors", factors)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def ranks(self) -> tuple[int, ...]:
        return self.core.shape

    def to_dense(self) -> np.ndarray:
        return tucker_to_dense(self)


@dataclass(frozen=True)
class TTTensor:
    """Chain of 3-way cores, core ``s`` of shape ``(r_{s-1}, m_s, r_s)``, ``r_0 = r_d = 1``."""

    cores: tuple[np.ndarray, ...]

    def __post_init__(self):
        cores = tuple(np.asarray(c, dtype=np.float64) for c in self.cores)
        if not cores:
            raise ValueError("TTTensor needs at least one core")
        if any(c.ndim != 3 for c in cores):
            raise ValueError("TT cores must be 3-way arrays")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise ValueError("boundary TT ranks must be 1")
        for s in range(1, len(cores)):
            if cores[s - 1].shape[2] != cores[s].shape[0]:
                raise ValueError(f"TT chain mismatch between cores {s - 1} and {s}")
        object.__setattr__(self, "cores", cores)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        return (1,) + tuple(c.shape[2] for c in self.cores)

    def to_dense(self) -> np.ndarray:
        return tt_to_dense(self)


def cp_to_dense(c: CPTensor) -> np.ndarray:
    mat = c.factors[0] * c.weights
    for f in c.factors[1:]:
        mat = (mat[:, None, :] * f[None, :, :]).reshape(-1, c.rank)
    return mat.sum(axis=1).reshape(c.shape)


def tucker_to_dense(t: TuckerTensor) -> np.ndarray:
    out = t.core
    for s, f in enumerate(t.factors):
        out = mode_product(out, f, s)
    return np.ascontiguousarray(out)


def tt_to_dense(t: TTTensor) -> np.ndarray:
    out = t.cores[0].reshape(t.cores[0].shape[1], -1)
    for core in t.cores[1:]:
        r0, m, r1 = core.shape
        out = (out @ core.reshape(r0, m * r1)).reshape(-1, r1)
    return out.reshape(t.shape)


def rank_one_cp(vectors: Sequence[np.ndarray], weight: float = 1.0) -> CPTensor:
    return CPTensor(tuple(np.asarray(v, dtype=np.float64).reshape(-1, 1) for v in vectors),
                    np.array([weight]))


def cp_as_tucker(c: CPTensor) -> TuckerTensor:
    """Tucker form of a rank-one CP tensor (unit factors, 1x...x1 core)."""
    if c.rank != 1:
        raise ValueError("only rank-one CP tensors have a trivial Tucker form")
    n = c.normalized()
    core = np.full((1,) * n.ndim, n.weights[0])
    return TuckerTensor(core, n.factors)


def cp_as_tt(c: CPTensor) -> TTTensor:
    """TT form of a rank-one CP tensor (all TT ranks 1)."""
    if c.rank != 1:
        raise ValueError("only rank-one CP tensors have a trivial TT form")
    cores = [f.reshape(1, -1, 1).copy() for f in c.factors]
    cores[0] = cores[0] * c.weights[0]
    return TTTensor(tuple(cores))


def tt_rank_caps(shape: Sequence[int], R: int) -> tuple[int, ...]:
    """TT ranks ``(r_0, ..., r_d)`` reachable with a uniform cap ``R``."""
    shape = tuple(int(m) for m in shape)
    ranks = [1]
    for s in range(1, len(shape)):
        left = int(np.prod(shape[:s]))
        right = int(np.prod(shape[s:]))
        ranks.append(min(R, left, right))
    ranks.append(1)
    return tuple(ranks)


def parameter_count(kind: FormatKind | str, shape: Sequence[int], R: int) -> int:
    """Number of stored parameters of a rank-``R`` representation.

    CP: ``R * sum(m_s)``; Tucker: ``R**d + R * sum(m_s)``; TT:
    ``sum(r_{s-1} m_s r_s)`` with ranks capped by what the shape allows.
    """
    kind = FormatKind.parse(kind)
    shape = tuple(int(m) for m in shape)
    if R < 1:
        raise ValueError("R must be >= 1")
    if kind is FormatKind.CANONICAL:
        return R * sum(shape)
    if kind is FormatKind.TUCKER:
        return R ** len(shape) + R * sum(shape)
    r = tt_rank_caps(shape, R)
    return sum(r[s] * shape[s] * r[s + 1] for s in range(len(shape)))


def _check_shape(shape) -> tuple[int, ...]:
    shape = tuple(int(m) for m in shape)
    if not shape or any(m < 1 for m in shape):
        raise ValueError(f"invalid shape {shape}")
    return shape


def random_cp(shape: Sequence[int], R: int, seed: int) -> CPTensor:
    """Gaussian factors, normalized columns, unit Frobenius norm overall."""
    shape = _check_shape(shape)
    max_rank = int(np.prod(shape)) // max(shape)
    if not 1 <= R <= max(max_rank, 1):
        raise ValueError(f"CP rank {R} exceeds the maximal rank {max_rank} for shape {shape}")
    rng = stream(seed)
    factors = tuple(rng.standard_normal((m, R)) for m in shape)
    cp = CPTensor(factors, np.ones(R)).normalized()
    norm = fro_norm(cp.to_dense())
    return CPTensor(cp.factors, cp.weights / norm)


def random_tucker(shape: Sequence[int], R: int, seed: int) -> TuckerTensor:
    """Gaussian core, orthonormal bases of Gaussian column spans, unit norm."""
    shape = _check_shape(shape)
    if not 1 <= R <= min(shape):
        raise ValueError(f"Tucker rank {R} needs 1 <= R <= min(shape) = {min(shape)}")
    rng = stream(seed)
    core = rng.standard_normal((R,) * len(shape))
    factors = tuple(np.linalg.qr(rng.standard_normal((m, R)))[0] for m in shape)
    return TuckerTensor(core / fro_norm(core), factors)


def random_tt_via_ttsvd(shape: Sequence[int], R: int, seed: int) -> TTTensor:
    """TT-SVD truncation of a Gaussian dense tensor, rescaled to unit norm."""
    from .decompose import tt_svd

    shape = _check_shape(shape)
    max_rank = max(tt_rank_caps(shape, int(np.prod(shape))))
    if not 1 <= R <= max_rank:
        raise ValueError(f"TT rank {R} exceeds the maximal TT rank {max_rank} for shape {shape}")
    rng = stream(seed)
    dense = rng.standard_normal(shape)
    tt, _ = tt_svd(dense, R)
    norm = fro_norm(tt.to_dense())
    cores = list(tt.cores)
    cores[-1] = cores[-1] / norm
    return TTTensor(tuple(cores))


def random_lowrank(kind: FormatKind | str, shape: Sequence[int], R: int, seed: int):
    kind = FormatKind.parse(kind)
    if kind is FormatKind.CANONICAL:
        return random_cp(shape, R, seed)
    if kind is FormatKind.TUCKER:
        return random_tucker(shape, R, seed)
    return random_tt_via_ttsvd(shape, R, seed)


__all__ = [
    "FormatKind", "CPTensor", "TuckerTensor", "TTTensor",
    "cp_to_dense", "tucker_to_dense", "tt_to_dense",
    "rank_one_cp", "cp_as_tucker", "cp_as_tt", "tt_rank_caps",
    "parameter_count", "random_cp", "random_tucker", "random_tt_via_ttsvd",
    "random_lowrank",
]
