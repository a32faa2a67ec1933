"""Dense tensor primitives shared by every decomposition.

Tensors are plain ``numpy.ndarray`` objects of dtype float64 stored in C
order, so the linearization is lexicographic on ``(i_1, ..., i_d)`` with the
last index running fastest.  :func:`kron` and :func:`unfold` are defined to
agree with that order: a rank-one tensor ``x (x) y (x) z`` vectorizes to
``kron([x, y, z])`` and the mode-``k`` unfolding keeps the remaining indices
in their original order, last fastest.

Modes are numbered from 0, as everywhere else in numpy.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np


class SVDResult(NamedTuple):
    """Thin SVD ``a ~= u @ diag(s) @ v.T``.

    ``v`` holds the right singular vectors as columns (not ``vh``).
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T


def as_tensor(data, shape: Sequence[int] | None = None) -> np.ndarray:
    """Return ``data`` as a contiguous float64 array, optionally reshaped.

    Raises ``ValueError`` for empty shapes or zero-length modes.
    """
    arr = np.ascontiguousarray(data, dtype=np.float64)
    if shape is not None:
        shape = tuple(int(m) for m in shape)
        if any(m < 1 for m in shape):
            raise ValueError(f"all mode sizes must be >= 1, got {shape}")
        if arr.size != int(np.prod(shape)):
            raise ValueError(
                f"data length {arr.size} does not match shape {shape}"
            )
        arr = arr.reshape(shape)
    if arr.ndim < 1:
        raise ValueError("a tensor needs at least one mode")
    if any(m < 1 for m in arr.shape):
        raise ValueError(f"all mode sizes must be >= 1, got {arr.shape}")
    return arr


def vectorize(t: np.ndarray) -> np.ndarray:
    """Flatten ``t`` in the library's linearization order (last index fastest)."""
    return np.asarray(t, dtype=np.float64).reshape(-1)


def devectorize(v: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    return as_tensor(v, shape)


def unfold(t: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding, shape ``(m_mode, M / m_mode)``."""
    t = np.asarray(t)
    if not 0 <= mode < t.ndim:
        raise ValueError(f"mode {mode} out of range for a {t.ndim}-way tensor")
    return np.moveaxis(t, mode, 0).reshape(t.shape[mode], -1)


def fold(mat: np.ndarray, mode: int, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold`."""
    shape = tuple(int(m) for m in shape)
    if not 0 <= mode < len(shape):
        raise ValueError(f"mode {mode} out of range for a {len(shape)}-way tensor")
    moved = (shape[mode],) + shape[:mode] + shape[mode + 1:]
    return np.moveaxis(np.asarray(mat).reshape(moved), 0, mode)


def kron(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of 1-D vectors, consistent with :func:`vectorize`."""
    if len(vectors) == 0:
        raise ValueError("kron needs at least one vector")
    out = np.ones(1)
    for v in vectors:
        v = np.asarray(v, dtype=np.float64).reshape(-1)
        if v.size == 0:
            raise ValueError("kron factors must be non-empty")
        out = np.outer(out, v).reshape(-1)
    return out


def khatri_rao(matrices: Sequence[np.ndarray]) -> np.ndarray:
    """Column-wise Kronecker product; the first matrix varies slowest."""
    if len(matrices) == 0:
        raise ValueError("khatri_rao needs at least one matrix")
    rank = matrices[0].shape[1]
    out = np.ones((1, rank))
    for a in matrices:
        if a.shape[1] != rank:
            raise ValueError("all matrices need the same number of columns")
        out = (out[:, None, :] * a[None, :, :]).reshape(-1, rank)
    return out


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if np.shape(a) != np.shape(b):
        raise ValueError(f"shape mismatch: {np.shape(a)} vs {np.shape(b)}")


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius inner product."""
    _check_same_shape(a, b)
    return float(np.dot(vectorize(a), vectorize(b)))


def fro_norm(t: np.ndarray) -> float:
    return float(np.linalg.norm(vectorize(t)))


def mode_product(t: np.ndarray, mat: np.ndarray, mode: int) -> np.ndarray:
    """Multiply mode ``mode`` of ``t`` by ``mat`` (shape ``(p, m_mode)``)."""
    out = np.tensordot(mat, t, axes=(1, mode))
    return np.moveaxis(out, 0, mode)


def truncated_svd(a: np.ndarray, rank: int) -> SVDResult:
    """Best rank-``rank`` approximation factors of a matrix (Eckart-Young).

    Backed by LAPACK's divide-and-conquer SVD, which is deterministic for a
    given input.  Singular values come back non-increasing; among equal
    singular values the basis LAPACK returns first is kept.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("truncated_svd expects a matrix")
    if not 1 <= rank <= min(a.shape):
        raise ValueError(f"rank {rank} out of range for a {a.shape} matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return SVDResult(u[:, :rank], s[:rank], vh[:rank].T)


def singular_values(a: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(a, dtype=np.float64), compute_uv=False)
