import numpy as np
import pytest

from tensor_denoise.core import fro_norm, kron, vectorize
from tensor_denoise.formats import (CPTensor, FormatKind, TTTensor, TuckerTensor, cp_as_tt,
                                    cp_as_tucker, parameter_count, random_cp, random_lowrank,
                                    random_tt_via_ttsvd, random_tucker, rank_one_cp,
                                    tt_rank_caps)


def test_format_kind_aliases():
    assert FormatKind.parse("CP") is FormatKind.CANONICAL
    assert FormatKind.parse("tensor-train") is FormatKind.TENSOR_TRAIN
    with pytest.raises(ValueError):
        FormatKind.parse("hierarchical")


def test_cp_dense_matches_sum_of_outer_products(rng):
    f = [rng.standard_normal((m, 3)) for m in (2, 3, 4)]
    w = rng.standard_normal(3)
    dense = CPTensor(tuple(f), w).to_dense()
    ref = sum(w[r] * np.einsum("i,j,k->ijk", *(x[:, r] for x in f)) for r in range(3))
    assert np.allclose(dense, ref)


def test_cp_rank_mismatch():
    with pytest.raises(ValueError):
        CPTensor((np.ones((2, 2)), np.ones((2, 3))), np.ones(2))


def test_rank_one_conversions_agree(rng):
    vs = [rng.standard_normal(m) for m in (2, 3, 2)]
    cp = rank_one_cp(vs, 2.5)
    dense = cp.to_dense()
    assert np.allclose(vectorize(dense), 2.5 * kron(vs))
    assert np.allclose(cp_as_tucker(cp).to_dense(), dense)
    assert np.allclose(cp_as_tt(cp).to_dense(), dense)


def test_tt_boundary_ranks():
    with pytest.raises(ValueError):
        TTTensor((np.ones((2, 2, 1)),))


def test_tt_rank_caps():
    assert tt_rank_caps((4,) * 6, 8) == (1, 4, 8, 8, 8, 4, 1)
    assert tt_rank_caps((2, 2, 2), 5) == (1, 2, 2, 1)


def test_parameter_counts():
    assert parameter_count("cp", (4, 4, 4), 2) == 24
    assert parameter_count("tucker", (4, 4, 4), 2) == 8 + 24
    assert parameter_count("tt", (4, 4, 4), 2) == 4 * 2 + 2 * 4 * 2 + 2 * 4


@pytest.mark.parametrize("kind,R", [("cp", 3), ("tucker", 2), ("tt", 3)])
def test_random_lowrank_unit_norm_and_deterministic(kind, R):
    a = random_lowrank(kind, (4, 4, 4), R, seed=11).to_dense()
    b = random_lowrank(kind, (4, 4, 4), R, seed=11).to_dense()
    assert np.isclose(fro_norm(a), 1.0)
    assert np.array_equal(a, b)


def test_random_tucker_factors_orthonormal():
    t = random_tucker((5, 4, 6), 3, seed=1)
    for u in t.factors:
        assert np.allclose(u.T @ u, np.eye(3))


def test_unrepresentable_ranks():
    with pytest.raises(ValueError):
        random_tucker((3, 3, 3), 4, 0)
    with pytest.raises(ValueError):
        random_cp((2, 2), 3, 0)
    with pytest.raises(ValueError):
        random_tt_via_ttsvd((2, 2, 2), 3, 0)


def test_random_tt_has_requested_ranks():
    tt = random_tt_via_ttsvd((4,) * 4, 3, seed=2)
    assert tt.ranks == (1, 3, 3, 3, 1)
