import math

import numpy as np
import pytest

from tensor_denoise import theory
from tensor_denoise.core import singular_values


def test_cosine_gap_trivial_cases(rng):
    x, y = rng.standard_normal(5), rng.standard_normal(5)
    assert theory.approximate_cosine_gap(x, y, x, y) == (0.0, 0.0)
    gap, bound = theory.approximate_cosine_gap(x, y, 2 * x, y)
    assert gap == pytest.approx(0, abs=1e-15) and bound == pytest.approx(2)
    with pytest.raises(ValueError):
        theory.approximate_cosine_gap(np.zeros(3), y[:3], x[:3], y[:3])


def test_kron_condition_example():
    def pair(c):
        return np.array([[1.0, c], [0.0, math.sqrt(1 - c * c)]])

    full, per = theory.kron_condition_check([pair(0.9), pair(0.8)])
    assert full == pytest.approx(math.sqrt(1.72 / 0.28), rel=1e-12)
    assert max(per) == pytest.approx(math.sqrt(1.9 / 0.1), rel=1e-12)
    assert min(per) == pytest.approx(3.0, rel=1e-12) and full <= min(per)
    assert theory.kron_condition_gram([pair(0.9), pair(0.8)]) == pytest.approx(full, rel=1e-10)


def test_kron_condition_orthogonal_mode_and_single_mode():
    ortho = np.eye(2)
    skew = np.array([[1.0, 0.6], [0.0, 0.8]])
    assert theory.kron_condition_check([ortho, skew])[0] == pytest.approx(1.0)
    full, per = theory.kron_condition_check([skew])
    assert full == pytest.approx(per[0])


def test_kron_condition_rejects_non_unit():
    with pytest.raises(ValueError):
        theory.kron_condition_check([np.ones((2, 2))])


def test_two_column_svd_examples():
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    assert np.allclose(theory.two_column_svd(e1, e2).s, [1, 1])
    svd = theory.two_column_svd(e1, e1)
    assert np.allclose(svd.s, [math.sqrt(2), 0])
    assert np.allclose(svd.reconstruct(), np.stack([e1, e1], 1))


def test_two_column_svd_sign_flip(rng):
    c1 = rng.standard_normal(4)
    c1 /= np.linalg.norm(c1)
    c2 = -c1 + 0.1 * rng.standard_normal(4)
    c2 /= np.linalg.norm(c2)
    svd = theory.two_column_svd(c1, c2)
    assert np.allclose(svd.reconstruct(), np.stack([c1, c2], 1))
    assert np.allclose(svd.s, singular_values(np.stack([c1, c2], 1)), atol=1e-12)


def test_rank2_pair_conditioning_and_roundtrip(rng):
    a, b = theory.random_orthonormal_pair(rng, 4)
    for alpha in (1.0, 0.1):
        pair = theory.build_rank2_pair([a], [b], [alpha])
        s = singular_values(pair.factors()[0])
        assert s[0] / s[1] == pytest.approx(1 / alpha, rel=1e-10)
    pair = theory.random_rank2_pair(rng, 3, 4, [0.3, 0.5, 0.9])
    back = theory.Rank2FactorPair.from_factors(pair.factors())
    assert np.allclose(back.alpha, pair.alpha)
    for s in range(3):
        assert np.allclose(back.factors()[s], pair.factors()[s])


@pytest.mark.parametrize("alpha", [[0.0], [1.5]])
def test_rank2_pair_domain(alpha):
    with pytest.raises(ValueError):
        theory.build_rank2_pair([np.array([1.0, 0])], [np.array([0, 1.0])], alpha)


def test_tail_expansion_matches_subset_sum(rng):
    pair = theory.random_rank2_pair(rng, 4, 3, [0.2, 0.4, 0.1, 0.3])
    tail, anorm = theory.tail_expansion(pair)
    assert tail == pytest.approx(theory.tail_norm_exact(pair.alpha), rel=1e-10)
    assert anorm == pytest.approx(np.linalg.norm(pair.alpha))


def test_conditioned_approximation_branches(rng):
    pair = theory.random_rank2_pair(rng, 3, 4, [0.5, 0.6, 0.7])
    easy = theory.conditioned_approximation(pair, 4)
    assert easy.distance == 0
    ill = theory.random_rank2_pair(rng, 3, 4, [0.01, 0.02, 0.015])
    res = theory.conditioned_approximation(ill, 8)
    assert res.cond_tilde <= 8 * (1 + 1e-9)
    assert 0 <= res.distance <= 1
    assert np.allclose(res.q_tilde.T @ res.q_tilde, np.eye(2), atol=1e-10)
    with pytest.raises(ValueError):
        theory.conditioned_approximation(ill, 2)


def test_projector_distance_equals_spectral_norm(rng):
    q = np.linalg.qr(rng.standard_normal((8, 2)))[0]
    qt = np.linalg.qr(q + 0.1 * rng.standard_normal((8, 2)))[0]
    ref = np.linalg.norm(q @ q.T - qt @ qt.T, 2)
    assert theory.projector_distance(q, qt) == pytest.approx(ref, rel=1e-10)


def test_unbounded_example_structure():
    q = theory.unbounded_example()
    assert q.shape == (8, 2)
    assert np.allclose(np.linalg.norm(q, axis=0), [1, 1], atol=1e-15)
    assert q[:, 0] @ q[:, 1] == 0
    assert np.count_nonzero(q[:, 1]) == 3 and q[0, 0] == 1


def test_unbounded_example_constrained_fit():
    q = theory.unbounded_example()
    res = [theory.best_conditioned_fit(q, (2, 2, 2), om, starts=16) for om in (2, 8, 32)]
    assert min(res) > 0.1
    assert all(b <= a + 1e-6 for a, b in zip(res, res[1:]))


def test_border_rank_basis_fit_decays():
    # span{e_000, W} with W the normalized sum of weight-one basis vectors
    q = np.zeros((8, 2))
    q[0, 0] = 1
    q[[1, 2, 4], 1] = 1 / math.sqrt(3)
    res = [theory.best_conditioned_fit(q, (2, 2, 2), om, starts=16) for om in (2, 8, 32)]
    assert res[0] > 0.05
    assert res[0] > res[1] > res[2]


def test_witness_drivers_small():
    for driver in (theory.verify_cosine_lemma, theory.verify_kron_condition,
                   theory.verify_two_column_svd, theory.verify_tail_bound):
        assert driver(200, seed=3).passed
