import math

import numpy as np
import pytest

from tensor_denoise.core import unfold
from tensor_denoise.steering import (block_embedding, complex_rank1_als,
                                     complex_second_singular_values, is_rank_one,
                                     steering_demo, steering_tensor, steering_trial)


def test_phi_zero():
    re, im = steering_tensor(0.0, 64, (4, 4, 4))
    assert np.array_equal(re, np.ones((4, 4, 4)))
    assert np.array_equal(im, np.zeros((4, 4, 4)))


def test_shape_mismatch():
    with pytest.raises(ValueError):
        steering_tensor(0.3, 64, (4, 4))


@pytest.mark.parametrize("phi", [0.1, 1.0, 2.5, -0.7])
def test_matrix_unfolding_rank_one(phi):
    re, im = steering_tensor(phi, 256, (16, 16))
    assert complex_second_singular_values(re, im)[0] <= 1e-10


def test_block_embedding_doubles_spectrum(rng):
    a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    s = np.linalg.svd(a, compute_uv=False)
    sb = np.linalg.svd(block_embedding(a.real, a.imag), compute_uv=False)
    assert np.allclose(sb[0::2], s) and np.allclose(sb[1::2], s)


def test_generic_complex_tensor_is_not_rank_one(rng):
    re, im = rng.standard_normal((2, 4, 4))
    assert not is_rank_one(re, im)


def test_entries_are_geometric_progression():
    re, im = steering_tensor(0.3, 16, (2, 2, 4))
    h = (re + 1j * im).reshape(-1)
    assert np.allclose(h, np.exp(1j * 0.3 * np.arange(16)))
    assert np.allclose(unfold(re, 0)[1, 0], math.cos(0.3 * 8))


def test_complex_rank1_exact():
    re, im = steering_tensor(0.9, 81, (3, 3, 3, 3))
    approx, res = complex_rank1_als(re + 1j * im)
    assert res < 1e-10


def test_trial_beats_noise():
    r = steering_trial(1.3, (4, 4, 4, 4), 0.1, seed=5)
    assert r.epsilon < r.noise_norm and r.phi == 1.3
    assert r.noise_norm == pytest.approx(0.1 * 16)


def test_demo_reproducible():
    a = steering_demo(trials=3, seed=2)
    b = steering_demo(trials=3, seed=2)
    assert [r.epsilon for r, _ in a] == [r.epsilon for r, _ in b]
