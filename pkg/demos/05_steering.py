# coding: utf-8
# # Steering vectors
#
# exp(i k phi) for k = 0..M-1, reshaped to 4^4, is exactly rank one over
# the complex numbers.  Denoising it with a complex rank-one fit recovers
# the steering direction.

# %%
import numpy as np

from tensor_denoise.steering import complex_second_singular_values, steering_demo, steering_tensor

re, im = steering_tensor(0.7, 256, (4, 4, 4, 4))
print("second singular values per unfolding:", complex_second_singular_values(re, im))

# %%
results = steering_demo(trials=20, M=256, d=4, ratio=0.1)
ratios = np.array([r.epsilon / r.noise_norm for r, _ in results])
print(f"eps / ||N||: mean {ratios.mean():.3f}, max {ratios.max():.3f}")
