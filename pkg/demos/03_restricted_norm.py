# coding: utf-8
# # The restricted norm of the noise
#
# The error guarantee is driven by how much of the noise can be captured by
# the span of two rank-one terms.  knorm_lower_bound estimates this
# from below with ALS restarts plus a tangent-direction polish.

# %%
import numpy as np

from tensor_denoise import knorm_lower_bound, run_trial

rng = np.random.default_rng(1)
n = rng.standard_normal((8, 8, 8))
k = knorm_lower_bound(n, restarts=10, seed=0)
print(f"||N|| = {np.linalg.norm(n):.3f}, restricted norm >= {k:.3f}")

# %%
# For Gaussian 2x2x2 tensors of real rank 3 no best rank-2 fit exists, and
# the supremum is only reached by a rank-one term plus a tangent direction.
n = rng.standard_normal((4, 2, 2, 2))[1]
print("2x2x2 estimate:", knorm_lower_bound(n, restarts=10, seed=0))

# %%
# A trial can record the estimate next to eps.
r = run_trial("cp", (16, 16, 16), 1, 0.1, seed=5, knorm_restarts=3)
print(f"eps = {r.epsilon:.3e}, knorm >= {r.knorm_estimate:.3e}, ||N|| = {r.noise_norm:.3e}")
