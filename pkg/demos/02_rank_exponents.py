# coding: utf-8
# # How the projection error grows with rank
#
# For each format we sweep the rank at a fixed 2^12-entry shape and fit
# eps ~ C r^alpha on a log-log scale.

# %%
from tensor_denoise import fit_power_law, rank_sweep

cases = {
    "cp": ((16, 16, 16), [1, 2, 3, 4, 5, 6, 7, 8]),
    "tt": ((4,) * 6, [1, 2, 3, 4, 5, 6, 7, 8]),
    "tucker": ((8,) * 4, [1, 2, 3, 4]),
}

# %%
# Fewer seeds than the acceptance run keeps this quick.
for kind, (shape, ranks) in cases.items():
    records, fit = rank_sweep(kind, shape, ranks, ratio=0.1, seeds=5)
    print(f"{kind:>7}: alpha = {fit.alpha:.3f}, C = {fit.C:.3g}, r^2 = {fit.r_squared:.3f}")

# %%
# The fitter also works on bare (r, eps) pairs.
fit_power_law([(1, 0.01), (2, 0.0141), (4, 0.02), (8, 0.0283)])
