# coding: utf-8
# # Numerical witnesses for the lemmas
#
# Each witness samples random instances and counts violations of one
# inequality.  Margins are reported so near misses are visible.

# %%
from tensor_denoise import theory

for report in (theory.verify_cosine_lemma(2000), theory.verify_kron_condition(1000),
               theory.verify_two_column_svd(1000), theory.verify_tail_bound(1000)):
    print(f"{report.name:>20}: {report.violations}/{report.trials} violations, "
          f"worst margin {report.worst_margin:.3e}")

# %%
# A rank-two span with badly conditioned factors can be replaced by a
# well-conditioned one; the distance shrinks as the condition cap Omega grows.
omegas = [4, 16, 64, 256]
dist = theory.conditioned_distance_sweep(omegas, pairs=5)
print(dist)
print("slopes:", [round(theory.loglog_slope(omegas, row), 2) for row in dist])

# %%
# Without the tail assumption this can fail: the constrained fit of the
# example basis stalls away from zero however large Omega gets.
q_hat, shape = theory.unbounded_example(), (2, 2, 2)
for omega in (2, 8, 32):
    print(omega, round(theory.best_conditioned_fit(q_hat, shape, omega, starts=16), 4))
