"""Acceptance criteria at desk scale.

Every test prints one PASS/FAIL line (also repeated in the terminal
summary) and then asserts the criterion at its stated tolerance.
"""

import math

import numpy as np
import pytest

from acceptance_log import report
from oracles import knorm_oracle, rank1_residual_oracle
from tensor_denoise import theory
from tensor_denoise.bounds import empirical_rank1_bound
from tensor_denoise.cli import main
from tensor_denoise.decompose import AlsOptions, als_cp
from tensor_denoise.experiments import dimension_sweep, mean_by, rank_sweep, run_trial
from tensor_denoise.noise import knorm_lower_bound
from tensor_denoise.records import file_digest, parse, read_records, serialize, stable_text
from tensor_denoise.rng import trial_seed
from tensor_denoise.steering import steering_demo

M_EXP = 12
M = 2**M_EXP
ALL_RECORDS = []  # every trial of this module, for the guarantee check


@pytest.fixture(scope="module")
def dim_sweep():
    recs = dimension_sweep(M_EXP, ratios=(0.1,), seeds=20)
    ALL_RECORDS.extend(recs)
    return recs


@pytest.fixture(scope="module")
def low_noise_trials():
    recs = [run_trial("cp", (16, 16, 16), 1, 0.1, trial_seed(3, k), trial_index=k)
            for k in range(100)]
    ALL_RECORDS.extend(recs)
    return recs


def test_criterion_01_dimension_sweep_asymptotics(dim_sweep):
    ratios = {}
    for d in sorted({r.d for r in dim_sweep}):
        sub = [r for r in dim_sweep if r.d == d]
        eps = np.mean([r.epsilon for r in sub])
        bound = np.mean([empirical_rank1_bound(d, M, r.noise_norm) for r in sub])
        ratios[d] = eps / bound
    ok = all(0.5 <= q <= 2.0 for q in ratios.values())
    detail = ", ".join(f"d={d}: {q:.3f}" for d, q in ratios.items())
    assert report("1", ok, f"mean eps / empirical bound within [0.5, 2]: {detail}")


def test_criterion_02_filtration_gain(dim_sweep):
    e2 = {r.seed: r.epsilon for r in dim_sweep if r.d == 2}
    e12 = {r.seed: r.epsilon for r in dim_sweep if r.d == 12}
    wins = sum(e12[s] < e2[s] for s in e2)
    m2, m12 = np.mean(list(e2.values())), np.mean(list(e12.values()))
    ok = m12 < m2 and wins >= 0.9 * len(e2)
    assert report("2", ok, f"mean eps d=12 {m12:.3e} < d=2 {m2:.3e}; paired wins {wins}/{len(e2)}")


def test_criterion_03_hypothesis_regimes(low_noise_trials):
    holds = sum(r.hypothesis_holds for r in low_noise_trials)
    high = dimension_sweep(M_EXP, d_list=[12], ratios=(10.0,), seeds=100, master_seed=3)
    ALL_RECORDS.extend(high)
    fails = sum(not r.hypothesis_holds for r in high)
    below = sum(r.epsilon < r.noise_norm for r in high)
    ok = holds >= 95
    assert report("3", ok, f"ratio 0.1, d=3, m=16: hypothesis holds {holds}/100; "
                           f"ratio 10, d=12 (logged): {fails} failures, eps < ||N|| in {below}/100")


RANK_CASES = [
    ("4 CP", "cp", (16, 16, 16), range(1, 9), (0.35, 0.65)),
    ("4 TT", "tt", (4,) * 6, range(1, 9), (0.85, 1.15)),
    ("4 Tucker", "tucker", (8,) * 4, range(1, 5), (1.7, 2.3)),
]


@pytest.mark.parametrize("label,kind,shape,ranks,band", RANK_CASES, ids=[c[0] for c in RANK_CASES])
def test_criterion_04_rank_exponents(label, kind, shape, ranks, band):
    recs, fit = rank_sweep(kind, shape, list(ranks), ratio=0.1, seeds=20)
    ALL_RECORDS.extend(recs)
    ok = band[0] <= fit.alpha <= band[1]
    assert report(label, ok, f"alpha = {fit.alpha:.3f} (band [{band[0]}, {band[1]}], "
                             f"C = {fit.C:.3g}, r^2 = {fit.r_squared:.3f})")


def test_criterion_05_derivation_chain(dim_sweep, low_noise_trials):
    extra = [run_trial(k, s, R, 0.1, trial_seed(5, i))
             for i, (k, s, R) in enumerate([("tucker", (6, 6, 6), 2), ("tt", (3,) * 5, 3)] * 10)]
    ALL_RECORDS.extend(extra)
    checked = [r for r in ALL_RECORDS if r.hypothesis_holds]
    bad = [r for r in checked if not r.guarantee_holds]
    assert report("5", not bad and len(checked) >= 100,
                  f"{len(bad)} violations over {len(checked)} trials where the hypothesis holds")


def test_criterion_06_lemma_witnesses():
    reports = [theory.verify_cosine_lemma(10_000), theory.verify_kron_condition(1000),
               theory.verify_two_column_svd(1000), theory.verify_tail_bound(1000)]
    ok = all(r.passed and r.trials >= 1000 for r in reports)
    detail = "; ".join(f"{r.name}: {r.violations}/{r.trials}" for r in reports)
    assert report("6", ok, f"violations: {detail}")


def test_criterion_07_conditioned_decay():
    omegas = [4, 16, 64, 256]
    dist = theory.conditioned_distance_sweep(omegas, pairs=5, d=3, m=4, seed=7)
    monotone = bool(np.all(np.diff(dist, axis=1) <= 0))
    slopes = [theory.loglog_slope(omegas, row) for row in dist]
    pooled = theory.loglog_slope(omegas, dist.mean(axis=0))
    ok = monotone and max(slopes) <= -0.2 and pooled <= -0.2
    assert report("7", ok, f"monotone={monotone}, per-pair slopes max {max(slopes):.3f}, "
                           f"pooled slope {pooled:.3f}")


def test_criterion_08_oracle_equivalence():
    g = np.random.default_rng(88)
    gaps = []
    for k in range(20):
        t = g.standard_normal((2, 2, 2))
        als = als_cp(t, 1, AlsOptions(restarts=1000, seed=k))[1].residual
        gaps.append(abs(als - rank1_residual_oracle(t, seed=k)))
    kgaps = []
    for k in range(5):
        n = g.standard_normal((2, 2, 2))
        kgaps.append(abs(knorm_lower_bound(n, restarts=10, seed=k) - knorm_oracle(n, seed=k)))
    ok = max(gaps) <= 1e-6 and max(kgaps) <= 1e-4
    assert report("8", ok, f"rank-1 ALS vs oracle max gap {max(gaps):.2e} (tol 1e-6); "
                           f"knorm vs oracle max gap {max(kgaps):.2e} (tol 1e-4)")


def test_criterion_09_steering():
    results = steering_demo(trials=20, M=256, d=4, ratio=0.1, seed=9)
    worst = max(s for _, s in results)
    wins = sum(r.epsilon < r.noise_norm for r, _ in results)
    ok = worst <= 1e-10 and wins >= 19
    assert report("9", ok, f"worst second singular value {worst:.2e}; eps < ||N|| in {wins}/20")


def test_criterion_10_determinism_and_persistence(tmp_path):
    args = ["sweep-dim", "ratios=0.1,10", "seeds=3", "d_list=2,3,12"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    fa, fb = tmp_path / "a" / "records.jsonl", tmp_path / "b" / "records.jsonl"
    same = stable_text(fa.read_text()).encode() == stable_text(fb.read_text()).encode()
    same &= file_digest(fa) == file_digest(fb)
    header, recs = read_records(fa)
    roundtrip = parse(serialize(recs, header["config"]))[1] == recs
    roundtrip &= all(math.isfinite(r.epsilon) for r in recs)
    assert report("10", same and roundtrip,
                  f"byte-identical apart from timestamps: {same}; round-trip exact: {roundtrip}")
