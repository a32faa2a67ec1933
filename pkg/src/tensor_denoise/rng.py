"""Seeded random streams.

Every random draw in the library goes through :func:`stream`, which builds a
PCG64 ``numpy.random.Generator`` from a 64-bit seed plus an optional tuple of
integer keys.  The keys are passed as the ``spawn_key`` of a
``numpy.random.SeedSequence``, so ``stream(s, i)`` and ``stream(s, j)`` are
statistically independent for ``i != j`` and fully determined by ``(s, i)``.

Splitting rule used by the experiment drivers:

* ``trial_seed(master, index)`` gives the seed of trial ``index``;
* inside a trial, ``stream(seed, TRUTH)``, ``stream(seed, NOISE)`` and
  ``stream(seed, SOLVER)`` feed the truth tensor, the noise and the solver.
"""

from __future__ import annotations

import numpy as np

TRUTH = 0
NOISE = 1
SOLVER = 2

_MASK64 = (1 << 64) - 1


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def trial_seed(master_seed: int, index: int) -> int:
    """Seed of trial ``index`` under ``master_seed`` (a 63-bit int, JSON safe)."""
    ss = np.random.SeedSequence(int(master_seed) & _MASK64, spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def trial_seeds(master_seed: int, count: int) -> list[int]:
    return [trial_seed(master_seed, i) for i in range(count)]
