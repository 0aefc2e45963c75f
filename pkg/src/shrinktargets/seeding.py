"""Deterministic per-trial seed derivation.

Per-trial seeds are produced by a splitmix64 finalizer applied to
(master_seed, trial_index), so adding trials never perturbs the seeds of
existing ones and any (master, index) pair maps to a stable 64-bit seed.
"""

_MASK = (1 << 64) - 1


def _splitmix64(z):
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(master, index):
    """64-bit trial seed from a master seed and a trial index."""
    return _splitmix64(_splitmix64(int(master) & _MASK) ^ _splitmix64((int(index) + 1) & _MASK))
