"""Deterministic, order-independent seed derivation.

Trial seeds must be computable from (master seed, trial index) alone so that
workers can claim trials in any order and still reproduce the exact same
stream per trial.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN64 = 0x9E3779B97F4A7C15

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    h = FNV64_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV64_PRIME) & MASK64
    return h


def splitmix64(x: int) -> int:
    """One avalanche step of the splitmix64 generator."""
    x = (x + GOLDEN64) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """64-bit per-trial seed; closed form, independent of evaluation order."""
    return splitmix64((master_seed + trial_index * GOLDEN64) & MASK64)
