"""Attacker model: power-waster grid, timing plan, in-flight corruption.

The grid's parameters (instance count, toggling frequency, duty cycle)
collapse into one per-bit flip probability.  From the observable select-word
position the attacker derives two intervals: the short glitch window in
which word transfers are actually corruptible, and the longer reported
exposure window (total time the grid is active) that duration-threshold
detectors see.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from random import Random

MAX_WASTER_COUNT = 16000
TOGGLE_BAND_HZ = (1e5, 1e6)


class WasterKind(enum.Enum):
    COMBINATIONAL_RO = "combinational_ro"
    SELF_CLOCKED_RO = "self_clocked_ro"


@dataclass(frozen=True)
class PowerWasterConfig:
    """Ring-oscillator grid parameters.

    Both kinds are equally effective here; ``kind`` is carried through to
    trial records for reporting only.
    """

    kind: WasterKind
    count: int
    toggle_freq_hz: float
    duty: float
    p_max: float = 0.1

    def __post_init__(self):
        if not 0 <= self.count <= MAX_WASTER_COUNT:
            raise ValueError(f"count {self.count} outside [0, {MAX_WASTER_COUNT}]")
        if not 0.0 <= self.duty <= 1.0:
            raise ValueError(f"duty {self.duty} outside [0, 1]")
        if not 0.0 <= self.p_max <= 1.0:
            raise ValueError(f"p_max {self.p_max} outside [0, 1]")
        if self.toggle_freq_hz < 0:
            raise ValueError(f"toggle_freq_hz {self.toggle_freq_hz} negative")


@dataclass(frozen=True)
class ActivationPlan:
    """When the grid is on and when corruption is actually effective."""

    glitch_start_ns: int
    glitch_end_ns: int
    activation_start_ns: int
    exposure_ns: int
    target_word_span: tuple[int, int]


def bit_flip_probability(cfg: PowerWasterConfig) -> float:
    """Per-bit flip probability of the grid.

    Linear in instance count and duty cycle, gated on the toggling frequency
    band; zero outside the band or with no instances.
    """
    lo, hi = TOGGLE_BAND_HZ
    band = 1.0 if lo <= cfg.toggle_freq_hz <= hi else 0.0
    return cfg.p_max * (cfg.count / MAX_WASTER_COUNT) * cfg.duty * band


def plan_activation(
    select_span: tuple[int, int],
    word_period_ns: int,
    guard_words: int,
    exposure_ns: int,
) -> ActivationPlan:
    """Derive the corruption window from the select-word position.

    The targeted span is the select span widened by ``guard_words`` on each
    side (timing uncertainty), clipped at word 0.  The glitch interval is
    that span's transfer time; the activation interval is centred on the
    glitch midpoint and always has total length ``exposure_ns``, which is
    what gets reported as attack duration.
    """
    if word_period_ns <= 0:
        raise ValueError(f"word_period_ns must be positive, got {word_period_ns}")
    if guard_words < 0:
        raise ValueError(f"guard_words must be nonnegative, got {guard_words}")
    lo, hi = select_span
    target = (max(0, lo - guard_words), hi + guard_words)
    glitch_start = target[0] * word_period_ns
    glitch_end = (target[1] + 1) * word_period_ns
    if exposure_ns < glitch_end - glitch_start:
        raise ValueError(f"exposure {exposure_ns} ns shorter than the {glitch_end - glitch_start} ns glitch window")
    t_mid = (glitch_start + glitch_end) // 2
    activation_start = max(0, t_mid - exposure_ns // 2)
    return ActivationPlan(
        glitch_start_ns=glitch_start,
        glitch_end_ns=glitch_end,
        activation_start_ns=activation_start,
        exposure_ns=exposure_ns,
        target_word_span=target,
    )


def inject(word: int, t_ns: int, plan: ActivationPlan, p_bit: float, rng: Random) -> int:
    """Stochastically corrupt one in-flight word.

    Outside [glitch_start, glitch_end) the word passes untouched.  Inside,
    each of the 32 bits flips independently with probability ``p_bit``,
    drawing from ``rng`` in bit order 31 down to 0.
    """
    if not plan.glitch_start_ns <= t_ns < plan.glitch_end_ns:
        return word
    if p_bit <= 0.0:
        return word
    for bit in range(31, -1, -1):
        if rng.random() < p_bit:
            word ^= 1 << bit
    return word
