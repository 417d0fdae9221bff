"""Reconfiguration manager: load, check, configure.

Words stream into internal storage one per clock period; a per-word hook can
corrupt them in flight, which is where fault injection happens.  The stored
(possibly corrupted) image is then structure-checked, CRC-checked, and
finally written to the fabric at whatever address the stored select words
name.  Every tenant can read the status register at any time.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

from .bitstream import BitstreamFormatError, BitstreamImage, compute_crc, parse_bitstream, unpack_far
from .fabric import AddressOutOfRange, Fabric, WriteReport


class RmState(enum.Enum):
    IDLE = "IDLE"
    LOADING = "LOADING"
    CRC_CHECK = "CRC_CHECK"
    CONFIGURING = "CONFIGURING"
    DONE = "DONE"
    BLOCKED = "BLOCKED"


# Phase order used to check that concurrently observed status snapshots only
# ever move forward.
STATE_ORDER = {
    RmState.IDLE: 0,
    RmState.LOADING: 1,
    RmState.CRC_CHECK: 2,
    RmState.CONFIGURING: 3,
    RmState.DONE: 4,
    RmState.BLOCKED: 4,
}

BAD_FORMAT = "BAD_FORMAT"
CRC_FAIL = "CRC_FAIL"
ADDR_OOR = "ADDR_OOR"


@dataclass(frozen=True)
class StatusRegister:
    """Snapshot readable by any tenant, no privilege required."""

    state: RmState
    words_loaded: int
    block_reason: str | None = None

    @property
    def busy(self) -> bool:
        return self.state not in (RmState.IDLE, RmState.DONE, RmState.BLOCKED)


@dataclass(frozen=True)
class RmOutcome:
    """Result of one reconfiguration attempt."""

    final_state: RmState
    block_reason: str | None
    stored_words: tuple[int, ...]
    stored_image: BitstreamImage | None
    write_report: WriteReport | None


Injector = Callable[[int, int], int]


def identity_injector(word: int, t_ns: int) -> int:
    return word


def crc_check(image: BitstreamImage) -> bool:
    """True iff the CRC recomputed over the data payload matches the stored
    footer word.  Select-word mutations are invisible here by construction."""
    return compute_crc(image.payload_words) == image.stored_crc


class ReconfigManager:
    """One-bitstream-at-a-time reconfiguration engine with a shared status
    register.  ``read_status`` is safe to call from a concurrent observer."""

    def __init__(self):
        self._lock = threading.Lock()
        self._status = StatusRegister(RmState.IDLE, 0)

    def read_status(self) -> StatusRegister:
        with self._lock:
            return self._status

    def _set_status(self, state: RmState, words_loaded: int, block_reason: str | None = None) -> None:
        with self._lock:
            self._status = StatusRegister(state, words_loaded, block_reason)

    def run_reconfiguration(
        self,
        words: Sequence[int],
        injector: Injector,
        word_period_ns: int,
        fabric: Fabric,
    ) -> RmOutcome:
        """Stream ``words`` through ``injector``, then check and configure.

        Word i is stored at simulated time ``i * word_period_ns``.  Structural
        damage blocks with BAD_FORMAT, payload damage with CRC_FAIL, an
        out-of-fabric address with ADDR_OOR; nothing is ever written to the
        fabric on a blocked run.
        """
        if word_period_ns <= 0:
            raise ValueError(f"word_period_ns must be positive, got {word_period_ns}")

        self._set_status(RmState.IDLE, 0)
        self._set_status(RmState.LOADING, 0)
        stored: list[int] = []
        for i, word in enumerate(words):
            stored.append(injector(word, i * word_period_ns) & 0xFFFFFFFF)
            self._set_status(RmState.LOADING, i + 1)
        stored_words = tuple(stored)
        n = len(stored_words)

        try:
            image = parse_bitstream(stored_words)
        except BitstreamFormatError:
            self._set_status(RmState.BLOCKED, n, BAD_FORMAT)
            return RmOutcome(RmState.BLOCKED, BAD_FORMAT, stored_words, None, None)

        self._set_status(RmState.CRC_CHECK, n)
        if not crc_check(image):
            self._set_status(RmState.BLOCKED, n, CRC_FAIL)
            return RmOutcome(RmState.BLOCKED, CRC_FAIL, stored_words, image, None)

        self._set_status(RmState.CONFIGURING, n)
        try:
            report = fabric.apply_frames(unpack_far(image.far_word), image.payload_words)
        except AddressOutOfRange:
            self._set_status(RmState.BLOCKED, n, ADDR_OOR)
            return RmOutcome(RmState.BLOCKED, ADDR_OOR, stored_words, image, None)

        self._set_status(RmState.DONE, n)
        return RmOutcome(RmState.DONE, None, stored_words, image, report)
