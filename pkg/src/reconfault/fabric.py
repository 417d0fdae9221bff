"""Fabric model: addressable regions of configuration frames.

The fabric holds a live configuration array plus an immutable golden copy.
Writes land in live storage and persist until ``reset_to_golden``; comparing
live against golden over a set of unit placements tells which co-tenant
units have been overwritten, and with what damage signature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .bitstream import FrameAddress

FNV32_OFFSET = 0x811C9DC5
FNV32_PRIME = 0x01000193

# Reference board size the LUT-budget percentages are quoted against.
REFERENCE_BOARD_LUTS = 53_200


class AddressOutOfRange(ValueError):
    """Frame address outside the fabric geometry (ADDR_OOR)."""

    code = "ADDR_OOR"


@dataclass(frozen=True)
class Placement:
    """One victim unit's location: region id plus an inclusive frame range."""

    unit_id: str
    prr_id: int
    frame_range: tuple[int, int]


@dataclass(frozen=True)
class WriteReport:
    """Frames actually touched by one write, in write order."""

    frames_written: tuple[tuple[int, int], ...]
    clipped: bool


class PlacementIndex:
    """Frame-to-unit lookup built once from a placement list.

    Frame ranges of distinct units within one region must be disjoint.
    """

    def __init__(self, placements: Sequence[Placement], prr_count: int, frames_per_prr: int):
        self.placements = tuple(placements)
        self._unit_of_frame = np.full((prr_count, frames_per_prr), -1, dtype=np.int32)
        for idx, pl in enumerate(self.placements):
            lo, hi = pl.frame_range
            if not (0 <= pl.prr_id < prr_count):
                raise ValueError(f"placement {pl.unit_id}: prr {pl.prr_id} outside fabric")
            if not (0 <= lo <= hi < frames_per_prr):
                raise ValueError(f"placement {pl.unit_id}: frames [{lo}, {hi}] outside region")
            if (self._unit_of_frame[pl.prr_id, lo : hi + 1] != -1).any():
                raise ValueError(f"placement {pl.unit_id} overlaps another unit in prr {pl.prr_id}")
            self._unit_of_frame[pl.prr_id, lo : hi + 1] = idx

    def unit_index_at(self, prr_id: int, frame: int) -> int:
        """Placement index owning (prr, frame), or -1 for unplaced frames."""
        return int(self._unit_of_frame[prr_id, frame])


def _fnv1a32(h: int, data: bytes) -> int:
    for byte in data:
        h = ((h ^ byte) * FNV32_PRIME) & 0xFFFFFFFF
    return h


def default_golden(prr_count: int, frames_per_prr: int, frame_words: int) -> np.ndarray:
    """Deterministic pre-attack fabric contents, distinct per word position."""
    p = np.arange(prr_count, dtype=np.uint32)[:, None, None]
    f = np.arange(frames_per_prr, dtype=np.uint32)[None, :, None]
    w = np.arange(frame_words, dtype=np.uint32)[None, None, :]
    return (p << np.uint32(24)) | (f << np.uint32(4)) | w


class Fabric:
    """PRR-addressable configuration memory with golden/live state."""

    def __init__(
        self,
        prr_count: int,
        frames_per_prr: int,
        frame_words: int,
        golden: np.ndarray | None = None,
        lut_budget: Mapping[str, float] | None = None,
    ):
        if min(prr_count, frames_per_prr, frame_words) <= 0:
            raise ValueError("fabric geometry must be positive")
        self.prr_count = prr_count
        self.frames_per_prr = frames_per_prr
        self.frame_words = frame_words
        # Documentation metadata only: region label -> LUT-percentage.
        self.lut_budget = dict(lut_budget or {})
        if golden is None:
            golden = default_golden(prr_count, frames_per_prr, frame_words)
        if golden.shape != (prr_count, frames_per_prr, frame_words):
            raise ValueError(f"golden shape {golden.shape} does not match geometry")
        self.golden = golden.astype(np.uint32, copy=True)
        self.golden.setflags(write=False)
        self.live = self.golden.copy()

    def apply_frames(self, far: FrameAddress, payload: Sequence[int]) -> WriteReport:
        """Write whole frames into live storage starting at ``far``.

        Writes past the end of the region are discarded (``clipped``); they
        never spill into a neighbouring region.  Raises
        :class:`AddressOutOfRange` before touching anything if the start
        address itself is outside the fabric.
        """
        if far.prr_id >= self.prr_count or far.frame_offset >= self.frames_per_prr:
            raise AddressOutOfRange(
                f"far ({far.prr_id}, {far.frame_offset}) outside {self.prr_count}x{self.frames_per_prr} fabric"
            )
        if len(payload) % self.frame_words != 0:
            raise ValueError(f"payload of {len(payload)} words is not whole {self.frame_words}-word frames")
        n_frames = len(payload) // self.frame_words
        room = self.frames_per_prr - far.frame_offset
        n_write = min(n_frames, room)
        if n_write > 0:
            frames = np.asarray(payload[: n_write * self.frame_words], dtype=np.uint32)
            self.live[far.prr_id, far.frame_offset : far.frame_offset + n_write, :] = frames.reshape(
                n_write, self.frame_words
            )
        return WriteReport(
            frames_written=tuple((far.prr_id, far.frame_offset + k) for k in range(n_write)),
            clipped=n_write < n_frames,
        )

    def diff_corrupted_units(
        self, placements: Sequence[Placement] | PlacementIndex
    ) -> set[tuple[str, int]]:
        """Units whose frames differ from golden, with a damage digest.

        A unit is present iff any word in its frame range differs between
        live and golden.  The digest is a 32-bit FNV-1a over the
        (frame_index, live XOR golden) pairs in ascending (frame, word)
        order, with bit 0 forced so it is never zero.
        """
        if not isinstance(placements, PlacementIndex):
            placements = PlacementIndex(placements, self.prr_count, self.frames_per_prr)
        live_flat = self.live.reshape(-1)
        golden_flat = self.golden.reshape(-1)
        changed = np.flatnonzero(live_flat != golden_flat)
        if changed.size == 0:
            return set()

        per_unit: dict[int, list[tuple[int, int]]] = {}
        fw = self.frame_words
        fpp = self.frames_per_prr
        for flat in changed.tolist():
            frame_global, _ = divmod(flat, fw)
            prr, frame = divmod(frame_global, fpp)
            unit_idx = placements.unit_index_at(prr, frame)
            if unit_idx >= 0:
                delta = int(live_flat[flat] ^ golden_flat[flat])
                per_unit.setdefault(unit_idx, []).append((frame, delta))

        out: set[tuple[str, int]] = set()
        for unit_idx, pairs in per_unit.items():
            digest = FNV32_OFFSET
            for frame, delta in pairs:
                digest = _fnv1a32(digest, frame.to_bytes(4, "big"))
                digest = _fnv1a32(digest, delta.to_bytes(4, "big"))
            out.add((placements.placements[unit_idx].unit_id, digest | 1))
        return out

    def reset_to_golden(self) -> None:
        """Restore live storage to the golden reference.  Idempotent."""
        np.copyto(self.live, self.golden)

    def fork_live(self) -> "Fabric":
        """Fresh fabric sharing this one's (immutable) golden state."""
        return Fabric(self.prr_count, self.frames_per_prr, self.frame_words, self.golden, self.lut_budget)
