"""Bit-exact partial-bitstream codec.

A bitstream is a flat sequence of 32-bit words:

    SYNC | NOP ... NOP | FAR_MARKER FAR | DATA_MARKER payload ... | CRC_MARKER CRC

The CRC footer covers the data payload words only.  Neither the sync/NOP
header nor the address ("select") words are protected, which is exactly the
gap the rest of this package exploits: a mutated frame address still carries
a valid CRC.

On disk (.fbit files) and inside the CRC, words are big-endian.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

WORD_MASK = 0xFFFFFFFF

SYNC_WORD = 0xAA995566
NOP_WORD = 0x20000000
FAR_MARKER = 0x30002001
DATA_MARKER = 0x30040000
CRC_MARKER = 0x30000001

# The data marker's signature occupies bits [31:18]; bit 18 is part of the
# marker constant, so the payload word count lives in bits [17:0].
DATA_MARKER_MASK = 0xFFFC0000
DATA_COUNT_MASK = 0x0003FFFF
MAX_PAYLOAD_WORDS = DATA_COUNT_MASK

MAX_HEADER_NOPS = 4096

CRC_POLY = 0x04C11DB7
CRC_INIT = 0xFFFFFFFF


class BitstreamFormatError(ValueError):
    """Malformed bitstream. ``code`` is one of BAD_SYNC, BAD_MARKER,
    TRUNCATED, BAD_LENGTH."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class FrameAddress:
    """Configuration address: target region and frame offset within it."""

    prr_id: int
    frame_offset: int

    def __post_init__(self):
        if not 0 <= self.prr_id <= 0xFF:
            raise ValueError(f"prr_id {self.prr_id} outside 8-bit range")
        if not 0 <= self.frame_offset <= 0xFFFFFF:
            raise ValueError(f"frame_offset {self.frame_offset} outside 24-bit range")


def pack_far(far: FrameAddress) -> int:
    """Pack a frame address into one word: prr_id in [31:24], offset in [23:0]."""
    return (far.prr_id << 24) | far.frame_offset


def unpack_far(word: int) -> FrameAddress:
    """Inverse of :func:`pack_far`.  Total on all 32-bit words; range
    validation against a concrete fabric happens at write time."""
    return FrameAddress(prr_id=(word >> 24) & 0xFF, frame_offset=word & 0xFFFFFF)


def _build_crc_table() -> list[int]:
    table = []
    for byte in range(256):
        reg = byte << 24
        for _ in range(8):
            if reg & 0x80000000:
                reg = ((reg << 1) ^ CRC_POLY) & WORD_MASK
            else:
                reg = (reg << 1) & WORD_MASK
        table.append(reg)
    return table


_CRC_TABLE = _build_crc_table()


def crc32_mpeg2(data: bytes, crc: int = CRC_INIT) -> int:
    """CRC-32/MPEG-2 over a byte stream: poly 0x04C11DB7, init 0xFFFFFFFF,
    no reflection, no final XOR.  Catalogue check value on b"123456789"
    is 0x0376E6E7."""
    for byte in data:
        crc = ((crc << 8) ^ _CRC_TABLE[((crc >> 24) ^ byte) & 0xFF]) & WORD_MASK
    return crc


def compute_crc(payload: Iterable[int]) -> int:
    """CRC of payload words, fed to the byte-level CRC in big-endian order."""
    crc = CRC_INIT
    table = _CRC_TABLE
    for word in payload:
        for byte in ((word >> 24) & 0xFF, (word >> 16) & 0xFF, (word >> 8) & 0xFF, word & 0xFF):
            crc = ((crc << 8) ^ table[((crc >> 24) ^ byte) & 0xFF]) & WORD_MASK
    return crc


@dataclass(frozen=True)
class BuildSpec:
    """What to emit: target address, header padding and frame payload."""

    far: FrameAddress
    header_nop_count: int
    frame_payload: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.header_nop_count <= MAX_HEADER_NOPS:
            raise ValueError(f"header_nop_count {self.header_nop_count} outside [0, {MAX_HEADER_NOPS}]")
        if len(self.frame_payload) == 0:
            raise ValueError("frame_payload must not be empty")


@dataclass(frozen=True)
class BitstreamImage:
    """A parsed, fully indexed bitstream.

    All spans are inclusive word-index pairs.  ``header_span`` covers the sync
    word plus NOP padding, the two-word select window is (``far_marker_index``,
    ``far_index``), ``data_span`` covers the payload words only, and
    ``crc_index`` is the stored CRC word.  The data and CRC markers sit at
    ``data_span[0] - 1`` and ``crc_index - 1``.
    """

    words: tuple[int, ...]
    header_span: tuple[int, int]
    far_marker_index: int
    far_index: int
    data_span: tuple[int, int]
    crc_index: int

    @property
    def data_marker_index(self) -> int:
        return self.data_span[0] - 1

    @property
    def crc_marker_index(self) -> int:
        return self.crc_index - 1

    @property
    def far_word(self) -> int:
        return self.words[self.far_index]

    @property
    def far(self) -> FrameAddress:
        return unpack_far(self.far_word)

    @property
    def payload_words(self) -> tuple[int, ...]:
        lo, hi = self.data_span
        return self.words[lo : hi + 1]

    @property
    def payload_word_count(self) -> int:
        return self.data_span[1] - self.data_span[0] + 1

    @property
    def stored_crc(self) -> int:
        return self.words[self.crc_index]


def build_bitstream(spec: BuildSpec, frame_words: int) -> BitstreamImage:
    """Emit the word sequence for ``spec`` and return it fully indexed."""
    if frame_words <= 0:
        raise ValueError(f"frame_words must be positive, got {frame_words}")
    count = len(spec.frame_payload)
    if count % frame_words != 0:
        raise BitstreamFormatError(
            "BAD_LENGTH", f"payload of {count} words is not a multiple of {frame_words}-word frames"
        )
    if count > MAX_PAYLOAD_WORDS:
        raise BitstreamFormatError(
            "BAD_LENGTH", f"payload of {count} words exceeds the {MAX_PAYLOAD_WORDS}-word count field"
        )
    payload = tuple(w & WORD_MASK for w in spec.frame_payload)
    nops = spec.header_nop_count

    words = [SYNC_WORD]
    words.extend([NOP_WORD] * nops)
    words.append(FAR_MARKER)
    words.append(pack_far(spec.far))
    words.append(DATA_MARKER | count)
    words.extend(payload)
    words.append(CRC_MARKER)
    words.append(compute_crc(payload))

    far_marker_index = 1 + nops
    data_start = far_marker_index + 3
    return BitstreamImage(
        words=tuple(words),
        header_span=(0, nops),
        far_marker_index=far_marker_index,
        far_index=far_marker_index + 1,
        data_span=(data_start, data_start + count - 1),
        crc_index=data_start + count + 1,
    )


def parse_bitstream(words: Sequence[int]) -> BitstreamImage:
    """Parse a word sequence, rejecting anything structurally malformed.

    The FAR word itself is opaque here: any 32-bit value is accepted, so a
    corrupted address parses cleanly.
    """
    words = tuple(w & WORD_MASK for w in words)
    n = len(words)
    if n == 0:
        raise BitstreamFormatError("TRUNCATED", "empty word sequence")
    if words[0] != SYNC_WORD:
        raise BitstreamFormatError("BAD_SYNC", f"word 0 is {words[0]:#010x}, expected {SYNC_WORD:#010x}")

    i = 1
    while i < n and words[i] == NOP_WORD:
        i += 1
    if i >= n:
        raise BitstreamFormatError("TRUNCATED", "sequence ends inside the header")
    if words[i] != FAR_MARKER:
        raise BitstreamFormatError("BAD_MARKER", f"word {i} is {words[i]:#010x}, expected FAR marker")
    far_marker_index = i
    far_index = i + 1
    data_marker_index = i + 2
    if data_marker_index >= n:
        raise BitstreamFormatError("TRUNCATED", "sequence ends before the data section")
    marker = words[data_marker_index]
    if marker & DATA_MARKER_MASK != DATA_MARKER:
        raise BitstreamFormatError("BAD_MARKER", f"word {data_marker_index} is {marker:#010x}, expected data marker")
    count = marker & DATA_COUNT_MASK
    if count == 0:
        raise BitstreamFormatError("BAD_LENGTH", "declared payload count is zero")

    data_start = data_marker_index + 1
    crc_marker_index = data_start + count
    crc_index = crc_marker_index + 1
    if crc_index >= n:
        raise BitstreamFormatError("TRUNCATED", f"sequence ends before the CRC footer (declared {count} payload words)")
    if words[crc_marker_index] != CRC_MARKER:
        raise BitstreamFormatError(
            "BAD_MARKER", f"word {crc_marker_index} is {words[crc_marker_index]:#010x}, expected CRC marker"
        )
    if crc_index != n - 1:
        raise BitstreamFormatError("BAD_LENGTH", f"{n - 1 - crc_index} trailing words after the CRC footer")

    return BitstreamImage(
        words=words,
        header_span=(0, far_marker_index - 1),
        far_marker_index=far_marker_index,
        far_index=far_index,
        data_span=(data_start, data_start + count - 1),
        crc_index=crc_index,
    )


def select_window(image: BitstreamImage) -> tuple[int, int]:
    """Ground-truth word-index span of the select (address) section,
    inclusive.  An attacker's timing estimate is judged against this."""
    return (image.far_marker_index, image.far_index)


def write_fbit(words: Iterable[int], path: str | Path) -> None:
    """Write words to a .fbit file: the exact big-endian word sequence."""
    data = b"".join((w & WORD_MASK).to_bytes(4, "big") for w in words)
    Path(path).write_bytes(data)


def read_fbit(path: str | Path) -> tuple[int, ...]:
    """Read a .fbit file back into its word sequence."""
    data = Path(path).read_bytes()
    if len(data) % 4 != 0:
        raise BitstreamFormatError("TRUNCATED", f"file size {len(data)} is not a multiple of 4 bytes")
    return tuple(int.from_bytes(data[i : i + 4], "big") for i in range(0, len(data), 4))
