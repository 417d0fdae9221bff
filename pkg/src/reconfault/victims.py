"""Victim models: adder clusters with priority encoders, and AES-128 pairs.

Victims are evaluated functionally against the fabric's corruption state.
An overwritten unit produces its golden output XORed with the unit's damage
digest, which is guaranteed nonzero within the output width, so corruption
is always observable.  The fault-localisation register packs the per-cluster
priority-encoder codes (adder case) or the two instance flags (AES case).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .fabric import Placement

ADDER_OUTPUT_MASK = 0xFFFF
ENCODER_FIELD_MASK = 0x3FF

AES_SBOX = (
    0x63, 0x7C, 0x77, 0x7B, 0xF2, 0x6B, 0x6F, 0xC5, 0x30, 0x01, 0x67, 0x2B, 0xFE, 0xD7, 0xAB, 0x76,
    0xCA, 0x82, 0xC9, 0x7D, 0xFA, 0x59, 0x47, 0xF0, 0xAD, 0xD4, 0xA2, 0xAF, 0x9C, 0xA4, 0x72, 0xC0,
    0xB7, 0xFD, 0x93, 0x26, 0x36, 0x3F, 0xF7, 0xCC, 0x34, 0xA5, 0xE5, 0xF1, 0x71, 0xD8, 0x31, 0x15,
    0x04, 0xC7, 0x23, 0xC3, 0x18, 0x96, 0x05, 0x9A, 0x07, 0x12, 0x80, 0xE2, 0xEB, 0x27, 0xB2, 0x75,
    0x09, 0x83, 0x2C, 0x1A, 0x1B, 0x6E, 0x5A, 0xA0, 0x52, 0x3B, 0xD6, 0xB3, 0x29, 0xE3, 0x2F, 0x84,
    0x53, 0xD1, 0x00, 0xED, 0x20, 0xFC, 0xB1, 0x5B, 0x6A, 0xCB, 0xBE, 0x39, 0x4A, 0x4C, 0x58, 0xCF,
    0xD0, 0xEF, 0xAA, 0xFB, 0x43, 0x4D, 0x33, 0x85, 0x45, 0xF9, 0x02, 0x7F, 0x50, 0x3C, 0x9F, 0xA8,
    0x51, 0xA3, 0x40, 0x8F, 0x92, 0x9D, 0x38, 0xF5, 0xBC, 0xB6, 0xDA, 0x21, 0x10, 0xFF, 0xF3, 0xD2,
    0xCD, 0x0C, 0x13, 0xEC, 0x5F, 0x97, 0x44, 0x17, 0xC4, 0xA7, 0x7E, 0x3D, 0x64, 0x5D, 0x19, 0x73,
    0x60, 0x81, 0x4F, 0xDC, 0x22, 0x2A, 0x90, 0x88, 0x46, 0xEE, 0xB8, 0x14, 0xDE, 0x5E, 0x0B, 0xDB,
    0xE0, 0x32, 0x3A, 0x0A, 0x49, 0x06, 0x24, 0x5C, 0xC2, 0xD3, 0xAC, 0x62, 0x91, 0x95, 0xE4, 0x79,
    0xE7, 0xC8, 0x37, 0x6D, 0x8D, 0xD5, 0x4E, 0xA9, 0x6C, 0x56, 0xF4, 0xEA, 0x65, 0x7A, 0xAE, 0x08,
    0xBA, 0x78, 0x25, 0x2E, 0x1C, 0xA6, 0xB4, 0xC6, 0xE8, 0xDD, 0x74, 0x1F, 0x4B, 0xBD, 0x8B, 0x8A,
    0x70, 0x3E, 0xB5, 0x66, 0x48, 0x03, 0xF6, 0x0E, 0x61, 0x35, 0x57, 0xB9, 0x86, 0xC1, 0x1D, 0x9E,
    0xE1, 0xF8, 0x98, 0x11, 0x69, 0xD9, 0x8E, 0x94, 0x9B, 0x1E, 0x87, 0xE9, 0xCE, 0x55, 0x28, 0xDF,
    0x8C, 0xA1, 0x89, 0x0D, 0xBF, 0xE6, 0x42, 0x68, 0x41, 0x99, 0x2D, 0x0F, 0xB0, 0x54, 0xBB, 0x16,
)

AES_RCON = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)


def _xtime(b: int) -> int:
    b <<= 1
    if b & 0x100:
        b ^= 0x11B
    return b & 0xFF


def _expand_key(key: bytes) -> list[bytes]:
    words = [key[i : i + 4] for i in range(0, 16, 4)]
    for i in range(4, 44):
        prev = words[i - 1]
        if i % 4 == 0:
            rotated = prev[1:] + prev[:1]
            prev = bytes(AES_SBOX[b] for b in rotated)
            prev = bytes((prev[0] ^ AES_RCON[i // 4 - 1],)) + prev[1:]
        words.append(bytes(a ^ b for a, b in zip(words[i - 4], prev)))
    return [b"".join(words[4 * r : 4 * r + 4]) for r in range(11)]


def _sub_bytes(state: list[int]) -> list[int]:
    return [AES_SBOX[b] for b in state]


def _shift_rows(state: list[int]) -> list[int]:
    # Column-major state: byte r of column c sits at index 4*c + r.
    out = list(state)
    for r in range(1, 4):
        for c in range(4):
            out[4 * c + r] = state[4 * ((c + r) % 4) + r]
    return out


def _mix_columns(state: list[int]) -> list[int]:
    out = []
    for c in range(4):
        a = state[4 * c : 4 * c + 4]
        t = a[0] ^ a[1] ^ a[2] ^ a[3]
        out.extend(
            (
                a[0] ^ t ^ _xtime(a[0] ^ a[1]),
                a[1] ^ t ^ _xtime(a[1] ^ a[2]),
                a[2] ^ t ^ _xtime(a[2] ^ a[3]),
                a[3] ^ t ^ _xtime(a[3] ^ a[0]),
            )
        )
    return out


def aes_encrypt_reference(key: bytes, plaintext: bytes) -> bytes:
    """Standard AES-128 encryption of a single block (10 rounds)."""
    if len(key) != 16 or len(plaintext) != 16:
        raise ValueError("key and plaintext must be 16 bytes each")
    round_keys = _expand_key(key)
    state = [p ^ k for p, k in zip(plaintext, round_keys[0])]
    for rnd in range(1, 10):
        state = _mix_columns(_shift_rows(_sub_bytes(state)))
        state = [s ^ k for s, k in zip(state, round_keys[rnd])]
    state = _shift_rows(_sub_bytes(state))
    return bytes(s ^ k for s, k in zip(state, round_keys[10]))


@dataclass(frozen=True)
class FltSig:
    """The 32-bit fault-localisation register.

    Adder scenarios pack encoder codes in bits [9:0] (cluster #1) and
    [19:10] (cluster #2); AES scenarios pack the two instance flags in
    bits 0 and 1.
    """

    value: int

    @classmethod
    def from_adder_fields(cls, field1: int, field2: int) -> "FltSig":
        return cls((field1 & ENCODER_FIELD_MASK) | ((field2 & ENCODER_FIELD_MASK) << 10))

    @classmethod
    def from_aes_flags(cls, flag1: int, flag2: int) -> "FltSig":
        return cls((flag1 & 1) | ((flag2 & 1) << 1))

    @property
    def adder_field1(self) -> int:
        return self.value & ENCODER_FIELD_MASK

    @property
    def adder_field2(self) -> int:
        return (self.value >> 10) & ENCODER_FIELD_MASK


def priority_encode(flags: int, width: int) -> int:
    """10-bit priority-encoder code of a flag vector (LSB = index 0):
    0 when no flag is set, otherwise lowest set index + 1."""
    if not 0 < width <= 1023:
        raise ValueError(f"width {width} outside [1, 1023]")
    flags &= (1 << width) - 1
    if flags == 0:
        return 0
    return (flags & -flags).bit_length()


@dataclass(frozen=True)
class AdderScenario:
    """Two n-adder clusters plus their priority encoders.

    Each adder sums its fixed operand pair; flags mark adders whose output
    differs from that sum.
    """

    n: int
    inputs: tuple[tuple[int, int], ...]
    placements: tuple[Placement, ...]

    def __post_init__(self):
        if len(self.inputs) != self.n:
            raise ValueError(f"{len(self.inputs)} operand pairs for {self.n} adders")
        units = {pl.unit_id for pl in self.placements}
        for cluster in (1, 2):
            missing = [i for i in range(self.n) if f"adder{cluster}_{i}" not in units]
            if missing:
                raise ValueError(f"cluster {cluster} is missing placements for adders {missing[:4]}...")
        for enc in ("p1", "p2"):
            if enc not in units:
                raise ValueError(f"missing placement for encoder {enc}")

    def expected_sum(self, i: int) -> int:
        a, b = self.inputs[i]
        return (a + b) & ADDER_OUTPUT_MASK


def default_adder_inputs(n: int) -> tuple[tuple[int, int], ...]:
    """Fixed operands a_i = i, b_i = 2i + 1, wrapped to 16 bits."""
    return tuple((i & ADDER_OUTPUT_MASK, (2 * i + 1) & ADDER_OUTPUT_MASK) for i in range(n))


def evaluate_adders(
    scenario: AdderScenario, corrupted: Iterable[tuple[str, int]]
) -> tuple[int, int, FltSig]:
    """Evaluate both clusters against a corrupted-unit set.

    Returns the two flag vectors (as ints, bit i = adder i) and the packed
    fault signature.  A corrupted encoder scrambles its own field the same
    way a corrupted adder scrambles its sum.
    """
    flags = {1: 0, 2: 0}
    encoder_digest = {"p1": None, "p2": None}
    for unit_id, digest in corrupted:
        if unit_id in encoder_digest:
            encoder_digest[unit_id] = digest
            continue
        prefix, _, index = unit_id.partition("_")
        if prefix == "adder1" or prefix == "adder2":
            cluster = 1 if prefix == "adder1" else 2
            i = int(index)
            expected = scenario.expected_sum(i)
            output = (expected ^ digest) & ADDER_OUTPUT_MASK
            if output != expected:
                flags[cluster] |= 1 << i

    fields = []
    for cluster, encoder in ((1, "p1"), (2, "p2")):
        code = priority_encode(flags[cluster], scenario.n)
        digest = encoder_digest[encoder]
        if digest is not None:
            code = (code ^ digest) & ENCODER_FIELD_MASK
        fields.append(code)
    return flags[1], flags[2], FltSig.from_adder_fields(fields[0], fields[1])


@dataclass(frozen=True)
class AesScenario:
    """Two AES-128 instances sharing one key/plaintext pair."""

    key: bytes
    plaintext: bytes
    expected_ct: bytes
    placements: tuple[Placement, ...]

    def __post_init__(self):
        if self.expected_ct != aes_encrypt_reference(self.key, self.plaintext):
            raise ValueError("expected_ct does not match the reference encryption")
        units = {pl.unit_id for pl in self.placements}
        for unit in ("aes1", "aes2"):
            if unit not in units:
                raise ValueError(f"missing placement for {unit}")

    @classmethod
    def from_key_plaintext(cls, key: bytes, plaintext: bytes, placements: tuple[Placement, ...]) -> "AesScenario":
        return cls(key, plaintext, _cached_encrypt(key, plaintext), placements)


@lru_cache(maxsize=32)
def _cached_encrypt(key: bytes, plaintext: bytes) -> bytes:
    return aes_encrypt_reference(key, plaintext)


def evaluate_aes(
    scenario: AesScenario, corrupted: Iterable[tuple[str, int]]
) -> tuple[int, int, FltSig]:
    """Compare both instances' ciphertexts against the expected value.

    A corrupted instance outputs expected_ct XOR the zero-extended damage
    digest, hence always mismatches; flag k = 1 on mismatch.
    """
    digests = {unit_id: digest for unit_id, digest in corrupted}
    flags = []
    for unit in ("aes1", "aes2"):
        digest = digests.get(unit)
        if digest is None:
            ct = scenario.expected_ct
        else:
            ct = bytes(b ^ d for b, d in zip(scenario.expected_ct, digest.to_bytes(16, "big")))
        flags.append(0 if ct == scenario.expected_ct else 1)
    return flags[0], flags[1], FltSig.from_aes_flags(flags[0], flags[1])
