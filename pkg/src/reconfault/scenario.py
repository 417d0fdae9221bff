"""Scenario configuration: fabric geometry, victims, attacker, timing.

Scenarios are INI files with key=value sections; every key has a default,
and the shipped default scenario (``DEFAULT_SCENARIO``) reproduces the
reference setup: two 500-adder clusters, 8 regions, a 16000-instance RO
grid toggling at 5e5 Hz with duty 0.5, a 200 us exposure window over a
10 ns/word upload, and a 4,000,000-word full-bitstream equivalent for the
duration arithmetic.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .attacker import PowerWasterConfig, WasterKind, plan_activation
from .bitstream import MAX_HEADER_NOPS, MAX_PAYLOAD_WORDS, BuildSpec, FrameAddress
from .fabric import Fabric, Placement, PlacementIndex
from .seeds import fnv1a64, splitmix64
from .victims import AdderScenario, AesScenario, default_adder_inputs


class ConfigError(ValueError):
    """Invalid scenario configuration."""


DEFAULT_SCENARIO = """\
[fabric]
prr_count = 8
frames_per_prr = 1024
frame_words = 4

[victims]
kind = adders
adders_per_cluster = 500
frames_per_adder = 2
encoder_frames = 8
cluster1_prr = 0
cluster2_prr = 3
aes1_prr = 0
aes2_prr = 6
aes_frames = 512
aes_key = 000102030405060708090a0b0c0d0e0f
aes_plaintext = 00112233445566778899aabbccddeeff

[wasters]
kind = combinational_ro
count = 16000
toggle_freq_hz = 5e5
duty = 0.5
p_max = 0.008

[timing]
word_period_ns = 10
exposure_ns = 200000
guard_words = 4

[bitstream]
far_prr = 1
far_offset = 0
header_nops = 2
payload_frames = 2
names = blinkall,blinkcount,blinkline

[detectors]
duration = 1000000

[campaign]
total_word_count = 4000000
reset_per_trial = true
"""


@dataclass(frozen=True)
class ScenarioConfig:
    # fabric
    prr_count: int = 8
    frames_per_prr: int = 1024
    frame_words: int = 4
    # victims
    victim_kind: str = "adders"
    adders_per_cluster: int = 500
    frames_per_adder: int = 2
    encoder_frames: int = 8
    cluster1_prr: int = 0
    cluster2_prr: int = 3
    aes1_prr: int = 0
    aes2_prr: int = 6
    aes_frames: int = 512
    aes_key: str = "000102030405060708090a0b0c0d0e0f"
    aes_plaintext: str = "00112233445566778899aabbccddeeff"
    # wasters
    waster_kind: str = "combinational_ro"
    waster_count: int = 16000
    toggle_freq_hz: float = 5e5
    duty: float = 0.5
    p_max: float = 0.008
    # timing
    word_period_ns: int = 10
    exposure_ns: int = 200_000
    guard_words: int = 4
    # bitstream
    far_prr: int = 1
    far_offset: int = 0
    header_nops: int = 2
    payload_frames: int = 2
    bitstream_names: tuple[str, ...] = ("blinkall", "blinkcount", "blinkline")
    # detectors: (name, threshold_ns) in file order
    detectors: tuple[tuple[str, int], ...] = (("duration", 1_000_000),)
    # campaign
    total_word_count: int | None = 4_000_000
    reset_per_trial: bool = True

    def validate(self) -> "ScenarioConfig":
        if min(self.prr_count, self.frames_per_prr, self.frame_words) <= 0:
            raise ConfigError("fabric geometry must be positive")
        if self.victim_kind not in ("adders", "aes"):
            raise ConfigError(f"unknown victim kind {self.victim_kind!r}")
        if self.payload_frames <= 0:
            raise ConfigError("payload_frames must be positive")
        if self.payload_frames * self.frame_words > MAX_PAYLOAD_WORDS:
            raise ConfigError(f"payload exceeds the {MAX_PAYLOAD_WORDS}-word count field")
        if not 0 <= self.header_nops <= MAX_HEADER_NOPS:
            raise ConfigError(f"header_nops outside [0, {MAX_HEADER_NOPS}]")
        if not self.bitstream_names:
            raise ConfigError("at least one bitstream name is required")
        if not 0 <= self.far_prr < self.prr_count or not 0 <= self.far_offset < self.frames_per_prr:
            raise ConfigError(
                f"intended address ({self.far_prr}, {self.far_offset}) outside the fabric"
            )
        for name, threshold in self.detectors:
            if threshold <= 0:
                raise ConfigError(f"detector {name!r} threshold must be positive")
        try:
            self.power_config()
            index = self.placement_index()
            # Select window sits at words [1 + nops, 2 + nops]; the activation
            # plan must be constructible for it.
            plan_activation(
                (1 + self.header_nops, 2 + self.header_nops),
                self.word_period_ns,
                self.guard_words,
                self.exposure_ns,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        # The intended write must not land on a victim placement, otherwise a
        # perfectly clean upload would count as co-tenant corruption.
        for k in range(self.payload_frames):
            frame = self.far_offset + k
            if frame < self.frames_per_prr and index.unit_index_at(self.far_prr, frame) >= 0:
                raise ConfigError(
                    f"intended write to ({self.far_prr}, {frame}) overlaps a victim placement"
                )
        total = self.image_word_count()
        if self.total_word_count is not None and self.total_word_count < total:
            raise ConfigError(
                f"total_word_count {self.total_word_count} smaller than the actual image ({total} words)"
            )
        return self

    # -- derived pieces ------------------------------------------------

    def power_config(self) -> PowerWasterConfig:
        try:
            kind = WasterKind(self.waster_kind)
        except ValueError:
            raise ConfigError(f"unknown waster kind {self.waster_kind!r}") from None
        return PowerWasterConfig(
            kind=kind,
            count=self.waster_count,
            toggle_freq_hz=self.toggle_freq_hz,
            duty=self.duty,
            p_max=self.p_max,
        )

    def placements(self) -> tuple[Placement, ...]:
        if self.victim_kind == "adders":
            out: list[Placement] = []
            n, fpa = self.adders_per_cluster, self.frames_per_adder
            tail = n * fpa + self.encoder_frames
            if tail > self.frames_per_prr:
                raise ConfigError(
                    f"cluster needs {tail} frames but regions hold {self.frames_per_prr}"
                )
            for cluster, prr, encoder in ((1, self.cluster1_prr, "p1"), (2, self.cluster2_prr, "p2")):
                for i in range(n):
                    out.append(Placement(f"adder{cluster}_{i}", prr, (i * fpa, (i + 1) * fpa - 1)))
                out.append(Placement(encoder, prr, (n * fpa, tail - 1)))
            return tuple(out)
        if self.aes_frames > self.frames_per_prr:
            raise ConfigError(f"AES needs {self.aes_frames} frames but regions hold {self.frames_per_prr}")
        return (
            Placement("aes1", self.aes1_prr, (0, self.aes_frames - 1)),
            Placement("aes2", self.aes2_prr, (0, self.aes_frames - 1)),
        )

    def placement_index(self) -> PlacementIndex:
        return PlacementIndex(self.placements(), self.prr_count, self.frames_per_prr)

    def adder_scenario(self) -> AdderScenario:
        n = self.adders_per_cluster
        return AdderScenario(n=n, inputs=default_adder_inputs(n), placements=self.placements())

    def aes_scenario(self) -> AesScenario:
        try:
            key = bytes.fromhex(self.aes_key)
            plaintext = bytes.fromhex(self.aes_plaintext)
        except ValueError as exc:
            raise ConfigError(f"bad AES hex value: {exc}") from exc
        if len(key) != 16 or len(plaintext) != 16:
            raise ConfigError("AES key and plaintext must be 16 bytes of hex")
        return AesScenario.from_key_plaintext(key, plaintext, self.placements())

    def build_fabric(self) -> Fabric:
        # Reference-board utilisation figures; documentation metadata only.
        if self.victim_kind == "adders":
            budget = {
                "adder_clusters_with_encoders": 21.2,
                "power_wasters_combinational_ro": 29.6,
                "power_wasters_self_clocked_ro": 28.2,
            }
        else:
            budget = {
                "aes_instances": 38.6,
                "power_wasters_combinational_ro": 22.0,
                "power_wasters_self_clocked_ro": 26.0,
            }
        return Fabric(self.prr_count, self.frames_per_prr, self.frame_words, lut_budget=budget)

    def intended_far(self) -> FrameAddress:
        return FrameAddress(self.far_prr, self.far_offset)

    def payload_words(self, name: str) -> tuple[int, ...]:
        """Synthetic frame payload, distinct per bitstream name."""
        base = fnv1a64(name.encode())
        count = self.payload_frames * self.frame_words
        return tuple(splitmix64(base + i) & 0xFFFFFFFF for i in range(count))

    def build_spec(self, name: str) -> BuildSpec:
        return BuildSpec(
            far=self.intended_far(),
            header_nop_count=self.header_nops,
            frame_payload=self.payload_words(name),
        )

    def image_word_count(self) -> int:
        return 1 + self.header_nops + 2 + 1 + self.payload_frames * self.frame_words + 2

    def upload_word_count(self) -> int:
        """Word count used for duration arithmetic (override or actual)."""
        return self.total_word_count if self.total_word_count is not None else self.image_word_count()

    def upload_duration_ns(self) -> int:
        return self.upload_word_count() * self.word_period_ns


_SCHEMA = {
    "fabric": {
        "prr_count": ("prr_count", int),
        "frames_per_prr": ("frames_per_prr", int),
        "frame_words": ("frame_words", int),
    },
    "victims": {
        "kind": ("victim_kind", str),
        "adders_per_cluster": ("adders_per_cluster", int),
        "frames_per_adder": ("frames_per_adder", int),
        "encoder_frames": ("encoder_frames", int),
        "cluster1_prr": ("cluster1_prr", int),
        "cluster2_prr": ("cluster2_prr", int),
        "aes1_prr": ("aes1_prr", int),
        "aes2_prr": ("aes2_prr", int),
        "aes_frames": ("aes_frames", int),
        "aes_key": ("aes_key", str),
        "aes_plaintext": ("aes_plaintext", str),
    },
    "wasters": {
        "kind": ("waster_kind", str),
        "count": ("waster_count", int),
        "toggle_freq_hz": ("toggle_freq_hz", float),
        "duty": ("duty", float),
        "p_max": ("p_max", float),
    },
    "timing": {
        "word_period_ns": ("word_period_ns", int),
        "exposure_ns": ("exposure_ns", int),
        "guard_words": ("guard_words", int),
    },
    "bitstream": {
        "far_prr": ("far_prr", int),
        "far_offset": ("far_offset", int),
        "header_nops": ("header_nops", int),
        "payload_frames": ("payload_frames", int),
        "names": ("bitstream_names", "names"),
    },
    "campaign": {
        "total_word_count": ("total_word_count", "optional_int"),
        "reset_per_trial": ("reset_per_trial", "bool"),
    },
}


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario INI file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(text)


def parse_scenario(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ConfigError(f"bad scenario syntax: {exc}") from exc

    known_fields = {f.name for f in fields(ScenarioConfig)}
    values: dict[str, object] = {}
    for section, keys in _SCHEMA.items():
        if not parser.has_section(section):
            continue
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            name, conv = keys[key]
            assert name in known_fields
            try:
                if conv == "names":
                    values[name] = tuple(s.strip() for s in raw.split(",") if s.strip())
                elif conv == "bool":
                    values[name] = _parse_bool(raw)
                elif conv == "optional_int":
                    values[name] = None if raw.strip().lower() in ("", "none") else _parse_int(raw)
                elif conv is int:
                    values[name] = _parse_int(raw)
                elif conv is float:
                    values[name] = float(raw)
                else:
                    values[name] = raw.strip()
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r} in [{section}]: {raw!r}") from exc
    if parser.has_section("detectors"):
        detectors = []
        for name, raw in parser.items("detectors"):
            try:
                detectors.append((name, _parse_int(raw)))
            except ValueError:
                raise ConfigError(f"bad detector threshold for {name!r}: {raw!r}") from None
        values["detectors"] = tuple(detectors)
    for section in parser.sections():
        if section not in _SCHEMA and section != "detectors":
            raise ConfigError(f"unknown section [{section}]")

    return ScenarioConfig(**values).validate()


def _parse_int(raw: str) -> int:
    raw = raw.strip().replace("_", "")
    # Accept scientific notation for large counts (e.g. 4e6).
    value = float(raw)
    if value != int(value):
        raise ValueError(raw)
    return int(value)


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(raw)


def default_scenario() -> ScenarioConfig:
    """The shipped default scenario, parsed from its INI text."""
    return parse_scenario(DEFAULT_SCENARIO)


def with_overrides(config: ScenarioConfig, **overrides) -> ScenarioConfig:
    """Copy of ``config`` with fields replaced, re-validated."""
    return replace(config, **overrides).validate()
