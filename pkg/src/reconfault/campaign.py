"""Seeded Monte Carlo attack campaigns.

Each trial is fully determined by (scenario, master seed, trial index): the
trial seed is a closed-form avalanche mix, so campaigns reproduce byte for
byte regardless of worker count or scheduling.  A trial uploads one cycled
bitstream through the reconfiguration manager with the stochastic injector
attached, diffs the fabric, evaluates the configured victims and detectors,
and classifies the outcome.
"""

from __future__ import annotations

import enum
import multiprocessing
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Iterable, Sequence

from .attacker import ActivationPlan, bit_flip_probability, inject, plan_activation
from .bitstream import BitstreamImage, build_bitstream, pack_far, select_window
from .manager import ReconfigManager, RmOutcome, RmState
from .scenario import ScenarioConfig
from .seeds import derive_trial_seed
from .victims import evaluate_adders, evaluate_aes

TRIAL_LOG_FIELDS = (
    "trial",
    "seed",
    "bitstream",
    "outcome",
    "far_intended",
    "far_stored",
    "flips",
    "victims",
    "flt_sig",
    "dos",
    "exposure_ns",
    "detected",
    "waster_kind",
)
TRIAL_LOG_HEADER = ",".join(TRIAL_LOG_FIELDS)


class OutcomeClass(enum.Enum):
    SUCCESS_INTENDED = "SUCCESS_INTENDED"
    MISROUTE = "MISROUTE"
    CRC_BLOCK = "CRC_BLOCK"
    FORMAT_BLOCK = "FORMAT_BLOCK"
    ADDR_OOR_BLOCK = "ADDR_OOR_BLOCK"


_BLOCK_OUTCOMES = {
    "CRC_FAIL": OutcomeClass.CRC_BLOCK,
    "BAD_FORMAT": OutcomeClass.FORMAT_BLOCK,
    "ADDR_OOR": OutcomeClass.ADDR_OOR_BLOCK,
}


@dataclass(frozen=True)
class DetectorModel:
    """Duration-threshold detector: trips on sufficiently long activation."""

    name: str
    threshold_ns: int

    def __post_init__(self):
        if self.threshold_ns <= 0:
            raise ValueError(f"detector {self.name!r} threshold must be positive")

    def detects(self, exposure_ns: int) -> bool:
        return exposure_ns >= self.threshold_ns


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    seed: int
    bitstream_name: str
    outcome: OutcomeClass
    far_intended: int
    far_stored: int
    flips: tuple[tuple[int, int], ...]
    victims_hit: tuple[str, ...]
    flt_sig: int
    dos: bool
    exposure_ns: int
    detected: tuple[tuple[str, bool], ...]
    waster_kind: str


def classify_outcome(intended_far_word: int, rm_outcome: RmOutcome) -> OutcomeClass:
    """Map a manager outcome to its trial class."""
    if rm_outcome.final_state is RmState.DONE:
        if rm_outcome.stored_image.far_word == intended_far_word:
            return OutcomeClass.SUCCESS_INTENDED
        return OutcomeClass.MISROUTE
    return _BLOCK_OUTCOMES[rm_outcome.block_reason]


class _StochasticInjector:
    """Per-word hook wiring the attacker model in, recording applied flips."""

    def __init__(self, plan: ActivationPlan, p_bit: float, rng: Random):
        self.plan = plan
        self.p_bit = p_bit
        self.rng = rng
        self.flips: list[tuple[int, int]] = []
        self._index = 0

    def __call__(self, word: int, t_ns: int) -> int:
        out = inject(word, t_ns, self.plan, self.p_bit, self.rng)
        if out != word:
            delta = word ^ out
            for bit in range(31, -1, -1):
                if (delta >> bit) & 1:
                    self.flips.append((self._index, bit))
        self._index += 1
        return out


class _ForceFarInjector:
    """Deterministic test hook: rewrite the select address word."""

    def __init__(self, far_index: int, forced_word: int):
        self.far_index = far_index
        self.forced_word = forced_word & 0xFFFFFFFF
        self.flips: list[tuple[int, int]] = []
        self._index = 0

    def __call__(self, word: int, t_ns: int) -> int:
        out = word
        if self._index == self.far_index:
            out = self.forced_word
            delta = word ^ out
            for bit in range(31, -1, -1):
                if (delta >> bit) & 1:
                    self.flips.append((self._index, bit))
        self._index += 1
        return out


class CampaignContext:
    """Per-worker prepared state: fabric, images, plan, victim evaluator."""

    def __init__(self, scenario: ScenarioConfig):
        scenario.validate()
        self.scenario = scenario
        self.fabric = scenario.build_fabric()
        self.placement_index = scenario.placement_index()
        self.unit_order = {pl.unit_id: i for i, pl in enumerate(self.placement_index.placements)}
        self.images: dict[str, BitstreamImage] = {
            name: build_bitstream(scenario.build_spec(name), scenario.frame_words)
            for name in scenario.bitstream_names
        }
        first = next(iter(self.images.values()))
        self.plan = plan_activation(
            select_window(first),
            scenario.word_period_ns,
            scenario.guard_words,
            scenario.exposure_ns,
        )
        self.p_bit = bit_flip_probability(scenario.power_config())
        self.intended_far_word = pack_far(scenario.intended_far())
        self.detectors = tuple(DetectorModel(name, thr) for name, thr in scenario.detectors)
        self.rm = ReconfigManager()
        if scenario.victim_kind == "adders":
            self.victim_scenario = scenario.adder_scenario()
            self._evaluate = evaluate_adders
        else:
            self.victim_scenario = scenario.aes_scenario()
            self._evaluate = evaluate_aes

    def evaluate_victims(self, corrupted) -> int:
        _, _, flt_sig = self._evaluate(self.victim_scenario, corrupted)
        return flt_sig.value


def run_trial(
    scenario: ScenarioConfig,
    master_seed: int,
    trial_index: int,
    *,
    context: CampaignContext | None = None,
    force_far: int | None = None,
) -> TrialRecord:
    """Run one attack attempt end to end.

    Stochastic outcomes are data, never errors.  With ``force_far`` the
    stochastic injector is replaced by a deterministic rewrite of the select
    address word.
    """
    if context is not None and context.scenario != scenario:
        raise ValueError("context was prepared for a different scenario")
    ctx = context if context is not None else CampaignContext(scenario)
    seed = derive_trial_seed(master_seed, trial_index)
    names = ctx.scenario.bitstream_names
    name = names[trial_index % len(names)]
    image = ctx.images[name]

    if ctx.scenario.reset_per_trial:
        ctx.fabric.reset_to_golden()

    if force_far is not None:
        injector = _ForceFarInjector(image.far_index, force_far)
    else:
        injector = _StochasticInjector(ctx.plan, ctx.p_bit, Random(seed))

    rm_outcome = ctx.rm.run_reconfiguration(image.words, injector, ctx.scenario.word_period_ns, ctx.fabric)
    outcome = classify_outcome(ctx.intended_far_word, rm_outcome)

    if rm_outcome.stored_image is not None:
        far_stored = rm_outcome.stored_image.far_word
    else:
        far_stored = rm_outcome.stored_words[image.far_index]

    corrupted = ctx.fabric.diff_corrupted_units(ctx.placement_index)
    victims_hit = tuple(sorted((uid for uid, _ in corrupted), key=ctx.unit_order.__getitem__))
    flt_sig = ctx.evaluate_victims(corrupted)

    exposure_ns = ctx.plan.exposure_ns
    return TrialRecord(
        trial_index=trial_index,
        seed=seed,
        bitstream_name=name,
        outcome=outcome,
        far_intended=ctx.intended_far_word,
        far_stored=far_stored,
        flips=tuple(injector.flips),
        victims_hit=victims_hit,
        flt_sig=flt_sig,
        dos=outcome is not OutcomeClass.SUCCESS_INTENDED,
        exposure_ns=exposure_ns,
        detected=tuple((d.name, d.detects(exposure_ns)) for d in ctx.detectors),
        waster_kind=ctx.scenario.waster_kind,
    )


_WORKER_CONTEXT: CampaignContext | None = None
_WORKER_SEED = 0


def _worker_init(scenario: ScenarioConfig, master_seed: int) -> None:
    global _WORKER_CONTEXT, _WORKER_SEED
    _WORKER_CONTEXT = CampaignContext(scenario)
    _WORKER_SEED = master_seed


def _worker_trial(trial_index: int) -> TrialRecord:
    return run_trial(_WORKER_CONTEXT.scenario, _WORKER_SEED, trial_index, context=_WORKER_CONTEXT)


def run_campaign(
    scenario: ScenarioConfig,
    master_seed: int,
    trials: int,
    workers: int = 1,
) -> list[TrialRecord]:
    """Run ``trials`` independent attempts, records in trial order.

    The record sequence depends only on (scenario, master_seed, trials).
    Persistent-corruption mode (``reset_per_trial = false``) shares fabric
    state across trials and therefore always runs on a single worker.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if workers == 1 or not scenario.reset_per_trial or trials < workers * 4:
        context = CampaignContext(scenario)
        return [run_trial(scenario, master_seed, i, context=context) for i in range(trials)]

    chunksize = max(16, trials // (workers * 8))
    with multiprocessing.Pool(workers, initializer=_worker_init, initargs=(scenario, master_seed)) as pool:
        return pool.map(_worker_trial, range(trials), chunksize=chunksize)


# -- trial log serialisation -------------------------------------------


def format_trial_row(record: TrialRecord) -> str:
    flips = ";".join(f"{w}:{b}" for w, b in record.flips)
    victims = ";".join(record.victims_hit)
    detected = ";".join(f"{name}={int(hit)}" for name, hit in record.detected)
    return ",".join(
        (
            str(record.trial_index),
            str(record.seed),
            record.bitstream_name,
            record.outcome.value,
            f"{record.far_intended:08x}",
            f"{record.far_stored:08x}",
            flips,
            victims,
            str(record.flt_sig),
            str(int(record.dos)),
            str(record.exposure_ns),
            detected,
            record.waster_kind,
        )
    )


def render_trial_log(records: Iterable[TrialRecord]) -> str:
    lines = [TRIAL_LOG_HEADER]
    lines.extend(format_trial_row(r) for r in records)
    return "\n".join(lines) + "\n"


def write_trial_log(records: Iterable[TrialRecord], path: str | Path) -> None:
    Path(path).write_text(render_trial_log(records))


def parse_trial_row(line: str) -> TrialRecord:
    parts = line.rstrip("\n").split(",")
    if len(parts) != len(TRIAL_LOG_FIELDS):
        raise ValueError(f"expected {len(TRIAL_LOG_FIELDS)} columns, got {len(parts)}")
    flips = tuple(
        (int(w), int(b)) for w, b in (pair.split(":") for pair in parts[6].split(";") if pair)
    )
    victims = tuple(v for v in parts[7].split(";") if v)
    detected = tuple(
        (name, value == "1")
        for name, value in (entry.split("=") for entry in parts[11].split(";") if entry)
    )
    return TrialRecord(
        trial_index=int(parts[0]),
        seed=int(parts[1]),
        bitstream_name=parts[2],
        outcome=OutcomeClass(parts[3]),
        far_intended=int(parts[4], 16),
        far_stored=int(parts[5], 16),
        flips=flips,
        victims_hit=victims,
        flt_sig=int(parts[8]),
        dos=parts[9] == "1",
        exposure_ns=int(parts[10]),
        detected=detected,
        waster_kind=parts[12],
    )


def read_trial_log(path: str | Path) -> list[TrialRecord]:
    """Load a trial log, rejecting anything with the wrong schema."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != TRIAL_LOG_HEADER:
        raise ValueError(f"trial log schema mismatch: expected header {TRIAL_LOG_HEADER!r}")
    try:
        return [parse_trial_row(line) for line in lines[1:]]
    except (ValueError, KeyError) as exc:
        raise ValueError(f"trial log schema mismatch: {exc}") from exc


# -- aggregation --------------------------------------------------------


@dataclass(frozen=True)
class Summary:
    """Plot-ready aggregate of one campaign."""

    trials: int
    outcome_counts: dict[str, int]
    outcome_rates: dict[str, float]
    misroute_rate: float
    cluster1_fails: dict[int, int]
    cluster2_fails: dict[int, int]
    flt_sig_hist: dict[int, int]
    detection_counts: dict[str, int]
    detection_rates: dict[str, float]
    exposure_mean: float
    exposure_min: int
    exposure_max: int


def summarize(records: Sequence[TrialRecord]) -> Summary:
    """Aggregate counts, rates and histograms over a record sequence."""
    if not records:
        raise ValueError("cannot summarize an empty record sequence")
    n = len(records)
    outcome_counts = {outcome.value: 0 for outcome in OutcomeClass}
    cluster1: dict[int, int] = {}
    cluster2: dict[int, int] = {}
    flt_hist: dict[int, int] = {}
    det_counts: dict[str, int] = {}
    exposure_total = 0
    exposure_min = records[0].exposure_ns
    exposure_max = records[0].exposure_ns
    for record in records:
        outcome_counts[record.outcome.value] += 1
        field1 = record.flt_sig & 0x3FF
        field2 = (record.flt_sig >> 10) & 0x3FF
        cluster1[field1] = cluster1.get(field1, 0) + 1
        cluster2[field2] = cluster2.get(field2, 0) + 1
        flt_hist[record.flt_sig] = flt_hist.get(record.flt_sig, 0) + 1
        for name, hit in record.detected:
            det_counts[name] = det_counts.get(name, 0) + int(hit)
        exposure_total += record.exposure_ns
        exposure_min = min(exposure_min, record.exposure_ns)
        exposure_max = max(exposure_max, record.exposure_ns)
    detector_names = [name for name, _ in records[0].detected]
    return Summary(
        trials=n,
        outcome_counts=outcome_counts,
        outcome_rates={k: v / n for k, v in outcome_counts.items()},
        misroute_rate=outcome_counts[OutcomeClass.MISROUTE.value] / n,
        cluster1_fails=dict(sorted(cluster1.items())),
        cluster2_fails=dict(sorted(cluster2.items())),
        flt_sig_hist=dict(sorted(flt_hist.items())),
        detection_counts={name: det_counts.get(name, 0) for name in detector_names},
        detection_rates={name: det_counts.get(name, 0) / n for name in detector_names},
        exposure_mean=exposure_total / n,
        exposure_min=exposure_min,
        exposure_max=exposure_max,
    )
