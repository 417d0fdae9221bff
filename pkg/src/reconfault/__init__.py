"""Deterministic simulator for address-manipulation fault attacks on the
FPGA partial-reconfiguration path.

The pieces compose bottom-up: a bit-exact bitstream codec whose CRC covers
data frames only, a fabric of addressable regions with golden/live state, a
reconfiguration manager that loads words through a corruption hook, an
attacker model turning ring-oscillator grid parameters into timed bit
flips, functional victim models (adder clusters, AES pairs) with a
fault-localisation register, and a seeded Monte Carlo campaign engine with
CSV logging and reporting.
"""

from .bitstream import (
    BitstreamFormatError,
    BitstreamImage,
    BuildSpec,
    FrameAddress,
    build_bitstream,
    compute_crc,
    crc32_mpeg2,
    pack_far,
    parse_bitstream,
    read_fbit,
    select_window,
    unpack_far,
    write_fbit,
)
from .fabric import AddressOutOfRange, Fabric, Placement, PlacementIndex, WriteReport
from .manager import ReconfigManager, RmOutcome, RmState, StatusRegister, crc_check
from .attacker import (
    ActivationPlan,
    PowerWasterConfig,
    WasterKind,
    bit_flip_probability,
    inject,
    plan_activation,
)
from .victims import (
    AdderScenario,
    AesScenario,
    FltSig,
    aes_encrypt_reference,
    evaluate_adders,
    evaluate_aes,
    priority_encode,
)
from .campaign import (
    DetectorModel,
    OutcomeClass,
    Summary,
    TrialRecord,
    classify_outcome,
    read_trial_log,
    run_campaign,
    run_trial,
    summarize,
    write_trial_log,
)
from .scenario import ConfigError, ScenarioConfig, default_scenario, load_scenario, parse_scenario

__version__ = "0.1.0"
