"""Command-line surface: gen, inspect, run, campaign, report.

Exit status: 0 success, 1 usage error, 2 configuration or parse error,
3 I/O error.  Output files are written atomically; a nonzero exit never
leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .bitstream import (
    BitstreamFormatError,
    build_bitstream,
    compute_crc,
    parse_bitstream,
    read_fbit,
)
from .campaign import (
    format_trial_row,
    read_trial_log,
    render_trial_log,
    run_campaign,
    run_trial,
    summarize,
    TRIAL_LOG_FIELDS,
)
from .report import format_summary
from .scenario import ConfigError, ScenarioConfig, default_scenario, load_scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _hex_word(text: str) -> int:
    value = int(text, 16)
    if not 0 <= value <= 0xFFFFFFFF:
        raise ValueError(text)
    return value


def _workers(text: str) -> int:
    if text == "auto":
        return os.cpu_count() or 1
    value = int(text)
    if value < 1:
        raise ValueError(text)
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reconfault", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write the scenario's bitstream to a .fbit file")
    gen.add_argument("--scenario", help="scenario INI path (built-in default when omitted)")
    gen.add_argument("--out", required=True, help="output .fbit path")

    inspect = sub.add_parser("inspect", help="dump the structure of a .fbit file")
    inspect.add_argument("file", help=".fbit path")
    inspect.add_argument("--frame-words", type=int, default=4, help="words per frame for frame counting")

    run = sub.add_parser("run", help="run a single attack trial")
    run.add_argument("--scenario", help="scenario INI path (built-in default when omitted)")
    run.add_argument("--seed", type=int, default=0, help="master seed")
    run.add_argument("--trial", type=int, default=0, help="trial index")
    run.add_argument("--force-far", type=_hex_word, default=None, metavar="HEX",
                     help="deterministically rewrite the select address word to this value")

    camp = sub.add_parser("campaign", help="run a Monte Carlo campaign, write the trial log CSV")
    camp.add_argument("--scenario", help="scenario INI path (built-in default when omitted)")
    camp.add_argument("--trials", type=int, required=True, help="number of attempts")
    camp.add_argument("--seed", type=int, default=0, help="master seed")
    camp.add_argument("--out", required=True, help="output CSV path")
    camp.add_argument("--workers", type=_workers, default=1, help="worker processes, or 'auto'")

    rep = sub.add_parser("report", help="aggregate a trial log into summary tables")
    rep.add_argument("csv", help="trial log CSV path")
    rep.add_argument("--format", choices=("csv", "md"), default="md", help="table format")
    rep.add_argument("--out", default=None, help="write tables here instead of stdout")
    rep.add_argument("--figures", default=None, metavar="DIR",
                     help="also render summary figures (PNG) into this directory")

    return parser


def _load_scenario_arg(path: str | None) -> ScenarioConfig:
    if path is None:
        return default_scenario()
    return load_scenario(path)


def _write_atomic(path: str, data: str) -> None:
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    try:
        tmp.write_text(data)
        os.replace(tmp, target)
    except OSError:
        tmp.unlink(missing_ok=True)
        raise


def _cmd_gen(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    image = build_bitstream(scenario.build_spec(scenario.bitstream_names[0]), scenario.frame_words)
    data = b"".join(w.to_bytes(4, "big") for w in image.words)
    target = Path(args.out)
    tmp = target.with_name(target.name + ".tmp")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, target)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(image.words)} words to {args.out}")
    return EXIT_OK


def _cmd_inspect(args) -> int:
    try:
        words = read_fbit(args.file)
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_IO
    except BitstreamFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        image = parse_bitstream(words)
    except BitstreamFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    far = image.far
    computed = compute_crc(image.payload_words)
    n_payload = image.payload_word_count
    frames = f"{n_payload // args.frame_words} frames of {args.frame_words}" if args.frame_words > 0 and n_payload % args.frame_words == 0 else "not whole frames"
    print(f"file:           {args.file}")
    print(f"words:          {len(image.words)}")
    print(f"header span:    [{image.header_span[0]}, {image.header_span[1]}]")
    print(f"select window:  [{image.far_marker_index}, {image.far_index}]")
    print(f"far word:       0x{image.far_word:08x} (prr {far.prr_id}, frame {far.frame_offset})")
    print(f"data span:      [{image.data_span[0]}, {image.data_span[1]}] ({n_payload} payload words, {frames})")
    print(f"stored crc:     0x{image.stored_crc:08x}")
    print(f"computed crc:   0x{computed:08x}")
    print("CRC: match" if computed == image.stored_crc else "CRC: MISMATCH")
    return EXIT_OK


def _cmd_run(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    record = run_trial(scenario, args.seed, args.trial, force_far=args.force_far)
    row = format_trial_row(record).split(",")
    for name, value in zip(TRIAL_LOG_FIELDS, row):
        print(f"{name}: {value}")
    return EXIT_OK


def _cmd_campaign(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    scenario = _load_scenario_arg(args.scenario)
    records = run_campaign(scenario, args.seed, args.trials, workers=args.workers)
    try:
        _write_atomic(args.out, render_trial_log(records))
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(records)} trials to {args.out}")
    return EXIT_OK


def _cmd_report(args) -> int:
    try:
        records = read_trial_log(args.csv)
    except OSError as exc:
        print(f"error: cannot read {args.csv}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not records:
        print("error: trial log has no rows", file=sys.stderr)
        return EXIT_CONFIG
    summary = summarize(records)
    text = format_summary(summary, args.format)
    if args.figures is not None:
        from .plots import render_summary_figures

        try:
            files = render_summary_figures(summary, args.figures)
        except OSError as exc:
            print(f"error: cannot render figures into {args.figures}: {exc}", file=sys.stderr)
            return EXIT_IO
        for path in files:
            print(f"figure: {path}", file=sys.stderr)
    if args.out is not None:
        try:
            _write_atomic(args.out, text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "inspect": _cmd_inspect,
    "run": _cmd_run,
    "campaign": _cmd_campaign,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, BitstreamFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
