"""Command-line front end: enhance, pitch, eval, design.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 config.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
import warnings
from pathlib import Path

from . import evalkit
from .config import ConfigError, RunConfig, load_config
from .filterbank import FilterbankSpec, design_filterbank, format_coeff_table
from .periodicity import PeriodGrid
from .pipeline import Enhancer, FrameResult
from .wavio import WavError, WavReader, WavWriter, read_wav

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_CONFIG = 0, 1, 2, 3

PESQ_NOTE = "PESQ not computed (licensed ITU-T P.862 implementation not bundled)"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat 'key = value' config file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")


def _config_from_args(args) -> RunConfig:
    pairs = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        pairs[key.strip()] = value.strip()
    if getattr(args, "no_comb", False):
        pairs["comb_enabled"] = "false"
    if args.config is not None and not args.config.is_file():
        raise ConfigError(f"config file not found: {args.config}")
    return load_config(args.config, **pairs)


class _CsvDump:
    def __init__(self, path: Path | None, header):
        self._fh = open(path, "w", newline="") if path else None
        self._w = csv.writer(self._fh) if self._fh else None
        if self._w:
            self._w.writerow(header)

    def row(self, values) -> None:
        if self._w:
            self._w.writerow(values)

    def close(self) -> None:
        if self._fh:
            self._fh.close()


def _design(cfg: RunConfig):
    try:
        spec = FilterbankSpec(cfg.fc1, cfg.erb_step, cfg.num_filters, cfg.n_gd, cfg.fs)
        return design_filterbank(spec)
    except ValueError as exc:
        raise ConfigError(f"filterbank design failed: {exc}") from exc


def _run_pipeline(args, cfg: RunConfig, on_decision=None, writer: WavWriter | None = None):
    _design(cfg)
    reader = WavReader(args.input, cfg.fs)
    grid = PeriodGrid.from_rates(cfg.fs, cfg.f0_min, cfg.f0_max, cfg.frame_len)
    pd_dump = _CsvDump(getattr(args, "dump_pd", None), ["frame"] + [f"p{p}" for p in grid.lags])
    nd_dump = _CsvDump(getattr(args, "dump_noise", None),
                       ["frame"] + [f"k{k + 1}" for k in range(cfg.num_filters)])

    def on_frame(r: FrameResult) -> None:
        pd_dump.row([r.frame.index] + [f"{v:.6g}" for v in r.pmap.pd.mean(axis=0)])
        nd_dump.row([r.frame.index] + [f"{v:.6g}" for v in r.noise_energy])
        if on_decision is not None:
            on_decision(r.decision)

    enh = Enhancer(cfg, on_frame)
    t0 = time.perf_counter()
    try:
        for chunk in reader.chunks(args.chunk):
            y = enh.process(chunk)
            if writer is not None:
                writer.write(y)
        y = enh.flush()
        if writer is not None:
            writer.write(y)
    finally:
        pd_dump.close()
        nd_dump.close()
    elapsed = time.perf_counter() - t0
    return enh, reader, elapsed


def _report(enh: Enhancer, reader: WavReader, elapsed: float) -> None:
    pct = 100.0 * enh.periodic_frames / enh.frames if enh.frames else 0.0
    rtf = elapsed / reader.duration if reader.duration else float("nan")
    print(f"frames processed: {enh.frames}")
    print(f"periodic frames: {pct:.1f}%")
    print(f"realtime factor: {rtf:.3f} (processing time / audio duration)")


def cmd_enhance(args) -> int:
    cfg = _config_from_args(args)
    writer = WavWriter(args.output, cfg.fs)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            enh, reader, elapsed = _run_pipeline(args, cfg, writer=writer)
            writer.close()
    except BaseException:
        writer.discard()
        raise
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _report(enh, reader, elapsed)
    return EXIT_OK


def cmd_pitch(args) -> int:
    cfg = _config_from_args(args)
    with open(args.output, "w") as fh:
        def emit(d):
            f0 = cfg.fs / d.p0_hat if d.periodic else 0.0
            fh.write(f"{d.index}\t{d.index * cfg.hop / cfg.fs:.6f}\t{f0:.4f}\n")

        enh, reader, elapsed = _run_pipeline(args, cfg, on_decision=emit)
    _report(enh, reader, elapsed)
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    if args.processed is None and args.detected is None:
        raise UsageError("eval needs --processed and/or --detected")
    if (args.detected is None) != (args.reference is None):
        raise UsageError("--detected and --reference go together")
    if args.processed is not None and args.clean is None:
        raise UsageError("--processed needs --clean")
    record: dict = {
        "file": str(args.processed or args.detected),
        "ovl_snr_in_db": None,
        "ovl_snr_out_db": None,
        "p0_error_rate_pct": None,
        "misses": None,
        "false_alarms": None,
        "deviations": None,
    }
    delay = cfg.n_gd if args.delay is None else args.delay
    if args.processed is not None:
        clean = read_wav(args.clean, cfg.fs)
        processed = read_wav(args.processed, cfg.fs)
        y = evalkit.align(processed, delay, clean.size)
        record["ovl_snr_out_db"] = round(evalkit.overall_snr(clean=clean, processed=y), 4)
        if args.noisy is not None:
            noisy = read_wav(args.noisy, cfg.fs)
            if noisy.size != clean.size:
                raise ValueError("noisy and clean lengths differ")
            record["ovl_snr_in_db"] = round(evalkit.overall_snr(clean=clean, processed=noisy), 4)
    if args.detected is not None:
        rep = evalkit.p0_error_rate(detected=evalkit.read_pitch_tsv(args.detected),
                                    reference=evalkit.read_pitch_tsv(args.reference))
        record.update(p0_error_rate_pct=round(rep.rate, 4), misses=rep.misses,
                      false_alarms=rep.false_alarms, deviations=rep.deviations)
    record["overrides"] = cfg.overrides()
    record["pesq"] = None
    record["pesq_note"] = PESQ_NOTE
    line = json.dumps(record)
    if args.out is not None:
        with open(args.out, "a") as fh:
            fh.write(line + "\n")
    print(line)
    return EXIT_OK


def cmd_design(args) -> int:
    cfg = _config_from_args(args)
    sys.stdout.write(format_coeff_table(_design(cfg)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdenhance", description="Periodicity-based online speech enhancement.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enhance", help="enhance a mono WAV file")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--no-comb", action="store_true", help="disable the comb post-filter")
    p.add_argument("--chunk", type=int, default=4096, help="samples per processing block")
    p.add_argument("--dump-pd", type=Path, help="CSV of subband-averaged PD per frame")
    p.add_argument("--dump-noise", type=Path, help="CSV of estimated noise energy per frame")
    _add_config_args(p)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("pitch", help="write the per-frame F0 track as TSV")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--chunk", type=int, default=4096)
    p.add_argument("--dump-pd", type=Path)
    _add_config_args(p)
    p.set_defaults(func=cmd_pitch)

    p = sub.add_parser("eval", help="overall SNR and P0 error rate as a JSON-lines record")
    p.add_argument("--clean", type=Path)
    p.add_argument("--processed", type=Path, help="enhancer output (delayed by --delay)")
    p.add_argument("--noisy", type=Path, help="unprocessed input, for the input SNR")
    p.add_argument("--detected", type=Path, help="detected pitch TSV")
    p.add_argument("--reference", type=Path, help="reference pitch TSV")
    p.add_argument("--delay", type=int, help="samples to advance --processed (default n_gd)")
    p.add_argument("--out", type=Path, help="append the record to this JSON-lines file")
    _add_config_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("design", help="print the filterbank coefficient table")
    _add_config_args(p)
    p.set_defaults(func=cmd_design)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "chunk", 1) < 1:
        print("pdenhance: error: --chunk must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pdenhance: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"pdenhance: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (WavError, OSError) as exc:
        print(f"pdenhance: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # metric preconditions: length mismatch, empty tracks, bad audio
        print(f"pdenhance: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
