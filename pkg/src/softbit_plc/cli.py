"""Command-line entry point: ``softbit-plc <command> ...``."""

import argparse
import csv
import logging
import sys

from . import channel, fec, harness
from .conceal import conceal_stream
from .config import load_stream_config
from .errors import SoftbitError
from .frame import parse_stream, serialize_stream
from .interleave import FirstFramePolicy, process_stream

log = logging.getLogger("softbit_plc")

REPORT_COLUMNS = ("total", "lost", "recovered_exact", "concealed_repetition", "unrecovered")


def _read_stream(path, config):
    with open(path, "rb") as f:
        return parse_stream(f.read(), config)


def _write_stream(path, frames, config):
    with open(path, "wb") as f:
        f.write(serialize_stream(frames, config))


def _write_report(path, report):
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=REPORT_COLUMNS)
        w.writeheader()
        w.writerow(report.as_row())


def cmd_embed(args):
    config = load_stream_config(args.config)
    frames = _read_stream(args.input, config)
    out = process_stream(frames, FirstFramePolicy(args.first_frame), config)
    _write_stream(args.output, out, config)
    log.info("embedded %d frames", len(out))


def _receive(args, decode):
    config = load_stream_config(args.config)
    frames = _read_stream(args.input, config)
    pattern = channel.read_pattern(args.loss)
    out, report = decode(channel.apply_channel(frames, pattern), config)
    _write_stream(args.output, out, config)
    if args.report:
        _write_report(args.report, report)
    log.info("%s", report.as_row())


def cmd_conceal(args):
    _receive(args, conceal_stream)


def cmd_fec_encode(args):
    config = load_stream_config(args.config)
    frames = _read_stream(args.input, config)
    out = fec.fec_encode(frames)
    _write_stream(args.output, out, config)
    log.info("%s", fec.overhead(len(frames)))


def cmd_fec_decode(args):
    _receive(args, fec.fec_decode)


def cmd_simulate(args):
    if args.persistence:
        qs = [float(q) for q in args.persistence.split(",")]
        if args.flr is not None:
            params = channel.egm_params_for_flr(args.flr, qs)
        else:
            params = channel.EGMParams(args.p_gb, qs)
    elif args.flr is not None:
        params = channel.params_for_flr(args.flr, args.p_bb)
    else:
        params = channel.GilbertParams(args.p_gb, args.p_bb)
    pattern = channel.simulate(args.frames, params, args.seed)
    pattern = channel.LossPattern(pattern.flags, args.seed, params, args.flr)
    channel.write_pattern(pattern, args.output)
    log.info("flr=%.4f", channel.pattern_stats(pattern).flr)


def cmd_sweep(args):
    config = harness.SweepConfig.from_file(args.config) if args.config else harness.SweepConfig()
    if args.jobs:
        config = harness.SweepConfig(**{**config.__dict__, "jobs": args.jobs})
    rows = harness.run_sweep(config, export_dir=args.export_dir)
    harness.write_rows(rows, args.out)
    n_data = len(harness.load_reference(config))
    summary = harness.summarize(rows, n_data)
    harness.write_summary(summary, args.summary or args.out + ".summary.dat")
    for rec in summary:
        log.info("%-11s flr=%.2f residual=%.4f±%.4f overhead=%d",
                 rec["method"], rec["flr_target"], rec["residual_mean"],
                 rec["residual_std"], rec["overhead_frames"])


def build_parser():
    p = argparse.ArgumentParser(prog="softbit-plc", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("embed", help="piggyback each frame's predecessor")
    s.add_argument("--config")
    s.add_argument("--first-frame", choices=[x.value for x in FirstFramePolicy],
                   default=FirstFramePolicy.SELF_EMBED.value)
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_embed)

    for name, func, text in (
        ("conceal", cmd_conceal, "recover/conceal losses in a received stream"),
        ("fec-decode", cmd_fec_decode, "recover losses in a parity-FEC stream"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config")
        s.add_argument("--loss", required=True, help="loss pattern file")
        s.add_argument("--report", help="CSV report path")
        s.add_argument("input")
        s.add_argument("output")
        s.set_defaults(func=func)

    s = sub.add_parser("fec-encode", help="append one XOR parity frame per 4 frames")
    s.add_argument("--config")
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_fec_encode)

    s = sub.add_parser("simulate", help="write a loss pattern file")
    s.add_argument("--frames", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--flr", type=float, help="target loss rate (derives p_gb)")
    s.add_argument("--p-gb", type=float, default=0.0)
    s.add_argument("--p-bb", type=float, default=0.5)
    s.add_argument("--persistence", help="comma list of EGM persistence values")
    s.add_argument("output")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="run the FLR sweep")
    s.add_argument("--config")
    s.add_argument("--out", required=True, help="CSV output path")
    s.add_argument("--summary", help="summary table path (default <out>.summary.dat)")
    s.add_argument("--export-dir")
    s.add_argument("--jobs", type=int)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        args.func(args)
    except (SoftbitError, OSError) as exc:
        print(f"softbit-plc: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
