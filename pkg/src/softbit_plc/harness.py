"""
Loss-rate sweep comparing piggyback recovery, XOR parity FEC and plain
repetition on the same reference stream.

Every (method, FLR, run) cell draws a loss pattern, pushes the stream
through the method end to end and diffs the result against the
pre-channel reference bit by bit. Seeds are ``base_seed + run * SEED_STRIDE``
so all methods and FLR points of one run share random draws.
"""

import csv
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, field, fields

import numpy as np

from . import fec
from .channel import (
    SEED_STRIDE,
    GilbertParams,
    apply_channel,
    egm_params_for_flr,
    params_for_flr,
    pattern_stats,
    simulate,
)
from .conceal import conceal_stream
from .config import parse_list, read_kv, stream_config_from
from .errors import ConfigMismatch, LengthMismatch, NotCanonical
from .frame import (
    Form,
    Frame,
    StreamConfig,
    default_header,
    parse_stream,
    serialize_stream,
    stream_bits,
)
from .interleave import FirstFramePolicy, process_stream

METHODS = ("piggyback", "fec_parity", "repetition")
DEFAULT_FLR_POINTS = tuple(round(0.02 * i, 2) for i in range(11))


@dataclass(frozen=True)
class SweepConfig:
    flr_points: tuple = DEFAULT_FLR_POINTS
    runs_per_point: int = 10
    base_seed: int = 0
    model: str = "gilbert"
    p_bb: float = 0.5
    state_persistence: tuple = ()
    methods: tuple = METHODS
    stream_source: str = "synthetic"
    synthetic_frames: int = 400
    synthetic_seed: int = 1
    first_frame: FirstFramePolicy = FirstFramePolicy.SELF_EMBED
    stream: StreamConfig = field(default_factory=StreamConfig)
    jobs: int = 1

    def __post_init__(self):
        if not self.flr_points:
            raise ConfigMismatch("flr_points is empty")
        for flr in self.flr_points:
            if not 0.0 <= flr < 1.0:
                raise ConfigMismatch(f"FLR point {flr} outside [0, 1)")
        if self.runs_per_point < 1:
            raise ConfigMismatch("runs_per_point must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ConfigMismatch(f"unknown methods {sorted(unknown)}")
        if self.model not in ("gilbert", "egm"):
            raise ConfigMismatch(f"unknown channel model {self.model!r}")
        if self.model == "egm" and not self.state_persistence:
            raise ConfigMismatch("egm model needs state_persistence")
        if self.synthetic_frames < 1:
            raise ConfigMismatch("synthetic_frames must be >= 1")

    def channel_params(self, flr):
        if self.model == "egm":
            return egm_params_for_flr(flr, self.state_persistence)
        return params_for_flr(flr, self.p_bb)

    @classmethod
    def from_dict(cls, values: dict) -> "SweepConfig":
        kw = {}
        try:
            if "flr_points" in values:
                kw["flr_points"] = parse_list(values["flr_points"], float)
            for key in ("runs_per_point", "base_seed", "synthetic_frames",
                        "synthetic_seed", "jobs"):
                if key in values:
                    kw[key] = int(values[key])
            if "p_bb" in values:
                kw["p_bb"] = float(values["p_bb"])
            if "state_persistence" in values:
                kw["state_persistence"] = parse_list(values["state_persistence"], float)
            for key in ("model", "stream_source"):
                if key in values:
                    kw[key] = values[key].strip()
            if "methods" in values:
                kw["methods"] = parse_list(values["methods"])
            if "first_frame" in values:
                kw["first_frame"] = FirstFramePolicy(values["first_frame"].strip())
        except ValueError as exc:
            raise ConfigMismatch(str(exc)) from exc
        kw["stream"] = stream_config_from(values)
        return cls(**kw)

    @classmethod
    def from_file(cls, path) -> "SweepConfig":
        return cls.from_dict(read_kv(path))


@dataclass(frozen=True)
class SweepRow:
    method: str
    flr_target: float
    flr_empirical: float
    run_index: int
    seed: int
    lost: int
    recovered_exact: int
    concealed_repetition: int
    unrecovered: int
    residual_flr: float
    overhead_frames: int
    payload_bit_error_rate: float


SWEEP_COLUMNS = tuple(f.name for f in fields(SweepRow))


@dataclass(frozen=True)
class StreamDiff:
    frames_differing: int
    payload_bit_error_rate: float
    per_frame_flags: np.ndarray


def generate_synthetic_stream(n: int, seed=0, config: StreamConfig = StreamConfig()) -> list:
    """Random payload bits, canonical softbits, constant header."""
    if n <= 0:
        raise ValueError(f"frame count must be positive, got {n}")
    bits = np.random.default_rng(seed).integers(
        0, 2, size=(n, config.payload_words), dtype=np.uint8
    )
    header = default_header(config)
    return [Frame.from_bits(header, row) for row in bits]


def diff_streams(reference, actual) -> StreamDiff:
    if len(reference) != len(actual):
        raise LengthMismatch(f"{len(reference)} reference frames vs {len(actual)}")
    if not reference:
        return StreamDiff(0, 0.0, np.zeros(0, dtype=bool))
    ref = stream_bits(reference)
    act = stream_bits(actual)
    if ref.shape != act.shape:
        raise LengthMismatch(f"payload shape {ref.shape} vs {act.shape}")
    errors = ref != act
    flags = errors.any(axis=1)
    return StreamDiff(int(flags.sum()), float(errors.mean()), flags)


def export_for_scoring(frames, path, config: StreamConfig = StreamConfig()) -> int:
    """Write a canonical stream as a softbit file for an external decoder.

    Returns the number of bytes written.
    """
    for i, f in enumerate(frames):
        if f.form is not Form.CANONICAL:
            raise NotCanonical(f"frame {i} is {f.form.value}")
    data = serialize_stream(frames, config)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def load_reference(config: SweepConfig) -> list:
    if config.stream_source == "synthetic":
        return generate_synthetic_stream(
            config.synthetic_frames, config.synthetic_seed, config.stream
        )
    with open(config.stream_source, "rb") as fh:
        frames = parse_stream(fh.read(), config.stream)
    for i, f in enumerate(frames):
        if f.form is not Form.CANONICAL:
            raise NotCanonical(f"reference frame {i} is {f.form.value}")
    return frames


def stream_size(frames) -> int:
    return sum(len(f) for f in frames)


def run_method(method, reference, pattern_seed, params, config: SweepConfig,
               prepared=None):
    """Run one method over one loss pattern; returns ``(output, report, pattern)``."""
    prepared = prepared or prepare(reference, config)
    if method == "piggyback":
        sent = prepared["piggyback"]
        # zero-overhead claim, checked on every run
        if stream_size(sent) != stream_size(reference):
            raise AssertionError("piggyback changed the stream size")
        pattern = simulate(len(sent), params, pattern_seed)
        out, report = conceal_stream(apply_channel(sent, pattern), config.stream)
    elif method == "repetition":
        pattern = simulate(len(reference), params, pattern_seed)
        out, report = conceal_stream(apply_channel(reference, pattern), config.stream)
    elif method == "fec_parity":
        sent = prepared["fec_parity"]
        pattern = simulate(len(sent), params, pattern_seed)
        out, report = fec.fec_decode(apply_channel(sent, pattern), config.stream)
    else:
        raise ConfigMismatch(f"unknown method {method!r}")
    return out, report, pattern


def prepare(reference, config: SweepConfig) -> dict:
    prepared = {}
    if "piggyback" in config.methods:
        prepared["piggyback"] = process_stream(reference, config.first_frame, config.stream)
    if "fec_parity" in config.methods:
        prepared["fec_parity"] = fec.fec_encode(reference)
    return prepared


def residual_flr(report) -> float:
    """Fraction of data frames not reproduced bit-exactly."""
    data_lost = report.lost - report.parity_lost
    return (data_lost - report.recovered_exact) / report.total


def _run_cell(method, flr, run_index, reference, prepared, config):
    seed = config.base_seed + run_index * SEED_STRIDE
    params = config.channel_params(flr)
    out, report, pattern = run_method(method, reference, seed, params, config, prepared)
    diff = diff_streams(reference, out)
    sent = len(prepared.get(method, reference))
    row = SweepRow(
        method=method,
        flr_target=flr,
        flr_empirical=pattern_stats(pattern).flr,
        run_index=run_index,
        seed=seed,
        lost=report.lost,
        recovered_exact=report.recovered_exact,
        concealed_repetition=report.concealed_repetition,
        unrecovered=report.unrecovered,
        residual_flr=residual_flr(report),
        overhead_frames=sent - len(reference),
        payload_bit_error_rate=diff.payload_bit_error_rate,
    )
    return row, out


def _cell(cell, reference, prepared, config, export_dir):
    row, out = _run_cell(*cell, reference, prepared, config)
    if export_dir:
        export_for_scoring(out, export_path(export_dir, row), config.stream)
    return row


# per-process context for pool workers
_WORKER = {}


def _init_worker(*context):
    _WORKER["context"] = context


def _worker_cell(cell):
    return _cell(cell, *_WORKER["context"])


def export_path(export_dir, row: SweepRow) -> str:
    name = f"{row.method}_flr{row.flr_target:.2f}_run{row.run_index:02d}.cod"
    return os.path.join(export_dir, name)


def run_sweep(config: SweepConfig, export_dir=None) -> list:
    reference = load_reference(config)
    prepared = prepare(reference, config)
    if export_dir:
        os.makedirs(export_dir, exist_ok=True)
        export_for_scoring(reference, os.path.join(export_dir, "reference.cod"),
                           config.stream)
    cells = [
        (method, flr, run)
        for method in config.methods
        for flr in config.flr_points
        for run in range(config.runs_per_point)
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(
            config.jobs, initializer=_init_worker,
            initargs=(reference, prepared, config, export_dir),
        ) as pool:
            rows = list(pool.map(_worker_cell, cells, chunksize=4))
    else:
        rows = [_cell(c, reference, prepared, config, export_dir) for c in cells]
    return sorted(rows, key=lambda r: (r.method, r.flr_target, r.run_index))


def write_rows(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow(astuple(row))


def read_rows(path) -> list:
    casts = {f.name: f.type for f in fields(SweepRow)}
    with open(path, newline="") as fh:
        return [
            SweepRow(**{k: casts[k](v) for k, v in rec.items()})
            for rec in csv.DictReader(fh)
        ]


def _mean_std(values):
    values = list(values)
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def summarize(rows, n_data=None) -> list:
    """Mean and sample stddev per (method, FLR point)."""
    groups = {}
    for row in rows:
        groups.setdefault((row.method, row.flr_target), []).append(row)
    summary = []
    for (method, flr), group in sorted(groups.items()):
        res_m, res_s = _mean_std(r.residual_flr for r in group)
        ber_m, ber_s = _mean_std(r.payload_bit_error_rate for r in group)
        emp_m, _ = _mean_std(r.flr_empirical for r in group)
        extra = group[0].overhead_frames
        if n_data:
            of_data = extra / n_data
            of_sent = extra / (n_data + extra)
        else:
            of_data = of_sent = 0.0
        summary.append({
            "method": method,
            "flr_target": flr,
            "runs": len(group),
            "flr_empirical": emp_m,
            "residual_mean": res_m,
            "residual_std": res_s,
            "ber_mean": ber_m,
            "ber_std": ber_s,
            "overhead_frames": extra,
            "overhead_of_data": of_data,
            "overhead_of_sent": of_sent,
        })
    return summary


def write_summary(summary, path) -> None:
    """Whitespace-separated table, one block per method (gnuplot ``index``)."""
    cols = list(summary[0]) if summary else []
    with open(path, "w") as fh:
        fh.write("# " + " ".join(cols) + "\n")
        previous = None
        for rec in summary:
            if previous is not None and rec["method"] != previous:
                fh.write("\n\n")
            previous = rec["method"]
            fh.write(" ".join(
                f"{v:.6f}" if isinstance(v, float) else str(v) for v in rec.values()
            ) + "\n")


def theoretical_residual(method, params) -> float:
    """Large-n residual FLR under a 2-state Gilbert channel.

    A piggybacked loss stays unrecovered iff the next frame is lost too,
    which happens with probability p_bb once the chain is in Bad.
    """
    if not isinstance(params, GilbertParams):
        raise ConfigMismatch("closed form only for the 2-state model")
    if method == "piggyback":
        return params.loss_rate * params.p_bb
    if method == "repetition":
        return params.loss_rate
    raise ConfigMismatch(f"no closed form for {method!r}")
