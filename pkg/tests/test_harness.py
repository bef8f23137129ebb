import csv
import itertools
import math

import numpy as np
import pytest

from softbit_plc.channel import GilbertParams, params_for_flr
from softbit_plc.config import parse_kv
from softbit_plc.errors import ConfigMismatch, LengthMismatch, NotCanonical
from softbit_plc.frame import parse_stream
from softbit_plc.harness import (
    SWEEP_COLUMNS,
    SweepConfig,
    diff_streams,
    export_for_scoring,
    generate_synthetic_stream,
    read_rows,
    residual_flr,
    run_method,
    run_sweep,
    summarize,
    theoretical_residual,
    write_rows,
    write_summary,
)
from softbit_plc.interleave import embed

SMALL_SWEEP = SweepConfig(flr_points=(0.0, 0.1, 0.2), runs_per_point=3, synthetic_frames=400)


def test_synthetic_stream_deterministic():
    a = generate_synthetic_stream(400, 5)
    assert a == generate_synthetic_stream(400, 5)
    assert a != generate_synthetic_stream(400, 6)
    # 400 frames of 20 ms = 8 s
    assert len(a) * 20 == 8000


def test_synthetic_bit_frequency():
    n = 400 * 132
    hi = np.frombuffer(b"".join(f.hi for f in generate_synthetic_stream(400, 1)), np.uint8)
    freq = float((hi == 0x7F).mean())
    assert abs(freq - 0.5) < 3 * math.sqrt(0.25 / n)


def test_diff_streams():
    s = generate_synthetic_stream(10, 1)
    assert diff_streams(s, s).frames_differing == 0
    rep = s[:4] + [s[3]] + s[5:]
    d = diff_streams(s, rep)
    assert d.frames_differing == 1
    assert d.per_frame_flags.tolist() == [i == 4 for i in range(10)]
    with pytest.raises(LengthMismatch):
        diff_streams(s, s[:3])


def test_export_roundtrip(tmp_path):
    s = generate_synthetic_stream(25, 2)
    path = tmp_path / "x.cod"
    assert export_for_scoring(s, path) == 25 * 270
    assert parse_stream(path.read_bytes()) == s
    with pytest.raises(NotCanonical):
        export_for_scoring([embed(s[0], s[1])], tmp_path / "y.cod")


def test_zero_loss_rows():
    rows = run_sweep(SweepConfig(flr_points=(0.0,), runs_per_point=2))
    assert len(rows) == 6
    for r in rows:
        assert r.residual_flr == 0 and r.payload_bit_error_rate == 0


def test_sweep_rows_and_invariants():
    rows = run_sweep(SMALL_SWEEP)
    assert len(rows) == 3 * 3 * 3
    assert rows == sorted(rows, key=lambda r: (r.method, r.flr_target, r.run_index))
    by = {(r.method, r.flr_target, r.run_index): r for r in rows}
    for r in rows:
        if r.method == "fec_parity":
            assert r.overhead_frames == 100
        else:
            assert r.overhead_frames == 0
        if r.method == "piggyback":
            rep = by[("repetition", r.flr_target, r.run_index)]
            # same seed, same pattern length: piggyback never does worse
            assert r.lost == rep.lost
            assert r.residual_flr <= rep.residual_flr
            assert r.residual_flr == r.unrecovered / 400
    assert {r.seed for r in rows if r.run_index == 1} == {SMALL_SWEEP.base_seed + 1_000_003}


def test_recovered_frames_never_differ():
    config = SweepConfig(methods=("piggyback",))
    reference = generate_synthetic_stream(300, 4)
    out, report, _ = run_method("piggyback", reference, 8, params_for_flr(0.2, 0.5), config)
    d = diff_streams(reference, out)
    assert d.frames_differing <= report.unrecovered
    for flag, outcome in zip(d.per_frame_flags, report.outcomes):
        if outcome.value in ("received", "recovered"):
            assert not flag


def test_sweep_deterministic_csv(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_rows(run_sweep(SMALL_SWEEP), a)
    write_rows(run_sweep(SMALL_SWEEP), b)
    assert a.read_bytes() == b.read_bytes()
    with open(a) as fh:
        assert tuple(next(csv.reader(fh))) == SWEEP_COLUMNS
    assert read_rows(a) == run_sweep(SMALL_SWEEP)


def test_parallel_sweep_matches_serial():
    serial = run_sweep(SMALL_SWEEP)
    parallel = run_sweep(SweepConfig(**{**SMALL_SWEEP.__dict__, "jobs": 2}))
    assert serial == parallel


def test_export_dir(tmp_path):
    config = SweepConfig(flr_points=(0.1,), runs_per_point=1, synthetic_frames=40)
    run_sweep(config, export_dir=tmp_path)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == [
        "fec_parity_flr0.10_run00.cod",
        "piggyback_flr0.10_run00.cod",
        "reference.cod",
        "repetition_flr0.10_run00.cod",
    ]
    assert all(p.stat().st_size == 40 * 270 for p in tmp_path.iterdir())


def test_summary(tmp_path):
    rows = run_sweep(SMALL_SWEEP)
    summary = summarize(rows, 400)
    assert len(summary) == 9
    fec = [s for s in summary if s["method"] == "fec_parity"][0]
    assert fec["overhead_of_data"] == pytest.approx(0.25)
    assert fec["overhead_of_sent"] == pytest.approx(0.20)
    write_summary(summary, tmp_path / "s.dat")
    lines = (tmp_path / "s.dat").read_text().splitlines()
    assert lines[0].startswith("# method flr_target")


def test_sweep_config_from_text():
    values = parse_kv(
        "flr_points = 0.0, 0.05\nruns_per_point = 2\nmethods = piggyback\n"
        "p_bb = 0.3  # burstiness\nfirst_frame = pass\npayload_words = 16\n"
    )
    c = SweepConfig.from_dict(values)
    assert c.flr_points == (0.0, 0.05)
    assert c.methods == ("piggyback",)
    assert c.stream.payload_words == 16
    assert c.p_bb == 0.3
    with pytest.raises(ConfigMismatch):
        SweepConfig.from_dict({"methods": "bogus"})
    with pytest.raises(ConfigMismatch):
        SweepConfig.from_dict({"runs_per_point": "0"})


def test_egm_sweep_runs():
    config = SweepConfig(flr_points=(0.1,), runs_per_point=1, model="egm",
                         state_persistence=(0.6, 0.3), synthetic_frames=2000)
    rows = run_sweep(config)
    assert all(abs(r.flr_empirical - 0.1) < 0.05 for r in rows)


def bernoulli_group_residual(eps):
    """Exact enumeration over the 2^5 loss configurations of one group.

    Returns mean and variance of the number of unrecovered data frames.
    """
    mean = second = 0.0
    for combo in itertools.product((0, 1), repeat=5):
        p = math.prod(eps if x else 1 - eps for x in combo)
        data_lost = sum(combo[:4])
        bad = 0 if (data_lost == 1 and not combo[4]) else data_lost
        mean += p * bad
        second += p * bad * bad
    return mean, second - mean * mean


@pytest.mark.parametrize("eps", [0.05, 0.2])
def test_fec_bernoulli_matches_enumeration(eps):
    n = 100_000
    config = SweepConfig(methods=("fec_parity",))
    reference = generate_synthetic_stream(n, 3)
    # p_gb == p_bb makes the chain memoryless
    _, report, _ = run_method("fec_parity", reference, 17, GilbertParams(eps, eps), config)
    mean, var = bernoulli_group_residual(eps)
    groups = n // 4
    expected = mean / 4
    sigma = math.sqrt(var * groups) / n
    assert abs(residual_flr(report) - expected) < 3 * sigma


def test_theoretical_residual():
    p = params_for_flr(0.2, 0.5)
    assert theoretical_residual("piggyback", p) == pytest.approx(0.1)
    assert theoretical_residual("repetition", p) == pytest.approx(0.2)
