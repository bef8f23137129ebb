import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softbit_plc.channel import LossPattern, apply_channel
from softbit_plc.conceal import (
    Outcome,
    ReceivedSlot,
    conceal_stream,
    detect_form,
    normalize,
    recover_previous,
)
from softbit_plc.errors import NotEmbedded, SequenceGap
from softbit_plc.frame import Form, Frame, SoftbitWord, encode_bit
from softbit_plc.interleave import FirstFramePolicy, embed, process_stream

from conftest import SMALL, random_frame, random_stream

HEADER = bytes(6)


def test_normalize_example():
    f = Frame.from_words(HEADER, [(0x81, 0x7F), (0x81, 0x81), (0x7F, 0x7F)])
    assert normalize(f).payload == ((0x81, 0xFF), (0x81, 0xFF), (0x7F, 0x00))
    assert normalize(f).form is Form.CANONICAL


def test_normalize_idempotent(rng):
    e = embed(random_frame(rng), random_frame(rng))
    assert normalize(normalize(e)) == normalize(e)


def test_normalize_unknown_frame():
    f = Frame.from_words(HEADER, [(0x7F, 0x55), (0x81, 0x81)])
    assert f.form is Form.UNKNOWN
    assert normalize(f).payload == ((0x7F, 0x00), (0x81, 0xFF))


def test_recover_previous_example():
    f = Frame.from_words(HEADER, [(0x81, 0x7F), (0x81, 0x81), (0x7F, 0x7F)])
    assert recover_previous(f).payload == ((0x7F, 0x00), (0x81, 0xFF), (0x7F, 0x00))
    assert recover_previous(f).header == HEADER


def test_recover_previous_rejects_canonical(rng):
    with pytest.raises(NotEmbedded):
        recover_previous(random_frame(rng))


def test_detect_form():
    canon = Frame.from_words(HEADER, [encode_bit(b) for b in (1, 0, 0, 1)])
    assert detect_form(canon) is Form.CANONICAL
    assert detect_form(embed(canon, canon)) is Form.EMBEDDED
    words = list(canon.payload)
    words[2] = SoftbitWord(words[2].hi, 0x55)
    assert detect_form(Frame.from_words(HEADER, words)) is Form.UNKNOWN


def slots_for(frames, flags):
    return apply_channel(frames, LossPattern(flags))


def test_no_losses(rng):
    s = random_stream(rng, 10)
    out, report = conceal_stream(slots_for(process_stream(s), "R" * 10))
    assert out == s
    assert report.lost == 0 and report.total == 10


def test_single_loss_recovered(rng):
    s = random_stream(rng, 3)
    out, report = conceal_stream(slots_for(process_stream(s), "RLR"))
    assert out == s
    assert (report.recovered_exact, report.unrecovered) == (1, 0)
    assert report.outcomes[1] is Outcome.RECOVERED


def test_burst_recovers_only_last(rng):
    s = random_stream(rng, 5)
    out, report = conceal_stream(slots_for(process_stream(s), "RLLLR"))
    assert (report.recovered_exact, report.unrecovered) == (1, 2)
    assert out[3] == s[3]
    # mid-burst frames repeat the last frame emitted before the burst
    assert out[1] == out[2] == s[0]
    assert report.burst_counts == {3: 1}
    assert report.per_burst == {3: 1}


def test_loss_at_end_unrecovered(rng):
    s = random_stream(rng, 4)
    out, report = conceal_stream(slots_for(process_stream(s), "RRLL"))
    assert (report.recovered_exact, report.unrecovered) == (0, 2)
    assert out[2] == out[3] == s[1]


def test_leading_loss_repeats_first_received(rng):
    s = random_stream(rng, 4)
    out, report = conceal_stream(slots_for(process_stream(s), "LLRR"))
    assert out[1] == s[1]
    assert out[0] == s[1]
    assert report.unrecovered == 1


def test_all_lost_gives_silence(rng):
    s = random_stream(rng, 3, SMALL)
    out, report = conceal_stream(slots_for(process_stream(s), "LLL"), SMALL)
    assert report.unrecovered == 3
    assert len(out) == 3 and all(f.form is Form.CANONICAL for f in out)


def test_pass_through_first_frame_recovery(rng):
    s = random_stream(rng, 3)
    sent = process_stream(s, FirstFramePolicy.PASS_THROUGH)
    assert sent[0].form is Form.CANONICAL
    out, report = conceal_stream(slots_for(sent, "LRR"))
    assert out == s and report.recovered_exact == 1


def test_sequence_gap(rng):
    f = random_frame(rng)
    with pytest.raises(SequenceGap):
        conceal_stream([ReceivedSlot(0, f), ReceivedSlot(2, f)])


def test_canonical_stream_repetition(rng):
    s = random_stream(rng, 5)
    out, report = conceal_stream(slots_for(s, "RLLRR"))
    assert report.concealed_repetition == 1 and report.unrecovered == 1
    assert out[2] == s[3]
    assert out[1] == s[0]


def test_corrupt_frame_is_counted_not_recovered(rng):
    s = random_stream(rng, 3)
    sent = process_stream(s)
    bad = Frame(sent[2].header, sent[2].hi, b"\x55" + sent[2].lo[1:])
    out, report = conceal_stream(slots_for(sent[:2] + [bad], "RLR"))
    assert report.corrupt == 1
    assert report.concealed_repetition == 1
    assert out[2] == s[2]


def expected_outcomes(flags):
    """Independent oracle: the last loss of a run is recoverable iff a frame follows."""
    want = []
    for i, f in enumerate(flags):
        if f == "R":
            want.append(Outcome.RECEIVED)
        elif i + 1 < len(flags) and flags[i + 1] == "R":
            want.append(Outcome.RECOVERED)
        else:
            want.append(Outcome.UNRECOVERED)
    return want


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.text("RL", min_size=1, max_size=40))
def test_isolated_and_burst_law(seed, flags):
    s = random_stream(np.random.default_rng(seed), len(flags), SMALL)
    out, report = conceal_stream(slots_for(process_stream(s), flags), SMALL)
    assert report.outcomes == expected_outcomes(flags)
    for frame, ref, outcome in zip(out, s, report.outcomes):
        if outcome is not Outcome.UNRECOVERED:
            assert frame == ref
    assert report.lost == report.recovered_exact + report.concealed_repetition + report.unrecovered


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.text("RL", min_size=1, max_size=40))
def test_compatibility_mode(seed, flags):
    s = random_stream(np.random.default_rng(seed), len(flags), SMALL)
    out, report = conceal_stream(slots_for(s, flags), SMALL)
    assert report.recovered_exact == 0
    assert report.concealed_repetition + report.unrecovered == flags.count("L")
    for i, flag in enumerate(flags):
        if flag == "R":
            assert out[i] == s[i]
        elif "R" in flags:
            # every concealed frame is a copy of some received frame
            assert out[i] in [s[j] for j, g in enumerate(flags) if g == "R"]


def test_per_burst_histogram():
    flags = "RLRLLRLLLRL"
    rng = np.random.default_rng(0)
    s = random_stream(rng, len(flags), SMALL)
    _, report = conceal_stream(slots_for(process_stream(s), flags))
    assert report.burst_counts == {1: 2, 2: 1, 3: 1}
    assert report.per_burst == {1: 1, 2: 1, 3: 1}
