"""
Receiver side: normalisation, recovery of a lost previous frame, and
repetition fallback.

The receiver runs one frame behind the channel. When slot N arrives and
slot N-1 was lost, the low bytes of frame N are the high bytes of the lost
frame and rebuild it exactly. Frames from a stock coder carry canonical
low bytes instead; the loss is then covered by repeating frame N.
"""

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .errors import NotEmbedded, SequenceGap
from .frame import Form, Frame, StreamConfig, canonical_lo_bytes, default_header


@dataclass(frozen=True)
class ReceivedSlot:
    seq: int
    frame: Optional[Frame] = None

    @property
    def lost(self) -> bool:
        return self.frame is None


class Outcome(enum.Enum):
    RECEIVED = "received"
    RECOVERED = "recovered"
    REPEATED = "repeated"
    UNRECOVERED = "unrecovered"


@dataclass
class RecoveryReport:
    total: int = 0
    lost: int = 0
    recovered_exact: int = 0
    concealed_repetition: int = 0
    unrecovered: int = 0
    # received frames whose low bytes were neither canonical nor embedded
    corrupt: int = 0
    # lost slots that carried FEC parity rather than speech
    parity_lost: int = 0
    # maximal loss-run length -> number of runs / frames recovered exactly
    burst_counts: Counter = field(default_factory=Counter)
    per_burst: Counter = field(default_factory=Counter)
    outcomes: list = field(default_factory=list, repr=False)

    def check(self):
        assert self.lost == self.recovered_exact + self.concealed_repetition + self.unrecovered
        assert min(self.total, self.lost, self.recovered_exact,
                   self.concealed_repetition, self.unrecovered) >= 0

    def as_row(self) -> dict:
        return {
            "total": self.total,
            "lost": self.lost,
            "recovered_exact": self.recovered_exact,
            "concealed_repetition": self.concealed_repetition,
            "unrecovered": self.unrecovered,
        }


def detect_form(frame: Frame) -> Form:
    return frame.form


def normalize(frame: Frame) -> Frame:
    """Restore canonical low bytes so a stock decoder accepts the frame."""
    if frame.form is Form.CANONICAL:
        return frame
    return Frame._trusted(frame.header, frame.hi, canonical_lo_bytes(frame.hi),
                          Form.CANONICAL)


def recover_previous(curr: Frame) -> Frame:
    """Rebuild the frame piggybacked in ``curr``'s low bytes.

    The lost frame's header is not transmitted; ``curr``'s header is reused.
    """
    if curr.form is not Form.EMBEDDED:
        raise NotEmbedded(f"frame is {curr.form.value}, cannot recover previous")
    return Frame._trusted(curr.header, curr.lo, canonical_lo_bytes(curr.lo),
                          Form.CANONICAL)


def silence_frame(config: StreamConfig) -> Frame:
    """All-zero-bits frame used only when nothing was ever received."""
    return Frame.from_bits(default_header(config), [0] * config.payload_words)


def check_sequence(slots):
    for i in range(1, len(slots)):
        if slots[i].seq != slots[i - 1].seq + 1:
            raise SequenceGap(
                f"slot {i} has seq {slots[i].seq}, expected {slots[i - 1].seq + 1}"
            )


def fill_gaps(out, config=None):
    """Replace remaining ``None`` entries by repeating the nearest earlier frame.

    A leading gap repeats the first available frame instead; an all-empty
    output is filled with silence frames.
    """
    last = None
    for i, frame in enumerate(out):
        if frame is not None:
            last = frame
        elif last is not None:
            out[i] = last
    if out and out[0] is None:
        first = next((f for f in out if f is not None), None)
        if first is None:
            first = silence_frame(config or StreamConfig())
        for i, frame in enumerate(out):
            if frame is not None:
                break
            out[i] = first
    return out


def conceal_stream(slots, config: StreamConfig = None):
    """Conceal channel losses in a received stream.

    Returns ``(frames, report)`` with one canonical frame per slot.
    """
    slots = list(slots)
    check_sequence(slots)
    n = len(slots)
    out = [None] * n
    outcomes = [Outcome.UNRECOVERED] * n
    report = RecoveryReport(total=n)
    run_start = None

    for i, slot in enumerate(slots):
        if slot.lost:
            report.lost += 1
            if run_start is None:
                run_start = i
            continue
        frame = slot.frame
        if config is not None:
            config.check(frame)
        if frame.form is Form.UNKNOWN:
            report.corrupt += 1
        out[i] = normalize(frame)
        outcomes[i] = Outcome.RECEIVED
        if run_start is None:
            continue

        length = i - run_start
        if frame.form is Form.EMBEDDED:
            out[i - 1] = recover_previous(frame)
            outcomes[i - 1] = Outcome.RECOVERED
            report.recovered_exact += 1
            report.per_burst[length] += 1
        else:
            out[i - 1] = out[i]
            outcomes[i - 1] = Outcome.REPEATED
            report.concealed_repetition += 1
            report.per_burst[length] += 0
        report.unrecovered += length - 1
        report.burst_counts[length] += 1
        run_start = None

    if run_start is not None:
        length = n - run_start
        report.unrecovered += length
        report.burst_counts[length] += 1
        report.per_burst[length] += 0

    # unrecovered slots are still None here
    fill_gaps(out, config)
    report.outcomes = outcomes
    report.check()
    return out, report
