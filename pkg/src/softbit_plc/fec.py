"""
XOR parity FEC baseline.

One parity frame follows every group of four data frames. Parity is the
XOR of the group's payload bits, re-encoded as canonical softbits, so every
transmitted frame stays format-valid. A trailing group of 1-3 data frames
gets its own parity over just those frames. Group boundaries are positional:
an encoded stream of N frames holds N // 5 full groups and, if N % 5 is
2..4, one tail group of N % 5 - 1 data frames.
"""

from dataclasses import dataclass

import numpy as np

from .conceal import Outcome, RecoveryReport, check_sequence, fill_gaps, normalize
from .errors import EmptyStream, LayoutMismatch, NotCanonical
from .frame import Form, Frame, pack_payload

GROUP_DATA = 4
GROUP_SIZE = GROUP_DATA + 1


@dataclass(frozen=True)
class ParityGroup:
    data: tuple
    parity: np.ndarray
    group_index: int


def parity_bits(bit_vectors) -> np.ndarray:
    return np.bitwise_xor.reduce(np.stack(list(bit_vectors)), axis=0)


def make_group(frames, group_index=0) -> ParityGroup:
    data = tuple(pack_payload(f) for f in frames)
    return ParityGroup(data, parity_bits(data), group_index)


def encoded_length(n: int) -> int:
    return n + -(-n // GROUP_DATA)


def data_length(n_encoded: int) -> int:
    full, rest = divmod(n_encoded, GROUP_SIZE)
    if rest == 1:
        raise LayoutMismatch(
            f"{n_encoded} encoded frames leave a parity-only tail group"
        )
    return full * GROUP_DATA + max(rest - 1, 0)


def overhead(n: int) -> dict:
    """Parity overhead for ``n`` data frames, relative to data and to total sent."""
    sent = encoded_length(n)
    extra = sent - n
    return {
        "data_frames": n,
        "sent_frames": sent,
        "overhead_frames": extra,
        "overhead_of_data": extra / n if n else 0.0,
        "overhead_of_sent": extra / sent if sent else 0.0,
    }


def group_slices(n_encoded: int):
    """Yield ``(data_start, data_stop, parity_index)`` per group of the encoded layout."""
    data_length(n_encoded)
    for start in range(0, n_encoded, GROUP_SIZE):
        stop = min(start + GROUP_SIZE, n_encoded)
        yield start, stop - 1, stop - 1


def fec_encode(frames) -> list:
    frames = list(frames)
    if not frames:
        raise EmptyStream("cannot FEC-encode an empty stream")
    out = []
    for g, start in enumerate(range(0, len(frames), GROUP_DATA)):
        data = frames[start:start + GROUP_DATA]
        for f in data:
            if f.form is not Form.CANONICAL:
                raise NotCanonical(f"data frame is {f.form.value}")
        group = make_group(data, g)
        out.extend(data)
        out.append(Frame.from_bits(data[-1].header, group.parity))
    return out


def fec_decode(slots, config=None):
    """Recover single data losses per group; returns ``(data_frames, report)``.

    The report counts every lost slot, parity included; ``parity_lost``
    says how many of them carried parity. Lost parity is counted as
    unrecovered even though the data it protects may be intact.
    """
    slots = list(slots)
    check_sequence(slots)
    if config is not None:
        for s in slots:
            if not s.lost:
                config.check(s.frame)
    n_data = data_length(len(slots))
    out = []
    outcomes = []
    report = RecoveryReport(total=n_data)

    for start, stop, p in group_slices(len(slots)):
        data_slots = slots[start:stop]
        parity_slot = slots[p]
        lost = [i for i, s in enumerate(data_slots) if s.lost]
        report.lost += len(lost)
        if parity_slot.lost:
            report.lost += 1
            report.parity_lost += 1
            report.unrecovered += 1
        group_out = [s.frame for s in data_slots]
        group_outcomes = [Outcome.RECEIVED] * len(data_slots)
        if len(lost) == 1 and not parity_slot.lost:
            k = lost[0]
            bits = parity_bits(
                [pack_payload(parity_slot.frame)]
                + [pack_payload(s.frame) for s in data_slots if not s.lost]
            )
            group_out[k] = Frame.from_bits(parity_slot.frame.header, bits)
            group_outcomes[k] = Outcome.RECOVERED
            report.recovered_exact += 1
        else:
            for k in lost:
                group_outcomes[k] = Outcome.UNRECOVERED
            report.unrecovered += len(lost)
        out.extend(group_out)
        outcomes.extend(group_outcomes)

    # per-burst accounting over the transmitted slot sequence
    recovered_slot = set()
    idx = 0
    for start, stop, p in group_slices(len(slots)):
        for j in range(start, stop):
            if outcomes[idx] is Outcome.RECOVERED:
                recovered_slot.add(j)
            idx += 1
    run = []
    for j, s in enumerate(slots + [None]):
        if s is not None and s.lost:
            run.append(j)
            continue
        if run:
            report.burst_counts[len(run)] += 1
            report.per_burst[len(run)] += sum(1 for r in run if r in recovered_slot)
            run = []

    fill_gaps(out, config)
    out = [normalize(f) for f in out]
    report.outcomes = outcomes
    report.check()
    return out, report

