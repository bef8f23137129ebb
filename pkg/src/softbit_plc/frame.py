"""
Softbit serial frame format.

Every payload bit of a coded frame occupies one 16-bit word written
high byte first. The high byte carries the bit (0x7F for 1, 0x81 for 0);
the low byte is redundant in a stock stream (0x00 for 1, 0xFF for 0):

    bit 1  ->  7F 00
    bit 0  ->  81 FF

A frame is a fixed number of opaque header words followed by a fixed
number of payload words. Frames keep the high and low bytes of the
payload as two separate ``bytes`` objects so that whole-frame operations
reduce to ``bytes.translate`` calls.
"""

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigMismatch, InvalidSoftbit, LengthMismatch, TruncatedStream

HI_ONE = 0x7F
HI_ZERO = 0x81
LO_ONE = 0x00
LO_ZERO = 0xFF

SOFTBIT_ALPHABET = bytes((HI_ONE, HI_ZERO))

# hi byte -> canonical lo byte; bytes outside the alphabet map to themselves
# and are rejected before the table is used.
_CANONICAL_LO = bytearray(range(256))
_CANONICAL_LO[HI_ONE] = LO_ONE
_CANONICAL_LO[HI_ZERO] = LO_ZERO
_CANONICAL_LO = bytes(_CANONICAL_LO)

# hi byte -> bit value
_HI_TO_BIT = bytearray(256)
_HI_TO_BIT[HI_ONE] = 1
_HI_TO_BIT[HI_ZERO] = 0
_HI_TO_BIT = bytes(_HI_TO_BIT)

# bit value (0/1) -> hi byte
_BIT_TO_HI = bytes((HI_ZERO, HI_ONE)) + bytes(254)


class Form(enum.Enum):
    CANONICAL = "canonical"
    EMBEDDED = "embedded"
    UNKNOWN = "unknown"


class SoftbitWord(NamedTuple):
    hi: int
    lo: int


def encode_bit(bit) -> SoftbitWord:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return SoftbitWord(HI_ONE, LO_ONE) if bit else SoftbitWord(HI_ZERO, LO_ZERO)


def decode_word(word, index=None) -> int:
    """Return the bit carried by ``word``; the low byte is ignored."""
    hi = word[0]
    if hi == HI_ONE:
        return 1
    if hi == HI_ZERO:
        return 0
    raise InvalidSoftbit(f"hi byte 0x{hi:02X} is not a softbit", word_index=index)


def canonical_lo(hi: int) -> int:
    if hi == HI_ONE:
        return LO_ONE
    if hi == HI_ZERO:
        return LO_ZERO
    raise InvalidSoftbit(f"hi byte 0x{hi:02X} is not a softbit")


def canonical_lo_bytes(hi: bytes) -> bytes:
    """Vectorised :func:`canonical_lo`; ``hi`` must already be validated."""
    return hi.translate(_CANONICAL_LO)


def find_invalid(data: bytes):
    """Index of the first byte of ``data`` outside the softbit alphabet, or None."""
    if not data.translate(None, SOFTBIT_ALPHABET):
        return None
    for i, b in enumerate(data):
        if b != HI_ONE and b != HI_ZERO:
            return i
    return None  # pragma: no cover


def classify(hi: bytes, lo: bytes) -> Form:
    if lo == hi.translate(_CANONICAL_LO):
        return Form.CANONICAL
    if not lo.translate(None, SOFTBIT_ALPHABET):
        return Form.EMBEDDED
    return Form.UNKNOWN


@dataclass(frozen=True)
class StreamConfig:
    header_words: int = 3
    payload_words: int = 132
    frame_duration_ms: float = 20

    def __post_init__(self):
        if self.header_words < 0:
            raise ConfigMismatch("header_words must be >= 0")
        if self.payload_words <= 0:
            raise ConfigMismatch("payload_words must be > 0")
        if self.frame_duration_ms <= 0:
            raise ConfigMismatch("frame_duration_ms must be > 0")

    @property
    def header_bytes(self) -> int:
        return 2 * self.header_words

    @property
    def frame_bytes(self) -> int:
        return 2 * (self.header_words + self.payload_words)

    def check(self, frame: "Frame") -> None:
        if len(frame.header) != self.header_bytes:
            raise ConfigMismatch(
                f"header is {len(frame.header)} bytes, config expects {self.header_bytes}"
            )
        if len(frame.hi) != self.payload_words:
            raise ConfigMismatch(
                f"payload has {len(frame.hi)} words, config expects {self.payload_words}"
            )


@dataclass(frozen=True)
class Frame:
    """One softbit frame: opaque header plus payload hi/lo byte planes.

    ``form`` is derived from the byte planes on construction. Any hi byte
    outside {0x7F, 0x81} raises :class:`InvalidSoftbit`.
    """

    header: bytes
    hi: bytes
    lo: bytes
    form: Form = field(init=False, compare=False)

    def __post_init__(self):
        for name in ("header", "hi", "lo"):
            value = getattr(self, name)
            if not isinstance(value, bytes):
                object.__setattr__(self, name, bytes(value))
        if len(self.hi) != len(self.lo):
            raise LengthMismatch(
                f"hi plane has {len(self.hi)} bytes, lo plane {len(self.lo)}"
            )
        bad = find_invalid(self.hi)
        if bad is not None:
            raise InvalidSoftbit(
                f"hi byte 0x{self.hi[bad]:02X} is not a softbit", word_index=bad
            )
        object.__setattr__(self, "form", classify(self.hi, self.lo))

    @classmethod
    def _trusted(cls, header: bytes, hi: bytes, lo: bytes, form: Form) -> "Frame":
        # for byte planes derived from already-validated frames
        frame = object.__new__(cls)
        setattr_ = object.__setattr__
        setattr_(frame, "header", header)
        setattr_(frame, "hi", hi)
        setattr_(frame, "lo", lo)
        setattr_(frame, "form", form)
        return frame

    @classmethod
    def from_words(cls, header, words: Sequence) -> "Frame":
        return cls(header, bytes(w[0] for w in words), bytes(w[1] for w in words))

    @classmethod
    def from_bits(cls, header, bits) -> "Frame":
        hi = bytes(np.asarray(bits, dtype=np.uint8)).translate(_BIT_TO_HI)
        return cls(header, hi, hi.translate(_CANONICAL_LO))

    @property
    def payload(self) -> tuple:
        return tuple(SoftbitWord(h, l) for h, l in zip(self.hi, self.lo))

    @property
    def words(self) -> int:
        return len(self.hi)

    def to_bytes(self) -> bytes:
        body = bytearray(2 * len(self.hi))
        body[0::2] = self.hi
        body[1::2] = self.lo
        return self.header + bytes(body)

    def __len__(self):
        return len(self.header) + 2 * len(self.hi)


def parse_stream(data: bytes, config: StreamConfig = StreamConfig()) -> list:
    """Split a softbit byte stream into frames at fixed offsets."""
    data = bytes(data)
    size = config.frame_bytes
    if not data or len(data) % size:
        raise TruncatedStream(
            f"stream length {len(data)} is not a positive multiple of {size}"
        )
    hb = config.header_bytes
    frames = []
    for index, start in enumerate(range(0, len(data), size)):
        raw = data[start:start + size]
        try:
            frames.append(Frame(raw[:hb], raw[hb::2], raw[hb + 1::2]))
        except InvalidSoftbit as exc:
            raise InvalidSoftbit(
                "invalid payload word", frame_index=index, word_index=exc.word_index
            ) from None
    return frames


def serialize_stream(frames, config: StreamConfig = StreamConfig()) -> bytes:
    out = bytearray()
    for frame in frames:
        config.check(frame)
        out += frame.to_bytes()
    return bytes(out)


def pack_payload(frame: Frame) -> np.ndarray:
    """Payload bits of ``frame`` as a uint8 array of 0/1 values (hi bytes only)."""
    return np.frombuffer(frame.hi.translate(_HI_TO_BIT), dtype=np.uint8)


def unpack_payload(bits, header, config: StreamConfig = StreamConfig()) -> Frame:
    bits = np.asarray(bits)
    if bits.ndim != 1 or len(bits) != config.payload_words:
        raise LengthMismatch(
            f"expected {config.payload_words} bits, got shape {bits.shape}"
        )
    if np.any((bits != 0) & (bits != 1)):
        raise InvalidSoftbit("bit vector holds values other than 0/1")
    if len(header) != config.header_bytes:
        raise ConfigMismatch(
            f"header is {len(header)} bytes, config expects {config.header_bytes}"
        )
    return Frame.from_bits(header, bits)


def default_header(config: StreamConfig = StreamConfig()) -> bytes:
    """Constant header used for generated streams: a 0x6B21 sync word, then zeros."""
    if config.header_words == 0:
        return b""
    return b"\x6b\x21" + bytes(config.header_bytes - 2)


def stream_bits(frames) -> np.ndarray:
    """Stack payload bits of a stream into an (n_frames, payload_words) array."""
    if not frames:
        return np.zeros((0, 0), dtype=np.uint8)
    hi = b"".join(f.hi for f in frames)
    return np.frombuffer(hi.translate(_HI_TO_BIT), dtype=np.uint8).reshape(
        len(frames), -1
    )
