"""Zero-overhead piggyback frame loss concealment for softbit speech streams."""

from .channel import (
    EGMParams,
    GilbertParams,
    LossPattern,
    apply_channel,
    params_for_flr,
    pattern_stats,
    simulate,
)
from .conceal import (
    ReceivedSlot,
    RecoveryReport,
    conceal_stream,
    detect_form,
    normalize,
    recover_previous,
)
from .errors import *  # noqa: F401,F403
from .fec import fec_decode, fec_encode
from .frame import (
    Form,
    Frame,
    SoftbitWord,
    StreamConfig,
    canonical_lo,
    decode_word,
    encode_bit,
    pack_payload,
    parse_stream,
    serialize_stream,
    unpack_payload,
)
from .interleave import FirstFramePolicy, embed, process_stream

__version__ = "0.1.0"
