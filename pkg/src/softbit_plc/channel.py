"""
Burst-loss channel models.

Both models are Markov chains over a Good state and one or more Bad
states. The walk starts in Good and takes one transition per frame
*before* that frame's flag is read, so frame 0 can already be lost. Each
step consumes exactly one uniform draw ``u`` from ``numpy.random.default_rng
(seed)``; a transition with probability ``p`` fires iff ``u < p``. With this
rule an m-state EGM whose persistence values are all equal to ``p_bb``
yields the same pattern as the 2-state Gilbert model for the same seed.

EGM states: Good, then Bad_1 .. Bad_m where Bad_i means "i-th consecutive
loss". From Bad_i the burst is extended with probability
``persistence[i-1]``; Bad_m extends into itself.
"""

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidParams, LengthMismatch

RECEIVED = "R"
LOST = "L"

# seed of run r in a sweep = base_seed + r * SEED_STRIDE
SEED_STRIDE = 1_000_003


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise InvalidParams(f"{name}={value} is not a probability")


@dataclass(frozen=True)
class GilbertParams:
    p_gb: float
    p_bb: float

    def __post_init__(self):
        _check_prob("p_gb", self.p_gb)
        _check_prob("p_bb", self.p_bb)

    @property
    def loss_rate(self) -> float:
        """Stationary probability of the Bad state."""
        denom = self.p_gb + 1.0 - self.p_bb
        if denom == 0:
            raise InvalidParams("p_gb=0 and p_bb=1: stationary loss rate undefined")
        return self.p_gb / denom

    @property
    def mean_burst(self) -> float:
        return 1.0 / (1.0 - self.p_bb) if self.p_bb < 1 else float("inf")

    def persistence(self, k: int) -> float:
        return self.p_bb

    def describe(self) -> str:
        return f"p_gb:{self.p_gb!r},p_bb:{self.p_bb!r}"


@dataclass(frozen=True)
class EGMParams:
    p_gb: float
    state_persistence: tuple

    def __post_init__(self):
        object.__setattr__(self, "state_persistence", tuple(float(q) for q in self.state_persistence))
        _check_prob("p_gb", self.p_gb)
        if not self.state_persistence:
            raise InvalidParams("EGM needs m >= 1 persistence values")
        for i, q in enumerate(self.state_persistence):
            _check_prob(f"state_persistence[{i}]", q)

    @property
    def m(self) -> int:
        return len(self.state_persistence)

    def persistence(self, k: int) -> float:
        """Probability that a burst of length ``k`` (k >= 1) grows to ``k + 1``."""
        return self.state_persistence[min(k, self.m) - 1]

    @property
    def mean_burst(self) -> float:
        # sum over k >= 1 of P(len >= k); the tail past m is geometric in q_m
        survive = 1.0
        total = 0.0
        for k in range(1, self.m + 1):
            total += survive
            survive *= self.persistence(k)
        q_m = self.state_persistence[-1]
        if survive > 0 and q_m >= 1:
            return float("inf")
        return total + survive / (1.0 - q_m) if survive > 0 else total

    @property
    def loss_rate(self) -> float:
        mean = self.mean_burst
        if self.p_gb == 0:
            if mean == float("inf"):
                raise InvalidParams("stationary loss rate undefined")
            return 0.0
        if mean == float("inf"):
            return 1.0
        return self.p_gb * mean / (1.0 + self.p_gb * mean)

    def burst_pmf(self, k: int) -> float:
        """P(burst length == k)."""
        p = 1.0
        for i in range(1, k):
            p *= self.persistence(i)
        return p * (1.0 - self.persistence(k))

    def describe(self) -> str:
        qs = "/".join(repr(q) for q in self.state_persistence)
        return f"p_gb:{self.p_gb!r},persistence:{qs}"


ChannelParams = Union[GilbertParams, EGMParams]


def model_name(params) -> str:
    return "egm" if isinstance(params, EGMParams) else "gilbert"


@dataclass(frozen=True)
class LossPattern:
    flags: str
    seed: Optional[int] = None
    params: Optional[ChannelParams] = None
    target_flr: Optional[float] = None

    def __post_init__(self):
        bad = set(self.flags) - {RECEIVED, LOST}
        if bad:
            raise InvalidParams(f"loss pattern holds characters {sorted(bad)}")

    def __len__(self):
        return len(self.flags)

    @property
    def lost(self) -> np.ndarray:
        return np.frombuffer(self.flags.encode("ascii"), dtype=np.uint8) == ord(LOST)

    @classmethod
    def from_lost(cls, lost, **kw) -> "LossPattern":
        return cls("".join(LOST if x else RECEIVED for x in lost), **kw)


def simulate(n: int, params: ChannelParams, seed=None) -> LossPattern:
    if n <= 0:
        raise InvalidParams(f"frame count must be positive, got {n}")
    draws = np.random.default_rng(seed).random(n).tolist()
    flags = bytearray(n)
    p_gb = params.p_gb
    if isinstance(params, GilbertParams):
        p_bb = params.p_bb
        bad = False
        for i, u in enumerate(draws):
            bad = u < p_bb if bad else u < p_gb
            flags[i] = bad
    else:
        qs = params.state_persistence
        m = params.m
        run = 0
        for i, u in enumerate(draws):
            if run:
                run = min(run + 1, m) if u < qs[run - 1] else 0
            else:
                run = 1 if u < p_gb else 0
            flags[i] = run > 0
    text = bytes(flags).translate(bytes.maketrans(b"\x00\x01", b"RL")).decode("ascii")
    return LossPattern(text, seed=seed, params=params)


def path_probability(flags: str, params: ChannelParams) -> float:
    """Exact probability that :func:`simulate` emits ``flags`` (from the Good start)."""
    p = 1.0
    run = 0
    for flag in flags:
        lost = flag == LOST
        if run == 0:
            step = params.p_gb
        else:
            step = params.persistence(run)
        p *= step if lost else 1.0 - step
        run = run + 1 if lost else 0
        if isinstance(params, EGMParams):
            run = min(run, params.m)
    return p


def all_patterns(n: int):
    for combo in itertools.product((RECEIVED, LOST), repeat=n):
        yield "".join(combo)


def params_for_flr(target_flr: float, p_bb: float) -> GilbertParams:
    """2-state parameters whose stationary loss rate equals ``target_flr``."""
    if not 0.0 <= target_flr < 1.0:
        raise InvalidParams(f"target FLR {target_flr} outside [0, 1)")
    if not 0.0 <= p_bb < 1.0:
        raise InvalidParams(f"p_bb {p_bb} outside [0, 1)")
    p_gb = target_flr * (1.0 - p_bb) / (1.0 - target_flr)
    if p_gb > 1.0:
        raise InvalidParams(
            f"no p_gb in [0, 1] reaches FLR {target_flr} with p_bb={p_bb}"
        )
    return GilbertParams(p_gb, p_bb)


def egm_params_for_flr(target_flr: float, state_persistence: Sequence[float]) -> EGMParams:
    """EGM parameters with the given persistence profile and stationary loss rate."""
    if not 0.0 <= target_flr < 1.0:
        raise InvalidParams(f"target FLR {target_flr} outside [0, 1)")
    mean = EGMParams(0.0, state_persistence).mean_burst
    if mean == float("inf"):
        raise InvalidParams("persistence profile gives unbounded bursts")
    p_gb = target_flr / ((1.0 - target_flr) * mean)
    if p_gb > 1.0:
        raise InvalidParams(f"no p_gb in [0, 1] reaches FLR {target_flr}")
    return EGMParams(p_gb, state_persistence)


def apply_channel(frames, pattern: LossPattern) -> list:
    from .conceal import ReceivedSlot

    if len(frames) != len(pattern):
        raise LengthMismatch(
            f"{len(frames)} frames but pattern covers {len(pattern)}"
        )
    return [
        ReceivedSlot(i, None if flag == LOST else frame)
        for i, (frame, flag) in enumerate(zip(frames, pattern.flags))
    ]


def burst_lengths(flags: str) -> list:
    return [len(run) for run in flags.split(RECEIVED) if run]


@dataclass(frozen=True)
class PatternStats:
    flr: float
    burst_histogram: dict
    mean_burst: float


def pattern_stats(pattern) -> PatternStats:
    flags = pattern.flags if isinstance(pattern, LossPattern) else pattern
    if not flags:
        raise InvalidParams("empty pattern")
    runs = burst_lengths(flags)
    hist = dict(sorted(Counter(runs).items()))
    lost = sum(runs)
    return PatternStats(
        flr=lost / len(flags),
        burst_histogram=hist,
        mean_burst=lost / len(runs) if runs else 0.0,
    )


def effective_sample_size(n: int, params: GilbertParams) -> float:
    """Sample size of i.i.d. draws with the same variance of the loss-rate mean.

    The loss indicator of a 2-state chain has lag-k autocorrelation
    lambda**k with lambda = p_bb - p_gb, so the variance of its mean is
    inflated by (1 + lambda) / (1 - lambda).
    """
    lam = params.p_bb - params.p_gb
    return n * (1.0 - lam) / (1.0 + lam)


# --- pattern file --------------------------------------------------------

def format_pattern(pattern: LossPattern) -> str:
    fields = []
    if pattern.target_flr is not None:
        fields.append(f"flr={pattern.target_flr!r}")
    if pattern.seed is not None:
        fields.append(f"seed={pattern.seed}")
    if pattern.params is not None:
        fields.append(f"model={model_name(pattern.params)}")
        fields.append(f"params={pattern.params.describe()}")
    header = "# " + " ".join(fields) + "\n" if fields else ""
    return header + pattern.flags + "\n"


def _parse_params(model, text):
    values = dict(item.split(":", 1) for item in text.split(",") if item)
    if model == "egm":
        qs = [float(q) for q in values["persistence"].split("/")]
        return EGMParams(float(values["p_gb"]), qs)
    return GilbertParams(float(values["p_gb"]), float(values["p_bb"]))


def parse_pattern(text: str) -> LossPattern:
    meta = {}
    body = []
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("#"):
            for token in line[1:].split():
                key, _, value = token.partition("=")
                meta[key] = value
        elif line:
            body.append(line)
    params = None
    if "params" in meta:
        try:
            params = _parse_params(meta.get("model", "gilbert"), meta["params"])
        except (KeyError, ValueError) as exc:
            raise InvalidParams(f"unreadable params field {meta['params']!r}") from exc
    return LossPattern(
        "".join(body),
        seed=int(meta["seed"]) if "seed" in meta else None,
        params=params,
        target_flr=float(meta["flr"]) if "flr" in meta else None,
    )


def write_pattern(pattern: LossPattern, path) -> None:
    with open(path, "w") as f:
        f.write(format_pattern(pattern))


def read_pattern(path) -> LossPattern:
    with open(path) as f:
        return parse_pattern(f.read())
