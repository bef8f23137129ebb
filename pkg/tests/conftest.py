import numpy as np
import pytest
from hypothesis import strategies as st

from softbit_plc.frame import Frame, StreamConfig, default_header

MODE0 = StreamConfig()
SMALL = StreamConfig(header_words=3, payload_words=8)


def random_bits(rng, n):
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def random_frame(rng, config=MODE0, header=None):
    if header is None:
        header = bytes(rng.integers(0, 256, size=config.header_bytes, dtype=np.uint8))
    return Frame.from_bits(header, random_bits(rng, config.payload_words))


def random_stream(rng, n, config=MODE0):
    header = default_header(config)
    return [random_frame(rng, config, header) for _ in range(n)]


def bits_strategy(n):
    return st.lists(st.integers(0, 1), min_size=n, max_size=n)


@st.composite
def frames(draw, config=SMALL):
    header = draw(st.binary(min_size=config.header_bytes, max_size=config.header_bytes))
    return Frame.from_bits(header, draw(bits_strategy(config.payload_words)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria register here; summarised at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
