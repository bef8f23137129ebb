"""Flat ``key = value`` configuration files (``#`` and ``;`` start comments)."""

import configparser

from .errors import ConfigMismatch
from .frame import StreamConfig

_SECTION = "config"


def read_kv(path) -> dict:
    with open(path) as f:
        return parse_kv(f.read())


def parse_kv(text: str) -> dict:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigMismatch(f"unreadable config: {exc}") from exc
    return dict(parser[_SECTION])


def stream_config_from(values: dict) -> StreamConfig:
    defaults = StreamConfig()
    try:
        return StreamConfig(
            header_words=int(values.get("header_words", defaults.header_words)),
            payload_words=int(values.get("payload_words", defaults.payload_words)),
            frame_duration_ms=float(
                values.get("frame_duration_ms", defaults.frame_duration_ms)
            ),
        )
    except ValueError as exc:
        raise ConfigMismatch(str(exc)) from exc


def load_stream_config(path=None) -> StreamConfig:
    if path is None:
        return StreamConfig()
    return stream_config_from(read_kv(path))


def parse_list(value: str, cast=str) -> tuple:
    return tuple(cast(v.strip()) for v in value.split(",") if v.strip())
