"""Binary ``.evt`` container for multi-channel timestamp streams.

Layout (all little-endian):

    magic   8 bytes  b"SPDCEVT1"
    u32     channel count
    per channel:
        u8   channel id (0 idler, 1 signal1, 2 signal2)
        u64  event count
        u64  duration in femtosecond ticks
        u64 * count  timestamps, ascending femtosecond ticks

One femtosecond tick resolves sub-picosecond coherence times; 64 bits span
more than 1e5 seconds of acquisition.  Writes go through a temp file and
an atomic rename.
"""
from __future__ import annotations

import logging
import os
import struct
import time
from collections.abc import Sequence

import numpy as np

from .events import CHANNELS, EventStream
from .params import SpdcLabError

__all__ = ["write_events", "read_events", "EvtFormatError", "MAGIC"]

MAGIC = b"SPDCEVT1"

logger = logging.getLogger(__name__)


class EvtFormatError(SpdcLabError):
    """Corrupt, truncated or foreign .evt content."""


def write_events(streams: Sequence[EventStream], path) -> None:
    """Write streams to ``path`` atomically; round-trips bit-exactly."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(streams)))
        for stream in streams:
            fh.write(
                struct.pack(
                    "<BQQ",
                    CHANNELS.index(stream.channel),
                    len(stream),
                    stream.duration,
                )
            )
            fh.write(stream.timestamps.astype("<u8").tobytes())
    os.replace(tmp, path)


def read_events(path) -> list[EventStream]:
    """Read streams back; validates magic, ids and declared counts."""
    path = os.fspath(path)
    started = time.perf_counter()
    with open(path, "rb") as fh:
        data = fh.read()
    if data[: len(MAGIC)] != MAGIC:
        raise EvtFormatError(
            f"{path}: bad magic {data[:len(MAGIC)]!r}, expected {MAGIC!r}"
        )
    offset = len(MAGIC)
    (n_channels,) = struct.unpack_from("<I", data, offset)
    offset += 4
    streams: list[EventStream] = []
    for _ in range(n_channels):
        if offset + 17 > len(data):
            raise EvtFormatError(f"{path}: truncated channel header")
        channel_id, count, duration = struct.unpack_from("<BQQ", data, offset)
        offset += 17
        if channel_id >= len(CHANNELS):
            raise EvtFormatError(f"{path}: unknown channel id {channel_id}")
        end = offset + 8 * count
        if end > len(data):
            raise EvtFormatError(
                f"{path}: declares {count} events but file ends early"
            )
        ticks = np.frombuffer(data[offset:end], dtype="<u8").astype(np.int64)
        offset = end
        streams.append(EventStream(CHANNELS[channel_id], ticks, duration))
    if offset != len(data):
        raise EvtFormatError(f"{path}: {len(data) - offset} trailing bytes")
    elapsed = time.perf_counter() - started
    if elapsed > 0:
        logger.debug(
            "read %s: %.1f MB in %.3f s (%.0f MB/s)",
            path, len(data) / 1e6, elapsed, len(data) / 1e6 / elapsed,
        )
    return streams
