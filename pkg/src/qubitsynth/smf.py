"""Standard MIDI File reader: formats 0 and 1, PPQN timing, tempo-map resolution.

Tracks are merged into one list of events with absolute times in seconds.
Delta times are resolved through every tempo meta-event found in any track
(120 BPM assumed before the first one); SMPTE divisions are refused rather
than misread.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterator

from .midi import MidiEvent, event_from_status, message_data_bytes

DEFAULT_TEMPO_MPQN = 500_000  # microseconds per quarter note = 120 BPM

_META_TEMPO = 0x51
_META_END_OF_TRACK = 0x2F


class SmfError(ValueError):
    """Malformed file; offset is the absolute byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SmfUnsupportedError(SmfError):
    """Structurally valid but outside the supported feature set."""


@dataclass(frozen=True)
class TimedEvent:
    time: float  # seconds, non-negative
    event: MidiEvent

    def __post_init__(self) -> None:
        if not self.time >= 0.0:
            raise ValueError(f"event time must be non-negative, got {self.time!r}")


def parse_smf(data: bytes) -> list[TimedEvent]:
    """Read a format 0 or 1 file into a time-sorted, track-merged event list."""
    division, tracks = _read_chunks(data)
    raw: list[tuple[int, MidiEvent]] = []
    tempos: list[tuple[int, int]] = []
    for base_offset, chunk in tracks:
        for tick, kind, payload in _track_items(chunk, base_offset):
            if kind == "tempo":
                tempos.append((tick, payload))
            else:
                raw.append((tick, payload))
    # Stable sort: simultaneous events keep file order (track order, then
    # position within the track).
    raw.sort(key=lambda item: item[0])
    to_seconds = _tempo_map(tempos, division)
    return [TimedEvent(to_seconds(tick), event) for tick, event in raw]


def _read_u32(data: bytes, pos: int) -> int:
    return int.from_bytes(data[pos : pos + 4], "big")


def _read_chunks(data: bytes) -> tuple[int, list[tuple[int, bytes]]]:
    if len(data) < 14 or data[0:4] != b"MThd":
        raise SmfError("missing MThd header", 0)
    header_len = _read_u32(data, 4)
    if header_len < 6 or 8 + header_len > len(data):
        raise SmfError("truncated MThd chunk", 4)
    fmt = int.from_bytes(data[8:10], "big")
    division = int.from_bytes(data[12:14], "big")
    if fmt not in (0, 1):
        raise SmfUnsupportedError(f"unsupported SMF format {fmt}", 8)
    if division & 0x8000:
        raise SmfUnsupportedError("SMPTE time division is not supported", 12)
    if division == 0:
        raise SmfError("zero ticks-per-quarter division", 12)

    tracks: list[tuple[int, bytes]] = []
    pos = 8 + header_len
    while pos < len(data):
        if pos + 8 > len(data):
            raise SmfError("truncated chunk header", pos)
        chunk_type = data[pos : pos + 4]
        chunk_len = _read_u32(data, pos + 4)
        body_start = pos + 8
        if body_start + chunk_len > len(data):
            raise SmfError(f"truncated {chunk_type!r} chunk", pos)
        if chunk_type == b"MTrk":
            tracks.append((body_start, data[body_start : body_start + chunk_len]))
        pos = body_start + chunk_len  # alien chunk types are skipped
    return division, tracks


def _read_vlq(data: bytes, pos: int, base: int) -> tuple[int, int]:
    value = 0
    for i in range(4):
        if pos >= len(data):
            raise SmfError("truncated variable-length quantity", base + pos)
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos
    raise SmfError("variable-length quantity longer than 4 bytes", base + pos)


def _track_items(chunk: bytes, base: int) -> Iterator[tuple[int, str, object]]:
    """Yield (tick, "tempo", mpqn) and (tick, "event", MidiEvent) in file order."""
    pos = 0
    tick = 0
    running: int | None = None
    while pos < len(chunk):
        delta, pos = _read_vlq(chunk, pos, base)
        tick += delta
        if pos >= len(chunk):
            raise SmfError("event truncated after delta time", base + pos)
        byte = chunk[pos]
        if byte == 0xFF:
            running = None  # meta events cancel running status
            if pos + 2 > len(chunk):
                raise SmfError("truncated meta event", base + pos)
            meta_type = chunk[pos + 1]
            length, pos = _read_vlq(chunk, pos + 2, base)
            if pos + length > len(chunk):
                raise SmfError("truncated meta event payload", base + pos)
            payload = chunk[pos : pos + length]
            pos += length
            if meta_type == _META_TEMPO and length == 3:
                mpqn = int.from_bytes(payload, "big")
                if mpqn > 0:
                    yield tick, "tempo", mpqn
            elif meta_type == _META_END_OF_TRACK:
                return
        elif byte in (0xF0, 0xF7):
            running = None  # so do SysEx events
            length, pos = _read_vlq(chunk, pos + 1, base)
            if pos + length > len(chunk):
                raise SmfError("truncated SysEx payload", base + pos)
            pos += length
        else:
            if byte >= 0x80:
                running = byte
                pos += 1
            elif running is None:
                raise SmfError("data byte with no running status", base + pos)
            need = message_data_bytes(running)
            if pos + need > len(chunk):
                raise SmfError("truncated channel event", base + pos)
            data1 = chunk[pos]
            data2 = chunk[pos + 1] if need == 2 else 0
            pos += need
            event = event_from_status(running, data1, data2)
            if event is not None:
                yield tick, "event", event


def _tempo_map(tempos: list[tuple[int, int]], division: int):
    """Build tick -> seconds conversion from (tick, mpqn) tempo events."""
    tempos = sorted(tempos, key=lambda item: item[0])
    segments: list[tuple[int, int]] = [(0, DEFAULT_TEMPO_MPQN)]
    for tick, mpqn in tempos:
        if segments[-1][0] == tick:
            segments[-1] = (tick, mpqn)  # same-tick tempo: last one wins
        else:
            segments.append((tick, mpqn))

    starts = [seg[0] for seg in segments]
    seconds_at: list[float] = [0.0]
    for i in range(1, len(segments)):
        span = segments[i][0] - segments[i - 1][0]
        seconds_at.append(
            seconds_at[i - 1] + span * segments[i - 1][1] / (division * 1e6)
        )

    def to_seconds(tick: int) -> float:
        i = bisect.bisect_right(starts, tick) - 1
        return seconds_at[i] + (tick - starts[i]) * segments[i][1] / (division * 1e6)

    return to_seconds
