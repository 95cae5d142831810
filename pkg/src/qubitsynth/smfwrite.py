"""Tiny Standard MIDI File writer for authoring pedal-automation tracks.

Only what the offline path needs: format 0/1, PPQN division, tempo meta
events, and the channel-voice messages the engine consumes.
"""

from __future__ import annotations

from pathlib import Path

from .midi import MidiEvent, encode_event


def vlq(value: int) -> bytes:
    """Variable-length quantity, MIDI's big-endian 7-bit encoding."""
    if value < 0:
        raise ValueError("delta times must be non-negative")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def tempo_meta(mpqn: int) -> bytes:
    """Set-tempo meta event payload (microseconds per quarter note)."""
    return b"\xff\x51\x03" + mpqn.to_bytes(3, "big")


def end_of_track() -> bytes:
    return b"\xff\x2f\x00"


def track_chunk(items: list[tuple[int, bytes]]) -> bytes:
    """MTrk chunk from (delta_ticks, raw_event_bytes) pairs; EOT is appended."""
    body = b"".join(vlq(delta) + raw for delta, raw in items)
    body += vlq(0) + end_of_track()
    return b"MTrk" + len(body).to_bytes(4, "big") + body


def build_smf(tracks: list[list[tuple[int, bytes]]], division: int = 480, fmt: int | None = None) -> bytes:
    if fmt is None:
        fmt = 0 if len(tracks) <= 1 else 1
    header = b"MThd" + (6).to_bytes(4, "big")
    header += fmt.to_bytes(2, "big") + len(tracks).to_bytes(2, "big") + division.to_bytes(2, "big")
    return header + b"".join(track_chunk(items) for items in tracks)


def events_track(events: list[tuple[int, MidiEvent]]) -> list[tuple[int, bytes]]:
    """Absolute-tick events to a delta-time track; input must be tick-sorted."""
    items: list[tuple[int, bytes]] = []
    previous = 0
    for tick, event in events:
        if tick < previous:
            raise ValueError("events must be sorted by tick")
        items.append((tick - previous, encode_event(event)))
        previous = tick
    return items


def write_smf(
    path: str | Path,
    tracks: list[list[tuple[int, MidiEvent]]],
    division: int = 480,
    tempo_mpqn: int | None = None,
) -> None:
    """Write absolute-tick event tracks; tempo, when given, opens track 0."""
    chunks: list[list[tuple[int, bytes]]] = []
    for i, events in enumerate(tracks):
        items = events_track(events)
        if i == 0 and tempo_mpqn is not None:
            items = [(0, tempo_meta(tempo_mpqn))] + items
        chunks.append(items)
    Path(path).write_bytes(build_smf(chunks, division))
