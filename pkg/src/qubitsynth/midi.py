"""Wire-level MIDI: incremental byte-stream decoding and event encoding.

The stream parser survives arbitrary input: running status is honored,
real-time bytes (0xF8-0xFF) pass transparently even mid-message, SysEx and
system-common messages are skipped without losing sync, and orphan data
bytes are dropped into a diagnostics tally on the parser state.
"""

from __future__ import annotations

from dataclasses import dataclass

PITCH_BEND_CENTER = 8192
PITCH_BEND_MAX = 16383

# System-common status -> number of data bytes to swallow.
_SYSTEM_DATA_BYTES = {0xF1: 1, 0xF2: 2, 0xF3: 1}


def _check_range(name: str, value: int, lo: int, hi: int) -> None:
    if not isinstance(value, int) or not lo <= value <= hi:
        raise ValueError(f"{name} must be an int in [{lo}, {hi}], got {value!r}")


@dataclass(frozen=True)
class NoteOn:
    channel: int
    note: int
    velocity: int

    def __post_init__(self) -> None:
        _check_range("channel", self.channel, 0, 15)
        _check_range("note", self.note, 0, 127)
        _check_range("velocity", self.velocity, 0, 127)


@dataclass(frozen=True)
class NoteOff:
    channel: int
    note: int
    velocity: int

    def __post_init__(self) -> None:
        _check_range("channel", self.channel, 0, 15)
        _check_range("note", self.note, 0, 127)
        _check_range("velocity", self.velocity, 0, 127)


@dataclass(frozen=True)
class ControlChange:
    channel: int
    controller: int
    value: int

    def __post_init__(self) -> None:
        _check_range("channel", self.channel, 0, 15)
        _check_range("controller", self.controller, 0, 127)
        _check_range("value", self.value, 0, 127)


@dataclass(frozen=True)
class PitchBend:
    channel: int
    value: int  # 14-bit, 8192 = center

    def __post_init__(self) -> None:
        _check_range("channel", self.channel, 0, 15)
        _check_range("value", self.value, 0, PITCH_BEND_MAX)


MidiEvent = NoteOn | NoteOff | ControlChange | PitchBend


@dataclass(frozen=True)
class ParserState:
    """Resumable decoder state; feed chunks in any split without losing events."""

    running_status: int | None = None
    pending: tuple[int, ...] = ()
    in_sysex: bool = False
    system_pending: int = 0
    dropped: int = 0  # orphan data bytes discarded so far


def event_from_status(status: int, data1: int, data2: int) -> MidiEvent | None:
    """Build the typed event for a complete channel-voice message.

    NoteOn with velocity 0 is normalized to NoteOff here, so every caller
    (stream and file parsers) applies the same rule. Returns None for
    message kinds the engine does not consume (aftertouch, program change).
    """
    kind = status & 0xF0
    channel = status & 0x0F
    if kind == 0x80:
        return NoteOff(channel, data1, data2)
    if kind == 0x90:
        if data2 == 0:
            return NoteOff(channel, data1, 0)
        return NoteOn(channel, data1, data2)
    if kind == 0xB0:
        return ControlChange(channel, data1, data2)
    if kind == 0xE0:
        return PitchBend(channel, data1 | (data2 << 7))
    return None


def message_data_bytes(status: int) -> int:
    """Data-byte count of a channel-voice message (1 or 2)."""
    return 1 if status & 0xF0 in (0xC0, 0xD0) else 2


def parse_stream(
    data: bytes, state: ParserState | None = None
) -> tuple[list[MidiEvent], ParserState]:
    """Decode a chunk of raw MIDI bytes, returning events and the new state.

    Concatenating the event lists from any chunking of a byte string equals
    parsing it in one call with the states threaded through.
    """
    st = state if state is not None else ParserState()
    running = st.running_status
    pending = list(st.pending)
    in_sysex = st.in_sysex
    sys_pending = st.system_pending
    dropped = st.dropped
    events: list[MidiEvent] = []

    for byte in data:
        if byte >= 0xF8:
            # Real-time: transparent, legal even in the middle of a message.
            continue
        if byte >= 0xF0:
            # SysEx start / system common cancels running status.
            dropped += len(pending)  # abandoned partial message
            running = None
            pending.clear()
            in_sysex = byte == 0xF0
            sys_pending = _SYSTEM_DATA_BYTES.get(byte, 0)
            continue
        if byte >= 0x80:
            dropped += len(pending)
            running = byte
            pending.clear()
            in_sysex = False
            sys_pending = 0
            continue
        # Data byte.
        if in_sysex:
            continue
        if sys_pending > 0:
            sys_pending -= 1
            continue
        if running is None:
            dropped += 1
            continue
        pending.append(byte)
        if len(pending) == message_data_bytes(running):
            data1 = pending[0]
            data2 = pending[1] if len(pending) > 1 else 0
            pending.clear()
            event = event_from_status(running, data1, data2)
            if event is not None:
                events.append(event)

    return events, ParserState(running, tuple(pending), in_sysex, sys_pending, dropped)


def decode_pitch_bend(value: int, bend_range: float = 2.0) -> float:
    """14-bit pitch-bend value to a semitone offset; 8192 maps to exactly 0."""
    if not 0 <= value <= PITCH_BEND_MAX:
        raise ValueError(f"pitch bend value out of range: {value!r}")
    if not bend_range > 0:
        raise ValueError(f"bend range must be positive, got {bend_range!r}")
    return (value - PITCH_BEND_CENTER) / PITCH_BEND_CENTER * bend_range


def encode_event(event: MidiEvent) -> bytes:
    """Wire bytes for one event; parse_stream(encode_event(e)) round-trips."""
    if isinstance(event, NoteOn):
        return bytes([0x90 | event.channel, event.note, event.velocity])
    if isinstance(event, NoteOff):
        return bytes([0x80 | event.channel, event.note, event.velocity])
    if isinstance(event, ControlChange):
        return bytes([0xB0 | event.channel, event.controller, event.value])
    if isinstance(event, PitchBend):
        return bytes([0xE0 | event.channel, event.value & 0x7F, event.value >> 7])
    raise TypeError(f"not a MIDI event: {event!r}")
