from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qubitsynth.midi import (
    ControlChange,
    NoteOff,
    NoteOn,
    ParserState,
    PitchBend,
    decode_pitch_bend,
    encode_event,
    parse_stream,
)

seven_bit = st.integers(0, 127)
channels = st.integers(0, 15)

events = st.one_of(
    st.builds(NoteOn, channels, seven_bit, st.integers(1, 127)),
    st.builds(NoteOff, channels, seven_bit, seven_bit),
    st.builds(ControlChange, channels, seven_bit, seven_bit),
    st.builds(PitchBend, channels, st.integers(0, 16383)),
)


def normalized(event):
    """What the parser is contracted to return for this event's encoding."""
    if isinstance(event, NoteOn) and event.velocity == 0:
        return NoteOff(event.channel, event.note, 0)
    return event


# --- protocol-defined decodings ----------------------------------------------


def test_note_on_decodes():
    out, _ = parse_stream(bytes([0x90, 60, 100]))
    assert out == [NoteOn(0, 60, 100)]


def test_running_status_and_velocity_zero_rule():
    out, _ = parse_stream(bytes([0x90, 60, 100, 64, 0]))
    assert out == [NoteOn(0, 60, 100), NoteOff(0, 64, 0)]


def test_pitch_bend_center_decodes():
    out, _ = parse_stream(bytes([0xE1, 0x00, 0x40]))
    assert out == [PitchBend(1, 8192)]


def test_note_off_decodes_with_channel():
    out, _ = parse_stream(bytes([0x83, 72, 40]))
    assert out == [NoteOff(3, 72, 40)]


def test_control_change_decodes():
    out, _ = parse_stream(bytes([0xB2, 11, 127]))
    assert out == [ControlChange(2, 11, 127)]


# --- robustness ----------------------------------------------------------------


def test_real_time_bytes_pass_mid_message():
    out, _ = parse_stream(bytes([0x90, 60, 0xF8, 100, 0xFE, 64, 127]))
    assert out == [NoteOn(0, 60, 100), NoteOn(0, 64, 127)]


def test_sysex_is_skipped_without_desync():
    out, state = parse_stream(bytes([0xF0, 1, 2, 3, 4, 0xF7, 0x90, 60, 100]))
    assert out == [NoteOn(0, 60, 100)]
    assert state.dropped == 0


def test_sysex_terminated_by_status_byte():
    out, _ = parse_stream(bytes([0xF0, 1, 2, 0x90, 60, 100]))
    assert out == [NoteOn(0, 60, 100)]


def test_system_common_data_not_counted_as_garbage():
    # song position pointer carries two data bytes
    out, state = parse_stream(bytes([0xF2, 0x10, 0x20, 0x90, 60, 100]))
    assert out == [NoteOn(0, 60, 100)]
    assert state.dropped == 0


def test_orphan_data_bytes_are_dropped_and_tallied():
    out, state = parse_stream(bytes([10, 20, 30, 0x90, 60, 100]))
    assert out == [NoteOn(0, 60, 100)]
    assert state.dropped == 3


def test_system_common_cancels_running_status():
    out, state = parse_stream(bytes([0x90, 60, 100, 0xF6, 61, 99]))
    assert out == [NoteOn(0, 60, 100)]
    assert state.dropped == 2  # data after F6 has no status context


def test_unconsumed_message_kinds_keep_sync():
    # program change (1 data byte) and aftertouch (2) produce no events
    out, state = parse_stream(bytes([0xC0, 5, 0xA0, 60, 1, 0x90, 60, 100]))
    assert out == [NoteOn(0, 60, 100)]
    assert state.dropped == 0


def test_recovers_after_malformed_fragment():
    stream = bytes([0x12, 0x34]) + bytes([0xE0, 0x00, 0x40]) + bytes([0x55])
    out, state = parse_stream(stream)
    assert out == [PitchBend(0, 8192)]
    assert state.dropped == 2  # leading orphans; 0x55 is a pending fragment
    assert state.pending == (0x55,)
    # the abandoned fragment is tallied once the next status byte arrives
    out2, state = parse_stream(bytes([0x90, 60, 100]), state)
    assert out2 == [NoteOn(0, 60, 100)]
    assert state.dropped == 3
    assert state.pending == ()


# --- pitch bend decoding -----------------------------------------------------------


def test_pitch_bend_center_is_exactly_zero():
    assert decode_pitch_bend(8192, 2.0) == 0.0


def test_pitch_bend_full_up():
    assert decode_pitch_bend(16383, 2.0) == pytest.approx(8191 / 8192 * 2.0, abs=1e-15)


def test_pitch_bend_full_down_wide_range():
    assert decode_pitch_bend(0, 12.0) == -12.0


def test_pitch_bend_rejects_out_of_range():
    with pytest.raises(ValueError):
        decode_pitch_bend(16384, 2.0)
    with pytest.raises(ValueError):
        decode_pitch_bend(-1, 2.0)
    with pytest.raises(ValueError):
        decode_pitch_bend(8192, 0.0)


# --- encoding / round-trip ------------------------------------------------------------


def test_encode_note_off():
    assert encode_event(NoteOff(0, 60, 64)) == bytes([0x80, 60, 64])


def test_encode_pitch_bend_center():
    assert encode_event(PitchBend(1, 8192)) == bytes([0xE1, 0x00, 0x40])


@given(events)
def test_encode_parse_round_trip(event):
    out, state = parse_stream(encode_event(event))
    assert out == [normalized(event)]
    assert state.pending == ()
    assert state.dropped == 0


@given(st.lists(events, max_size=30))
def test_round_trip_over_sequences(sequence):
    stream = b"".join(encode_event(e) for e in sequence)
    out, _ = parse_stream(stream)
    assert out == [normalized(e) for e in sequence]


@given(st.binary(max_size=400), st.lists(st.integers(0, 400), max_size=8))
def test_chunking_invariance(data, cut_points):
    whole, whole_state = parse_stream(data)
    cuts = sorted({min(c, len(data)) for c in cut_points})
    chunked: list = []
    state = ParserState()
    previous = 0
    for cut in cuts + [len(data)]:
        part, state = parse_stream(data[previous:cut], state)
        chunked.extend(part)
        previous = cut
    assert chunked == whole
    assert state == whole_state


def test_chunking_invariance_byte_by_byte():
    rng = random.Random(5)
    sequence = []
    for _ in range(200):
        sequence.append(NoteOn(rng.randrange(16), rng.randrange(128), rng.randrange(1, 128)))
    data = b"".join(encode_event(e) for e in sequence)
    whole, _ = parse_stream(data)
    state = ParserState()
    chunked: list = []
    for i in range(len(data)):
        part, state = parse_stream(data[i : i + 1], state)
        chunked.extend(part)
    assert chunked == whole


# --- construction validation ------------------------------------------------------------


@pytest.mark.parametrize(
    "build",
    [
        lambda: NoteOn(16, 60, 100),
        lambda: NoteOn(0, 128, 100),
        lambda: NoteOn(0, 60, -1),
        lambda: ControlChange(0, 200, 0),
        lambda: PitchBend(0, 16384),
        lambda: PitchBend(-1, 0),
    ],
)
def test_field_ranges_enforced_at_construction(build):
    with pytest.raises(ValueError):
        build()
