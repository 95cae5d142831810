"""Deterministic fixture builders shared by the CLI and acceptance tests."""

from __future__ import annotations

import math
import random
from pathlib import Path

from qubitsynth.midi import ControlChange, MidiEvent, NoteOff, NoteOn, PitchBend
from qubitsynth.smfwrite import write_smf

DIVISION = 480
TICKS_PER_SECOND = 960  # division 480 at the default 120 BPM

CC_X = 11
CC_Y = 1
CC_SWITCH = 80
CC_MEASURE = 82
CC_CLASSICAL = 7
CC_QUANTUM = 8

# 32 CC units = exactly a quarter turn, so measurement scripts can re-prepare
# an equatorial state from either pole with a single pedal step.
EQUATOR_SENSITIVITY = (math.pi / 2) * (127 / 32)


def ticks(seconds: float) -> int:
    return round(seconds * TICKS_PER_SECOND)


def seconds_by_tick_walk(tick: int, tempo_events: list[tuple[int, int]], division: int) -> float:
    """Independent oracle: walk every tempo segment, summing spans one at a time."""
    segments = sorted(tempo_events)
    total = 0.0
    current_mpqn = 500_000
    position = 0
    for seg_tick, mpqn in segments:
        if seg_tick >= tick:
            break
        if seg_tick > position:
            total += (min(seg_tick, tick) - position) * current_mpqn / (division * 1e6)
            position = seg_tick
        current_mpqn = mpqn
    if tick > position:
        total += (tick - position) * current_mpqn / (division * 1e6)
    return total


def config_text(**overrides) -> str:
    """Minimal valid config plus overrides; values are written verbatim."""
    table = {
        "sample_rate": 48000,
        "block_size": 256,
        "rotation_cc_a": CC_X,
        "rotation_cc_b": CC_Y,
        "axis_switch_cc": CC_SWITCH,
        "measure_cc": CC_MEASURE,
        "classical_gain_cc": CC_CLASSICAL,
        "quantum_gain_cc": CC_QUANTUM,
    }
    table.update(overrides)
    return "".join(f"{key} = {value}\n" for key, value in table.items())


def melody_events(duration_s: float = 30.0) -> list[tuple[int, MidiEvent]]:
    """A six-string pattern with pitch bends, one note every quarter second."""
    rng = random.Random(12345)
    events: list[tuple[int, MidiEvent]] = []
    t = 0.0
    step = 0.25
    note_len = 0.4
    while t + note_len < duration_s:
        string = int(t / step) % 6
        note = 40 + string * 5 + rng.choice([0, 3, 5, 7, 12])
        velocity = rng.randint(70, 127)
        events.append((ticks(t), NoteOn(string, note, velocity)))
        if rng.random() < 0.4:  # bend into the note and back
            events.append((ticks(t + 0.1), PitchBend(string, 8192 + rng.randint(-4096, 4096))))
            events.append((ticks(t + 0.3), PitchBend(string, 8192)))
        events.append((ticks(t + note_len), NoteOff(string, note, 0)))
        t += step
    events.sort(key=lambda pair: pair[0])
    return events


def pedal_events(duration_s: float = 30.0, measure_every: float = 2.0) -> list[tuple[int, MidiEvent]]:
    """Rotation sweeps, axis-switch presses, measurements, and volume moves."""
    events: list[tuple[int, MidiEvent]] = []
    events.append((0, ControlChange(0, CC_X, 0)))
    events.append((0, ControlChange(0, CC_Y, 0)))
    t = 0.1
    value = 0
    direction = 8
    while t < duration_s:
        value += direction
        if value >= 127:
            value, direction = 127, -abs(direction)
        elif value <= 0:
            value, direction = 0, abs(direction)
        events.append((ticks(t), ControlChange(0, CC_X, value)))
        events.append((ticks(t + 0.05), ControlChange(0, CC_Y, (value * 3) % 128)))
        t += 0.1
    t = 1.0
    while t < duration_s:
        events.append((ticks(t), ControlChange(0, CC_MEASURE, 127)))
        events.append((ticks(t + 0.05), ControlChange(0, CC_MEASURE, 0)))
        t += measure_every
    for i, t_switch in enumerate((7.0, 14.0, 21.0)):
        if t_switch < duration_s:
            events.append((ticks(t_switch), ControlChange(0, CC_SWITCH, 127)))
            events.append((ticks(t_switch + 0.1), ControlChange(0, CC_SWITCH, 0)))
    events.sort(key=lambda pair: pair[0])
    return events


def crossfade_pedal_events(start: float = 1.0, length: float = 5.0) -> list[tuple[int, MidiEvent]]:
    """Classical full / quantum silent, then a scripted crossfade to the inverse."""
    events: list[tuple[int, MidiEvent]] = [
        (0, ControlChange(0, CC_CLASSICAL, 127)),
        (0, ControlChange(0, CC_QUANTUM, 0)),
    ]
    for i in range(128):
        t = start + i * (length / 128)
        events.append((ticks(t), ControlChange(0, CC_CLASSICAL, 127 - i)))
        events.append((ticks(t), ControlChange(0, CC_QUANTUM, i)))
    return events


def equator_measurement_events(presses: int, spacing_s: float = 0.003) -> list[tuple[int, MidiEvent]]:
    """Quarter-turn pedal step, then a momentary press, repeated.

    Needs sensitivity = EQUATOR_SENSITIVITY so every step is exactly pi/2,
    putting the state on the equator before each measurement regardless of
    the previous collapse outcome.
    """
    events: list[tuple[int, MidiEvent]] = [(0, ControlChange(0, CC_X, 0))]
    value = 0
    direction = 32
    tick = ticks(0.05)
    step_ticks = max(1, ticks(spacing_s))
    for _ in range(presses):
        value += direction
        if value in (96, 0):
            direction = -direction
        events.append((tick, ControlChange(0, CC_X, value)))
        events.append((tick + step_ticks, ControlChange(0, CC_MEASURE, 127)))
        events.append((tick + 2 * step_ticks, ControlChange(0, CC_MEASURE, 0)))
        tick += 3 * step_ticks
    return events


def write_fixture_pair(
    directory: Path, duration_s: float = 30.0
) -> tuple[Path, Path]:
    midi_path = directory / "melody.mid"
    pedal_path = directory / "pedals.mid"
    write_smf(midi_path, [melody_events(duration_s)], DIVISION)
    write_smf(pedal_path, [pedal_events(duration_s)], DIVISION)
    return midi_path, pedal_path
