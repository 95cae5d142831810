"""Acceptance gate: one test per release criterion, tolerances pinned.

Each test prints a one-line verdict so a `pytest -v -s tests/test_acceptance.py`
run reads as the acceptance checklist.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import replace

import numpy as np

from qubitsynth.config import EnvelopeParams
from qubitsynth.control import (
    Bus,
    TriggerMeasurement,
    initial_pedal_state,
    map_event,
)
from qubitsynth.engine import SynthEngine
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
from qubitsynth.qubit import (
    MeasurementBasis,
    RotationAxis,
    bloch_coordinates,
    measure,
    new_qubit,
    rotate,
)
from qubitsynth.render import dispatch_event, measurement_json, render_offline
from qubitsynth.session import control_message_to_events
from qubitsynth.smf import parse_smf
from qubitsynth.smfwrite import build_smf, tempo_meta
from qubitsynth.wavfile import encode_wav_float32

from conftest import make_render_config
from fixtures import (
    CC_MEASURE,
    CC_X,
    DIVISION,
    EQUATOR_SENSITIVITY,
    crossfade_pedal_events,
    melody_events,
    pedal_events,
    seconds_by_tick_walk,
)
from qubitsynth.smf import TimedEvent


def report(name: str, detail: str) -> None:
    print(f"[PRIMARY] {name}: PASS ({detail})")


def test_born_statistics():
    rng = random.Random(20240517)
    started = time.monotonic()
    ones = 0
    shots = 10_000
    for _ in range(shots):
        state = rotate(new_qubit(), RotationAxis.Y, math.pi / 2)  # re-prepared
        outcome, _ = measure(state, MeasurementBasis.Z, rng)
        ones += outcome.bit
    elapsed = time.monotonic() - started
    frequency = ones / shots
    assert 0.485 <= frequency <= 0.515
    assert elapsed < 1.0
    report("Born statistics", f"freq={frequency:.4f}, {elapsed:.2f}s")


def test_unitarity_drift():
    rng = random.Random(8)
    axes = list(RotationAxis)
    state = new_qubit()
    started = time.monotonic()
    worst = 0.0
    for _ in range(1_000_000):
        state = rotate(state, axes[int(rng.random() * 3)], rng.random() * math.tau - math.pi)
        error = abs(
            state.alpha.real**2
            + state.alpha.imag**2
            + state.beta.real**2
            + state.beta.imag**2
            - 1.0
        )
        if error > worst:
            worst = error
        if error > 1e-9:
            raise AssertionError(f"norm drifted to error {error}")
    elapsed = time.monotonic() - started
    assert elapsed < 5.0
    report("Unitarity drift", f"worst={worst:.1e} over 1e6 rotations, {elapsed:.2f}s")


def test_green_pedal_inertness():
    rng = random.Random(21)
    for _ in range(100):
        theta = rng.uniform(-20.0, 20.0)
        vec = bloch_coordinates(rotate(new_qubit(), RotationAxis.Z, theta))
        assert abs(vec.x) <= 1e-12
        assert abs(vec.y) <= 1e-12
        assert abs(vec.z - 1.0) <= 1e-12
    report("Green-pedal inertness", "100 random Z rotations pinned to (0,0,1) @1e-12")


def test_momentary_vs_latch():
    mapping = make_render_config().mapping
    presses = 25

    def count_triggers(values: list[int]) -> int:
        state = initial_pedal_state(mapping)
        triggers = 0
        for value in values:
            actions, state = map_event(ControlChange(0, CC_MEASURE, value), mapping, state)
            triggers += sum(isinstance(a, TriggerMeasurement) for a in actions)
        return triggers

    momentary: list[int] = []
    for _ in range(presses):
        momentary += [127, 0]
    assert count_triggers(momentary) == presses

    latch: list[int] = []
    level = 0
    for _ in range(presses):
        level = 127 - level
        latch.append(level)
    assert count_triggers(latch) == math.ceil(presses / 2)
    report(
        "Momentary-vs-latch",
        f"{presses} momentary presses -> {presses} measurements; latch -> {math.ceil(presses / 2)}",
    )


def _random_event(rng: random.Random):
    kind = rng.randrange(4)
    channel = rng.randrange(16)
    if kind == 0:
        return NoteOn(channel, rng.randrange(128), rng.randint(1, 127))
    if kind == 1:
        return NoteOff(channel, rng.randrange(128), rng.randrange(128))
    if kind == 2:
        return ControlChange(channel, rng.randrange(128), rng.randrange(128))
    return PitchBend(channel, rng.randrange(16384))


def test_midi_parser_round_trip_and_chunking():
    rng = random.Random(1234)
    for _ in range(10_000):
        event = _random_event(rng)
        decoded, state = parse_stream(encode_event(event))
        expected = event
        if isinstance(event, NoteOn) and event.velocity == 0:
            expected = NoteOff(event.channel, event.note, 0)
        assert decoded == [expected]
        assert state.pending == ()

    fixture = b""
    while len(fixture) < 10_240:
        fixture += encode_event(_random_event(rng))
    fixture = fixture[:10_240]
    whole, whole_state = parse_stream(fixture)
    for _ in range(100):
        n_cuts = rng.randint(1, 40)
        cuts = sorted(rng.randrange(len(fixture) + 1) for _ in range(n_cuts))
        state = ParserState()
        events = []
        previous = 0
        for cut in cuts + [len(fixture)]:
            part, state = parse_stream(fixture[previous:cut], state)
            events.extend(part)
            previous = cut
        assert events == whole
        assert state == whole_state

    assert decode_pitch_bend(8192, 2.0) == 0.0
    report(
        "MIDI parser",
        "10k round-trips, 100 random splits of a 10 kB stream, bend center == 0.0",
    )


def test_smf_timing_against_tick_walk():
    division = DIVISION
    tempo_changes = [(0, 500_000), (700, 312_500), (1900, 750_000), (2400, 200_000)]
    note_ticks = [0, 350, 700, 1000, 1899, 1900, 2300, 2400, 5000]
    merged = sorted(
        [(tick, tempo_meta(mpqn)) for tick, mpqn in tempo_changes]
        + [(tick, encode_event(NoteOn(0, 60, 100))) for tick in note_ticks]
    )
    items = []
    cursor = 0
    for tick, raw in merged:
        items.append((tick - cursor, raw))
        cursor = tick
    timed = parse_smf(build_smf([items], division))
    assert len(timed) == len(note_ticks)
    worst = 0.0
    for event, tick in zip(timed, note_ticks):
        oracle = seconds_by_tick_walk(tick, tempo_changes, division)
        worst = max(worst, abs(event.time - oracle))
        assert abs(event.time - oracle) <= 1e-9
    report("SMF timing", f"{len(note_ticks)} events across 4 tempo segments, worst |dt|={worst:.1e}s")


def _thirty_second_scene():
    notes = [TimedEvent(tick / 960.0, ev) for tick, ev in melody_events(30.0)]
    pedals = [TimedEvent(tick / 960.0, ev) for tick, ev in pedal_events(30.0)]
    config = make_render_config(seed=777, envelope=EnvelopeParams(infinite_sustain=False))
    return notes, pedals, config


def test_render_determinism():
    notes, pedals, config = _thirty_second_scene()
    started = time.monotonic()
    first = render_offline(notes, pedals, config, duration=30.0)
    first_elapsed = time.monotonic() - started
    second = render_offline(notes, pedals, config, duration=30.0)
    wav_a = encode_wav_float32(first.audio, config.sample_rate)
    wav_b = encode_wav_float32(second.audio, config.sample_rate)
    log_a = "".join(measurement_json(r) + "\n" for r in first.measurements)
    log_b = "".join(measurement_json(r) + "\n" for r in second.measurements)
    assert wav_a == wav_b
    assert log_a == log_b
    assert len(first.measurements) > 0
    assert first_elapsed < 10.0
    report(
        "Render determinism",
        f"30s render byte-identical twice ({len(first.measurements)} measurements), {first_elapsed:.2f}s",
    )


def test_bus_independence_and_crossfade():
    notes = [TimedEvent(tick / 960.0, ev) for tick, ev in melody_events(6.0)]
    rotations = [
        TimedEvent(0.0, ControlChange(0, CC_X, 0)),
        TimedEvent(1.0, ControlChange(0, CC_X, 30)),
        TimedEvent(3.0, ControlChange(0, CC_X, 75)),
    ]
    quantum_muted = make_render_config(classical_gain=1.0, quantum_gain=0.0, seed=3)
    full = render_offline(notes, rotations, quantum_muted, duration=6.0)
    reference = render_offline(notes, rotations, quantum_muted, duration=6.0, solo=Bus.CLASSICAL)
    worst_c = float(np.max(np.abs(full.audio - reference.audio)))
    assert worst_c <= 1e-6

    classical_muted = make_render_config(classical_gain=0.0, quantum_gain=1.0, seed=3)
    full_q = render_offline(notes, rotations, classical_muted, duration=6.0)
    reference_q = render_offline(notes, rotations, classical_muted, duration=6.0, solo=Bus.QUANTUM)
    worst_q = float(np.max(np.abs(full_q.audio - reference_q.audio)))
    assert worst_q <= 1e-6

    config = make_render_config(
        quantum_wave_1="sine",
        envelope=EnvelopeParams(attack_s=0.02, infinite_sustain=True),
    )
    sustained = [TimedEvent(0.0, NoteOn(0, 64, 100)), TimedEvent(0.2, NoteOn(1, 59, 90))]
    fade = [TimedEvent(tick / 960.0, ev) for tick, ev in crossfade_pedal_events(1.0, 5.0)]
    result = render_offline(sustained, fade, config, duration=7.0)
    steps = np.abs(np.diff(result.audio))
    block = config.block_size
    boundary = steps[block - 1 :: block]
    in_block = np.delete(steps, np.arange(block - 1, len(steps), block))
    assert boundary.max() <= in_block.max() * 2
    report(
        "Bus independence",
        f"solo deltas ({worst_c:.2e}, {worst_q:.2e}) <= 1e-6; "
        f"crossfade boundary step {boundary.max():.2e} <= 2x in-block {in_block.max():.2e}",
    )


def _centroid(signal: np.ndarray, sample_rate: int) -> float:
    spectrum = np.abs(np.fft.rfft(signal * np.hanning(len(signal))))
    freqs = np.fft.rfftfreq(len(signal), 1.0 / sample_rate)
    return float((freqs * spectrum).sum() / spectrum.sum())


def test_qubit_audibility():
    config = make_render_config(classical_gain=0.0, quantum_gain=1.0)
    config = replace(config, mapping=replace(config.mapping, sensitivity=EQUATOR_SENSITIVITY))
    notes = [TimedEvent(0.0, NoteOn(0, 64, 100))]
    at_zero = render_offline(notes, [], config, duration=1.5)
    to_one = [
        TimedEvent(0.0, ControlChange(0, CC_X, 0)),
        TimedEvent(0.01, ControlChange(0, CC_X, 32)),
        TimedEvent(0.02, ControlChange(0, CC_X, 64)),  # two quarter turns: |1>
    ]
    at_one = render_offline(notes, to_one, config, duration=1.5)
    sr = config.sample_rate
    tail = slice(sr // 2, None)
    c0 = _centroid(at_zero.audio[tail], sr)
    c1 = _centroid(at_one.audio[tail], sr)
    relative = abs(c1 - c0) / max(c0, c1)
    assert relative > 0.10
    report("Qubit audibility", f"centroids {c0:.0f} Hz vs {c1:.0f} Hz ({relative:.0%} apart)")


def test_control_parity():
    fixture = [
        (CC_X, 0), (CC_X, 16), (CC_X, 48), (8, 100),
        (CC_MEASURE, 127), (CC_MEASURE, 0),
        (1, 0), (1, 40), (80, 127), (1, 80), (7, 20),
        (CC_MEASURE, 127), (CC_MEASURE, 0),
        (80, 0), (80, 127), (1, 10),
    ]
    config = make_render_config(seed=4242)

    def observe(engine: SynthEngine):
        vec = engine.bloch()
        return (
            vec.x, vec.y, vec.z,
            engine.bus_gain(Bus.CLASSICAL), engine.bus_gain(Bus.QUANTUM),
            tuple(r.outcome.bit for r in engine.measurements),
            engine.selected_axis,
        )

    engine_a = SynthEngine(config)
    state_a = initial_pedal_state(config.mapping)
    trajectory_a = []
    parser_state = None
    stream = b"".join(encode_event(ControlChange(0, c, v)) for c, v in fixture)
    for i in range(0, len(stream), 7):  # deliberately misaligned chunks
        events, parser_state = parse_stream(stream[i : i + 7], parser_state)
        for event in events:
            state_a = dispatch_event(engine_a, event, state_a)
            trajectory_a.append(observe(engine_a))

    engine_b = SynthEngine(config)
    state_b = initial_pedal_state(config.mapping)
    trajectory_b = []
    for controller, value in fixture:
        for event in control_message_to_events(
            {"type": "cc", "controller": controller, "value": value}, config.mapping
        ):
            state_b = dispatch_event(engine_b, event, state_b)
            trajectory_b.append(observe(engine_b))

    assert trajectory_a == trajectory_b
    assert trajectory_a[-1][5] == trajectory_b[-1][5]
    assert len(trajectory_a[-1][5]) == 2
    report("Control parity", f"{len(trajectory_a)} checkpoints identical across both paths")
