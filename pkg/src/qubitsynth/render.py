"""Offline rendering: merge timed note and pedal events into a block loop.

Events are quantized to the start of their containing block and applied in
time order (notes before pedals on exact ties), which makes the output a
pure function of (events, pedal_events, config) -- the render determinism
contract the tests pin down byte-for-byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RenderConfig
from .control import Bus, PedalState, initial_pedal_state, map_event
from .engine import MeasurementRecord, SynthEngine
from .midi import ControlChange, MidiEvent, NoteOff, NoteOn, PitchBend
from .smf import TimedEvent


@dataclass(frozen=True)
class RenderResult:
    audio: np.ndarray  # mono float64, one entry per sample
    measurements: list[MeasurementRecord]
    sample_rate: int


def dispatch_event(
    engine: SynthEngine, event: MidiEvent, pedal_state: PedalState
) -> PedalState:
    """Route one decoded event into the engine; returns the new pedal state."""
    if isinstance(event, NoteOn):
        engine.note_on(event.channel, event.note, event.velocity)
    elif isinstance(event, NoteOff):
        engine.note_off(event.channel, event.note)
    elif isinstance(event, PitchBend):
        engine.set_pitch_bend(event.channel, event.value)
    elif isinstance(event, ControlChange):
        actions, pedal_state = map_event(event, engine.config.mapping, pedal_state)
        for action in actions:
            engine.apply_action(action)
    return pedal_state


def _check_sorted(events: list[TimedEvent], name: str) -> None:
    for i in range(1, len(events)):
        if events[i].time < events[i - 1].time:
            raise ValueError(f"{name} must be sorted by time (index {i})")


def render_offline(
    events: list[TimedEvent],
    pedal_events: list[TimedEvent],
    config: RenderConfig,
    duration: float | None = None,
    solo: Bus | None = None,
) -> RenderResult:
    """Render the merged event timeline to an audio buffer plus measurement log.

    duration defaults to the last event time plus the release tail. solo
    renders a single bus through the identical signal path, which is the
    reference the bus-independence checks compare against.
    """
    _check_sorted(events, "events")
    _check_sorted(pedal_events, "pedal_events")

    # Stable merge; at equal times note-stream events land before pedal events.
    merged = sorted(
        [(ev.time, 0, i, ev.event) for i, ev in enumerate(events)]
        + [(ev.time, 1, i, ev.event) for i, ev in enumerate(pedal_events)],
        key=lambda item: (item[0], item[1], item[2]),
    )

    sr = config.sample_rate
    block = config.block_size
    if duration is None:
        last = merged[-1][0] if merged else 0.0
        duration = last + config.envelope.release_s + 0.5
    n_blocks = max(1, math.ceil(duration * sr / block))

    engine = SynthEngine(config, solo=solo)
    pedal_state = initial_pedal_state(config.mapping)
    blocks: list[np.ndarray] = []
    cursor = 0
    for b in range(n_blocks):
        while cursor < len(merged):
            time = merged[cursor][0]
            # nearest sample first, so times that came from exact tick math
            # never fall one block early on float residue
            if int(round(time * sr)) // block > b:
                break
            pedal_state = dispatch_event(engine, merged[cursor][3], pedal_state)
            cursor += 1
        blocks.append(engine.process_block(block))

    return RenderResult(np.concatenate(blocks), engine.measurements, sr)


def measurement_json(record: MeasurementRecord) -> str:
    """One line of the measurement log."""
    payload: dict[str, object] = {
        "time_seconds": record.time,
        "basis": record.outcome.basis.value,
        "bit": record.outcome.bit,
        "pre_probability": record.outcome.pre_probability,
    }
    if record.string is not None:
        payload["string"] = record.string
    return json.dumps(payload)


def write_measurement_log(path: str | Path, measurements: list[MeasurementRecord]) -> None:
    lines = "".join(measurement_json(record) + "\n" for record in measurements)
    Path(path).write_text(lines, encoding="utf-8")


def measurement_log_path(out_path: str | Path) -> Path:
    """Log file written beside the WAV: <stem>.measurements.jsonl."""
    out = Path(out_path)
    return out.with_name(out.stem + ".measurements.jsonl")
