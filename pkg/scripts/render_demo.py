#!/usr/bin/env python3
"""Build a demo scene (notes + pedal automation), render it, report stats.

Writes demo.mid, pedals.mid, demo.conf, demo.wav and the measurement log
into --out-dir (default ./demo_out), exercising the same offline path as
`qubitsynth render`.
"""

from __future__ import annotations

import argparse
import math
from pathlib import Path

from qubitsynth.cli import main as cli_main
from qubitsynth.midi import ControlChange, NoteOff, NoteOn, PitchBend
from qubitsynth.smfwrite import write_smf

TICKS_PER_SECOND = 960  # division 480 at 120 BPM

PHRASE = [(0, 40), (1, 47), (2, 52), (3, 55), (2, 52), (1, 47)]  # (string, note)

CONFIG = """\
sample_rate = 48000
block_size = 256
seed = 20250808
rotation_cc_a = 11
rotation_cc_b = 1
axis_switch_cc = 80
measure_cc = 82
classical_gain_cc = 7
quantum_gain_cc = 8
sensitivity = {sensitivity}
infinite_sustain = true
max_detune_cents = 35
"""


def ticks(seconds: float) -> int:
    return round(seconds * TICKS_PER_SECOND)


def build_melody(duration_s: float):
    events = []
    t = 0.0
    i = 0
    while t + 0.5 < duration_s:
        string, note = PHRASE[i % len(PHRASE)]
        events.append((ticks(t), NoteOn(string, note, 96 + (i % 3) * 10)))
        if i % 4 == 1:  # whammy dip
            events.append((ticks(t + 0.15), PitchBend(string, 6200)))
            events.append((ticks(t + 0.35), PitchBend(string, 8192)))
        events.append((ticks(t + 0.45), NoteOff(string, note, 0)))
        t += 0.5
        i += 1
    return events


def build_pedals(duration_s: float):
    """Slow X sweep, a crossfade out and back, one measurement every 4 s."""
    events = [(0, ControlChange(0, 11, 0)), (0, ControlChange(0, 7, 127)), (0, ControlChange(0, 8, 90))]
    steps = int(duration_s / 0.25)
    for i in range(steps):
        t = i * 0.25
        sweep = int(63.5 * (1 - math.cos(2 * math.pi * t / duration_s)))
        events.append((ticks(t), ControlChange(0, 11, min(127, sweep))))
        fade = int(63.5 * (1 - math.cos(4 * math.pi * t / duration_s)))
        events.append((ticks(t), ControlChange(0, 7, 127 - fade)))
        events.append((ticks(t), ControlChange(0, 8, fade)))
    t = 2.0
    while t < duration_s:
        events.append((ticks(t), ControlChange(0, 82, 127)))
        events.append((ticks(t + 0.1), ControlChange(0, 82, 0)))
        t += 4.0
    events.sort(key=lambda pair: pair[0])
    return events


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="demo_out")
    parser.add_argument("--duration", type=float, default=20.0)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    melody_path = out_dir / "demo.mid"
    pedals_path = out_dir / "pedals.mid"
    config_path = out_dir / "demo.conf"
    wav_path = out_dir / "demo.wav"

    write_smf(melody_path, [build_melody(args.duration)], 480)
    write_smf(pedals_path, [build_pedals(args.duration)], 480)
    config_path.write_text(CONFIG.format(sensitivity=repr(math.tau)))

    return cli_main(
        ["render", "--midi", str(melody_path), "--pedals", str(pedals_path),
         "--config", str(config_path), "--out", str(wav_path)]
    )


if __name__ == "__main__":
    raise SystemExit(main())
