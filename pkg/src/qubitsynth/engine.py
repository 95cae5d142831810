"""Block-based polyphonic engine: independent classical and quantum buses.

One voice per string, monophonic per string. The classical bus is a plain
band-limited tone; the quantum bus blends two oscillator banks weighted by
the qubit's Bloch z coordinate, with a symmetric detune driven by the
azimuth. Every time-varying parameter (bus gains, timbre mix, detune)
moves along per-sample linear ramps, so block boundaries and measurement
collapses never step the output.

Determinism: given the same config (seed included) and the same call
sequence, output blocks are bit-identical. The measurement RNG is a
random.Random(seed) owned by the engine; each measurement consumes exactly
one uniform draw per qubit.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .config import EnvelopeParams, RenderConfig
from .control import (
    Bus,
    MappedAction,
    RotateBy,
    SelectAxis,
    SetAbsoluteAngle,
    SetBusGain,
    TriggerMeasurement,
)
from .midi import decode_pitch_bend
from .qubit import (
    BlochVector,
    MeasurementOutcome,
    QubitState,
    RotationAxis,
    bloch_coordinates,
    measure,
    new_qubit,
    rotate,
)

MAX_STRINGS = 6
VOICE_GAIN = 0.2  # per-voice headroom so six strings stay inside the soft clip
TABLE_SIZE = 8192
MAX_HARMONICS = 256


def note_frequency(note: int) -> float:
    """Equal-tempered frequency of a MIDI note, A4 (69) = 440 Hz."""
    return 440.0 * 2.0 ** ((note - 69) / 12.0)


# ---------------------------------------------------------------------------
# Band-limited oscillators
#
# Additive single-cycle tables, one per (waveform, harmonic count), read with
# linear interpolation. The harmonic count is fixed at note-on so that the
# highest partial sits at or below sample_rate/4, leaving a full octave of
# pitch-bend headroom before anything can alias.
# ---------------------------------------------------------------------------

_tables: dict[tuple[str, int], np.ndarray] = {}


def harmonic_cap(freq: float, sample_rate: int) -> int:
    """Highest harmonic kept at or below sample_rate/4 for this fundamental."""
    if freq <= 0:
        return 1
    return max(1, min(MAX_HARMONICS, int((sample_rate / 4.0) / freq)))


def wavetable(kind: str, k_max: int) -> np.ndarray:
    """Single cycle of the band-limited waveform, with a guard point for lerp."""
    key = (kind, k_max)
    cached = _tables.get(key)
    if cached is not None:
        return cached
    phase = np.arange(TABLE_SIZE, dtype=np.float64) / TABLE_SIZE
    cycle = np.zeros(TABLE_SIZE)
    if kind == "sine":
        cycle = np.sin(2.0 * np.pi * phase)
    elif kind == "saw":
        for k in range(1, k_max + 1):
            cycle += np.sin(2.0 * np.pi * k * phase) / k
        cycle *= 2.0 / np.pi
    elif kind == "square":
        for k in range(1, k_max + 1, 2):
            cycle += np.sin(2.0 * np.pi * k * phase) / k
        cycle *= 4.0 / np.pi
    elif kind == "triangle":
        sign = 1.0
        for k in range(1, k_max + 1, 2):
            cycle += sign * np.sin(2.0 * np.pi * k * phase) / (k * k)
            sign = -sign
        cycle *= 8.0 / (np.pi * np.pi)
    else:
        raise ValueError(f"unknown waveform {kind!r}")
    table = np.concatenate([cycle, cycle[:1]])
    table.setflags(write=False)
    _tables[key] = table
    return table


def osc_block(
    kind: str,
    k_max: int,
    phase: float,
    freq: float | np.ndarray,
    n: int,
    sample_rate: int,
) -> tuple[np.ndarray, float]:
    """Render n samples from phase at freq (scalar or per-sample array).

    Returns the samples and the wrapped phase after the block; the phase of
    sample i is the phase *before* advancing through it, so consecutive
    blocks are gapless.
    """
    if isinstance(freq, np.ndarray):
        steps = freq / sample_rate
        cum = np.cumsum(steps)
        phases = phase + cum - steps
        end_phase = (phase + cum[-1]) % 1.0
    else:
        step = freq / sample_rate
        phases = phase + step * np.arange(n)
        end_phase = (phase + step * n) % 1.0
    phases %= 1.0
    if kind == "sine":
        return np.sin(2.0 * np.pi * phases), end_phase
    table = wavetable(kind, k_max)
    position = phases * TABLE_SIZE
    index = position.astype(np.int64)
    frac = position - index
    samples = table[index] * (1.0 - frac) + table[index + 1] * frac
    return samples, end_phase


def linear_ramp(current: float, target: float, horizon: int, n: int) -> np.ndarray:
    """n samples walking from current toward target, arriving after horizon.

    horizon >= n just moves part of the way; horizon <= n arrives and holds.
    The first sample already takes one step, so chaining blocks never
    repeats a value.
    """
    if horizon <= 0 or current == target:
        return np.full(n, target)
    k = min(n, horizon)
    step = (target - current) / horizon
    out = np.empty(n)
    out[:k] = current + step * np.arange(1, k + 1)
    if k == horizon:
        out[k - 1] = target  # land exactly, no float residue
    if k < n:
        out[k:] = target
    return out


# ---------------------------------------------------------------------------
# Envelope
# ---------------------------------------------------------------------------


class EnvelopeState:
    """Linear ADSR; level is continuous across every stage transition.

    With infinite_sustain the level holds at the sustain plateau until the
    note is released (the sustainer-pickup behavior); without it the level
    keeps falling past the plateau at the decay slope until the voice dies
    out on its own, like a plucked string.
    """

    __slots__ = ("params", "sample_rate", "stage", "level", "_release_step")

    def __init__(self, params: EnvelopeParams, sample_rate: int):
        self.params = params
        self.sample_rate = sample_rate
        self.stage = "idle"
        self.level = 0.0
        self._release_step = 0.0

    def trigger(self) -> None:
        self.stage = "attack"

    def release(self) -> None:
        if self.stage == "idle":
            return
        samples = max(1, round(self.params.release_s * self.sample_rate))
        self._release_step = self.level / samples
        self.stage = "release"

    def _attack_step(self) -> float:
        return 1.0 / max(1, round(self.params.attack_s * self.sample_rate))

    def _decay_step(self) -> float:
        samples = max(1, round(self.params.decay_s * self.sample_rate))
        return (1.0 - self.params.sustain_level) / samples

    def render(self, n: int) -> np.ndarray:
        out = np.empty(n)
        i = 0
        while i < n:
            if self.stage == "idle":
                out[i:] = 0.0
                break
            if self.stage == "sustain":
                out[i:] = self.level
                break
            if self.stage == "attack":
                step = self._attack_step()
                needed = math.ceil((1.0 - self.level) / step) if step > 0 else 0
                if needed <= 0:
                    self.stage = "decay"
                    continue
                take = min(needed, n - i)
                seg = self.level + step * np.arange(1, take + 1)
                np.minimum(seg, 1.0, out=seg)
                out[i : i + take] = seg
                self.level = float(seg[-1])
                i += take
                if self.level >= 1.0:
                    self.stage = "decay"
            elif self.stage == "decay":
                step = self._decay_step()
                sustain = self.params.sustain_level
                floor = sustain if self.params.infinite_sustain else 0.0
                if step <= 0.0 or self.level <= floor:
                    # sustain_level == 1 never decays; treat as a hold
                    self.stage = "sustain" if self.params.infinite_sustain or step <= 0 else "idle"
                    if self.stage == "idle":
                        self.level = 0.0
                    continue
                needed = math.ceil((self.level - floor) / step)
                take = min(needed, n - i)
                seg = self.level - step * np.arange(1, take + 1)
                np.maximum(seg, floor, out=seg)
                out[i : i + take] = seg
                self.level = float(seg[-1])
                i += take
                if self.level <= floor:
                    self.level = floor
                    if self.params.infinite_sustain:
                        self.stage = "sustain"
                    else:
                        self.stage = "idle"
                        self.level = 0.0
            else:  # release
                step = self._release_step
                needed = math.ceil(self.level / step) if step > 0 else 0
                if needed <= 0:
                    self.stage = "idle"
                    self.level = 0.0
                    continue
                take = min(needed, n - i)
                seg = self.level - step * np.arange(1, take + 1)
                np.maximum(seg, 0.0, out=seg)
                out[i : i + take] = seg
                self.level = float(seg[-1])
                i += take
                if self.level <= 0.0:
                    self.level = 0.0
                    self.stage = "idle"
        return out


# ---------------------------------------------------------------------------
# Voices
# ---------------------------------------------------------------------------


class Voice:
    """One string's oscillator bank and envelope."""

    __slots__ = (
        "string_index",
        "note",
        "base_freq",
        "velocity_gain",
        "phase_0",
        "phase_1",
        "phase_c",
        "env",
        "k_classical",
        "k_bank_0",
        "k_bank_1",
    )

    def __init__(self, string_index: int, note: int, velocity: int, config: RenderConfig):
        self.string_index = string_index
        self.phase_0 = 0.0
        self.phase_1 = 0.0
        self.phase_c = 0.0
        self.env = EnvelopeState(config.envelope, config.sample_rate)
        self.retune(note, velocity, config)

    def retune(self, note: int, velocity: int, config: RenderConfig) -> None:
        """Point the voice at a new note; phases stay put so there is no click."""
        self.note = note
        self.base_freq = note_frequency(note)
        self.velocity_gain = velocity / 127.0
        cap = harmonic_cap(self.base_freq, config.sample_rate)
        self.k_classical = cap
        self.k_bank_0 = cap
        self.k_bank_1 = cap

    @property
    def active(self) -> bool:
        return self.env.stage != "idle"


@dataclass(frozen=True)
class MeasurementRecord:
    """One measurement as it happened in engine time."""

    time: float
    outcome: MeasurementOutcome
    string: int | None = None  # set only in per-string-qubit mode


@dataclass(frozen=True)
class TelemetrySnapshot:
    """Immutable engine state published to displays; never extrapolated."""

    time: float
    bloch: BlochVector
    classical_gain: float
    quantum_gain: float
    active_notes: tuple[tuple[int, int, float], ...]  # (string, note, bend)
    last_measurement: MeasurementRecord | None
    selected_axis: RotationAxis


class _GainRamp:
    """Per-sample linear ramp that completes in exactly ramp_samples."""

    __slots__ = ("current", "target", "remaining", "ramp_samples")

    def __init__(self, initial: float, ramp_samples: int):
        self.current = initial
        self.target = initial
        self.remaining = 0
        self.ramp_samples = ramp_samples

    def set_target(self, target: float) -> None:
        self.target = target
        self.remaining = 0 if target == self.current else self.ramp_samples

    def block(self, n: int) -> np.ndarray:
        if self.remaining <= 0:
            self.current = self.target
            return np.full(n, self.current)
        out = linear_ramp(self.current, self.target, self.remaining, n)
        self.remaining = max(0, self.remaining - n)
        self.current = float(out[-1])
        if self.remaining == 0:
            self.current = self.target
        return out


class SynthEngine:
    """Single-owner block engine; see the module docstring for the contract.

    Call order per block: any number of note_on/note_off/set_pitch_bend/
    apply_action calls, then one process_block. Telemetry snapshots are
    immutable and safe to hand to other threads.
    """

    def __init__(self, config: RenderConfig, solo: Bus | None = None):
        self.config = config
        self.sample_rate = config.sample_rate
        self.block_size = config.block_size
        self.solo = solo
        self.rng = random.Random(config.seed)
        self.ramp_samples = max(1, round(config.ramp_ms / 1000.0 * config.sample_rate))

        n_qubits = MAX_STRINGS if config.per_string_qubits else 1
        self.qubits: list[QubitState] = [new_qubit() for _ in range(n_qubits)]
        self._mix0 = [1.0] * n_qubits  # applied value at the last rendered sample
        self._detune = [0.0] * n_qubits
        self._collapse_left = [0] * n_qubits

        self.voices: list[Voice | None] = [None] * MAX_STRINGS
        self.bend = [0.0] * MAX_STRINGS  # semitones, per string
        self._gains = {
            Bus.CLASSICAL: _GainRamp(config.classical_gain, self.ramp_samples),
            Bus.QUANTUM: _GainRamp(config.quantum_gain, self.ramp_samples),
        }
        self._abs_angle = {axis: 0.0 for axis in RotationAxis}
        self.selected_axis = config.mapping.switch_axes[0]
        self.samples_rendered = 0
        self.measurements: list[MeasurementRecord] = []
        self.last_measurement: MeasurementRecord | None = None

    @property
    def time(self) -> float:
        return self.samples_rendered / self.sample_rate

    def bloch(self) -> BlochVector:
        return bloch_coordinates(self.qubits[0])

    def bus_gain(self, bus: Bus) -> float:
        return self._gains[bus].current

    # -- note path ----------------------------------------------------------

    def _string_for(self, channel: int) -> int | None:
        return self.config.channel_map.get(channel)

    def note_on(self, channel: int, note: int, velocity: int) -> None:
        string = self._string_for(channel)
        if string is None:
            return
        voice = self.voices[string]
        if voice is None:
            voice = Voice(string, note, velocity, self.config)
            self.voices[string] = voice
        else:
            voice.retune(note, velocity, self.config)  # newest note wins
        voice.env.trigger()

    def note_off(self, channel: int, note: int) -> None:
        string = self._string_for(channel)
        if string is None:
            return
        voice = self.voices[string]
        if voice is None or voice.note != note:
            return  # stale note off: no-op
        voice.env.release()

    def set_pitch_bend(self, channel: int, value: int) -> None:
        string = self._string_for(channel)
        if string is None:
            return
        self.bend[string] = decode_pitch_bend(value, self.config.pitch_bend_range)

    # -- control path -------------------------------------------------------

    def apply_action(self, action: MappedAction) -> None:
        if isinstance(action, RotateBy):
            self.qubits = [rotate(q, action.axis, action.angle) for q in self.qubits]
        elif isinstance(action, SetAbsoluteAngle):
            delta = action.angle - self._abs_angle[action.axis]
            self._abs_angle[action.axis] = action.angle
            if delta != 0.0:
                self.qubits = [rotate(q, action.axis, delta) for q in self.qubits]
        elif isinstance(action, TriggerMeasurement):
            per_string = self.config.per_string_qubits
            for i, qubit in enumerate(self.qubits):
                outcome, collapsed = measure(qubit, action.basis, self.rng)
                self.qubits[i] = collapsed
                self._collapse_left[i] = self.ramp_samples
                record = MeasurementRecord(self.time, outcome, i if per_string else None)
                self.measurements.append(record)
                self.last_measurement = record
        elif isinstance(action, SetBusGain):
            self._gains[action.bus].set_target(min(1.0, max(0.0, action.gain)))
        elif isinstance(action, SelectAxis):
            self.selected_axis = action.axis
        else:
            raise TypeError(f"not a mapped action: {action!r}")

    # -- audio path ----------------------------------------------------------

    def _param_block(self, qubit_index: int, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-sample timbre mix and detune, ramped toward the qubit's targets."""
        vec = bloch_coordinates(self.qubits[qubit_index])
        target_mix0 = (vec.z + 1.0) / 2.0
        azimuth = math.atan2(vec.y, vec.x)  # 0 at the poles
        target_detune = azimuth / math.pi * self.config.max_detune_cents
        left = self._collapse_left[qubit_index]
        horizon = left if left > 0 else n  # collapse stretches over ramp_ms
        mix0 = linear_ramp(self._mix0[qubit_index], target_mix0, horizon, n)
        detune = linear_ramp(self._detune[qubit_index], target_detune, horizon, n)
        self._mix0[qubit_index] = float(mix0[-1])
        self._detune[qubit_index] = float(detune[-1])
        self._collapse_left[qubit_index] = max(0, left - n)
        return mix0, detune

    def process_block(self, n: int) -> np.ndarray:
        """Render one block (n must equal the configured block size)."""
        if n != self.block_size:
            raise ValueError(f"block size is {self.block_size}, got {n}")
        cfg = self.config
        params = [self._param_block(i, n) for i in range(len(self.qubits))]
        classical = np.zeros(n)
        quantum = np.zeros(n)

        for string, voice in enumerate(self.voices):
            if voice is None:
                continue
            env = voice.env.render(n)
            amp = env * (voice.velocity_gain * VOICE_GAIN)
            eff_freq = voice.base_freq * 2.0 ** (self.bend[string] / 12.0)

            sig_c, voice.phase_c = osc_block(
                cfg.classical_wave, voice.k_classical, voice.phase_c, eff_freq, n, self.sample_rate
            )
            classical += amp * sig_c

            mix0, detune = params[string if cfg.per_string_qubits else 0]
            freq_0 = eff_freq * np.exp2(-detune / 2400.0)  # -detune/2 cents
            freq_1 = eff_freq * np.exp2(detune / 2400.0)  # +detune/2 cents
            sig_0, voice.phase_0 = osc_block(
                cfg.quantum_wave_0, voice.k_bank_0, voice.phase_0, freq_0, n, self.sample_rate
            )
            sig_1, voice.phase_1 = osc_block(
                cfg.quantum_wave_1, voice.k_bank_1, voice.phase_1, freq_1, n, self.sample_rate
            )
            quantum += amp * (mix0 * sig_0 + (1.0 - mix0) * sig_1)

            if not voice.active:
                self.voices[string] = None

        gain_c = self._gains[Bus.CLASSICAL].block(n)
        gain_q = self._gains[Bus.QUANTUM].block(n)
        if self.solo is Bus.CLASSICAL:
            mix = classical * gain_c
        elif self.solo is Bus.QUANTUM:
            mix = quantum * gain_q
        else:
            mix = classical * gain_c + quantum * gain_q

        self.samples_rendered += n
        return np.tanh(mix)  # soft clip keeps every sample strictly inside [-1, 1]

    # -- telemetry ------------------------------------------------------------

    def snapshot(self) -> TelemetrySnapshot:
        notes = tuple(
            (voice.string_index, voice.note, self.bend[voice.string_index])
            for voice in self.voices
            if voice is not None
        )
        return TelemetrySnapshot(
            time=self.time,
            bloch=self.bloch(),
            classical_gain=self.bus_gain(Bus.CLASSICAL),
            quantum_gain=self.bus_gain(Bus.QUANTUM),
            active_notes=notes,
            last_measurement=self.last_measurement,
            selected_axis=self.selected_axis,
        )
