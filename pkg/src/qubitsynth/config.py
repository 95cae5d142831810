"""Session configuration: a flat `key = value` text file, strictly validated.

Unknown keys, duplicate keys, missing required keys, and out-of-range values
are all hard errors naming the offending key, so a bad rig file fails at
soundcheck instead of on stage. The full key table lives in the README and
in KNOWN_KEYS below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .control import MODES, TAPERS, ControlMapping
from .qubit import MeasurementBasis, RotationAxis

SAMPLE_RATES = (44100, 48000, 96000)
WAVEFORMS = ("sine", "saw", "triangle", "square")


class ConfigError(ValueError):
    """Invalid or missing configuration; the message names the offending key."""


@dataclass(frozen=True)
class EnvelopeParams:
    attack_s: float = 0.003
    decay_s: float = 0.12
    sustain_level: float = 0.5
    release_s: float = 0.25
    infinite_sustain: bool = False  # sustainer on: hold at sustain until note off

    def __post_init__(self) -> None:
        for name in ("attack_s", "decay_s", "release_s"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not 0.0 <= self.sustain_level <= 1.0:
            raise ConfigError("sustain_level must be in [0, 1]")


def _identity_channel_map() -> dict[int, int]:
    return {channel: channel for channel in range(6)}


def _default_mapping() -> ControlMapping:
    from .control import default_mapping

    return default_mapping()


@dataclass(frozen=True)
class RenderConfig:
    """Everything that determines an offline render, including the seed."""

    sample_rate: int = 48000
    block_size: int = 256
    seed: int = 0
    ramp_ms: float = 10.0
    max_detune_cents: float = 50.0
    pitch_bend_range: float = 2.0
    channel_map: Mapping[int, int] = field(default_factory=_identity_channel_map)
    classical_wave: str = "saw"
    quantum_wave_0: str = "sine"
    quantum_wave_1: str = "saw"
    classical_gain: float = 1.0
    quantum_gain: float = 1.0
    wav_channels: int = 1
    per_string_qubits: bool = False
    envelope: EnvelopeParams = field(default_factory=EnvelopeParams)
    mapping: ControlMapping = field(default_factory=_default_mapping)

    def __post_init__(self) -> None:
        if self.sample_rate not in SAMPLE_RATES:
            raise ConfigError(f"sample_rate must be one of {SAMPLE_RATES}, got {self.sample_rate}")
        if (
            not 32 <= self.block_size <= 4096
            or self.block_size & (self.block_size - 1) != 0
        ):
            raise ConfigError(f"block_size must be a power of two in [32, 4096], got {self.block_size}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if not self.ramp_ms > 0:
            raise ConfigError(f"ramp_ms must be positive, got {self.ramp_ms}")
        if self.max_detune_cents < 0:
            raise ConfigError("max_detune_cents must be >= 0")
        if not self.pitch_bend_range > 0:
            raise ConfigError("pitch_bend_range must be positive")
        for name in ("classical_wave", "quantum_wave_0", "quantum_wave_1"):
            if getattr(self, name) not in WAVEFORMS:
                raise ConfigError(f"{name} must be one of {WAVEFORMS}, got {getattr(self, name)!r}")
        for name in ("classical_gain", "quantum_gain"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.wav_channels not in (1, 2):
            raise ConfigError(f"wav_channels must be 1 or 2, got {self.wav_channels}")
        strings = list(self.channel_map.values())
        for channel, string in self.channel_map.items():
            if not 0 <= channel <= 15:
                raise ConfigError(f"channel_map channel out of range: {channel}")
            if not 0 <= string <= 5:
                raise ConfigError(f"channel_map string out of range: {string}")
        if len(set(strings)) != len(strings):
            raise ConfigError("channel_map must not route two channels to one string")


@dataclass(frozen=True)
class SessionConfig:
    render: RenderConfig = field(default_factory=RenderConfig)
    telemetry_port: int = 7788
    telemetry_rate_hz: float = 30.0
    telemetry_ws_port: int = 0  # 0 disables the browser bridge

    def __post_init__(self) -> None:
        for name in ("telemetry_port", "telemetry_ws_port"):
            if not 0 <= getattr(self, name) <= 65535:
                raise ConfigError(f"{name} must be a port number in [0, 65535]")
        if not self.telemetry_rate_hz > 0:
            raise ConfigError("telemetry_rate_hz must be positive")


# key -> (required, description); the parser accepts exactly these keys.
KNOWN_KEYS: dict[str, tuple[bool, str]] = {
    "sample_rate": (True, "output sample rate: 44100, 48000 or 96000"),
    "block_size": (True, "render block in samples; power of two in [32, 4096]"),
    "seed": (False, "unsigned 64-bit measurement RNG seed (default 0)"),
    "ramp_ms": (False, "gain/collapse ramp length in ms (default 10)"),
    "max_detune_cents": (False, "detune span of the quantum banks (default 50)"),
    "pitch_bend_range": (False, "pitch-bend range in semitones (default 2)"),
    "channel_map": (False, "MIDI channel to string index, e.g. 0:0,1:1,...,5:5"),
    "classical_wave": (False, "classical bus waveform (default saw)"),
    "quantum_wave_0": (False, "quantum bank 0 waveform (default sine)"),
    "quantum_wave_1": (False, "quantum bank 1 waveform (default saw)"),
    "classical_gain": (False, "initial classical bus gain 0..1 (default 1)"),
    "quantum_gain": (False, "initial quantum bus gain 0..1 (default 1)"),
    "wav_channels": (False, "1 = mono, 2 = duplicated stereo (default 1)"),
    "per_string_qubits": (False, "experimental: one qubit per string (default false)"),
    "attack_s": (False, "envelope attack seconds (default 0.003)"),
    "decay_s": (False, "envelope decay seconds (default 0.12)"),
    "sustain_level": (False, "envelope sustain level 0..1 (default 0.5)"),
    "release_s": (False, "envelope release seconds (default 0.25)"),
    "infinite_sustain": (False, "hold notes at sustain until note off (default false)"),
    "rotation_cc_a": (True, "controller number of rotation pedal A"),
    "rotation_cc_a_axis": (False, "axis of pedal A: X, Y or Z (default X)"),
    "rotation_cc_b": (True, "controller number of rotation pedal B (switchable)"),
    "rotation_cc_b_axis": (False, "primary axis of pedal B (default Y)"),
    "axis_switch_cc": (True, "controller number of the axis switch"),
    "switch_alternate_axis": (False, "pedal B's alternate axis (default Z)"),
    "measure_cc": (True, "controller number of the measurement switch"),
    "measure_basis": (False, "basis of the measurement switch: Z or X (default Z)"),
    "measure_cc_x": (False, "optional second switch triggering X measurement"),
    "classical_gain_cc": (True, "controller number of the classical volume pedal"),
    "quantum_gain_cc": (True, "controller number of the quantum volume pedal"),
    "cc_mode": (False, "rotation pedal mode: incremental or absolute (default incremental)"),
    "sensitivity": (False, "radians per full pedal sweep (default 2*pi)"),
    "cc_threshold": (False, "switch on-threshold 1..127 (default 64)"),
    "gain_taper": (False, "volume pedal taper: audio or linear (default audio)"),
    "telemetry_port": (False, "TCP port of the newline-JSON telemetry socket (default 7788)"),
    "telemetry_rate_hz": (False, "telemetry snapshots per second (default 30)"),
    "telemetry_ws_port": (False, "WebSocket bridge port for the browser UI; 0 = off (default 0)"),
}

_AXES = {"X": RotationAxis.X, "Y": RotationAxis.Y, "Z": RotationAxis.Z}
_BASES = {"Z": MeasurementBasis.Z, "X": MeasurementBasis.X}


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw, 0)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float(key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite, got {raw!r}")
    return value


def _parse_bool(key: str, raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {raw!r}")


def _parse_axis(key: str, raw: str) -> RotationAxis:
    axis = _AXES.get(raw.upper())
    if axis is None:
        raise ConfigError(f"{key}: expected X, Y or Z, got {raw!r}")
    return axis


def _parse_basis(key: str, raw: str) -> MeasurementBasis:
    basis = _BASES.get(raw.upper())
    if basis is None:
        raise ConfigError(f"{key}: expected Z or X, got {raw!r}")
    return basis


def _parse_choice(key: str, raw: str, choices: tuple[str, ...]) -> str:
    lowered = raw.lower()
    if lowered not in choices:
        raise ConfigError(f"{key}: expected one of {choices}, got {raw!r}")
    return lowered


def _parse_channel_map(key: str, raw: str) -> dict[int, int]:
    table: dict[int, int] = {}
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ConfigError(f"{key}: expected channel:string pairs, got {part!r}")
        channel_raw, string_raw = part.split(":", 1)
        channel = _parse_int(key, channel_raw.strip())
        if channel in table:
            raise ConfigError(f"{key}: duplicate channel {channel}")
        table[channel] = _parse_int(key, string_raw.strip())
    if not table:
        raise ConfigError(f"{key}: channel map must not be empty")
    return table


def read_key_values(text: str, source: str = "<config>") -> dict[str, str]:
    """Split the flat file into key -> raw value, rejecting malformed lines."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        raw = raw.strip()
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = raw
    return values


def parse_session_config(text: str, source: str = "<config>") -> SessionConfig:
    values = read_key_values(text, source)
    for key in values:
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}: unknown key {key!r}")
    for key, (required, _) in KNOWN_KEYS.items():
        if required and key not in values:
            raise ConfigError(f"{source}: missing required key {key!r}")

    def get(key: str) -> str | None:
        return values.get(key)

    rotation_cc_a = _parse_int("rotation_cc_a", values["rotation_cc_a"])
    rotation_cc_b = _parse_int("rotation_cc_b", values["rotation_cc_b"])
    axis_a = _parse_axis("rotation_cc_a_axis", get("rotation_cc_a_axis") or "X")
    axis_b = _parse_axis("rotation_cc_b_axis", get("rotation_cc_b_axis") or "Y")
    alternate = _parse_axis("switch_alternate_axis", get("switch_alternate_axis") or "Z")
    measure_cc_x = get("measure_cc_x")

    try:
        mapping = ControlMapping(
            rotation_cc={rotation_cc_a: axis_a, rotation_cc_b: axis_b},
            axis_switch_cc=_parse_int("axis_switch_cc", values["axis_switch_cc"]),
            switch_controller=rotation_cc_b,
            switch_axes=(axis_b, alternate),
            measure_cc=_parse_int("measure_cc", values["measure_cc"]),
            classical_gain_cc=_parse_int("classical_gain_cc", values["classical_gain_cc"]),
            quantum_gain_cc=_parse_int("quantum_gain_cc", values["quantum_gain_cc"]),
            measure_basis=_parse_basis("measure_basis", get("measure_basis") or "Z"),
            measure_cc_x=_parse_int("measure_cc_x", measure_cc_x) if measure_cc_x else None,
            mode=_parse_choice("cc_mode", get("cc_mode") or "incremental", MODES),
            sensitivity=_parse_float("sensitivity", get("sensitivity") or str(math.tau)),
            threshold=_parse_int("cc_threshold", get("cc_threshold") or "64"),
            taper=_parse_choice("gain_taper", get("gain_taper") or "audio", TAPERS),
        )

        envelope = EnvelopeParams(
            attack_s=_parse_float("attack_s", get("attack_s") or "0.003"),
            decay_s=_parse_float("decay_s", get("decay_s") or "0.12"),
            sustain_level=_parse_float("sustain_level", get("sustain_level") or "0.5"),
            release_s=_parse_float("release_s", get("release_s") or "0.25"),
            infinite_sustain=_parse_bool("infinite_sustain", get("infinite_sustain") or "false"),
        )

        render = RenderConfig(
            sample_rate=_parse_int("sample_rate", values["sample_rate"]),
            block_size=_parse_int("block_size", values["block_size"]),
            seed=_parse_int("seed", get("seed") or "0"),
            ramp_ms=_parse_float("ramp_ms", get("ramp_ms") or "10"),
            max_detune_cents=_parse_float("max_detune_cents", get("max_detune_cents") or "50"),
            pitch_bend_range=_parse_float("pitch_bend_range", get("pitch_bend_range") or "2"),
            channel_map=(
                _parse_channel_map("channel_map", values["channel_map"])
                if "channel_map" in values
                else _identity_channel_map()
            ),
            classical_wave=_parse_choice("classical_wave", get("classical_wave") or "saw", WAVEFORMS),
            quantum_wave_0=_parse_choice("quantum_wave_0", get("quantum_wave_0") or "sine", WAVEFORMS),
            quantum_wave_1=_parse_choice("quantum_wave_1", get("quantum_wave_1") or "saw", WAVEFORMS),
            classical_gain=_parse_float("classical_gain", get("classical_gain") or "1"),
            quantum_gain=_parse_float("quantum_gain", get("quantum_gain") or "1"),
            wav_channels=_parse_int("wav_channels", get("wav_channels") or "1"),
            per_string_qubits=_parse_bool("per_string_qubits", get("per_string_qubits") or "false"),
            envelope=envelope,
            mapping=mapping,
        )

        return SessionConfig(
            render=render,
            telemetry_port=_parse_int("telemetry_port", get("telemetry_port") or "7788"),
            telemetry_rate_hz=_parse_float("telemetry_rate_hz", get("telemetry_rate_hz") or "30"),
            telemetry_ws_port=_parse_int("telemetry_ws_port", get("telemetry_ws_port") or "0"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{source}: {exc}") from exc


def load_session_config(path: str | Path) -> SessionConfig:
    path = Path(path)
    return parse_session_config(path.read_text(encoding="utf-8"), source=str(path))
