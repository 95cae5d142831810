"""Pedal and switch semantics: ControlChange streams become semantic actions.

Expression pedals drive axis rotations (relative by default so the first
touch never jumps the state), one switch retargets a pedal to the third
axis, measurement switches fire on the rising edge only (a momentary press;
a latching pedal would fire on every other press), and two volume pedals
retarget the bus gains through a taper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .midi import ControlChange, MidiEvent
from .qubit import MeasurementBasis, RotationAxis


class Bus(Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"


@dataclass(frozen=True)
class RotateBy:
    axis: RotationAxis
    angle: float  # radians

    def __post_init__(self) -> None:
        if not math.isfinite(self.angle):
            raise ValueError(f"rotation angle must be finite, got {self.angle!r}")


@dataclass(frozen=True)
class SetAbsoluteAngle:
    axis: RotationAxis
    angle: float  # radians from pedal heel position

    def __post_init__(self) -> None:
        if not math.isfinite(self.angle):
            raise ValueError(f"rotation angle must be finite, got {self.angle!r}")


@dataclass(frozen=True)
class TriggerMeasurement:
    basis: MeasurementBasis


@dataclass(frozen=True)
class SetBusGain:
    bus: Bus
    gain: float  # linear, 0..1

    def __post_init__(self) -> None:
        if not 0.0 <= self.gain <= 1.0:
            raise ValueError(f"gain must be in [0, 1], got {self.gain!r}")


@dataclass(frozen=True)
class SelectAxis:
    axis: RotationAxis


MappedAction = RotateBy | SetAbsoluteAngle | TriggerMeasurement | SetBusGain | SelectAxis

MODES = ("incremental", "absolute")
TAPERS = ("audio", "linear")


@dataclass(frozen=True)
class ControlMapping:
    """Which controller numbers do what, and how pedal values scale.

    switch_controller is the rotation pedal whose axis the axis-switch
    toggles between switch_axes; its rotation_cc entry is the primary axis.
    """

    rotation_cc: Mapping[int, RotationAxis]
    axis_switch_cc: int
    switch_controller: int
    switch_axes: tuple[RotationAxis, RotationAxis]
    measure_cc: int
    classical_gain_cc: int
    quantum_gain_cc: int
    measure_basis: MeasurementBasis = MeasurementBasis.Z
    measure_cc_x: int | None = None
    mode: str = "incremental"
    sensitivity: float = math.tau  # radians per full 0-127 sweep
    threshold: int = 64  # switch turns on at value >= threshold
    taper: str = "audio"

    def __post_init__(self) -> None:
        controllers = list(self.rotation_cc) + [
            self.axis_switch_cc,
            self.measure_cc,
            self.classical_gain_cc,
            self.quantum_gain_cc,
        ]
        if self.measure_cc_x is not None:
            controllers.append(self.measure_cc_x)
        for cc in controllers:
            if not 0 <= cc <= 127:
                raise ValueError(f"controller number out of range: {cc}")
        if len(set(controllers)) != len(controllers):
            raise ValueError(f"controller numbers must be distinct, got {sorted(controllers)}")
        if self.switch_controller not in self.rotation_cc:
            raise ValueError("switch_controller must be one of the rotation controllers")
        if self.rotation_cc[self.switch_controller] is not self.switch_axes[0]:
            raise ValueError("switch_axes[0] must be the switchable pedal's primary axis")
        if not self.sensitivity > 0:
            raise ValueError(f"sensitivity must be positive, got {self.sensitivity!r}")
        if not 1 <= self.threshold <= 127:
            raise ValueError(f"threshold must be in [1, 127], got {self.threshold!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.taper not in TAPERS:
            raise ValueError(f"taper must be one of {TAPERS}, got {self.taper!r}")


def default_mapping() -> ControlMapping:
    """Two rotation pedals (X, Y), switch to Z on pedal B, Z measurement."""
    return ControlMapping(
        rotation_cc={11: RotationAxis.X, 1: RotationAxis.Y},
        axis_switch_cc=80,
        switch_controller=1,
        switch_axes=(RotationAxis.Y, RotationAxis.Z),
        measure_cc=82,
        classical_gain_cc=7,
        quantum_gain_cc=8,
    )


@dataclass(frozen=True)
class PedalState:
    """Last seen controller values plus the switchable pedal's current axis."""

    last_value: Mapping[int, int] = field(default_factory=dict)
    active_axis: RotationAxis = RotationAxis.Y

    def value_of(self, controller: int) -> int | None:
        return self.last_value.get(controller)


def initial_pedal_state(mapping: ControlMapping) -> PedalState:
    return PedalState({}, mapping.switch_axes[0])


def detect_rising_edge(prev: int | None, new: int, threshold: int = 64) -> bool:
    """True iff the value crossed from below threshold (or absent) to at-or-above."""
    return (prev is None or prev < threshold) and new >= threshold


def gain_from_cc(value: int, taper: str) -> float:
    """CC value to a linear gain in [0, 1]; endpoints map exactly to 0 and 1."""
    if not 0 <= value <= 127:
        raise ValueError(f"CC value out of range: {value!r}")
    x = value / 127.0
    if taper == "linear":
        return x
    if taper == "audio":
        return x * x
    raise ValueError(f"unknown taper {taper!r}")


def map_event(
    event: MidiEvent, mapping: ControlMapping, state: PedalState
) -> tuple[list[MappedAction], PedalState]:
    """Translate one event into semantic actions; non-CC events pass through.

    Pure function of its arguments: the updated PedalState is returned, the
    input state is never mutated.
    """
    if not isinstance(event, ControlChange):
        return [], state
    cc = event.controller
    value = event.value
    prev = state.value_of(cc)
    active_axis = state.active_axis
    actions: list[MappedAction] = []

    if cc in mapping.rotation_cc:
        axis = active_axis if cc == mapping.switch_controller else mapping.rotation_cc[cc]
        if value != prev:
            if mapping.mode == "incremental":
                if prev is not None:  # first touch only establishes the position
                    angle = (value - prev) / 127.0 * mapping.sensitivity
                    actions.append(RotateBy(axis, angle))
            else:
                actions.append(SetAbsoluteAngle(axis, value / 127.0 * mapping.sensitivity))
    elif cc == mapping.axis_switch_cc:
        if detect_rising_edge(prev, value, mapping.threshold):
            primary, alternate = mapping.switch_axes
            active_axis = alternate if active_axis is primary else primary
            actions.append(SelectAxis(active_axis))
    elif cc == mapping.measure_cc:
        if detect_rising_edge(prev, value, mapping.threshold):
            actions.append(TriggerMeasurement(mapping.measure_basis))
    elif mapping.measure_cc_x is not None and cc == mapping.measure_cc_x:
        if detect_rising_edge(prev, value, mapping.threshold):
            actions.append(TriggerMeasurement(MeasurementBasis.X))
    elif cc == mapping.classical_gain_cc:
        actions.append(SetBusGain(Bus.CLASSICAL, gain_from_cc(value, mapping.taper)))
    elif cc == mapping.quantum_gain_cc:
        actions.append(SetBusGain(Bus.QUANTUM, gain_from_cc(value, mapping.taper)))

    new_last = dict(state.last_value)
    new_last[cc] = value
    return actions, PedalState(new_last, active_axis)
