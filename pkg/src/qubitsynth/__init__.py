"""qubitsynth: a MIDI-driven single-qubit sonification engine.

Guitar-style note streams (string per channel, pitch bends) and pedal-style
control changes steer one simulated qubit; its Bloch coordinates shape the
quantum bus timbre while an ordinary voice feeds the classical bus, with
independent, click-free gain control over both.
"""

from .config import (
    ConfigError,
    EnvelopeParams,
    RenderConfig,
    SessionConfig,
    load_session_config,
    parse_session_config,
)
from .control import (
    Bus,
    ControlMapping,
    MappedAction,
    PedalState,
    RotateBy,
    SelectAxis,
    SetAbsoluteAngle,
    SetBusGain,
    TriggerMeasurement,
    default_mapping,
    detect_rising_edge,
    gain_from_cc,
    initial_pedal_state,
    map_event,
)
from .engine import (
    EnvelopeState,
    MeasurementRecord,
    SynthEngine,
    TelemetrySnapshot,
    Voice,
    note_frequency,
)
from .midi import (
    ControlChange,
    MidiEvent,
    NoteOff,
    NoteOn,
    ParserState,
    PitchBend,
    decode_pitch_bend,
    encode_event,
    parse_stream,
)
from .qubit import (
    BlochVector,
    MeasurementBasis,
    MeasurementOutcome,
    QubitState,
    RotationAxis,
    bloch_coordinates,
    born_probabilities,
    fidelity,
    measure,
    new_qubit,
    rotate,
)
from .render import RenderResult, dispatch_event, render_offline, write_measurement_log
from .session import LiveSession, control_message_to_events
from .smf import SmfError, SmfUnsupportedError, TimedEvent, parse_smf
from .wavfile import read_wav_float32, write_wav_float32

__version__ = "0.1.0"
