"""Live session: control ingestion, the render loop, and telemetry wiring.

Three contexts: producers (MIDI byte source polling plus socket readers)
feed one bounded, ordered queue; the render loop is the sole engine owner
and never waits on I/O; the telemetry publisher reads immutable snapshots.
Socket control messages become ordinary ControlChange events, so the engine
cannot tell a browser pedal from a hardware one.
"""

from __future__ import annotations

import logging
import os
import queue
import threading
import time

import numpy as np

from .config import SessionConfig
from .control import ControlMapping, initial_pedal_state
from .engine import SynthEngine
from .midi import ControlChange, MidiEvent, ParserState, parse_stream
from .render import dispatch_event
from .telemetry import TelemetryServer, snapshot_to_dict
from .wavfile import write_wav_float32

log = logging.getLogger(__name__)


class NullMidiSource:
    """No hardware attached: the session runs on socket control alone."""

    def read(self) -> bytes:
        return b""


class FileMidiSource:
    """Raw MIDI bytes from a file or FIFO; returns whatever is available."""

    def __init__(self, path: str, chunk: int = 4096):
        self._fd = os.open(path, os.O_RDONLY | os.O_NONBLOCK)
        self._chunk = chunk

    def read(self) -> bytes:
        try:
            return os.read(self._fd, self._chunk) or b""
        except BlockingIOError:
            return b""

    def close(self) -> None:
        os.close(self._fd)


class NullAudioSink:
    """Consumes blocks while pacing the render loop to wall-clock time."""

    def __init__(self) -> None:
        self._sample_rate = 48000
        self._start = 0.0
        self._samples = 0

    def start(self, sample_rate: int) -> None:
        self._sample_rate = sample_rate
        self._start = time.monotonic()
        self._samples = 0

    def write(self, block: np.ndarray) -> None:
        self._samples += len(block)
        deadline = self._start + self._samples / self._sample_rate
        delay = deadline - time.monotonic()
        if delay > 0:
            time.sleep(delay)

    def close(self) -> None:
        pass


class WavFileSink:
    """Records the live session to a WAV written on close.

    Paces the render loop exactly like the null device it stands in for;
    a live session must run at wall-clock speed so socket control arrives
    in performance time (offline-fast rendering is the render command's
    job).
    """

    def __init__(self, path: str, channels: int = 1):
        self._path = path
        self._channels = channels
        self._pacer = NullAudioSink()
        self._sample_rate = 48000
        self._blocks: list[np.ndarray] = []

    def start(self, sample_rate: int) -> None:
        self._sample_rate = sample_rate
        self._pacer.start(sample_rate)

    def write(self, block: np.ndarray) -> None:
        self._blocks.append(block)
        self._pacer.write(block)

    def close(self) -> None:
        if self._blocks:
            audio = np.concatenate(self._blocks)
            write_wav_float32(self._path, audio, self._sample_rate, self._channels)


def control_message_to_events(message: dict, mapping: ControlMapping) -> list[MidiEvent]:
    """Decode one socket control message into the events a pedal would send.

    cc messages map one-to-one; measure messages emulate a momentary press
    (value 127 then 0) on the switch configured for the requested basis.
    Raises ValueError for anything malformed, which the server counts and
    drops.
    """
    kind = message.get("type")
    if kind == "cc":
        controller = message.get("controller")
        value = message.get("value")
        if not isinstance(controller, int) or not isinstance(value, int):
            raise ValueError("cc message needs integer controller and value")
        return [ControlChange(0, controller, value)]
    if kind == "measure":
        basis = str(message.get("basis", mapping.measure_basis.value)).upper()
        if basis == mapping.measure_basis.value:
            cc = mapping.measure_cc
        elif basis == "X" and mapping.measure_cc_x is not None:
            cc = mapping.measure_cc_x
        else:
            raise ValueError(f"no measurement switch configured for basis {basis!r}")
        return [ControlChange(0, cc, 127), ControlChange(0, cc, 0)]
    raise ValueError(f"unknown control message type {kind!r}")


class LiveSession:
    """Runs the block loop against adapters until stopped.

    The engine core never touches the adapters' platform details: a MIDI
    source is anything with read() -> bytes, an audio sink anything with
    start/write/close.
    """

    def __init__(
        self,
        config: SessionConfig,
        midi_source=None,
        audio_sink=None,
        host: str = "127.0.0.1",
        static_dir=None,
    ):
        self.config = config
        self.engine = SynthEngine(config.render)
        self.midi_source = midi_source if midi_source is not None else NullMidiSource()
        self.audio_sink = audio_sink if audio_sink is not None else NullAudioSink()
        self._queue: queue.Queue[MidiEvent] = queue.Queue(maxsize=4096)
        self._pedal_state = initial_pedal_state(config.render.mapping)
        self._parser_state = ParserState()
        self._latest = self.engine.snapshot()
        self._stop = threading.Event()
        self._render_thread: threading.Thread | None = None
        self._sink_error: Exception | None = None
        self.dropped_control_events = 0
        self.telemetry = TelemetryServer(
            snapshot_fn=self._snapshot_dict,
            control_sink=self._handle_control_message,
            host=host,
            port=config.telemetry_port,
            ws_port=config.telemetry_ws_port if config.telemetry_ws_port else None,
            rate_hz=config.telemetry_rate_hz,
            static_dir=static_dir,
        )

    # -- wiring ---------------------------------------------------------------

    def _snapshot_dict(self) -> dict | None:
        return snapshot_to_dict(self._latest)

    def _handle_control_message(self, message: dict) -> None:
        for event in control_message_to_events(message, self.config.render.mapping):
            self._enqueue(event)

    def _enqueue(self, event: MidiEvent) -> None:
        try:
            self._queue.put_nowait(event)  # producers never block the render loop
        except queue.Full:
            self.dropped_control_events += 1

    @property
    def snapshot(self):
        return self._latest

    @property
    def stopped(self) -> bool:
        return self._stop.is_set()

    @property
    def sink_error(self) -> Exception | None:
        return self._sink_error

    # -- lifecycle --------------------------------------------------------------

    def start(self) -> None:
        self.telemetry.start()
        self.audio_sink.start(self.config.render.sample_rate)
        self._render_thread = threading.Thread(target=self._render_loop, daemon=True)
        self._render_thread.start()

    def run(self) -> int:
        """Start and block until interrupted; returns a process exit code."""
        self.start()
        try:
            while not self._stop.is_set():
                time.sleep(0.1)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()
        if self._sink_error is not None:
            log.error("audio sink failed: %s", self._sink_error)
            return 1
        return 0

    def stop(self) -> None:
        self._stop.set()
        if self._render_thread is not None:
            self._render_thread.join(timeout=5.0)
        self.telemetry.stop()
        self.audio_sink.close()
        close = getattr(self.midi_source, "close", None)
        if close is not None:
            close()

    # -- render loop ---------------------------------------------------------------

    def _render_loop(self) -> None:
        block = self.config.render.block_size
        while not self._stop.is_set():
            data = self.midi_source.read()
            if data:
                events, self._parser_state = parse_stream(data, self._parser_state)
                for event in events:
                    self._enqueue(event)
            while True:
                try:
                    event = self._queue.get_nowait()
                except queue.Empty:
                    break
                self._pedal_state = dispatch_event(self.engine, event, self._pedal_state)
            audio = self.engine.process_block(block)
            self._latest = self.engine.snapshot()
            try:
                self.audio_sink.write(audio)
            except Exception as exc:  # sink failure: shut down cleanly
                self._sink_error = exc
                log.error("audio sink error, stopping session: %s", exc)
                self._stop.set()
                return
