"""Command line: offline rendering, the live session, and log statistics.

Exit codes are a stable contract: 0 success, 1 runtime error (bad input
data, sink failure), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections import Counter
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_session_config
from .midi import NoteOn
from .render import (
    measurement_log_path,
    render_offline,
    write_measurement_log,
)
from .session import FileMidiSource, LiveSession, NullAudioSink, WavFileSink
from .smf import SmfError, parse_smf
from .wavfile import write_wav_float32

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubitsynth",
        description="Qubit sonification synth: offline renders and live sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", help="render a MIDI file to WAV offline")
    render.add_argument("--midi", required=True, help="note SMF (format 0 or 1)")
    render.add_argument("--pedals", help="optional pedal-automation SMF of CC events")
    render.add_argument("--config", required=True, help="session config file")
    render.add_argument("--seed", type=int, help="override the config seed (u64)")
    render.add_argument("--out", required=True, help="output WAV path")
    render.add_argument("--duration", type=float, help="render length in seconds")

    live = sub.add_parser("live", help="run the real-time session loop")
    live.add_argument("--config", required=True, help="session config file")
    live.add_argument("--midi-in", help="raw MIDI byte source (file or FIFO)")
    live.add_argument("--wav-out", help="record the session to a WAV on exit")
    live.add_argument("--ui-dir", help="serve this directory on the WebSocket port")
    live.add_argument("--host", default="127.0.0.1", help="bind address")

    stats = sub.add_parser("stats", help="summarize a measurement log")
    stats.add_argument("--log", required=True, help="measurement .jsonl file")
    return parser


def _load_smf(path: str) -> list:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return parse_smf(data)
    except SmfError as exc:
        raise _Runtime(f"{path}: {exc}") from exc


class _Usage(Exception):
    pass


class _Runtime(Exception):
    pass


def _cmd_render(args: argparse.Namespace) -> int:
    try:
        session = load_session_config(args.config)
    except OSError as exc:
        raise _Usage(f"cannot read {args.config}: {exc.strerror or exc}") from exc
    config = session.render
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise _Usage("--seed must fit in an unsigned 64-bit integer")
        config = replace(config, seed=args.seed)

    events = _load_smf(args.midi)
    pedal_events = _load_smf(args.pedals) if args.pedals else []

    result = render_offline(events, pedal_events, config, duration=args.duration)
    write_wav_float32(args.out, result.audio, result.sample_rate, config.wav_channels)
    log_path = measurement_log_path(args.out)
    write_measurement_log(log_path, result.measurements)

    duration = len(result.audio) / result.sample_rate
    note_count = sum(1 for ev in events if isinstance(ev.event, NoteOn))
    print(f"rendered {duration:.3f} s to {args.out}")
    print(f"notes: {note_count}   measurements: {len(result.measurements)}   log: {log_path}")
    for basis, ones, total in _outcome_rows(
        (rec.outcome.basis.value, rec.outcome.bit) for rec in result.measurements
    ):
        print(f"basis {basis}: {total} measurements, outcome-1 frequency {ones / total:.4f}")
    return EXIT_OK


def _outcome_rows(pairs) -> list[tuple[str, int, int]]:
    ones: Counter[str] = Counter()
    totals: Counter[str] = Counter()
    for basis, bit in pairs:
        totals[basis] += 1
        ones[basis] += bit
    return [(basis, ones[basis], totals[basis]) for basis in sorted(totals)]


def _cmd_stats(args: argparse.Namespace) -> int:
    try:
        text = Path(args.log).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Usage(f"cannot read {args.log}: {exc.strerror or exc}") from exc
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            pairs.append((str(record["basis"]), int(record["bit"])))
        except (ValueError, KeyError) as exc:
            raise _Runtime(f"{args.log}:{lineno}: bad record: {exc}") from exc
    print(f"{len(pairs)} measurements")
    for basis, ones, total in _outcome_rows(pairs):
        print(f"basis {basis}: {total} measurements, outcome-1 frequency {ones / total:.4f}")
    return EXIT_OK


def _cmd_live(args: argparse.Namespace) -> int:
    try:
        session_config = load_session_config(args.config)
    except OSError as exc:
        raise _Usage(f"cannot read {args.config}: {exc.strerror or exc}") from exc
    midi_source = None
    if args.midi_in:
        try:
            midi_source = FileMidiSource(args.midi_in)
        except OSError as exc:
            raise _Usage(f"cannot open {args.midi_in}: {exc.strerror or exc}") from exc
    sink = WavFileSink(args.wav_out, session_config.render.wav_channels) if args.wav_out else NullAudioSink()
    session = LiveSession(
        session_config,
        midi_source=midi_source,
        audio_sink=sink,
        host=args.host,
        static_dir=args.ui_dir,
    )
    session.start()
    print(f"telemetry listening on {args.host}:{session.telemetry.port}", flush=True)
    if session.telemetry.ws_port is not None:
        print(f"websocket bridge on {args.host}:{session.telemetry.ws_port}", flush=True)
    try:
        while not session.stopped:
            time.sleep(0.1)
    except KeyboardInterrupt:
        pass
    finally:
        session.stop()
    if session.sink_error is not None:
        print(f"audio sink failed: {session.sink_error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "render":
            return _cmd_render(args)
        if args.command == "live":
            return _cmd_live(args)
        return _cmd_stats(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _Runtime as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
