"""Minimal WAV I/O: 32-bit float PCM (format 3), mono or duplicated stereo.

The stdlib wave module only writes integer PCM, so the RIFF plumbing is done
by hand; output bytes are a pure function of the samples, which the render
determinism tests rely on.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

WAVE_FORMAT_IEEE_FLOAT = 3


def encode_wav_float32(samples: np.ndarray, sample_rate: int, channels: int = 1) -> bytes:
    """RIFF bytes for a mono sample array; channels=2 duplicates the signal."""
    if channels not in (1, 2):
        raise ValueError(f"channels must be 1 or 2, got {channels}")
    mono = np.asarray(samples, dtype=np.float32)
    if mono.ndim != 1:
        raise ValueError("expected a one-dimensional sample array")
    frames = mono if channels == 1 else np.repeat(mono, 2)
    data = frames.astype("<f4").tobytes()

    block_align = 4 * channels
    byte_rate = sample_rate * block_align
    fmt = struct.pack(
        "<HHIIHH", WAVE_FORMAT_IEEE_FLOAT, channels, sample_rate, byte_rate, block_align, 32
    )
    fact = struct.pack("<I", len(mono))
    body = (
        b"WAVE"
        + b"fmt " + struct.pack("<I", len(fmt)) + fmt
        + b"fact" + struct.pack("<I", len(fact)) + fact
        + b"data" + struct.pack("<I", len(data)) + data
    )
    return b"RIFF" + struct.pack("<I", len(body)) + body


def write_wav_float32(
    path: str | Path, samples: np.ndarray, sample_rate: int, channels: int = 1
) -> None:
    Path(path).write_bytes(encode_wav_float32(samples, sample_rate, channels))


def read_wav_float32(path: str | Path) -> tuple[np.ndarray, int, int]:
    """Read a float32 WAV back as (frames[n, channels], sample_rate, channels)."""
    data = Path(path).read_bytes()
    if data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ValueError(f"{path}: not a RIFF/WAVE file")
    pos = 12
    fmt_fields = None
    payload = None
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        size = struct.unpack_from("<I", data, pos + 4)[0]
        body = data[pos + 8 : pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt_fields = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)
    if fmt_fields is None or payload is None:
        raise ValueError(f"{path}: missing fmt or data chunk")
    audio_format, channels, sample_rate = fmt_fields[0], fmt_fields[1], fmt_fields[2]
    bits = fmt_fields[5]
    if audio_format != WAVE_FORMAT_IEEE_FLOAT or bits != 32:
        raise ValueError(f"{path}: expected 32-bit float PCM, got format {audio_format}/{bits}")
    flat = np.frombuffer(payload, dtype="<f4")
    return flat.reshape(-1, channels), sample_rate, channels
