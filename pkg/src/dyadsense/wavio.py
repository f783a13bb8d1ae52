"""Minimal RIFF/WAVE reader and writer for 16-bit mono PCM."""

from __future__ import annotations

import struct
import wave
from pathlib import Path

import numpy as np

from .dsp import AudioBuffer
from .errors import ParseError

WAVE_FORMAT_PCM = 1
WAVE_FORMAT_EXTENSIBLE = 0xFFFE


def read_wav(path) -> AudioBuffer:
    """Read a mono 16-bit PCM WAV file into a normalized AudioBuffer.

    Raises:
        ParseError: not RIFF/WAVE, not PCM (format code reported), not
            16-bit, not mono, or truncated.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ParseError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    pcm = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise ParseError(f"{path}: fmt chunk too short ({len(body)} bytes)")
            fmt = struct.unpack_from("<HHIIHH", body)
        elif chunk_id == b"data":
            pcm = body
        pos += 8 + size + (size & 1)

    if fmt is None:
        raise ParseError(f"{path}: missing fmt chunk")
    if pcm is None:
        raise ParseError(f"{path}: missing data chunk")
    format_code, channels, sample_rate, _, _, bits = fmt
    if format_code != WAVE_FORMAT_PCM:
        raise ParseError(
            f"{path}: unsupported WAV format code {format_code} (only PCM, code 1)"
        )
    if bits != 16:
        raise ParseError(f"{path}: {bits}-bit samples unsupported (need 16-bit)")
    if channels != 1:
        raise ParseError(f"{path}: {channels} channels unsupported (need mono)")
    if sample_rate <= 0:
        raise ParseError(f"{path}: invalid sample rate {sample_rate}")
    usable = len(pcm) - (len(pcm) % 2)
    samples = np.frombuffer(pcm[:usable], dtype="<i2")
    return AudioBuffer.from_pcm16(samples, sample_rate)


def write_wav(path, samples, sample_rate: int) -> None:
    """Write float samples in [-1, 1] as 16-bit mono PCM (clipped)."""
    x = np.asarray(samples, dtype=np.float64)
    pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(sample_rate))
        w.writeframes(pcm.tobytes())
