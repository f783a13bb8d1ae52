"""MFCC front-end: framing, Hamming window, radix-2 FFT, mel filterbank, DCT-II.

Every feature path (batch, streaming, simulation) goes through
``features_from_frames`` so that results are bit-identical however the
signal is chunked.  Reductions are written as elementwise products summed
along the last axis rather than BLAS matmuls, whose rounding can depend on
the number of rows in a call.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ConfigError

PCM_SCALE = 32768.0


@dataclass(frozen=True)
class MfccConfig:
    sample_rate: int = 16000
    frame_length: int = 400
    hop_length: int = 160
    n_fft: int = 512
    num_mel_filters: int = 26
    num_coefficients: int = 13
    fmin: float = 50.0
    fmax: float = 8000.0
    log_floor: float = 1e-10

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.sample_rate <= 0:
            raise ConfigError(f"sample_rate must be positive, got {self.sample_rate}")
        if not 0 < self.hop_length <= self.frame_length:
            raise ConfigError(
                f"need 0 < hop_length <= frame_length, got hop={self.hop_length} "
                f"frame={self.frame_length}"
            )
        if self.n_fft < self.frame_length or self.n_fft & (self.n_fft - 1):
            raise ConfigError(
                f"n_fft must be a power of two >= frame_length, got {self.n_fft}"
            )
        if not 0 < self.num_coefficients <= self.num_mel_filters:
            raise ConfigError(
                "need 0 < num_coefficients <= num_mel_filters, got "
                f"{self.num_coefficients} > {self.num_mel_filters}"
            )
        if not 0 <= self.fmin < self.fmax:
            raise ConfigError(f"need 0 <= fmin < fmax, got {self.fmin}, {self.fmax}")
        if self.fmax > self.sample_rate / 2:
            raise ConfigError(
                f"fmax {self.fmax} Hz exceeds Nyquist {self.sample_rate / 2} Hz"
            )
        if not self.log_floor > 0:
            raise ConfigError("log_floor must be positive")

    @property
    def hop_seconds(self) -> float:
        return self.hop_length / self.sample_rate

    @property
    def num_bins(self) -> int:
        return self.n_fft // 2 + 1


@dataclass
class AudioBuffer:
    """Mono audio normalized to [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ConfigError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1:
            raise ValueError("AudioBuffer holds mono audio only")

    @classmethod
    def from_pcm16(cls, pcm: Sequence[int] | np.ndarray, sample_rate: int) -> "AudioBuffer":
        return cls(np.asarray(pcm, dtype=np.int16).astype(np.float64) / PCM_SCALE, sample_rate)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray = field(repr=False)
    frame_index: int
    timestamp: float

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return (
            self.frame_index == other.frame_index
            and self.timestamp == other.timestamp
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class MelFilterbank:
    filters: np.ndarray
    center_hz: np.ndarray


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def frame_signal(samples, config: MfccConfig) -> np.ndarray:
    """Slice ``samples`` into overlapping frames, dropping any partial tail.

    Returns an array of shape ``(n_frames, frame_length)``; frame ``k`` starts
    at sample ``k * hop_length``.
    """
    x = np.asarray(samples.samples if isinstance(samples, AudioBuffer) else samples,
                   dtype=np.float64)
    L, hop = config.frame_length, config.hop_length
    if len(x) < L:
        return np.empty((0, L))
    count = (len(x) - L) // hop + 1
    idx = np.arange(L)[None, :] + hop * np.arange(count)[:, None]
    return x[idx]


def hamming(length: int) -> np.ndarray:
    # symmetric form
    if length == 1:
        return np.ones(1)
    n = np.arange(length)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (length - 1))


def apply_window(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame, dtype=np.float64)
    return frame * hamming(frame.shape[-1])


_BITREV_CACHE: dict[int, np.ndarray] = {}


def _bit_reverse(n: int) -> np.ndarray:
    perm = _BITREV_CACHE.get(n)
    if perm is None:
        bits = n.bit_length() - 1
        perm = np.zeros(n, dtype=np.intp)
        for b in range(bits):
            perm |= ((np.arange(n) >> b) & 1) << (bits - 1 - b)
        _BITREV_CACHE[n] = perm
    return perm


def fft_radix2(x: np.ndarray) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT along the last axis.

    The last-axis length must be a power of two.  Works on stacked frames;
    each row is transformed by identical elementwise operations.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if n == 0 or n & (n - 1):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    lead = x.shape[:-1]
    a = x.reshape(-1, n)[:, _bit_reverse(n)].astype(np.complex128)
    rows = a.shape[0]
    out = np.empty_like(a)
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        src = a.reshape(rows, n // size, size)
        dst = out.reshape(rows, n // size, size)
        odd = src[..., half:] * tw
        np.add(src[..., :half], odd, out=dst[..., :half])
        np.subtract(src[..., :half], odd, out=dst[..., half:])
        a, out = out, a
        size *= 2
    return a.reshape(*lead, n)


def rfft_radix2(x: np.ndarray) -> np.ndarray:
    """Non-negative-frequency DFT bins of real rows (length n -> n/2 + 1).

    Packs even/odd samples into one half-length complex FFT and untangles
    the two spectra afterwards.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if n < 2:
        return x.astype(np.complex128)
    h = n // 2
    z = fft_radix2(x[..., 0::2] + 1j * x[..., 1::2])
    # conj(Z[(h - k) mod h])
    zr = np.conj(np.concatenate([z[..., :1], z[..., :0:-1]], axis=-1))
    even = 0.5 * (z + zr)
    odd = -0.5j * (z - zr)
    out = np.empty(x.shape[:-1] + (h + 1,), dtype=np.complex128)
    out[..., :h] = even + np.exp(-2j * np.pi * np.arange(h) / n) * odd
    out[..., h] = even[..., 0] - odd[..., 0]
    return out


def power_spectrum(frame: np.ndarray, n_fft: int | None = None) -> np.ndarray:
    """|DFT|^2 of a (windowed) frame, zero-padded to ``n_fft``.

    Returns the ``n_fft // 2 + 1`` non-negative-frequency bins.
    """
    frame = np.asarray(frame, dtype=np.float64)
    L = frame.shape[-1]
    if n_fft is None:
        n_fft = 1 << max(L - 1, 0).bit_length()
    if n_fft < L:
        raise ConfigError(f"n_fft {n_fft} shorter than frame {L}")
    if n_fft > L:
        pad = [(0, 0)] * (frame.ndim - 1) + [(0, n_fft - L)]
        frame = np.pad(frame, pad)
    spec = rfft_radix2(frame)
    return spec.real**2 + spec.imag**2


def build_mel_filterbank(config: MfccConfig, sample_rate: int | None = None) -> MelFilterbank:
    """Triangular filters with centers equally spaced in mel between fmin and fmax."""
    sr = config.sample_rate if sample_rate is None else sample_rate
    if config.fmax > sr / 2:
        raise ConfigError(f"fmax {config.fmax} Hz exceeds Nyquist {sr / 2} Hz")
    M = config.num_mel_filters
    mel_points = np.linspace(hz_to_mel(config.fmin), hz_to_mel(config.fmax), M + 2)
    hz_points = mel_to_hz(mel_points)
    bin_hz = np.arange(config.num_bins) * sr / config.n_fft

    filters = np.zeros((M, config.num_bins))
    for m in range(M):
        left, center, right = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        rising = (bin_hz - left) / (center - left)
        falling = (right - bin_hz) / (right - center)
        filters[m] = np.clip(np.minimum(rising, falling), 0.0, None)
        if not filters[m].any():
            raise ConfigError(
                f"mel filter {m} ({left:.1f}-{right:.1f} Hz) covers no FFT bin; "
                "use fewer filters or a larger n_fft"
            )
    return MelFilterbank(filters=filters, center_hz=hz_points[1:-1])


_BLOCK_ROWS = 256
_DCT_CACHE: dict[tuple[int, int], np.ndarray] = {}


def dct_matrix(num_inputs: int, num_outputs: int) -> np.ndarray:
    """Orthonormal DCT-II basis, rows truncated to ``num_outputs``."""
    key = (num_inputs, num_outputs)
    mat = _DCT_CACHE.get(key)
    if mat is None:
        M = num_inputs
        k = np.arange(num_outputs)[:, None]
        n = np.arange(M)[None, :]
        mat = np.cos(np.pi * k * (2 * n + 1) / (2 * M)) * math.sqrt(2.0 / M)
        mat[0] /= math.sqrt(2.0)
        _DCT_CACHE[key] = mat
    return mat


def features_from_frames(
    frames: np.ndarray, filterbank: MelFilterbank, config: MfccConfig
) -> np.ndarray:
    """MFCCs for a stack of raw frames, shape ``(n, num_coefficients)``."""
    frames = np.asarray(frames, dtype=np.float64)
    out = np.empty((frames.shape[0], config.num_coefficients))
    basis = dct_matrix(config.num_mel_filters, config.num_coefficients)
    # Rows are independent; blocking only bounds temporary memory.
    for lo in range(0, frames.shape[0], _BLOCK_ROWS):
        block = frames[lo:lo + _BLOCK_ROWS]
        power = power_spectrum(apply_window(block), config.n_fft)
        mel = (power[:, None, :] * filterbank.filters[None, :, :]).sum(axis=-1)
        log_mel = np.log(np.maximum(mel, config.log_floor))
        out[lo:lo + _BLOCK_ROWS] = (log_mel[:, None, :] * basis[None, :, :]).sum(axis=-1)
    return out


def mfcc(frame: np.ndarray, filterbank: MelFilterbank, config: MfccConfig) -> np.ndarray:
    """MFCC vector of one raw (unwindowed) frame."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape != (config.frame_length,):
        raise ConfigError(
            f"frame has shape {frame.shape}, expected ({config.frame_length},)"
        )
    return features_from_frames(frame[None, :], filterbank, config)[0]


def log_mel_energies(frame, filterbank: MelFilterbank, config: MfccConfig) -> np.ndarray:
    power = power_spectrum(apply_window(frame), config.n_fft)
    mel = (power[..., None, :] * filterbank.filters).sum(axis=-1)
    return np.log(np.maximum(mel, config.log_floor))


def _check_rate(audio: AudioBuffer, config: MfccConfig) -> None:
    if audio.sample_rate != config.sample_rate:
        raise ConfigError(
            f"audio sample rate {audio.sample_rate} Hz does not match configured "
            f"{config.sample_rate} Hz (resampling is not supported)"
        )


def extract_features(audio: AudioBuffer, config: MfccConfig | None = None) -> list[FeatureVector]:
    """Batch MFCC extraction over a whole buffer."""
    config = config or MfccConfig()
    _check_rate(audio, config)
    fb = build_mel_filterbank(config)
    coeffs = features_from_frames(frame_signal(audio.samples, config), fb, config)
    hop_s = config.hop_seconds
    return [
        FeatureVector(values=row, frame_index=i, timestamp=i * hop_s)
        for i, row in enumerate(coeffs)
    ]


class FeatureStream:
    """Incremental MFCC extractor.

    Push arbitrarily sized chunks; each call returns the feature vectors
    completed by that chunk.  Output matches ``extract_features`` on the
    concatenated signal exactly.

    One writer at a time; the object holds mutable buffering state.
    """

    def __init__(self, config: MfccConfig | None = None):
        self.config = config or MfccConfig()
        self.filterbank = build_mel_filterbank(self.config)
        self._buffer = np.empty(0)
        self._next_index = 0

    def push(self, chunk) -> list[FeatureVector]:
        chunk = np.asarray(chunk, dtype=np.float64).ravel()
        if chunk.size == 0:
            return []
        buf = np.concatenate([self._buffer, chunk])
        cfg = self.config
        frames = frame_signal(buf, cfg)
        n = len(frames)
        if n == 0:
            self._buffer = buf
            return []
        self._buffer = buf[n * cfg.hop_length:]
        coeffs = features_from_frames(frames, self.filterbank, cfg)
        start = self._next_index
        self._next_index += n
        hop_s = cfg.hop_seconds
        return [
            FeatureVector(values=row, frame_index=start + i, timestamp=(start + i) * hop_s)
            for i, row in enumerate(coeffs)
        ]

    @property
    def frames_emitted(self) -> int:
        return self._next_index


def stream_features(chunks: Iterable, config: MfccConfig | None = None) -> Iterator[FeatureVector]:
    stream = FeatureStream(config)
    for chunk in chunks:
        yield from stream.push(chunk)


def write_features(features: Sequence[FeatureVector], path, fmt: str = "csv") -> None:
    """Write feature vectors as CSV (frame, time, c0..) or JSONL."""
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"unknown feature format {fmt!r} (csv or jsonl)")
    with open(path, "w", newline="") as fh:
        if fmt == "jsonl":
            for fv in features:
                rec = {"frame_index": fv.frame_index, "timestamp": fv.timestamp,
                       "values": [float(v) for v in fv.values]}
                fh.write(json.dumps(rec) + "\n")
            return
        writer = csv.writer(fh)
        width = len(features[0].values) if features else 0
        writer.writerow(["frame_index", "timestamp"] + [f"c{i}" for i in range(width)])
        for fv in features:
            writer.writerow([fv.frame_index, repr(fv.timestamp)] + [repr(float(v)) for v in fv.values])
