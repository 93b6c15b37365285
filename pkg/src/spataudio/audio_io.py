"""WAV decode/encode, sample-rate conversion and integrated-loudness handling.

Covers the evaluation preprocessing contract: PCM16/float32 RIFF audio,
windowed-sinc polyphase resampling, and BS.1770-4 integrated loudness with
K-weighting filters redesigned for the buffer's sample rate.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .errors import FormatError, MeasurementError, ParseError

RESAMPLE_TAPS_PER_PHASE = 64
RESAMPLE_KAISER_BETA = 8.6
RESAMPLE_CUTOFF_RATIO = 0.45  # of the lower of the two rates

LOUDNESS_BLOCK_S = 0.400
LOUDNESS_HOP_S = 0.100
ABSOLUTE_GATE_LUFS = -70.0
RELATIVE_GATE_LU = -10.0

# Parametric K-weighting stages (shelving + RLB high-pass). Evaluating these
# at 48 kHz reproduces the published reference biquads; any other rate gets a
# matched redesign through the same bilinear prototypes.
_SHELF_FC = 1681.9744509555319
_SHELF_GAIN_DB = 3.999843853973347
_SHELF_Q = 0.7071752369554196
_HIGHPASS_FC = 38.13547087602444
_HIGHPASS_Q = 0.5003270373238773


@dataclass
class AudioBuffer:
    """Planar float audio: `channels` has shape (n_channels, n_samples)."""

    sample_rate: int
    channels: np.ndarray

    def __post_init__(self):
        self.channels = np.atleast_2d(np.asarray(self.channels, dtype=np.float64))
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        if not 1 <= self.channels.shape[0] <= 2:
            raise FormatError(f"expected 1 or 2 channels, got {self.channels.shape[0]}")

    @property
    def num_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def num_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate

    def peak(self) -> float:
        if self.num_samples == 0:
            return 0.0
        return float(np.max(np.abs(self.channels)))

    def to_mono(self) -> "AudioBuffer":
        if self.num_channels == 1:
            return AudioBuffer(self.sample_rate, self.channels.copy())
        return AudioBuffer(self.sample_rate, self.channels.mean(axis=0))


def read_wav(data: bytes) -> AudioBuffer:
    """Decode a RIFF/WAVE container (PCM16 or IEEE float32, mono/stereo).

    16-bit integer samples map to n / 32768.
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ParseError("not a RIFF/WAVE container")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise ParseError("fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == 0xFFFE:  # WAVE_FORMAT_EXTENSIBLE: actual code leads the GUID
                if len(body) < 26:
                    raise ParseError("extensible fmt chunk truncated")
                (subformat,) = struct.unpack_from("<H", body, 24)
                fmt = (subformat,) + fmt[1:]
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise ParseError("data chunk truncated")
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)

    if fmt is None or payload is None:
        raise ParseError("missing fmt or data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if not 1 <= n_channels <= 2:
        raise FormatError(f"unsupported channel count {n_channels}")
    if audio_format == 1 and bits == 16:
        raw = np.frombuffer(payload[:len(payload) - len(payload) % (2 * n_channels)],
                            dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == 3 and bits == 32:
        raw = np.frombuffer(payload[:len(payload) - len(payload) % (4 * n_channels)],
                            dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise FormatError(f"unsupported codec: format {audio_format}, {bits}-bit")

    planar = samples.reshape(-1, n_channels).T
    return AudioBuffer(sample_rate, planar.copy())


def write_wav(buffer: AudioBuffer, bit_depth: int = 16) -> bytes:
    """Encode to RIFF/WAVE. bit_depth 16 -> PCM16, 32 -> IEEE float32.

    The 16-bit path clamps to [-1, 1 - 2**-15] and rounds to the nearest
    integer code; float32 round-trips bit-exactly through read_wav.
    """
    interleaved = buffer.channels.T.reshape(-1)
    n_ch = buffer.num_channels
    rate = int(buffer.sample_rate)

    if bit_depth == 16:
        clipped = np.clip(interleaved, -1.0, 1.0 - 2.0 ** -15)
        frames = np.rint(clipped * 32768.0).astype("<i2").tobytes()
        block_align = 2 * n_ch
        fmt_chunk = struct.pack("<HHIIHH", 1, n_ch, rate, rate * block_align,
                                block_align, 16)
        chunks = [b"fmt ", struct.pack("<I", 16), fmt_chunk]
    elif bit_depth == 32:
        frames = interleaved.astype("<f4").tobytes()
        block_align = 4 * n_ch
        fmt_chunk = struct.pack("<HHIIHH", 3, n_ch, rate, rate * block_align,
                                block_align, 32)
        chunks = [b"fmt ", struct.pack("<I", 16), fmt_chunk,
                  b"fact", struct.pack("<II", 4, buffer.num_samples)]
    else:
        raise FormatError(f"unsupported bit depth {bit_depth} (use 16 or 32)")

    chunks += [b"data", struct.pack("<I", len(frames)), frames]
    if len(frames) & 1:
        chunks.append(b"\x00")
    body = b"".join(chunks)
    return b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body


def load_wav(path) -> AudioBuffer:
    return read_wav(Path(path).read_bytes())


def save_wav(path, buffer: AudioBuffer, bit_depth: int = 16) -> None:
    Path(path).write_bytes(write_wav(buffer, bit_depth))


def _design_resample_filter(up: int, down: int, fs_in: float, fs_out: float) -> np.ndarray:
    # Kaiser-windowed sinc lowpass at the upsampled rate; one extra center tap
    # keeps the length odd so the group delay lands on an integer input sample.
    n_taps = RESAMPLE_TAPS_PER_PHASE * up + 1
    cutoff_hz = RESAMPLE_CUTOFF_RATIO * min(fs_in, fs_out)
    fs_up = fs_in * up
    t = np.arange(n_taps) - (n_taps - 1) / 2.0
    h = (2.0 * cutoff_hz / fs_up) * np.sinc(2.0 * cutoff_hz * t / fs_up)
    h *= np.kaiser(n_taps, RESAMPLE_KAISER_BETA)
    h *= up / h.sum()
    return h


def resample(buffer: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Band-limited rate conversion (windowed-sinc polyphase).

    Output length is round(n * target / source); equal rates return an
    untouched copy.
    """
    if target_rate <= 0:
        raise ValueError(f"target rate must be positive, got {target_rate}")
    source_rate = buffer.sample_rate
    if target_rate == source_rate:
        return AudioBuffer(source_rate, buffer.channels.copy())
    if int(source_rate) != source_rate or int(target_rate) != target_rate:
        raise ValueError("resample requires integer sample rates")

    g = math.gcd(int(target_rate), int(source_rate))
    up = int(target_rate) // g
    down = int(source_rate) // g
    h = _design_resample_filter(up, down, source_rate, target_rate)
    delay = (h.size - 1) // 2  # = RESAMPLE_TAPS_PER_PHASE//2 * up, integer phases

    taps = RESAMPLE_TAPS_PER_PHASE + 1
    h_padded = np.concatenate([h, np.zeros(taps * up - h.size)])
    # phase p of the polyphase bank: h[p::up], all padded to `taps` entries
    phase_bank = [h_padded[p::up] for p in range(up)]

    n_in = buffer.num_samples
    out_len = int(round(n_in * target_rate / source_rate))
    n0_last = ((out_len - 1) * down + delay) // up
    pad_left = taps
    pad_right = max(0, n0_last + 1 - n_in) + 1

    out = np.zeros((buffer.num_channels, out_len))
    for ch in range(buffer.num_channels):
        x = np.concatenate([np.zeros(pad_left), buffer.channels[ch], np.zeros(pad_right)])
        for r in range(min(up, out_len)):
            count = len(range(r, out_len, up))
            base = (r * down + delay) // up + pad_left
            hp = phase_bank[(r * down + delay) % up]
            acc = np.zeros(count)
            for k in range(taps):
                start = base - k
                acc += hp[k] * x[start:start + count * down:down]
            out[ch, r::up] = acc
    return AudioBuffer(int(target_rate), out)


def k_weighting_coefficients(sample_rate: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Biquad pairs (b_shelf, a_shelf, b_highpass, a_highpass) for one rate."""
    k = math.tan(math.pi * _SHELF_FC / sample_rate)
    vh = 10.0 ** (_SHELF_GAIN_DB / 20.0)
    vb = vh ** 0.4996667741545416
    denom = 1.0 + k / _SHELF_Q + k * k
    b_shelf = np.array([
        (vh + vb * k / _SHELF_Q + k * k) / denom,
        2.0 * (k * k - vh) / denom,
        (vh - vb * k / _SHELF_Q + k * k) / denom,
    ])
    a_shelf = np.array([1.0, 2.0 * (k * k - 1.0) / denom, (1.0 - k / _SHELF_Q + k * k) / denom])

    k = math.tan(math.pi * _HIGHPASS_FC / sample_rate)
    denom = 1.0 + k / _HIGHPASS_Q + k * k
    b_hp = np.array([1.0, -2.0, 1.0])
    a_hp = np.array([1.0, 2.0 * (k * k - 1.0) / denom, (1.0 - k / _HIGHPASS_Q + k * k) / denom])
    return b_shelf, a_shelf, b_hp, a_hp


def _k_weight(buffer: AudioBuffer) -> np.ndarray:
    b1, a1, b2, a2 = k_weighting_coefficients(buffer.sample_rate)
    stage1 = lfilter(b1, a1, buffer.channels, axis=1)
    return lfilter(b2, a2, stage1, axis=1)


def measure_loudness(buffer: AudioBuffer) -> float:
    """Integrated loudness in LUFS (400 ms blocks, 75% overlap, two-stage gate).

    Returns -inf when every block falls below the gates (digital silence).
    """
    block = int(round(LOUDNESS_BLOCK_S * buffer.sample_rate))
    hop = int(round(LOUDNESS_HOP_S * buffer.sample_rate))
    if buffer.num_samples < block:
        raise MeasurementError(
            f"need at least {LOUDNESS_BLOCK_S * 1000:.0f} ms of audio, "
            f"got {buffer.duration * 1000:.1f} ms"
        )

    weighted = _k_weight(buffer)
    power = np.sum(weighted * weighted, axis=0)  # channel-summed instantaneous power
    csum = np.concatenate([[0.0], np.cumsum(power)])
    n_blocks = 1 + (buffer.num_samples - block) // hop
    starts = np.arange(n_blocks) * hop
    block_power = (csum[starts + block] - csum[starts]) / block

    with np.errstate(divide="ignore"):
        block_loudness = -0.691 + 10.0 * np.log10(block_power)

    above_absolute = block_loudness > ABSOLUTE_GATE_LUFS
    if not np.any(above_absolute):
        return float("-inf")
    relative_gate = (-0.691 + 10.0 * np.log10(np.mean(block_power[above_absolute]))
                     + RELATIVE_GATE_LU)
    gated = above_absolute & (block_loudness > relative_gate)
    if not np.any(gated):
        return float("-inf")
    return float(-0.691 + 10.0 * np.log10(np.mean(block_power[gated])))


def normalize_loudness(buffer: AudioBuffer, target_lufs: float = -23.0) -> AudioBuffer:
    """Apply the single scalar gain that brings integrated loudness to target."""
    measured = measure_loudness(buffer)
    if not math.isfinite(measured):
        raise MeasurementError("input is silent or fully gated; cannot normalize")
    gain = 10.0 ** ((target_lufs - measured) / 20.0)
    return AudioBuffer(buffer.sample_rate, buffer.channels * gain)
