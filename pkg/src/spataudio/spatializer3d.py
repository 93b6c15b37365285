"""Algorithmic 3D renderer: left-right panning, elevation filtering, distance.

The three stages run in that order over a moving trajectory. Pan position and
distance update per render block (one STFT hop by default); the elevation
gain curve is applied per STFT frame so vertical motion tracks at frame rate.
All stages are linear in the input signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .audio_io import AudioBuffer
from .dsp import StftParams, istft, stft
from .errors import ConfigurationError
from .scene import CameraModel, SpatialSample, trajectory_at

ELEVATION_PIVOT_HZ = 1000.0
ELEVATION_EXPONENT = 1.5


@dataclass(frozen=True)
class RenderConfig:
    """Engine-wide rendering parameters; defaults mirror the evaluation setup."""

    method: str = "algo3d"
    sample_rate: int = 16000
    block: int = 160
    alpha: float = 0.3
    speed_of_sound: float = 343.0
    stft: StftParams = field(default_factory=StftParams)
    elevation_pivot_hz: float = ELEVATION_PIVOT_HZ
    elevation_exponent: float = ELEVATION_EXPONENT
    clip_policy: str = "peak_normalize"
    camera: CameraModel = field(default_factory=CameraModel)

    def __post_init__(self):
        if self.method not in ("algo3d", "hrtf"):
            raise ConfigurationError(f"unknown method {self.method!r}")
        if self.clip_policy not in ("peak_normalize", "hard_clip"):
            raise ConfigurationError(f"unknown clip policy {self.clip_policy!r}")
        if self.sample_rate <= 0 or self.block <= 0:
            raise ConfigurationError("sample_rate and block must be positive")
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if self.speed_of_sound <= 0:
            raise ConfigurationError("speed of sound must be positive")
        if self.elevation_pivot_hz <= 0:
            raise ConfigurationError("elevation pivot must be positive")
        self.stft.validate(self.sample_rate)
        hop = self.stft.hop_length(self.sample_rate)
        if hop % self.block != 0:
            raise ConfigurationError(
                f"block ({self.block}) must divide the STFT hop ({hop})"
            )

    def max_echo_delay(self) -> int:
        return _round_half_up(self.camera.d_max * self.sample_rate / self.speed_of_sound)


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def pan_lr(mono_block: np.ndarray, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Split a mono block into left/right with weights (1-x)/2 and (1+x)/2.

    The right channel is formed as the remainder so left + right reproduces
    the input exactly, sample for sample.
    """
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"pan position {x} outside [-1, 1]")
    mono_block = np.asarray(mono_block, dtype=np.float64)
    left = mono_block * ((1.0 - x) / 2.0)
    right = mono_block - left
    return left, right


def elevation_gain(f, y: float, pivot_hz: float = ELEVATION_PIVOT_HZ,
                   exponent: float = ELEVATION_EXPONENT):
    """Frequency adjustment factor 1 + y * (f / pivot)^exponent, floored at 0.

    Accepts a scalar frequency or an array of bin frequencies. The floor
    exists because large negative y at high f would otherwise flip the sign
    of a magnitude gain.
    """
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("frequency must be non-negative")
    raw = 1.0 + y * (f / pivot_hz) ** exponent
    gain = np.maximum(raw, 0.0)
    return float(gain) if gain.ndim == 0 else gain


def elevation_filter(stereo: AudioBuffer, y_at: Callable[[float], float],
                     params: StftParams | None = None,
                     pivot_hz: float = ELEVATION_PIVOT_HZ,
                     exponent: float = ELEVATION_EXPONENT) -> AudioBuffer:
    """Apply the per-frame elevation gain curve identically to both channels.

    Each channel is padded by half a window on both sides before analysis so
    frame centers cover every sample and a y == 0 trajectory reconstructs the
    input (interior RMS error below 1e-6) instead of fading at the edges.
    """
    if stereo.num_channels != 2:
        raise ConfigurationError("elevation_filter expects a stereo buffer")
    params = params if params is not None else StftParams()
    fs = stereo.sample_rate
    win = params.window_length(fs)
    hop = params.hop_length(fs)
    pad = win // 2
    n = stereo.num_samples

    gains = None
    out = np.empty_like(stereo.channels)
    for ch in range(2):
        padded = np.concatenate([np.zeros(pad), stereo.channels[ch], np.zeros(pad)])
        spec = stft(padded, params, fs)
        if gains is None:
            freqs = spec.bin_frequencies()
            times = (np.arange(spec.n_frames) * hop + win / 2.0 - pad) / fs
            ys = np.array([y_at(max(t, 0.0)) for t in times])
            gains = np.maximum(1.0 + ys[:, None] * (freqs / pivot_hz) ** exponent, 0.0)
        spec.frames *= gains
        out[ch] = istft(spec)[pad:pad + n]
    return AudioBuffer(fs, out)


class DistanceEffect:
    """Streaming front-back stage: direct path at gain 1/z plus one echo tap.

    The echo arrives z * fs / v samples later at gain alpha / z and is read
    across block boundaries from retained input history. One instance per
    rendered channel; never share across renders.
    """

    def __init__(self, config: RenderConfig):
        self.config = config
        self._history = np.zeros(config.max_echo_delay())

    def process(self, block: np.ndarray, z: float) -> np.ndarray:
        cfg = self.config
        if z <= 0:
            raise ValueError(f"distance must be positive, got {z}")
        delta = _round_half_up(z * cfg.sample_rate / cfg.speed_of_sound)
        if delta > self._history.size:
            raise ValueError(
                f"distance {z} m exceeds the configured maximum {cfg.camera.d_max} m"
            )
        block = np.asarray(block, dtype=np.float64)
        full = np.concatenate([self._history, block])
        delayed = full[self._history.size - delta:full.size - delta]
        out = block / z + cfg.alpha * delayed / z
        if self._history.size:
            self._history = full[-self._history.size:].copy()
        return out


def distance_effect(block: np.ndarray, z: float, config: RenderConfig) -> np.ndarray:
    """Single-shot distance stage over one contiguous signal (zero history)."""
    return DistanceEffect(config).process(block, z)


def render_source_3d(mono: AudioBuffer, trajectory: Sequence[SpatialSample],
                     config: RenderConfig) -> AudioBuffer:
    """Render one mono source to stereo along its trajectory.

    Output is input length plus the worst-case echo tail. Pan and distance
    use the trajectory at each block's center time; elevation follows the y
    trajectory at STFT frame rate.
    """
    if mono.num_channels != 1:
        raise ConfigurationError(f"expected mono input, got {mono.num_channels} channels")
    if mono.sample_rate != config.sample_rate:
        raise ConfigurationError(
            f"source rate {mono.sample_rate} != render rate {config.sample_rate}"
        )
    if mono.num_samples == 0:
        raise ConfigurationError("cannot render an empty source")

    fs = config.sample_rate
    block_len = config.block
    tail = config.max_echo_delay()
    out_len = mono.num_samples + tail
    n_blocks = math.ceil(out_len / block_len)
    traj = tuple(trajectory)

    signal = np.zeros(n_blocks * block_len)
    signal[:mono.num_samples] = mono.channels[0]

    positions = [
        trajectory_at(traj, (i * block_len + block_len / 2.0) / fs)
        for i in range(n_blocks)
    ]

    left = np.empty_like(signal)
    right = np.empty_like(signal)
    for i, pos in enumerate(positions):
        sl = slice(i * block_len, (i + 1) * block_len)
        left[sl], right[sl] = pan_lr(signal[sl], pos.x)

    stereo = elevation_filter(
        AudioBuffer(fs, np.vstack([left, right])),
        lambda t: trajectory_at(traj, t).y,
        config.stft,
        config.elevation_pivot_hz,
        config.elevation_exponent,
    )

    out = np.empty_like(stereo.channels)
    for ch in range(2):
        effect = DistanceEffect(config)
        for i, pos in enumerate(positions):
            sl = slice(i * block_len, (i + 1) * block_len)
            out[ch, sl] = effect.process(stereo.channels[ch, sl], pos.z)
    return AudioBuffer(fs, out[:, :out_len])
