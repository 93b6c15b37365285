"""Objective distances between a rendered program and its reference.

Two norms over per-channel representations: Euclidean distance between
complex spectrograms, and Euclidean distance between amplitude envelopes.
`evaluate` wraps them in the standard preprocessing chain (resample to
16 kHz, normalize each file to -23 LUFS, dual-mono upmix, trim to the
shorter length) so distances are insensitive to container format and
master gain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .audio_io import AudioBuffer, load_wav, normalize_loudness, resample
from .dsp import StftParams, envelope, stft
from .errors import EvaluationError, MeasurementError

EVAL_SAMPLE_RATE = 16000
EVAL_TARGET_LUFS = -23.0


@dataclass
class MetricsReport:
    stft_distance: float
    env_distance: float
    preprocessing: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "stft_distance": self.stft_distance,
            "env_distance": self.env_distance,
            "preprocessing": dict(self.preprocessing),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def _check_operands(reference: AudioBuffer, predicted: AudioBuffer) -> None:
    if reference.sample_rate != predicted.sample_rate:
        raise ValueError(
            f"sample rates differ: {reference.sample_rate} vs {predicted.sample_rate}"
        )
    if reference.num_samples != predicted.num_samples:
        raise ValueError(
            f"lengths differ: {reference.num_samples} vs {predicted.num_samples}"
        )
    if reference.num_channels != predicted.num_channels:
        raise ValueError(
            f"channel counts differ: {reference.num_channels} vs {predicted.num_channels}"
        )


def stft_distance(reference: AudioBuffer, predicted: AudioBuffer,
                  params: StftParams | None = None) -> float:
    """Sum over channels of the Frobenius norm of the spectrogram difference."""
    _check_operands(reference, predicted)
    params = params if params is not None else StftParams()
    total = 0.0
    for ch in range(reference.num_channels):
        ref = stft(reference.channels[ch], params, reference.sample_rate).frames
        pred = stft(predicted.channels[ch], params, predicted.sample_rate).frames
        diff = ref - pred
        total += math.sqrt(float(np.sum(diff.real ** 2 + diff.imag ** 2)))
    return total


def env_distance(reference: AudioBuffer, predicted: AudioBuffer) -> float:
    """Sum over channels of the Euclidean distance between amplitude envelopes."""
    _check_operands(reference, predicted)
    total = 0.0
    for ch in range(reference.num_channels):
        diff = envelope(reference.channels[ch]) - envelope(predicted.channels[ch])
        total += math.sqrt(float(diff @ diff))
    return total


def _preprocess(buffer: AudioBuffer, sample_rate: int, target_lufs: float,
                label: str) -> AudioBuffer:
    buffer = resample(buffer, sample_rate)
    try:
        buffer = normalize_loudness(buffer, target_lufs)
    except MeasurementError as exc:
        raise EvaluationError(f"{label}: {exc}") from None
    if buffer.num_channels == 1:
        buffer = AudioBuffer(buffer.sample_rate, np.vstack([buffer.channels[0]] * 2))
    return buffer


def evaluate(reference_path, predicted_path, *, sample_rate: int = EVAL_SAMPLE_RATE,
             target_lufs: float = EVAL_TARGET_LUFS,
             stft_params: StftParams | None = None) -> MetricsReport:
    """Score a predicted file against a reference file.

    Both files go through the same preprocessing independently before the
    distances are computed, and length mismatches are resolved by trimming
    both to the shorter file.
    """
    reference = _preprocess(load_wav(reference_path), sample_rate, target_lufs,
                            f"reference {reference_path}")
    predicted = _preprocess(load_wav(predicted_path), sample_rate, target_lufs,
                            f"predicted {predicted_path}")

    n = min(reference.num_samples, predicted.num_samples)
    if n == 0:
        raise EvaluationError("nothing left to compare after trimming")
    reference = AudioBuffer(sample_rate, reference.channels[:, :n])
    predicted = AudioBuffer(sample_rate, predicted.channels[:, :n])

    return MetricsReport(
        stft_distance=stft_distance(reference, predicted, stft_params),
        env_distance=env_distance(reference, predicted),
        preprocessing={
            "target_lufs": target_lufs,
            "sample_rate_hz": sample_rate,
            "trim_samples": n,
        },
    )
