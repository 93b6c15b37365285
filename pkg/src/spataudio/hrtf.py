"""HRIR dataset loading, nearest-direction selection, and block convolution.

Datasets are described by a JSON manifest referencing one mono WAV pair per
measured direction. Rendering selects the nearest entry on the sphere per
block and convolves with overlap-add; when the selected entry changes, the
block is rendered under both entries with a linear crossfade so switches
produce no clicks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .audio_io import AudioBuffer, load_wav, resample
from .dsp import fft_convolve
from .errors import ConfigurationError, FormatError, ParseError, ValidationError
from .scene import SpatialSample, to_direction, trajectory_at
from .spatializer3d import RenderConfig


@dataclass(frozen=True, eq=False)
class HrirEntry:
    azimuth: float
    elevation: float
    left_ir: np.ndarray
    right_ir: np.ndarray

    def __post_init__(self):
        if not -180.0 <= self.azimuth < 180.0 or not -90.0 <= self.elevation <= 90.0:
            raise ValidationError(
                f"direction ({self.azimuth}, {self.elevation}) outside [-180,180) x [-90,90]"
            )
        if self.left_ir.size == 0 or self.left_ir.size != self.right_ir.size:
            raise ValidationError("left/right impulse responses must share a nonzero length")

    def unit_vector(self) -> np.ndarray:
        az = math.radians(self.azimuth)
        el = math.radians(self.elevation)
        return np.array([math.cos(el) * math.sin(az), math.sin(el), math.cos(el) * math.cos(az)])


@dataclass(frozen=True)
class HrirDataset:
    sample_rate: int
    ir_length: int
    entries: tuple[HrirEntry, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValidationError("dataset needs at least one entry")
        seen = set()
        for e in self.entries:
            key = (e.azimuth, e.elevation)
            if key in seen:
                raise ValidationError(f"duplicate direction ({e.azimuth}, {e.elevation})")
            seen.add(key)
            if e.left_ir.size != self.ir_length:
                raise ValidationError(
                    f"entry ({e.azimuth}, {e.elevation}) has IR length {e.left_ir.size}, "
                    f"expected {self.ir_length}"
                )


def load_hrir_dataset(manifest: bytes | str, base_path, target_rate: int | None = None) -> HrirDataset:
    """Load a manifest and its WAV pairs; optionally resample to target_rate.

    IR file paths are resolved relative to base_path (normally the manifest's
    directory). Each referenced file must be mono.
    """
    try:
        doc = json.loads(manifest)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid HRIR manifest: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(doc, dict) or "sample_rate" not in doc or "entries" not in doc:
        raise ParseError("HRIR manifest must carry sample_rate and entries")
    manifest_rate = int(doc["sample_rate"])
    final_rate = int(target_rate) if target_rate is not None else manifest_rate
    base = Path(base_path)

    entries = []
    for i, item in enumerate(doc["entries"]):
        label = f"entry {i} ({item.get('az_deg')}, {item.get('el_deg')})"
        for key in ("az_deg", "el_deg", "left", "right"):
            if key not in item:
                raise ParseError(f"{label}: missing {key!r}")
        irs = []
        for side in ("left", "right"):
            path = base / item[side]
            if not path.exists():
                raise FileNotFoundError(f"{label}: missing IR file {path}")
            buf = load_wav(path)
            if buf.num_channels != 1:
                raise FormatError(f"{label}: IR files must be mono, {path} has "
                                  f"{buf.num_channels} channels")
            if buf.sample_rate != final_rate:
                buf = resample(buf, final_rate)
            irs.append(buf.channels[0])
        entries.append(HrirEntry(float(item["az_deg"]), float(item["el_deg"]), irs[0], irs[1]))

    lengths = {e.left_ir.size for e in entries}
    if len(lengths) != 1:
        raise ValidationError(f"impulse responses have mismatched lengths: {sorted(lengths)}")
    return HrirDataset(final_rate, lengths.pop(), tuple(entries))


def nearest_hrir(dataset: HrirDataset, azimuth: float, elevation: float) -> HrirEntry:
    """Entry minimizing great-circle distance to the query direction.

    Near-exact ties resolve to the smaller azimuth, then smaller elevation.
    """
    az = math.radians(azimuth)
    el = math.radians(elevation)
    query = np.array([math.cos(el) * math.sin(az), math.sin(el), math.cos(el) * math.cos(az)])
    dots = np.array([e.unit_vector() @ query for e in dataset.entries])
    best = dots.max()
    candidates = [dataset.entries[i] for i in np.flatnonzero(dots >= best - 1e-12)]
    return min(candidates, key=lambda e: (e.azimuth, e.elevation))


def render_source_hrtf(mono: AudioBuffer, trajectory: Sequence[SpatialSample],
                       dataset: HrirDataset, config: RenderConfig) -> AudioBuffer:
    """Convolve one mono source with per-block nearest HRIRs along a trajectory.

    Each block is scaled by the 1/z distance gain, convolved with the selected
    pair and overlap-added; entry switches crossfade linearly over one block.
    Output length is input length + ir_length - 1.
    """
    if mono.num_channels != 1:
        raise ConfigurationError(f"expected mono input, got {mono.num_channels} channels")
    if mono.sample_rate != config.sample_rate:
        raise ConfigurationError(
            f"source rate {mono.sample_rate} != render rate {config.sample_rate}"
        )
    if dataset.sample_rate != config.sample_rate:
        raise ConfigurationError(
            f"HRIR rate {dataset.sample_rate} != render rate {config.sample_rate}"
        )
    if mono.num_samples == 0:
        raise ConfigurationError("cannot render an empty source")

    fs = config.sample_rate
    block_len = config.block
    ir_len = dataset.ir_length
    n = mono.num_samples
    n_blocks = math.ceil(n / block_len)
    traj = tuple(trajectory)

    signal = np.zeros(n_blocks * block_len)
    signal[:n] = mono.channels[0]
    out = np.zeros((2, n_blocks * block_len + ir_len - 1))
    fade_in = np.arange(1, block_len + 1) / block_len

    previous: HrirEntry | None = None
    for i in range(n_blocks):
        start = i * block_len
        pos = trajectory_at(traj, (start + block_len / 2.0) / fs)
        az_el = to_direction(pos, config.camera)
        entry = nearest_hrir(dataset, *az_el)
        block = signal[start:start + block_len] / pos.z
        span = slice(start, start + block_len + ir_len - 1)
        if previous is not None and entry is not previous:
            out[0, span] += fft_convolve(block * (1.0 - fade_in), previous.left_ir)
            out[1, span] += fft_convolve(block * (1.0 - fade_in), previous.right_ir)
            out[0, span] += fft_convolve(block * fade_in, entry.left_ir)
            out[1, span] += fft_convolve(block * fade_in, entry.right_ir)
        else:
            out[0, span] += fft_convolve(block, entry.left_ir)
            out[1, span] += fft_convolve(block, entry.right_ir)
        previous = entry

    return AudioBuffer(fs, out[:, :n + ir_len - 1])
