"""Scene orchestration: per-source rendering, mixdown, clip protection."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .audio_io import AudioBuffer, load_wav, resample
from .errors import ConfigurationError, ValidationError
from .hrtf import HrirDataset, render_source_hrtf
from .scene import SceneDescription
from .spatializer3d import RenderConfig, render_source_3d


@dataclass
class RenderResult:
    audio: AudioBuffer
    applied_gain: float
    clipped_samples: int
    per_source_peak: dict[str, float]


def mix_down(tracks: list[AudioBuffer], policy: str = "peak_normalize"
             ) -> tuple[AudioBuffer, float, int]:
    """Sum stereo tracks (tail-padded to the longest) and protect the mix.

    peak_normalize scales everything down by 1/peak only when the summed peak
    exceeds 1, preserving inter-source balance; hard_clip clamps to [-1, 1]
    and reports how many samples were touched.
    """
    if not tracks:
        raise ValidationError("nothing to mix")
    rate = tracks[0].sample_rate
    if any(t.sample_rate != rate for t in tracks):
        raise ConfigurationError("all tracks must share one sample rate")
    n_ch = max(t.num_channels for t in tracks)
    longest = max(t.num_samples for t in tracks)

    mix = np.zeros((n_ch, longest))
    for t in tracks:
        mix[:t.num_channels, :t.num_samples] += t.channels

    applied_gain = 1.0
    clipped = 0
    if policy == "peak_normalize":
        peak = np.max(np.abs(mix)) if mix.size else 0.0
        if peak > 1.0:
            applied_gain = 1.0 / peak
            mix *= applied_gain
    elif policy == "hard_clip":
        clipped = int(np.count_nonzero(np.abs(mix) > 1.0))
        np.clip(mix, -1.0, 1.0, out=mix)
    else:
        raise ConfigurationError(f"unknown clip policy {policy!r}")
    return AudioBuffer(rate, mix), applied_gain, clipped


def render_scene(scene: SceneDescription, config: RenderConfig,
                 hrir: HrirDataset | None = None) -> RenderResult:
    """Render every source in the scene and mix to one stereo program.

    Sources are loaded, downmixed to mono if needed, resampled to the render
    rate and spatialized by the configured method. The scene's camera model
    overrides the one in the config so angles and depth limits match the
    trajectories it validated.
    """
    if not scene.sources:
        raise ValidationError("scene has no sources")
    if config.method == "hrtf" and hrir is None:
        raise ConfigurationError("method 'hrtf' requires an HRIR dataset")
    cfg = replace(config, camera=scene.camera)

    tracks = []
    peaks = {}
    for source in scene.sources:
        try:
            audio = load_wav(source.audio_path)
        except OSError as exc:
            raise OSError(f"source {source.id!r}: cannot read audio: {exc}") from None
        mono = resample(audio.to_mono(), cfg.sample_rate)
        if cfg.method == "hrtf":
            track = render_source_hrtf(mono, source.trajectory, hrir, cfg)
        else:
            track = render_source_3d(mono, source.trajectory, cfg)
        tracks.append(track)
        peaks[source.id] = track.peak()

    mixed, applied_gain, clipped = mix_down(tracks, cfg.clip_policy)
    return RenderResult(mixed, applied_gain, clipped, peaks)
