"""spataudio: binaural spatial-audio rendering and evaluation.

Turns mono stems plus per-frame spatial trajectories into spatialized
stereo (algorithmic 3D renderer or HRTF convolution) and scores rendered
audio against references with spectrogram and envelope distances.
"""

from .audio_io import (
    AudioBuffer,
    load_wav,
    measure_loudness,
    normalize_loudness,
    read_wav,
    resample,
    save_wav,
    write_wav,
)
from .dsp import Spectrogram, StftParams, envelope, fft_convolve, istft, stft
from .errors import (
    ConfigurationError,
    EvaluationError,
    FormatError,
    MeasurementError,
    ParseError,
    SpatAudioError,
    ValidationError,
)
from .hrtf import HrirDataset, HrirEntry, load_hrir_dataset, nearest_hrir, render_source_hrtf
from .metrics import MetricsReport, env_distance, evaluate, stft_distance
from .render import RenderResult, mix_down, render_scene
from .scene import (
    CameraModel,
    NormalizedDetection,
    SceneDescription,
    SceneSource,
    SpatialSample,
    depth_from_gray,
    normalize_center,
    parse_scene,
    serialize_scene,
    to_direction,
    trajectory_at,
)
from .spatializer3d import (
    DistanceEffect,
    RenderConfig,
    distance_effect,
    elevation_filter,
    elevation_gain,
    pan_lr,
    render_source_3d,
)

__version__ = "0.1.0"
