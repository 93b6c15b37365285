"""Scene descriptions: detection-to-position math and trajectory handling.

A scene binds each mono stem to a spatial trajectory. Trajectories come in
two source forms: per-frame detector output (normalized bbox center plus a
depth-map gray value) or explicit (t, x, y, z) samples. Detector output is
converted at parse time, so downstream code only ever sees SpatialSamples:
x, y dimensionless in [-1, 1] (x right, y up), z in meters.
"""

from __future__ import annotations

import bisect
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class CameraModel:
    """Field of view and the gray-to-depth mapping range."""

    h_fov: float = 90.0
    v_fov: float = 60.0
    d_min: float = 0.1
    d_max: float = 5.0
    g_min: float = 0.0
    g_max: float = 255.0

    def __post_init__(self):
        if not 0.0 < self.h_fov < 180.0 or not 0.0 < self.v_fov < 180.0:
            raise ValidationError("fields of view must lie in (0, 180) degrees")
        if self.d_min <= 0 or self.d_max <= self.d_min:
            raise ValidationError("need 0 < d_min < d_max")
        if self.g_min >= self.g_max:
            raise ValidationError("need g_min < g_max")


@dataclass(frozen=True)
class NormalizedDetection:
    """One detector hit: bbox center as frame fractions plus depth gray value."""

    frame_index: int
    x_center: float
    y_center: float
    gray: float

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValidationError(f"frame_index must be >= 0, got {self.frame_index}")
        if not 0.0 <= self.x_center <= 1.0 or not 0.0 <= self.y_center <= 1.0:
            raise ValidationError(
                f"bbox center ({self.x_center}, {self.y_center}) outside [0, 1]"
            )


@dataclass(frozen=True)
class SpatialSample:
    """A position at one instant: x right, y up (both in [-1, 1]), z meters."""

    time: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.time < 0:
            raise ValidationError(f"sample time must be >= 0, got {self.time}")
        if not -1.0 <= self.x <= 1.0 or not -1.0 <= self.y <= 1.0:
            raise ValidationError(f"position ({self.x}, {self.y}) outside [-1, 1]")
        if self.z <= 0:
            raise ValidationError(f"depth must be positive, got {self.z}")


@dataclass(frozen=True)
class SceneSource:
    id: str
    audio_path: str
    trajectory: tuple[SpatialSample, ...]


@dataclass(frozen=True)
class SceneDescription:
    fps: float
    camera: CameraModel = field(default_factory=CameraModel)
    sources: tuple[SceneSource, ...] = ()

    def __post_init__(self):
        if self.fps <= 0:
            raise ValidationError(f"fps must be positive, got {self.fps}")
        seen = set()
        for source in self.sources:
            if source.id in seen:
                raise ValidationError(f"duplicate source id {source.id!r}")
            seen.add(source.id)
            if not source.trajectory:
                raise ValidationError(f"source {source.id!r} has an empty trajectory")


def normalize_center(x_center: float, y_center: float) -> tuple[float, float]:
    """Map bbox-center fractions onto [-1, 1]; image y grows downward, so flip it."""
    if not 0.0 <= x_center <= 1.0 or not 0.0 <= y_center <= 1.0:
        raise ValueError(f"center ({x_center}, {y_center}) outside [0, 1]")
    return 2.0 * x_center - 1.0, 1.0 - 2.0 * y_center


def depth_from_gray(gray: float, camera: CameraModel | None = None) -> float:
    """Depth in meters from a depth-map gray value (brighter means nearer).

    Out-of-range gray values are clamped with a warning rather than rejected,
    since upstream depth models occasionally overshoot their nominal range.
    """
    cam = camera if camera is not None else CameraModel()
    if gray < cam.g_min or gray > cam.g_max:
        warnings.warn(
            f"gray value {gray} outside [{cam.g_min}, {cam.g_max}]; clamping",
            stacklevel=2,
        )
        gray = min(max(gray, cam.g_min), cam.g_max)
    if gray == cam.g_min:  # pin the endpoints exactly; the affine form rounds
        return cam.d_max
    if gray == cam.g_max:
        return cam.d_min
    return cam.d_max - (gray - cam.g_min) * (cam.d_max - cam.d_min) / (cam.g_max - cam.g_min)


def to_direction(sample: SpatialSample, camera: CameraModel | None = None) -> tuple[float, float]:
    """Azimuth/elevation in degrees for a sample, via a pinhole projection.

    The normalized (x, y) are scaled onto the image plane at depth z, giving a
    metric point; azimuth is positive to the right, elevation positive upward.
    """
    cam = camera if camera is not None else CameraModel()
    px = sample.x * sample.z * math.tan(math.radians(cam.h_fov) / 2.0)
    py = sample.y * sample.z * math.tan(math.radians(cam.v_fov) / 2.0)
    pz = sample.z
    azimuth = math.degrees(math.atan2(px, pz))
    elevation = math.degrees(math.atan2(py, math.hypot(px, pz)))
    return azimuth, elevation


def trajectory_at(trajectory: tuple[SpatialSample, ...], t: float) -> SpatialSample:
    """Linearly interpolated position at time t, clamped to the trajectory span."""
    if not trajectory:
        raise ValidationError("empty trajectory")
    times = [s.time for s in trajectory]
    if t <= times[0]:
        first = trajectory[0]
        return SpatialSample(times[0], first.x, first.y, first.z)
    if t >= times[-1]:
        last = trajectory[-1]
        return SpatialSample(times[-1], last.x, last.y, last.z)
    hi = bisect.bisect_right(times, t)
    lo = hi - 1
    a, b = trajectory[lo], trajectory[hi]
    w = (t - a.time) / (b.time - a.time)
    return SpatialSample(
        t,
        a.x + w * (b.x - a.x),
        a.y + w * (b.y - a.y),
        a.z + w * (b.z - a.z),
    )


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ParseError(f"{context}: missing required field {key!r}")
    return mapping[key]


def _number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{context}: expected a number, got {type(value).__name__}")
    return float(value)


def _detection_to_sample(det: dict, fps: float, camera: CameraModel, context: str) -> SpatialSample:
    frame = _number(_require(det, "frame", context), f"{context}.frame")
    if frame != int(frame) or frame < 0:
        raise ParseError(f"{context}.frame: expected a non-negative integer")
    x_c = _number(_require(det, "x_center", context), f"{context}.x_center")
    y_c = _number(_require(det, "y_center", context), f"{context}.y_center")
    gray = _number(_require(det, "gray", context), f"{context}.gray")
    try:
        x, y = normalize_center(x_c, y_c)
    except ValueError as exc:
        raise ValidationError(f"{context}: {exc}") from None
    z = depth_from_gray(gray, camera)
    return SpatialSample(frame / fps, x, y, z)


def _explicit_sample(point: dict, camera: CameraModel, context: str) -> SpatialSample:
    t = _number(_require(point, "t", context), f"{context}.t")
    x = _number(_require(point, "x", context), f"{context}.x")
    y = _number(_require(point, "y", context), f"{context}.y")
    z = _number(_require(point, "z", context), f"{context}.z")
    if not camera.d_min <= z <= camera.d_max:
        raise ValidationError(
            f"{context}: z={z} outside camera range [{camera.d_min}, {camera.d_max}]"
        )
    return SpatialSample(t, x, y, z)


def parse_scene(document: bytes | str, base_dir=None) -> SceneDescription:
    """Parse and validate a scene JSON document.

    Detector-form sources are converted to explicit trajectories here. When
    base_dir is given, relative audio paths are resolved against it.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("scene document must be a JSON object")

    fps = _number(_require(doc, "fps", "scene"), "scene.fps")
    if fps <= 0:
        raise ValidationError(f"scene.fps must be positive, got {fps}")

    cam_doc = doc.get("camera", {})
    if not isinstance(cam_doc, dict):
        raise ParseError("scene.camera must be an object")
    defaults = CameraModel()
    camera = CameraModel(
        h_fov=_number(cam_doc.get("h_fov_deg", defaults.h_fov), "camera.h_fov_deg"),
        v_fov=_number(cam_doc.get("v_fov_deg", defaults.v_fov), "camera.v_fov_deg"),
        d_min=_number(cam_doc.get("d_min_m", defaults.d_min), "camera.d_min_m"),
        d_max=_number(cam_doc.get("d_max_m", defaults.d_max), "camera.d_max_m"),
    )

    sources_doc = _require(doc, "sources", "scene")
    if not isinstance(sources_doc, list):
        raise ParseError("scene.sources must be an array")

    sources = []
    for i, src in enumerate(sources_doc):
        context = f"sources[{i}]"
        if not isinstance(src, dict):
            raise ParseError(f"{context}: expected an object")
        source_id = _require(src, "id", context)
        if not isinstance(source_id, str) or not source_id:
            raise ParseError(f"{context}.id: expected a non-empty string")
        audio = _require(src, "audio", context)
        if not isinstance(audio, str) or not audio:
            raise ValidationError(f"{context} ({source_id!r}): missing audio file reference")
        if base_dir is not None:
            audio = str(Path(base_dir) / audio)

        has_det = "detections" in src
        has_traj = "trajectory" in src
        if has_det == has_traj:
            raise ValidationError(
                f"{context} ({source_id!r}): provide exactly one of detections or trajectory"
            )
        raw = src["detections"] if has_det else src["trajectory"]
        if not isinstance(raw, list) or not raw:
            raise ValidationError(f"{context} ({source_id!r}): trajectory must be a non-empty array")

        if has_det:
            samples = [
                _detection_to_sample(d, fps, camera, f"{context}.detections[{j}]")
                for j, d in enumerate(raw)
            ]
        else:
            samples = [
                _explicit_sample(p, camera, f"{context}.trajectory[{j}]")
                for j, p in enumerate(raw)
            ]
        samples.sort(key=lambda s: s.time)
        for a, b in zip(samples, samples[1:]):
            if b.time <= a.time:
                raise ValidationError(
                    f"{context} ({source_id!r}): trajectory times must be strictly increasing"
                )
        sources.append(SceneSource(source_id, audio, tuple(samples)))

    return SceneDescription(fps=fps, camera=camera, sources=tuple(sources))


def serialize_scene(scene: SceneDescription) -> bytes:
    """Emit a scene document in the explicit-trajectory form; parse round-trips."""
    doc = {
        "fps": scene.fps,
        "camera": {
            "h_fov_deg": scene.camera.h_fov,
            "v_fov_deg": scene.camera.v_fov,
            "d_min_m": scene.camera.d_min,
            "d_max_m": scene.camera.d_max,
        },
        "sources": [
            {
                "id": s.id,
                "audio": s.audio_path,
                "trajectory": [
                    {"t": p.time, "x": p.x, "y": p.y, "z": p.z} for p in s.trajectory
                ],
            }
            for s in scene.sources
        ],
    }
    return json.dumps(doc, indent=2).encode("utf-8")
