"""Command-line surface: render scenes, score renders, build and synthesize scenes.

Exit codes are stable: 0 success, 1 runtime or I/O failure, 2 usage or
validation failure. Output files are written to a temporary sibling and
renamed into place so a failed run never leaves a partial file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer, write_wav
from .errors import ConfigurationError, ParseError, SpatAudioError, ValidationError
from .hrtf import load_hrir_dataset
from .metrics import evaluate
from .render import render_scene
from .scene import parse_scene, serialize_scene
from .spatializer3d import RenderConfig

SYNTH_PRESETS = ("static", "sweep", "approach")
_CLIP_POLICIES = {"normalize": "peak_normalize", "hard": "hard_clip"}


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def cmd_render(args) -> int:
    scene_path = Path(args.scene)
    if args.method == "hrtf" and not args.hrir:
        raise ConfigurationError("--method hrtf requires --hrir")
    if args.method == "algo3d" and args.hrir:
        raise ConfigurationError("--hrir only applies to --method hrtf")

    config = RenderConfig(
        method=args.method,
        sample_rate=args.rate,
        clip_policy=_CLIP_POLICIES[args.clip],
    )
    scene = parse_scene(scene_path.read_bytes(), base_dir=scene_path.parent)
    hrir = None
    if args.hrir:
        hrir_path = Path(args.hrir)
        hrir = load_hrir_dataset(hrir_path.read_bytes(), hrir_path.parent,
                                 target_rate=config.sample_rate)

    result = render_scene(scene, config, hrir)
    _atomic_write(Path(args.out), write_wav(result.audio, bit_depth=16))
    print(f"rendered {result.audio.duration:.3f}s from {len(scene.sources)} source(s) "
          f"to {args.out} (applied_gain={result.applied_gain:.6g})")
    return 0


def cmd_evaluate(args) -> int:
    report = evaluate(args.ref, args.pred)
    text = report.to_json()
    print(text)
    if args.out:
        _atomic_write(Path(args.out), (text + "\n").encode("utf-8"))
    return 0


def _parse_audio_map(raw_maps: list[str]) -> dict[str, str]:
    mapping = {}
    for chunk in raw_maps:
        for pair in chunk.split(","):
            if "=" not in pair:
                raise ValidationError(f"--map entries need the form id=path, got {pair!r}")
            key, value = pair.split("=", 1)
            if not key or not value:
                raise ValidationError(f"--map entries need the form id=path, got {pair!r}")
            mapping[key] = value
    return mapping


def cmd_scene_build(args) -> int:
    detections_path = Path(args.detections)
    try:
        doc = json.loads(detections_path.read_bytes())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid detections JSON: {exc.msg} (line {exc.lineno})") from None

    fps = args.fps if args.fps is not None else doc.get("fps")
    if not fps or fps <= 0:
        raise ValidationError("need a positive fps (--fps or the detections file)")

    records = doc.get("detections", [])
    if not isinstance(records, list):
        raise ParseError("detections file: 'detections' must be an array")
    audio_map = _parse_audio_map(args.map)
    by_track: dict[str, list] = {}
    for i, rec in enumerate(records):
        if not isinstance(rec, dict) or not {"track_id", "frame", "x_center",
                                             "y_center", "gray"} <= rec.keys():
            raise ParseError(f"detections[{i}]: need track_id, frame, x_center, "
                             f"y_center and gray")
        by_track.setdefault(str(rec["track_id"]), []).append(rec)

    unmapped = sorted(set(by_track) - set(audio_map))
    if unmapped:
        raise ValidationError(f"no audio mapping for track id(s): {', '.join(unmapped)}")

    scene_doc = {
        "fps": fps,
        "camera": {
            "h_fov_deg": args.hfov,
            "v_fov_deg": args.vfov,
            "d_min_m": args.dmin,
            "d_max_m": args.dmax,
        },
        "sources": [
            {
                "id": track_id,
                "audio": audio_map[track_id],
                "detections": [
                    {
                        "frame": rec["frame"],
                        "x_center": rec["x_center"],
                        "y_center": rec["y_center"],
                        "gray": rec["gray"],
                    }
                    for rec in recs
                ],
            }
            for track_id, recs in sorted(by_track.items())
        ],
    }
    scene = parse_scene(json.dumps(scene_doc))
    _atomic_write(Path(args.out), serialize_scene(scene))
    print(f"wrote scene with {len(scene.sources)} source(s) to {args.out}")
    return 0


def cmd_scene_synth(args) -> int:
    if args.duration <= 0:
        raise ValidationError(f"--duration must be positive, got {args.duration}")
    if args.sources < 1:
        raise ValidationError(f"--sources must be at least 1, got {args.sources}")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    fs = args.rate
    n_samples = int(round(args.duration * fs))
    d_far, d_near = 5.0, 0.1

    sources = []
    for k in range(args.sources):
        freq = 180.0 * (k + 1) + rng.uniform(0.0, 40.0)
        t = np.arange(n_samples) / fs
        stem = 0.4 * np.sin(2 * np.pi * freq * t) + 0.05 * rng.uniform(-1, 1, n_samples)
        name = f"src{k + 1}.wav"
        _atomic_write(out_dir / name, write_wav(AudioBuffer(fs, stem), bit_depth=16))

        spread = -1.0 + 2.0 * k / max(args.sources - 1, 1)
        if args.preset == "static":
            trajectory = [{"t": 0.0, "x": spread, "y": 0.0, "z": 1.0}]
        elif args.preset == "sweep":
            trajectory = [
                {"t": 0.0, "x": -1.0, "y": 0.0, "z": 1.0},
                {"t": args.duration, "x": 1.0, "y": 0.0, "z": 1.0},
            ]
        else:  # approach
            trajectory = [
                {"t": 0.0, "x": spread, "y": 0.0, "z": d_far},
                {"t": args.duration, "x": spread, "y": 0.0, "z": d_near},
            ]
        sources.append({"id": f"src{k + 1}", "audio": name, "trajectory": trajectory})

    scene_doc = {"fps": 25.0, "sources": sources}
    scene = parse_scene(json.dumps(scene_doc))
    _atomic_write(out_dir / "scene.json", serialize_scene(scene))
    print(f"synthesized {args.sources} stem(s) and scene.json in {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spataudio",
        description="Binaural spatial-audio rendering and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render a scene to stereo WAV")
    p.add_argument("--scene", required=True, help="scene JSON file")
    p.add_argument("--method", required=True, choices=("algo3d", "hrtf"))
    p.add_argument("--hrir", help="HRIR manifest JSON (hrtf method only)")
    p.add_argument("--out", required=True, help="output WAV path")
    p.add_argument("--rate", type=int, default=16000, help="render sample rate")
    p.add_argument("--clip", choices=tuple(_CLIP_POLICIES), default="normalize")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("evaluate", help="score a rendered file against a reference")
    p.add_argument("--ref", required=True, help="reference WAV")
    p.add_argument("--pred", required=True, help="predicted WAV")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("scene-build", help="turn tracker detections into a scene file")
    p.add_argument("--detections", required=True, help="detections JSON from the tracker")
    p.add_argument("--map", required=True, action="append",
                   help="track-to-audio bindings: id=path[,id=path...]")
    p.add_argument("--fps", type=float, help="frame rate (defaults to the detections file)")
    p.add_argument("--hfov", type=float, default=90.0)
    p.add_argument("--vfov", type=float, default=60.0)
    p.add_argument("--dmin", type=float, default=0.1)
    p.add_argument("--dmax", type=float, default=5.0)
    p.add_argument("--out", required=True, help="output scene JSON path")
    p.set_defaults(func=cmd_scene_build)

    p = sub.add_parser("scene-synth", help="generate seeded test stems plus a scene file")
    p.add_argument("--sources", type=int, required=True)
    p.add_argument("--duration", type=float, required=True, help="seconds")
    p.add_argument("--preset", required=True, choices=SYNTH_PRESETS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rate", type=int, default=16000)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_scene_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, SpatAudioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
