"""Tracker command line: video in, scene-build detections JSON out."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .depth import DEPTH_BACKENDS
from .detectors import DETECTOR_BACKENDS, ModelUnavailableError
from .tracking import IOU_MATCH_THRESHOLD, track_and_export


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


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracker",
        description="Detect faces + depth per frame and export detections JSON",
    )
    parser.add_argument("--video", required=True, help="input video (.mp4/.avi/.npz)")
    parser.add_argument("--out", required=True, help="output detections JSON")
    parser.add_argument("--threshold", type=float, default=0.5,
                        help="detector confidence threshold")
    parser.add_argument("--detector", choices=sorted(DETECTOR_BACKENDS), default="yolov8")
    parser.add_argument("--depth", choices=sorted(DEPTH_BACKENDS), default="depth-anything")
    parser.add_argument("--fps", type=float, help="override the container frame rate")
    parser.add_argument("--iou", type=float, default=IOU_MATCH_THRESHOLD,
                        help="IoU threshold for identity matching")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        detector = DETECTOR_BACKENDS[args.detector]()
        depth_backend = DEPTH_BACKENDS[args.depth]()
        document = track_and_export(args.video, detector, depth_backend,
                                    threshold=args.threshold, fps_override=args.fps,
                                    iou_threshold=args.iou)
        _atomic_write(Path(args.out), (json.dumps(document, indent=2) + "\n").encode())
    except ModelUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    n_tracks = len({d["track_id"] for d in document["detections"]})
    print(f"wrote {len(document['detections'])} detection(s) across {n_tracks} track(s) "
          f"to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
