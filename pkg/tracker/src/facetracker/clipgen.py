"""Synthetic two-face test clip generator.

Draws two non-crossing elliptical blobs drifting horizontally, one bright
(near) and one dim (far), so the blob detector and luma depth backend
produce a deterministic two-track scene. Writes .avi/.mp4 via OpenCV or a
raw .npz archive.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

WIDTH = 320
HEIGHT = 180
BACKGROUND = 15


def _draw_ellipse(frame: np.ndarray, cx: float, cy: float, rx: float, ry: float,
                  intensity: int) -> None:
    ys, xs = np.ogrid[:frame.shape[0], :frame.shape[1]]
    mask = ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0
    frame[mask] = intensity


def two_face_frames(n_frames: int = 40, width: int = WIDTH, height: int = HEIGHT) -> np.ndarray:
    """(N, H, W, 3) uint8: bright face drifts right, dim face drifts left."""
    frames = np.full((n_frames, height, width, 3), BACKGROUND, dtype=np.uint8)
    for i in range(n_frames):
        t = i / max(n_frames - 1, 1)
        plane = np.full((height, width), BACKGROUND, dtype=np.uint8)
        _draw_ellipse(plane, cx=60 + 50 * t, cy=height * 0.45, rx=18, ry=24, intensity=225)
        _draw_ellipse(plane, cx=260 - 50 * t, cy=height * 0.55, rx=14, ry=19, intensity=150)
        frames[i] = plane[..., None]
    return frames


def write_clip(path, frames: np.ndarray, fps: float = 25.0) -> None:
    path = Path(path)
    if path.suffix == ".npz":
        np.savez_compressed(path, frames=frames, fps=fps)
        return
    import cv2

    fourcc = "mp4v" if path.suffix == ".mp4" else "MJPG"
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*fourcc), fps,
                             (frames.shape[2], frames.shape[1]))
    if not writer.isOpened():
        raise OSError(f"cannot open video writer for {path}")
    for frame in frames:
        writer.write(frame[..., ::-1])  # RGB -> BGR
    writer.release()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="generate the synthetic two-face clip")
    parser.add_argument("--out", required=True, help=".avi, .mp4 or .npz path")
    parser.add_argument("--frames", type=int, default=40)
    parser.add_argument("--fps", type=float, default=25.0)
    args = parser.parse_args(argv)
    write_clip(args.out, two_face_frames(args.frames), args.fps)
    print(f"wrote {args.frames}-frame two-face clip to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
