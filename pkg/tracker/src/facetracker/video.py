"""Frame access for video files, plus an .npz escape hatch for raw clips."""

from __future__ import annotations

from pathlib import Path

import numpy as np


class VideoReader:
    """Iterates RGB uint8 frames; knows fps, width and height up front."""

    def __init__(self, path):
        self.path = Path(path)
        if not self.path.exists():
            raise OSError(f"video file not found: {self.path}")
        if self.path.suffix == ".npz":
            archive = np.load(self.path)
            self._frames = archive["frames"]
            self.fps = float(archive["fps"]) if "fps" in archive else 25.0
            self.height, self.width = self._frames.shape[1:3]
            self._cap = None
        else:
            import cv2

            cap = cv2.VideoCapture(str(self.path))
            if not cap.isOpened():
                raise OSError(f"cannot open video: {self.path}")
            self._cap = cap
            self._frames = None
            self.fps = cap.get(cv2.CAP_PROP_FPS) or 25.0
            self.width = int(cap.get(cv2.CAP_PROP_FRAME_WIDTH))
            self.height = int(cap.get(cv2.CAP_PROP_FRAME_HEIGHT))

    def __iter__(self):
        if self._frames is not None:
            yield from self._frames
            return
        import cv2

        while True:
            ok, frame = self._cap.read()
            if not ok:
                break
            yield cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)

    def close(self):
        if self._cap is not None:
            self._cap.release()
            self._cap = None
