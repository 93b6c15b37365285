"""Face detector backends.

The default backend wraps pretrained YOLOv8 face weights; since those are an
external artifact, a classical brightness-blob detector is provided for
tests and synthetic footage. Backends expose detect(frame) -> list of
((x, y, w, h) pixel bbox, confidence in [0, 1]).
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage


class ModelUnavailableError(RuntimeError):
    """A pretrained backend cannot start; the message carries install guidance."""


def _luma(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.ndim == 2:
        return frame.astype(np.float64)
    return (0.299 * frame[..., 0] + 0.587 * frame[..., 1] + 0.114 * frame[..., 2]).astype(np.float64)


class BlobFaceDetector:
    """Bright connected components as stand-in faces (deterministic, no weights)."""

    name = "blob"

    def __init__(self, intensity_threshold: float = 90.0, min_area: int = 120):
        self.intensity_threshold = intensity_threshold
        self.min_area = min_area

    def detect(self, frame: np.ndarray) -> list[tuple[tuple[float, float, float, float], float]]:
        gray = _luma(frame)
        mask = gray >= self.intensity_threshold
        labels, count = ndimage.label(mask)
        results = []
        for region in range(1, count + 1):
            ys, xs = np.nonzero(labels == region)
            if ys.size < self.min_area:
                continue
            x0, x1 = xs.min(), xs.max()
            y0, y1 = ys.min(), ys.max()
            bbox = (float(x0), float(y0), float(x1 - x0 + 1), float(y1 - y0 + 1))
            confidence = float(np.mean(gray[ys, xs]) / 255.0)
            results.append((bbox, confidence))
        results.sort(key=lambda item: (item[0][0], item[0][1]))
        return results


class YoloFaceDetector:
    """Pretrained YOLOv8 face weights via ultralytics."""

    name = "yolov8"

    def __init__(self, weights: str = "yolov8n-face.pt"):
        try:
            from ultralytics import YOLO
        except ImportError as exc:
            raise ModelUnavailableError(
                "YOLOv8 backend needs the ultralytics package and face weights: "
                "pip install ultralytics, then pass --weights pointing at a "
                "yolov8n-face checkpoint (or use --detector blob for synthetic clips)"
            ) from exc
        try:
            self._model = YOLO(weights)
        except Exception as exc:
            raise ModelUnavailableError(
                f"could not load YOLOv8 weights {weights!r}: {exc}"
            ) from exc

    def detect(self, frame: np.ndarray) -> list[tuple[tuple[float, float, float, float], float]]:
        results = self._model(frame, verbose=False)[0]
        out = []
        for box in results.boxes:
            x0, y0, x1, y1 = (float(v) for v in box.xyxy[0])
            out.append(((x0, y0, x1 - x0, y1 - y0), float(box.conf[0])))
        out.sort(key=lambda item: (item[0][0], item[0][1]))
        return out


DETECTOR_BACKENDS = {
    BlobFaceDetector.name: BlobFaceDetector,
    YoloFaceDetector.name: YoloFaceDetector,
}
