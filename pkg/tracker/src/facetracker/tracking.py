"""Cross-frame identity assignment and the detections export pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .video import VideoReader

IOU_MATCH_THRESHOLD = 0.3
GRAY_MEDIAN_RADIUS = 2  # 5x5 patch around the bbox center


@dataclass(frozen=True)
class DetectionRecord:
    frame: int
    track_id: str
    x_center: float
    y_center: float
    gray: float


def iou(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> float:
    ax0, ay0, aw, ah = a
    bx0, by0, bw, bh = b
    x0 = max(ax0, bx0)
    y0 = max(ay0, by0)
    x1 = min(ax0 + aw, bx0 + bw)
    y1 = min(ay0 + ah, by0 + bh)
    inter = max(0.0, x1 - x0) * max(0.0, y1 - y0)
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


class GreedyIouTracker:
    """Stable ids by greedy best-overlap matching against the previous frame.

    Pairs are taken in descending IoU order; detections whose best overlap is
    under the threshold start a new track. Tracks absent from the previous
    frame are forgotten (no re-identification).
    """

    def __init__(self, iou_threshold: float = IOU_MATCH_THRESHOLD):
        self.iou_threshold = iou_threshold
        self._previous: list[tuple[str, tuple[float, float, float, float]]] = []
        self._next_index = 0

    def update(self, boxes: list[tuple[float, float, float, float]]) -> list[str]:
        pairs = []
        for pi, (_, prev_box) in enumerate(self._previous):
            for di, box in enumerate(boxes):
                overlap = iou(prev_box, box)
                if overlap >= self.iou_threshold:
                    pairs.append((-overlap, pi, di))
        pairs.sort()

        assigned: dict[int, str] = {}
        used_prev: set[int] = set()
        for neg_overlap, pi, di in pairs:
            if pi in used_prev or di in assigned:
                continue
            assigned[di] = self._previous[pi][0]
            used_prev.add(pi)

        ids = []
        for di in range(len(boxes)):
            if di not in assigned:
                assigned[di] = f"face{self._next_index}"
                self._next_index += 1
            ids.append(assigned[di])
        self._previous = list(zip(ids, boxes))
        return ids


def sample_gray(depth_map: np.ndarray, cx: float, cy: float,
                radius: int = GRAY_MEDIAN_RADIUS) -> float:
    """Median gray in a small patch around the center; resists depth speckle."""
    h, w = depth_map.shape[:2]
    x = int(round(cx))
    y = int(round(cy))
    x0, x1 = max(0, x - radius), min(w, x + radius + 1)
    y0, y1 = max(0, y - radius), min(h, y + radius + 1)
    return float(np.median(depth_map[y0:y1, x0:x1]))


def track_and_export(video_path, detector, depth_backend, threshold: float = 0.5,
                     fps_override: float | None = None,
                     iou_threshold: float = IOU_MATCH_THRESHOLD) -> dict:
    """Run detection + depth over a video and build the detections document.

    Records are sorted by (frame, track_id); coordinates are normalized by
    the frame dimensions and gray values clipped to [0, 255].
    """
    reader = VideoReader(video_path)
    tracker = GreedyIouTracker(iou_threshold)
    records: list[DetectionRecord] = []
    try:
        for frame_index, frame in enumerate(reader):
            detections = [(box, conf) for box, conf in detector.detect(frame)
                          if conf >= threshold]
            ids = tracker.update([box for box, _ in detections])
            if not detections:
                continue
            depth_map = depth_backend.estimate(frame)
            for (box, _), track_id in zip(detections, ids):
                x, y, w, h = box
                cx = x + w / 2.0
                cy = y + h / 2.0
                records.append(DetectionRecord(
                    frame=frame_index,
                    track_id=track_id,
                    x_center=min(max(cx / reader.width, 0.0), 1.0),
                    y_center=min(max(cy / reader.height, 0.0), 1.0),
                    gray=min(max(sample_gray(depth_map, cx, cy), 0.0), 255.0),
                ))
    finally:
        reader.close()

    records.sort(key=lambda r: (r.frame, r.track_id))
    return {
        "fps": float(fps_override) if fps_override else float(reader.fps),
        "width": int(reader.width),
        "height": int(reader.height),
        "detections": [
            {
                "frame": r.frame,
                "track_id": r.track_id,
                "x_center": r.x_center,
                "y_center": r.y_center,
                "gray": r.gray,
            }
            for r in records
        ],
    }
