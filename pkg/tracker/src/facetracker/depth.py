"""Monocular depth backends producing gray maps in [0, 255], brighter = nearer."""

from __future__ import annotations

import numpy as np

from .detectors import ModelUnavailableError, _luma


class LumaDepth:
    """Brightness as a depth proxy for synthetic footage where near = bright."""

    name = "luma"

    def estimate(self, frame: np.ndarray) -> np.ndarray:
        gray = _luma(frame)
        return np.clip(gray, 0.0, 255.0)


class DepthAnythingDepth:
    """Pretrained small vision-transformer depth model via transformers."""

    name = "depth-anything"

    def __init__(self, model_id: str = "LiheYoung/depth-anything-small-hf"):
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise ModelUnavailableError(
                "depth-anything backend needs transformers and torch: "
                "pip install torch transformers (or use --depth luma for "
                "synthetic clips)"
            ) from exc
        try:
            self._pipe = pipeline("depth-estimation", model=model_id)
        except Exception as exc:
            raise ModelUnavailableError(
                f"could not load depth model {model_id!r} (weights must be "
                f"downloaded or cached first): {exc}"
            ) from exc

    def estimate(self, frame: np.ndarray) -> np.ndarray:
        from PIL import Image

        result = self._pipe(Image.fromarray(np.asarray(frame, dtype=np.uint8)))
        depth = np.asarray(result["predicted_depth"], dtype=np.float64)
        if depth.shape != frame.shape[:2]:
            depth = np.array(
                Image.fromarray(depth).resize((frame.shape[1], frame.shape[0]),
                                              Image.BILINEAR),
                dtype=np.float64,
            )
        # model emits relative inverse depth (larger = nearer); map onto [0, 255]
        lo, hi = depth.min(), depth.max()
        if hi - lo < 1e-12:
            return np.full(frame.shape[:2], 127.5)
        return (depth - lo) / (hi - lo) * 255.0


DEPTH_BACKENDS = {
    LumaDepth.name: LumaDepth,
    DepthAnythingDepth.name: DepthAnythingDepth,
}
