import numpy as np
import pytest

from facetracker.clipgen import two_face_frames
from facetracker.depth import DepthAnythingDepth, LumaDepth
from facetracker.detectors import BlobFaceDetector, ModelUnavailableError, YoloFaceDetector


def test_blob_detector_finds_two_separated_faces():
    frame = two_face_frames(1)[0]
    hits = BlobFaceDetector().detect(frame)
    assert len(hits) == 2
    centers = [(x + w / 2, y + h / 2) for (x, y, w, h), _ in hits]
    assert abs(centers[0][0] - centers[1][0]) > 50
    for _, conf in hits:
        assert 0.0 <= conf <= 1.0


def test_blob_detector_empty_frame():
    assert BlobFaceDetector().detect(np.zeros((120, 160, 3), np.uint8)) == []


def test_blob_detector_ignores_dim_blobs():
    frame = np.zeros((120, 160, 3), np.uint8)
    frame[40:70, 40:70] = 50  # below the intensity threshold
    assert BlobFaceDetector().detect(frame) == []


def test_blob_detector_ignores_tiny_speckle():
    frame = np.zeros((120, 160, 3), np.uint8)
    frame[10:13, 10:13] = 255
    assert BlobFaceDetector().detect(frame) == []


def test_yolo_backend_unavailable_gives_guidance():
    with pytest.raises(ModelUnavailableError, match="pip install"):
        YoloFaceDetector()


def test_luma_depth_contract():
    frame = two_face_frames(1)[0]
    depth = LumaDepth().estimate(frame)
    assert depth.shape == frame.shape[:2]
    assert np.all(depth >= 0) and np.all(depth <= 255)
    assert np.all(np.isfinite(depth))


def test_luma_depth_constant_frame():
    depth = LumaDepth().estimate(np.full((60, 80, 3), 33, np.uint8))
    assert depth.shape == (60, 80)
    assert np.all((depth >= 0) & (depth <= 255))


def test_luma_depth_faces_nearer_than_background():
    frame = two_face_frames(1)[0]
    depth = LumaDepth().estimate(frame)
    face_mask = frame[..., 0] > 90
    assert depth[face_mask].mean() > depth[~face_mask].mean()


def test_depth_anything_unavailable_gives_guidance(monkeypatch):
    monkeypatch.setenv("HF_HUB_OFFLINE", "1")
    monkeypatch.setenv("TRANSFORMERS_OFFLINE", "1")
    with pytest.raises(ModelUnavailableError, match="depth model|transformers"):
        DepthAnythingDepth()
