"""facetracker: per-frame face positions plus depth, exported as detections JSON.

Runs a face detector and a monocular depth estimator over a video, keeps
identities stable with greedy IoU matching, and writes the detections
document consumed by `spataudio scene-build`.
"""

from .depth import DEPTH_BACKENDS, LumaDepth
from .detectors import DETECTOR_BACKENDS, BlobFaceDetector, ModelUnavailableError
from .tracking import DetectionRecord, GreedyIouTracker, iou, sample_gray, track_and_export

__version__ = "0.1.0"
