"""Detection/alert records, their JSON Lines formats and the key = value config file."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from crowdsafe.congestion import CongestionConfig
from crowdsafe.errors import ConfigurationError, CrowdSafeError, ParseError
from crowdsafe.geometry import AffineTransform2D, BBox, CameraIntrinsics, GroundPoint

DEFAULT_SCORE_FLOOR = 0.5
DETECTION_FIELDS = ("frame", "x_min", "y_min", "x_max", "y_max", "score", "label")


@dataclass(frozen=True)
class DetectionRecord:
    frame_id: int
    box: BBox
    confidence: float
    class_label: str = "person"

    def __post_init__(self):
        if self.frame_id < 0:
            raise ParseError("frame id must be non-negative")
        if not 0.0 <= self.confidence <= 1.0:
            raise ParseError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class FrameDetections:
    frame_id: int
    records: tuple


@dataclass(frozen=True)
class AlertRecord:
    frame_id: int
    cluster_index: int
    centroid: GroundPoint
    member_count: int
    flagged: bool

    def to_json(self):
        return json.dumps({
            "frame": self.frame_id,
            "cluster": self.cluster_index,
            "cx": self.centroid.x,
            "cy": self.centroid.y,
            "members": self.member_count,
            "flagged": self.flagged,
        })


def _parse_detection(obj, line):
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", line)
    missing = [k for k in DETECTION_FIELDS if k not in obj]
    if missing:
        raise ParseError(f"missing field(s) {', '.join(missing)}", line)
    frame = obj["frame"]
    if isinstance(frame, bool) or not isinstance(frame, int):
        raise ParseError("frame must be an integer", line)
    coords = []
    for key in ("x_min", "y_min", "x_max", "y_max", "score"):
        value = obj[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ParseError(f"{key} must be a finite number", line)
        coords.append(float(value))
    if not isinstance(obj["label"], str):
        raise ParseError("label must be a string", line)
    try:
        return DetectionRecord(frame, BBox(*coords[:4]), coords[4], obj["label"])
    except CrowdSafeError as exc:
        raise ParseError(str(exc), line) from exc


def parse_detections(lines):
    """Parse JSON Lines text into frame groups sorted by frame id."""
    frames = {}
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", lineno) from exc
        rec = _parse_detection(obj, lineno)
        frames.setdefault(rec.frame_id, []).append(rec)
    return [FrameDetections(fid, tuple(frames[fid])) for fid in sorted(frames)]


def ingest_detections(path):
    with open(path, encoding="utf-8") as fh:
        return parse_detections(fh)


def write_alerts(alerts, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for alert in alerts:
            fh.write(alert.to_json() + "\n")


def read_alerts(path):
    alerts = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                alerts.append(AlertRecord(
                    obj["frame"], obj["cluster"], GroundPoint(obj["cx"], obj["cy"]),
                    obj["members"], obj["flagged"],
                ))
    return alerts


@dataclass
class PipelineConfig:
    congestion: CongestionConfig = field(default_factory=CongestionConfig)
    calibration: AffineTransform2D = field(default_factory=AffineTransform2D)
    score_floor: float = DEFAULT_SCORE_FLOOR
    camera: Optional[CameraIntrinsics] = None
    units: str = ""


_INT_KEYS = {"k", "c_neighbors", "max_iters", "seed"}
_FLOAT_KEYS = {"safe_dist", "crowding_factor"}
_CALIB_KEYS = {"a": "a", "b": "b", "c": "c", "d": "d", "e": "e", "f": "f_t"}
_CAMERA_KEYS = {"focal": "f", "image_width": "w", "image_height": "h"}


def parse_config(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    congestion, calib, camera = {}, {}, {}
    score_floor = DEFAULT_SCORE_FLOOR
    units = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key in _INT_KEYS:
                congestion[key] = int(value)
            elif key in _FLOAT_KEYS:
                congestion[key] = float(value)
            elif key == "init":
                congestion[key] = value
            elif key == "score_floor":
                score_floor = float(value)
            elif key in _CALIB_KEYS:
                calib[_CALIB_KEYS[key]] = float(value)
            elif key in _CAMERA_KEYS:
                camera[_CAMERA_KEYS[key]] = float(value)
            elif key == "units":
                units = value
            else:
                raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    if not 0.0 <= score_floor <= 1.0:
        raise ConfigurationError("score_floor must lie in [0, 1]")
    if camera and len(camera) != 3:
        raise ConfigurationError("focal, image_width and image_height must be given together")
    return PipelineConfig(
        congestion=CongestionConfig(**congestion),
        calibration=AffineTransform2D(**calib),
        score_floor=score_floor,
        camera=CameraIntrinsics(**camera) if camera else None,
        units=units,
    )


def load_config(path):
    return parse_config(Path(path).read_text(encoding="utf-8"))
