"""Per-frame batch processing: project detections, detect congestion, emit alerts."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from crowdsafe.congestion import CongestionConfig, CongestionReport, detect
from crowdsafe.geometry import AffineTransform2D, project_detection
from crowdsafe.pipeline.records import DEFAULT_SCORE_FLOOR, AlertRecord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrameWarning:
    frame_id: int
    message: str


@dataclass
class FrameResult:
    frame_id: int
    points: list
    report: CongestionReport


@dataclass
class PipelineResult:
    alerts: list = field(default_factory=list)
    frames: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def report_for(self, frame_id):
        for fr in self.frames:
            if fr.frame_id == frame_id:
                return fr.report
        raise KeyError(frame_id)


def frame_points(frame, calib: AffineTransform2D, score_floor=DEFAULT_SCORE_FLOOR):
    """Ground points for the person detections of one frame that clear the score floor."""
    return [
        project_detection(rec.box, calib)
        for rec in frame.records
        if rec.class_label == "person" and rec.confidence >= score_floor
    ]


def alerts_for(frame_id, report: CongestionReport):
    counts = [0] * len(report.centroids)
    for a in report.assignments:
        counts[a.cluster_index] += 1
    flagged = set(report.congested_clusters)
    return [
        AlertRecord(frame_id, i, c, counts[i], i in flagged)
        for i, c in enumerate(report.centroids)
    ]


def run_frames(points_by_frame, cfg: CongestionConfig, workers=1):
    """Run detection on ``(frame_id, points)`` pairs.

    Frames with fewer than ``cfg.k`` points are skipped with a warning.
    Output is sorted by frame id, then cluster index, regardless of
    ``workers``.
    """
    items = sorted(points_by_frame, key=lambda item: item[0])
    result = PipelineResult()
    runnable = []
    for frame_id, points in items:
        if len(points) < cfg.k:
            msg = f"frame {frame_id}: {len(points)} detections < k={cfg.k}, skipped"
            log.warning(msg)
            result.warnings.append(FrameWarning(frame_id, msg))
        else:
            runnable.append((frame_id, points))

    def work(item):
        return detect(item[1], cfg)

    if workers > 1 and len(runnable) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(work, runnable))
    else:
        reports = [work(item) for item in runnable]

    for (frame_id, points), report in zip(runnable, reports):
        result.frames.append(FrameResult(frame_id, points, report))
        result.alerts.extend(alerts_for(frame_id, report))
    return result


def run_pipeline(frames, calib: AffineTransform2D, cfg: CongestionConfig,
                 score_floor=DEFAULT_SCORE_FLOOR, workers=1):
    """Detections grouped by frame -> alerts and per-frame reports."""
    return run_frames(
        [(f.frame_id, frame_points(f, calib, score_floor)) for f in frames], cfg, workers
    )
