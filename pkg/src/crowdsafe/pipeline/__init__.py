"""Batch pipeline: detection ingest, ground projection, congestion alerts and plots."""

from crowdsafe.pipeline.records import (
    AlertRecord,
    DetectionRecord,
    FrameDetections,
    PipelineConfig,
    ingest_detections,
    load_config,
    parse_config,
    parse_detections,
    read_alerts,
    write_alerts,
)
from crowdsafe.pipeline.render import decision_grid_svg, render_scatter, scatter_svg
from crowdsafe.pipeline.run import FrameWarning, PipelineResult, run_frames, run_pipeline
from crowdsafe.pipeline.scene import Blob, SceneSpec, triangle_scene, generate_synthetic_scene

__all__ = [
    "AlertRecord", "Blob", "DetectionRecord", "FrameDetections", "FrameWarning",
    "PipelineConfig", "PipelineResult", "SceneSpec", "decision_grid_svg", "triangle_scene",
    "generate_synthetic_scene", "ingest_detections", "load_config", "parse_config",
    "parse_detections", "read_alerts", "render_scatter", "run_frames", "run_pipeline",
    "scatter_svg", "write_alerts",
]
