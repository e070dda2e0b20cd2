"""Command line entry point: ``crowdsafe {detect,simulate,gradcheck,demo-activations}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import statistics
import sys
from pathlib import Path

from crowdsafe.errors import CrowdSafeError
from crowdsafe.geometry import field_of_view
from crowdsafe.nn.mlp import TrainConfig, gradient_check_suite
from crowdsafe.nn.toy import loss_table, make_moons, train_toy_classifier
from crowdsafe.pipeline.records import ingest_detections, load_config, write_alerts
from crowdsafe.pipeline.render import decision_grid_svg, render_scatter
from crowdsafe.pipeline.run import run_frames, run_pipeline
from crowdsafe.pipeline.scene import SceneSpec, generate_synthetic_scene

log = logging.getLogger("crowdsafe")

EXIT_OK, EXIT_ERROR, EXIT_GRADCHECK = 0, 1, 2
GRADCHECK_TOL = 1e-4


def _log_camera(cfg):
    if cfg.camera is None:
        return
    for kind in ("horizontal", "vertical", "diagonal"):
        log.info("%s field of view: %.2f deg", kind, math.degrees(field_of_view(kind, cfg.camera)))


def _emit(result, out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    write_alerts(result.alerts, out_dir / "alerts.jsonl")
    with open(out_dir / "warnings.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for w in result.warnings:
            fh.write(json.dumps({"frame": w.frame_id, "message": w.message}) + "\n")
    for fr in result.frames:
        render_scatter(fr.report, fr.points, out_dir / f"frame_{fr.frame_id}.svg", title=f"frame {fr.frame_id}")
    flagged = sum(a.flagged for a in result.alerts)
    print(f"{len(result.frames)} frame(s), {len(result.alerts)} alert record(s), {flagged} flagged, "
          f"{len(result.warnings)} skipped")


def cmd_detect(args):
    cfg = load_config(args.config)
    _log_camera(cfg)
    frames = ingest_detections(args.input)
    result = run_pipeline(frames, cfg.calibration, cfg.congestion, cfg.score_floor, args.workers)
    _emit(result, Path(args.out))
    return EXIT_OK


def cmd_simulate(args):
    cfg = load_config(args.config)
    spec = SceneSpec.from_dict(json.loads(Path(args.blobs).read_text(encoding="utf-8")))
    points = generate_synthetic_scene(spec)
    result = run_frames([(0, points)], cfg.congestion, workers=1)
    _emit(result, Path(args.out))
    return EXIT_OK


def cmd_gradcheck(args):
    result = gradient_check_suite(args.nets, args.seed)
    ok = result.passed(GRADCHECK_TOL)
    print(f"max relative error: {result.max_rel_error:.3e} over {args.nets} nets "
          f"({'PASS' if ok else 'FAIL'}, tol {GRADCHECK_TOL:g})")
    return EXIT_OK if ok else EXIT_GRADCHECK


def cmd_demo_activations(args):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    X, y = make_moons(args.samples, args.noise, seed=args.data_seed)
    finals = {"relu": [], "swiglu": []}
    first = {}
    for seed in range(args.seeds):
        cfg = TrainConfig(learning_rate=args.lr, epochs=args.epochs, seed=seed)
        for variant in finals:
            trace = train_toy_classifier(variant, X, y, cfg)
            finals[variant].append(trace.final_loss)
            first.setdefault(variant, trace)

    relu, swiglu = first["relu"], first["swiglu"]
    with open(out_dir / "losses.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "loss_relu", "loss_swiglu"])
        for epoch, lr, ls in loss_table(relu, swiglu):
            writer.writerow([epoch, repr(lr), repr(ls)])
    for name, trace in first.items():
        if not trace.failed:
            (out_dir / f"decision_{name}.svg").write_text(
                decision_grid_svg(trace, X, y, title=f"{name} decision boundary"), encoding="utf-8"
            )

    med_relu = statistics.median(finals["relu"])
    med_swiglu = statistics.median(finals["swiglu"])
    print(f"median final loss over {args.seeds} seed(s): relu {med_relu:.5f}, swiglu {med_swiglu:.5f}")
    if not (relu.failed or swiglu.failed):
        reach = swiglu.epochs_to_reach(relu.final_loss)
        if reach is None:
            print(f"seed 0: swiglu never reached relu's final loss {relu.final_loss:.5f}")
        else:
            print(f"seed 0: swiglu reached relu's final loss {relu.final_loss:.5f} at epoch {reach} "
                  f"of {len(relu.losses)} ({100.0 * (1 - reach / len(relu.losses)):.0f}% fewer epochs)")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="crowdsafe", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detections JSONL -> alerts JSONL and per-frame SVGs")
    p.add_argument("--input", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("simulate", help="synthetic Gaussian-blob scene -> alerts and SVG")
    p.add_argument("--blobs", required=True, help="JSON scene spec: {seed, blobs: [{cx, cy, sigma, count}]}")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients")
    p.add_argument("--nets", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("demo-activations", help="ReLU vs SwiGLU on two moons")
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--data-seed", type=int, default=0)
    p.set_defaults(func=cmd_demo_activations)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CrowdSafeError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
