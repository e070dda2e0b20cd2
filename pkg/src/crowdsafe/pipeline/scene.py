"""Synthetic crowd scenes made of isotropic Gaussian blobs."""

from __future__ import annotations

from dataclasses import dataclass

from crowdsafe.errors import ConfigurationError
from crowdsafe.geometry import GroundPoint
from crowdsafe.rng import SplitMix64


@dataclass(frozen=True)
class Blob:
    center: GroundPoint
    sigma: float
    count: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError("blob sigma must be positive")
        if self.count < 1:
            raise ConfigurationError("blob count must be >= 1")


@dataclass(frozen=True)
class SceneSpec:
    blobs: tuple
    seed: int = 0

    @classmethod
    def from_dict(cls, data):
        try:
            blobs = tuple(
                Blob(GroundPoint(float(b["cx"]), float(b["cy"])), float(b["sigma"]), int(b["count"]))
                for b in data["blobs"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid scene spec: {exc}") from exc
        return cls(blobs, int(data.get("seed", 0)))


def generate_synthetic_scene(spec: SceneSpec):
    """Points for every blob in order; one Box-Muller pair per point."""
    rng = SplitMix64(spec.seed)
    points = []
    for blob in spec.blobs:
        for _ in range(blob.count):
            gx, gy = rng.gauss_pair()
            points.append(GroundPoint(blob.center.x + blob.sigma * gx, blob.center.y + blob.sigma * gy))
    return points


def triangle_scene(seed, sigma=0.2, count=50, spacing=5.0):
    """Three tight blobs on a triangle with ``spacing`` meters between centers."""
    centers = [(0.0, 0.0), (spacing, 0.0), (spacing / 2.0, spacing * 3 ** 0.5 / 2.0)]
    return SceneSpec(tuple(Blob(GroundPoint(x, y), sigma, count) for x, y in centers), seed)
