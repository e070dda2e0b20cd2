"""Box overlap, camera field of view and planar affine projection."""

from __future__ import annotations

import math
from dataclasses import dataclass

from crowdsafe.errors import DomainError, SingularMatrixError

IOU_LOSS_EPS = 1e-7


def _finite(*values):
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class BBox:
    """Corner-form box in pixels."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not _finite(self.x_min, self.y_min, self.x_max, self.y_max):
            raise DomainError(f"box has non-finite coordinates: {self}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise DomainError(f"degenerate box: {self}")

    @property
    def area(self):
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def foot_point(self):
        """Bottom-center pixel, where the person touches the ground."""
        return ((self.x_min + self.x_max) / 2.0, self.y_max)


@dataclass(frozen=True)
class CameraIntrinsics:
    f: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.f > 0 and self.w > 0 and self.h > 0):
            raise DomainError("focal length and sensor extents must be positive")


@dataclass(frozen=True)
class AffineTransform2D:
    """Row-major ``[[a, b, c], [d, e, f_t], [0, 0, 1]]``.

    ``a``/``e`` scale, ``b``/``d`` shear, ``c``/``f_t`` translate.
    """

    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    e: float = 1.0
    f_t: float = 0.0

    @property
    def determinant(self):
        return self.a * self.e - self.b * self.d

    def matrix(self):
        return [[self.a, self.b, self.c], [self.d, self.e, self.f_t], [0.0, 0.0, 1.0]]


@dataclass(frozen=True)
class GroundPoint:
    """Position on the ground plane, meters."""

    x: float
    y: float

    def __post_init__(self):
        if not _finite(self.x, self.y):
            raise DomainError(f"non-finite ground point ({self.x}, {self.y})")


def _check_box(box):
    if not (box.x_min < box.x_max and box.y_min < box.y_max):
        raise DomainError(f"degenerate box: {box}")


def intersection_area(a: BBox, b: BBox):
    w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if w <= 0 or h <= 0:
        return 0.0
    return w * h


def iou(a: BBox, b: BBox):
    _check_box(a)
    _check_box(b)
    inter = intersection_area(a, b)
    return inter / (a.area + b.area - inter)


def iou_loss(iou_value):
    """-ln(IoU), with IoU clamped below at 1e-7 so disjoint boxes stay finite."""
    if not 0.0 <= iou_value <= 1.0:
        raise DomainError(f"IoU must lie in [0, 1], got {iou_value}")
    if iou_value == 1.0:
        return 0.0
    return -math.log(max(iou_value, IOU_LOSS_EPS))


def field_of_view(kind, cam: CameraIntrinsics):
    """Diagonal, horizontal or vertical field of view in radians."""
    if kind == "diagonal":
        extent = math.hypot(cam.w, cam.h)
    elif kind == "horizontal":
        extent = cam.w
    elif kind == "vertical":
        extent = cam.h
    else:
        raise ValueError(f"unknown field-of-view kind {kind!r}")
    return 2.0 * math.atan(extent / (2.0 * cam.f))


def affine_apply(t: AffineTransform2D, p):
    x, y = p
    return (t.a * x + t.b * y + t.c, t.d * x + t.e * y + t.f_t)


def affine_invert(t: AffineTransform2D):
    det = t.determinant
    if det == 0.0 or not math.isfinite(det):
        raise SingularMatrixError(f"affine transform is singular (det={det})")
    a, b, d, e = t.e / det, -t.b / det, -t.d / det, t.a / det
    return AffineTransform2D(a, b, -(a * t.c + b * t.f_t), d, e, -(d * t.c + e * t.f_t))


def project_detection(box: BBox, calib: AffineTransform2D):
    """Map a box's foot point through the pixel-to-meter calibration."""
    _check_box(box)
    x, y = affine_apply(calib, box.foot_point)
    return GroundPoint(x, y)
