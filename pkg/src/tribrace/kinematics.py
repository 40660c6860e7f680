"""Closed-chain kinematics and workspace construction for the tri-leg robot.

The robot is a planar body with three extensible legs: a central leg rigidly
aligned with the body heading and two side legs on revolute joints. With all
three tips anchored the body + legs form a closed kinematic chain; the set of
body positions compatible with fixed anchors is the intersection of the three
extension annuli cut down by the side-leg rotation limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LimitViolation

TWO_PI = 2.0 * math.pi

# Leg order used everywhere: (left, central, right).
LEG_NAMES = ("left", "central", "right")

# Absolute slack for geometric comparisons against limits; absorbs float
# round-off when anchors sit exactly on a limit circle.
GEOM_EPS = 1e-9


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    return math.pi - (math.pi - a) % TWO_PI


def rotate(v: tuple[float, float], angle: float) -> tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


@dataclass(frozen=True)
class RobotParams:
    """Geometric description of the body and its three legs.

    Defaults follow the physical prototype: 625 mm retracted actuators with a
    500 mm stroke and side-leg rotations of +/-90 deg. The rotation limits are
    configurable because the rotary joints mechanically allow up to 180 deg.
    """

    l_min: float = 0.625
    l_max: float = 1.125
    theta_min: float = -math.pi / 2
    theta_max: float = math.pi / 2
    leg_mount_offsets: tuple[tuple[float, float], ...] = (
        (0.0, 0.0),
        (0.0, 0.0),
        (0.0, 0.0),
    )
    body_mass: float = 15.0
    body_inertia: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.l_min < self.l_max:
            raise ValueError(f"require 0 < l_min < l_max, got [{self.l_min}, {self.l_max}]")
        if not self.theta_min < self.theta_max:
            raise ValueError(f"require theta_min < theta_max, got [{self.theta_min}, {self.theta_max}]")
        if len(self.leg_mount_offsets) != 3:
            raise ValueError("leg_mount_offsets must hold exactly three points")
        if self.body_mass <= 0.0 or self.body_inertia <= 0.0:
            raise ValueError("body mass and inertia must be positive")


@dataclass(frozen=True)
class JointState:
    """Instantaneous state of one leg: prismatic extension plus revolute rotation.

    The central leg keeps rotation == 0 at all times (rigid mount).
    """

    extension: float
    extension_rate: float = 0.0
    rotation: float = 0.0
    rotation_rate: float = 0.0


@dataclass(frozen=True)
class RobotConfiguration:
    """Body pose (x, y, phi) together with the three leg joint states."""

    body_pose: tuple[float, float, float]
    legs: tuple[JointState, JointState, JointState]

    def __post_init__(self):
        if self.legs[1].rotation != 0.0:
            raise ValueError("central leg rotation must be exactly 0 (rigid mount)")


@dataclass(frozen=True)
class Annulus:
    """Ring between a leg's minimum and maximum reach around its anchor."""

    center: tuple[float, float]
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not 0.0 < self.r_inner <= self.r_outer:
            raise ValueError(f"require 0 < r_inner <= r_outer, got [{self.r_inner}, {self.r_outer}]")


@dataclass(frozen=True)
class WorkspaceRegion:
    """Grid-sampled feasible body positions plus a shape classification.

    classification is derived from the point set:
      empty        no feasible points
      single-point all points fit inside one resolution cell
      line-like    thin (<= 2 * resolution) in exactly one principal direction
      area         everything else
    """

    resolution: float
    feasible_points: np.ndarray = field(repr=False)  # (N, 2) array of (x, y)
    classification: str = "empty"


def forward_tip_positions(
    config: RobotConfiguration, params: RobotParams
) -> tuple[tuple[float, float], ...]:
    """Tip position of each leg in world coordinates.

    tip_i = body + R(phi) * mount_offset_i + extension_i * u(phi + rotation_i)
    """
    x, y, phi = config.body_pose
    tips = []
    for offset, joint in zip(params.leg_mount_offsets, config.legs):
        mx, my = rotate(offset, phi)
        heading = phi + joint.rotation
        tips.append(
            (
                x + mx + joint.extension * math.cos(heading),
                y + my + joint.extension * math.sin(heading),
            )
        )
    return tuple(tips)


def leg_annulus(anchor: tuple[float, float], params: RobotParams) -> Annulus:
    """Reachable ring of body positions for one leg anchored at `anchor`."""
    return Annulus((anchor[0], anchor[1]), params.l_min, params.l_max)


def closed_chain_solve(
    anchors: tuple[tuple[float, float], ...],
    body_pose: tuple[float, float, float],
    params: RobotParams,
) -> RobotConfiguration:
    """Solve leg extensions/rotations so every tip lands on its anchor.

    Raises LimitViolation if any extension or rotation falls outside the
    active limits; the central leg must see its anchor dead ahead (rotation 0).
    """
    x, y, phi = body_pose
    joints = []
    for i, (name, anchor, offset) in enumerate(zip(LEG_NAMES, anchors, params.leg_mount_offsets)):
        mx, my = rotate(offset, phi)
        dx, dy = anchor[0] - (x + mx), anchor[1] - (y + my)
        extension = math.hypot(dx, dy)
        bearing = wrap_angle(math.atan2(dy, dx) - phi)
        if not params.l_min - GEOM_EPS <= extension <= params.l_max + GEOM_EPS:
            raise LimitViolation(name, "extension", extension)
        if i == 1:
            # Rigid central mount: the chain only closes with the anchor on axis.
            if abs(bearing) > GEOM_EPS:
                raise LimitViolation(name, "rotation", bearing)
            bearing = 0.0
        elif not params.theta_min - GEOM_EPS <= bearing <= params.theta_max + GEOM_EPS:
            raise LimitViolation(name, "rotation", bearing)
        joints.append(JointState(extension=extension, rotation=bearing))
    return RobotConfiguration(body_pose=body_pose, legs=tuple(joints))


def chain_residual(
    config: RobotConfiguration,
    anchors: tuple[tuple[float, float], ...],
    params: RobotParams,
) -> float:
    """Worst tip-to-anchor distance; 0 for a configuration produced by
    closed_chain_solve on the same anchors and pose."""
    tips = forward_tip_positions(config, params)
    return max(math.hypot(t[0] - a[0], t[1] - a[1]) for t, a in zip(tips, anchors))


def _grid_axis(lo: float, hi: float, resolution: float) -> np.ndarray:
    """Lattice coordinates k * resolution covering [lo, hi].

    Anchoring the lattice at integer multiples of the resolution keeps the
    grid stable across bounding boxes and makes a 2x finer grid a superset.
    """
    i0 = math.ceil(lo / resolution - 1e-12)
    i1 = math.floor(hi / resolution + 1e-12)
    return np.arange(i0, i1 + 1, dtype=float) * resolution


def workspace_region(
    anchors: tuple[tuple[float, float], ...],
    params: RobotParams,
    resolution: float = 0.005,
) -> WorkspaceRegion:
    """Grid-sample the feasible body positions for fixed anchor points.

    A position p is feasible iff
      (a) l_min <= |p - a_i| <= l_max for all three anchors, and
      (b) with the body heading taken toward the central anchor, the bearing
          of each side anchor lies within [theta_min, theta_max].
    The heading is not a free variable: the body orientation is locked to the
    central leg, so it always points at the central anchor.
    """
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    pts = [np.asarray(a, dtype=float) for a in anchors]
    if len(pts) != 3:
        raise ValueError("exactly three anchors required")
    for i in range(3):
        for j in range(i + 1, 3):
            if np.allclose(pts[i], pts[j]):
                raise ValueError("anchors must be pairwise distinct")

    left, central, right = pts
    all_xy = np.stack(pts)
    xs = _grid_axis(all_xy[:, 0].min() - params.l_max, all_xy[:, 0].max() + params.l_max, resolution)
    ys = _grid_axis(all_xy[:, 1].min() - params.l_max, all_xy[:, 1].max() + params.l_max, resolution)
    gx, gy = np.meshgrid(xs, ys)  # shape (len(ys), len(xs)), row-major over y

    feasible = np.ones(gx.shape, dtype=bool)
    for a in pts:
        d = np.hypot(gx - a[0], gy - a[1])
        feasible &= (d >= params.l_min - GEOM_EPS) & (d <= params.l_max + GEOM_EPS)

    heading = np.arctan2(central[1] - gy, central[0] - gx)
    for a in (left, right):
        bearing = np.arctan2(a[1] - gy, a[0] - gx) - heading
        bearing = np.pi - np.mod(np.pi - bearing, TWO_PI)  # wrap to (-pi, pi]
        feasible &= (bearing >= params.theta_min) & (bearing <= params.theta_max)

    jj, ii = np.nonzero(feasible)
    points = np.column_stack((gx[jj, ii], gy[jj, ii]))  # deterministic y-then-x order
    return WorkspaceRegion(
        resolution=resolution,
        feasible_points=points,
        classification=classify_points(points, resolution),
    )


def classify_points(points: np.ndarray, resolution: float) -> str:
    """Classify a feasible point cloud by its principal-direction extents."""
    if len(points) == 0:
        return "empty"
    centered = points - points.mean(axis=0)
    if len(points) == 1:
        extents = np.zeros(2)
    else:
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        proj = centered @ vt.T
        extents = np.sort(proj.max(axis=0) - proj.min(axis=0))[::-1]
        if extents.shape[0] == 1:  # degenerate SVD of collinear duplicates
            extents = np.array([extents[0], 0.0])
    e1, e2 = float(extents[0]), float(extents[-1])
    if e1 <= resolution:
        return "single-point"
    if e2 <= 2.0 * resolution < e1:
        return "line-like"
    return "area"
