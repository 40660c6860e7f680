"""Tunnel cross-section geometry, penalty contacts, and static equilibrium.

Walls are rigid simple polygons; each leg tip and the drill bit interacts with
them through a unilateral penalty spring-damper plus Coulomb friction. The
static-equilibrium checker answers whether a set of braced contacts can carry
the body weight plus an external wrench without leaving the friction cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, SolverError
from .kinematics import RobotConfiguration, RobotParams, forward_tip_positions

CONTACT_IDS = ("left", "central", "right", "drill")


@dataclass(frozen=True)
class TunnelCrossSection:
    """Simple closed polygon (counterclockwise); the robot lives inside it."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise GeometryError("tunnel polygon needs at least 3 vertices")
        if abs(self._signed_area()) < 1e-12:
            raise GeometryError("tunnel polygon is degenerate (zero area)")
        if self._signed_area() < 0.0:
            raise GeometryError("tunnel polygon must be counterclockwise")
        if self._self_intersects():
            raise GeometryError("tunnel polygon is self-intersecting")

    def _signed_area(self) -> float:
        area = 0.0
        n = len(self.vertices)
        for i in range(n):
            x0, y0 = self.vertices[i]
            x1, y1 = self.vertices[(i + 1) % n]
            area += x0 * y1 - x1 * y0
        return 0.5 * area

    def _self_intersects(self) -> bool:
        n = len(self.vertices)
        edges = [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue  # shared endpoint with a neighbor is fine
                if _segments_cross(*edges[i], *edges[j]):
                    return True
        return False

    def contains(self, p: tuple[float, float]) -> bool:
        """Even-odd ray cast; points on the boundary count as inside."""
        x, y = p
        inside = False
        n = len(self.vertices)
        for i in range(n):
            x0, y0 = self.vertices[i]
            x1, y1 = self.vertices[(i + 1) % n]
            if (y0 > y) != (y1 > y):
                t = (y - y0) / (y1 - y0)
                if x < x0 + t * (x1 - x0):
                    inside = not inside
        return inside


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return (o1 * o2 < 0.0) and (o3 * o4 < 0.0)


def _nearest_on_segment(p, a, b) -> tuple[float, float]:
    ax, ay = a
    vx, vy = b[0] - ax, b[1] - ay
    denom = vx * vx + vy * vy
    t = 0.0 if denom == 0.0 else ((p[0] - ax) * vx + (p[1] - ay) * vy) / denom
    t = max(0.0, min(1.0, t))
    return (ax + t * vx, ay + t * vy)


@dataclass(frozen=True)
class ContactParams:
    """Penalty contact law: normal force k * depth + c * depth_rate, clamped
    at zero. The tangential stick spring reuses the stiffness but carries its
    own, lighter damping so the rotational channel stays stable at dt = 1 ms."""

    stiffness: float = 1.0e5
    damping: float = 2.0e3
    friction_mu: float = 0.6
    tangential_damping: float = 700.0

    def __post_init__(self):
        if self.stiffness <= 0.0:
            raise ValueError("stiffness must be positive")
        if self.damping < 0.0 or self.friction_mu < 0.0 or self.tangential_damping < 0.0:
            raise ValueError("damping and friction_mu must be nonnegative")


@dataclass(frozen=True)
class ContactState:
    """One tip's contact: wall inward normal, split into normal/tangential force.

    `point` is where the force acts (the tip position), needed for moment
    balance. Tangential force is signed along perp(normal) = (-ny, nx).
    """

    leg_id: str
    in_contact: bool
    normal: tuple[float, float]
    normal_force: float
    tangential_force: float
    point: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class DrillParams:
    """Drill thrust model and bit geometry.

    While the bit spins, the wall pushes back with feed_gain per metre of feed
    beyond the surface, saturating at reaction_cap; with the bit stopped the
    tip behaves like a plain penalty contact. The bit rides a prismatic feed
    stage mounted mount_offset ahead of the body centre, pointing opposite
    the central leg.
    """

    feed_gain: float = 5.0e4
    rotation_active: bool = False
    feed_speed: float = 0.015
    reaction_cap: float = 2000.0
    mount_offset: float = 0.55
    stroke: float = 0.3

    def __post_init__(self):
        if self.feed_gain < 0.0:
            raise ValueError("feed_gain must be nonnegative")
        if self.reaction_cap <= 0.0:
            raise ValueError("reaction_cap must be positive")
        if self.feed_speed <= 0.0 or self.stroke <= 0.0 or self.mount_offset < 0.0:
            raise ValueError("invalid drill geometry")


@dataclass(frozen=True)
class EnvironmentParams:
    """Tunnel polygon plus contact/friction/drill parameters for a scenario."""

    tunnel: TunnelCrossSection
    contact: ContactParams = ContactParams()
    drill: DrillParams = DrillParams()
    regularization_velocity: float = 1.0e-3

    def __post_init__(self):
        if self.regularization_velocity <= 0.0:
            raise ValueError("regularization_velocity must be positive")


def signed_penetration(
    tip: tuple[float, float], tunnel: TunnelCrossSection
) -> tuple[float, tuple[float, float]]:
    """Penetration depth of a tip through the tunnel wall, with inward normal.

    Returns (0, nearest-wall inward normal) while the tip is inside; once the
    tip crosses the boundary the depth is its distance back to the nearest
    boundary point and the normal points from that point into the interior.
    """
    best_d2 = math.inf
    best_point = tunnel.vertices[0]
    best_edge_normal = (0.0, 0.0)
    n = len(tunnel.vertices)
    for i in range(n):
        a = tunnel.vertices[i]
        b = tunnel.vertices[(i + 1) % n]
        q = _nearest_on_segment(tip, a, b)
        d2 = (tip[0] - q[0]) ** 2 + (tip[1] - q[1]) ** 2
        if d2 < best_d2:
            best_d2 = d2
            best_point = q
            ex, ey = b[0] - a[0], b[1] - a[1]
            elen = math.hypot(ex, ey)
            # CCW polygon: interior lies to the left of each edge.
            best_edge_normal = (-ey / elen, ex / elen)

    dist = math.sqrt(best_d2)
    inside = tunnel.contains(tip)
    if dist < 1e-12:
        return (0.0, best_edge_normal)
    if inside:
        normal = ((tip[0] - best_point[0]) / dist, (tip[1] - best_point[1]) / dist)
        return (0.0, normal)
    normal = ((best_point[0] - tip[0]) / dist, (best_point[1] - tip[1]) / dist)
    return (dist, normal)


def contact_force(depth: float, depth_rate: float, params: ContactParams) -> float:
    """Unilateral penalty normal force: max(0, k * depth + c * depth_rate)."""
    if depth < 0.0:
        raise ValueError("penetration depth cannot be negative")
    return max(0.0, params.stiffness * depth + params.damping * depth_rate)


def friction_force(
    normal_force: float,
    tangential_velocity: float,
    mu: float,
    regularization_velocity: float,
) -> float:
    """Regularized Coulomb friction: -mu * N * clamp(v / v_reg, -1, 1)."""
    if normal_force < 0.0:
        raise ValueError("normal force cannot be negative")
    if regularization_velocity <= 0.0:
        raise ValueError("regularization_velocity must be positive")
    s = max(-1.0, min(1.0, tangential_velocity / regularization_velocity))
    return -mu * normal_force * s


def drill_reaction(
    feed_beyond_surface: float,
    params: DrillParams,
    contact: ContactParams | None = None,
    feed_rate: float = 0.0,
) -> float:
    """Axial reaction force on the body from the drill bit.

    Spinning bit: min(reaction_cap, feed_gain * feed). Stopped bit: the tip is
    treated as an ordinary penalty contact.
    """
    if feed_beyond_surface < 0.0:
        raise ValueError("feed beyond surface cannot be negative")
    if params.rotation_active:
        return min(params.reaction_cap, params.feed_gain * feed_beyond_surface)
    return contact_force(feed_beyond_surface, feed_rate, contact or ContactParams())


@dataclass(frozen=True)
class EquilibriumResult:
    residual_force: float
    residual_moment: float
    supported: bool
    contact_forces: tuple[tuple[float, float], ...] = ()  # (normal, tangential) per contact


def _project_friction_cone(n: float, t: float, mu: float) -> tuple[float, float]:
    """Euclidean projection of (n, t) onto {(n, t): n >= 0, |t| <= mu * n}."""
    if mu == 0.0:
        return (max(n, 0.0), 0.0)
    if abs(t) <= mu * n:
        return (n, t)
    if n <= -mu * abs(t):  # polar cone: nearest admissible point is the apex
        return (0.0, 0.0)
    nn = (n + mu * abs(t)) / (1.0 + mu * mu)
    return (nn, math.copysign(mu * nn, t))


def static_equilibrium(
    config: RobotConfiguration,
    contacts: list[ContactState],
    gravity: float,
    external_wrench: tuple[float, float, float],
    robot: RobotParams,
    mu: float,
    iteration_budget: int = 10_000,
    force_tolerance: float = 0.5,
    moment_tolerance: float = 0.1,
) -> EquilibriumResult:
    """Best admissible contact forces balancing gravity plus an external wrench.

    Solves min ||A x - b||^2 over per-contact (normal, tangential) pairs
    constrained to the friction cone, by projected gradient descent. The
    moment balance is taken about the body centre. `supported` is true when
    the residual force and moment fall below the tolerances.
    """
    cx, cy, _ = config.body_pose
    weight = (0.0, -robot.body_mass * gravity)
    fx_ext, fy_ext, mz_ext = external_wrench
    b = np.array([-(weight[0] + fx_ext), -(weight[1] + fy_ext), -mz_ext])

    active = [c for c in contacts if c.in_contact]
    if not active:
        rf = math.hypot(b[0], b[1])
        rm = abs(b[2])
        return EquilibriumResult(rf, rm, rf <= force_tolerance and rm <= moment_tolerance)

    cols = []
    for c in active:
        nx, ny = c.normal
        if abs(math.hypot(nx, ny) - 1.0) > 1e-6:
            raise ValueError(f"contact normal for {c.leg_id} is not unit length")
        tx, ty = -ny, nx
        rx, ry = c.point[0] - cx, c.point[1] - cy
        cols.append([nx, ny, rx * ny - ry * nx])
        cols.append([tx, ty, rx * ty - ry * tx])
    A = np.array(cols).T  # 3 x 2k

    # Fixed-step projected gradient on the convex QP; step = 1 / L with
    # L the largest eigenvalue of A^T A.
    L = float(np.linalg.norm(A, ord=2) ** 2)
    if L == 0.0:
        raise SolverError("degenerate contact geometry")
    step = 1.0 / L
    x = np.zeros(A.shape[1])
    converged = False
    for _ in range(iteration_budget):
        grad = A.T @ (A @ x - b)
        x_new = x - step * grad
        for k in range(len(active)):
            n, t = _project_friction_cone(x_new[2 * k], x_new[2 * k + 1], mu)
            x_new[2 * k] = n
            x_new[2 * k + 1] = t
        if float(np.max(np.abs(x_new - x))) <= 1e-10 * (1.0 + float(np.max(np.abs(x)))):
            x = x_new
            converged = True
            break
        x = x_new
    if not converged:
        raise SolverError(f"projected gradient did not converge in {iteration_budget} iterations")

    r = A @ x - b
    rf = float(math.hypot(r[0], r[1]))
    rm = float(abs(r[2]))
    pairs = tuple((float(x[2 * k]), float(x[2 * k + 1])) for k in range(len(active)))
    return EquilibriumResult(
        residual_force=rf,
        residual_moment=rm,
        supported=rf <= force_tolerance and rm <= moment_tolerance,
        contact_forces=pairs,
    )


def braced_contacts(
    config: RobotConfiguration,
    tunnel: TunnelCrossSection,
    params: RobotParams,
    forces: tuple[tuple[float, float], ...] | None = None,
) -> list[ContactState]:
    """ContactState list for the three leg tips against the tunnel walls.

    Tips at (or beyond) the wall count as in contact; forces may be supplied
    as (normal, tangential) pairs, else zeros.
    """
    tips = forward_tip_positions(config, params)
    out = []
    for i, tip in enumerate(tips):
        depth, normal = signed_penetration(tip, tunnel)
        touching = depth > 0.0 or _on_boundary(tip, tunnel)
        fn, ft = (0.0, 0.0) if forces is None else forces[i]
        out.append(
            ContactState(
                leg_id=CONTACT_IDS[i],
                in_contact=touching,
                normal=normal,
                normal_force=fn if touching else 0.0,
                tangential_force=ft if touching else 0.0,
                point=tip,
            )
        )
    return out


def _on_boundary(p: tuple[float, float], tunnel: TunnelCrossSection, tol: float = 1e-9) -> bool:
    n = len(tunnel.vertices)
    for i in range(n):
        q = _nearest_on_segment(p, tunnel.vertices[i], tunnel.vertices[(i + 1) % n])
        if math.hypot(p[0] - q[0], p[1] - q[1]) <= tol:
            return True
    return False
