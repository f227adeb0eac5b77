"""Scenario simulator: raycast scans with occlusion and noise, agent motion
policies, robot motion policies, and high-rate ground truth.

Three built-in scenario kinds mirror a stationary-robot recording ("sr"), a
moving robot that steers to keep people in view ("mr1"), and a randomly
moving robot that lets people leave and re-enter the field of view ("mr2").
A "custom" kind runs scripted constant-velocity agents against caller-chosen
geometry, which the occlusion and avoidance experiments build on.

All randomness derives from the scenario seed; the scan clock (20 Hz) and
ground-truth clock (100 Hz) are exact rationals of the same tick, so a run
is bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .evaluation import GroundTruthFrame
from .geometry import (
    NO_RETURN,
    ODOM_FRAME,
    FieldOfView,
    LidarScan,
    PointXY,
    Pose2D,
    normalize_angle,
)

GT_RATE_HZ = 100.0

#: Label value for beams that hit static geometry (walls, clutter).
STATIC_LABEL = -2
#: Label value for beams with no return.
NO_LABEL = -1

# Soft-repulsion comfort distance and the hard minimum separation between
# agent centers; walking people keep roughly a meter of clearance.
COMFORT_SEPARATION = 1.0
MIN_SEPARATION = 0.5
#: Minimum agent-center distance from arena walls; keeps person clusters
#: from merging with wall returns.
WALL_MARGIN = 0.7
ROBOT_WALL_MARGIN = 0.4


@dataclass(frozen=True)
class Circle:
    x: float
    y: float
    radius: float


@dataclass(frozen=True)
class Segment:
    x1: float
    y1: float
    x2: float
    y2: float


@dataclass(frozen=True)
class LidarParams:
    """Sensor geometry: 270 degrees at 0.25 degrees per beam, 20 Hz."""

    rate_hz: float = 20.0
    angle_min: float = -0.75 * math.pi
    angle_increment: float = math.radians(0.25)
    n_beams: int = 1080
    range_max: float = 30.0

    def fov(self) -> FieldOfView:
        return FieldOfView(
            self.angle_min,
            self.angle_min + self.n_beams * self.angle_increment,
            self.range_max,
        )


@dataclass(frozen=True)
class ScriptedAgent:
    """Constant-velocity agent for custom scenarios; never reflects or
    repels."""

    id: int
    x: float
    y: float
    vx: float
    vy: float
    radius: float = 0.3


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "sr"
    arena: tuple[float, float, float, float] = (-2.0, -2.0, 2.0, 2.0)
    duration: float = 120.0
    n_persons: int = 3
    person_speed: tuple[float, float] = (0.3, 1.1)
    person_radius: float = 0.3
    robot_linear_max: float = 0.5
    robot_angular_max: float = 1.5
    clutter: tuple | None = None          # None -> seed-placed default set
    occluder_walls: tuple[Segment, ...] = ()
    seed: int = 0
    noise_std: float = 0.01
    dropout_prob: float = 0.005
    scripted_agents: tuple[ScriptedAgent, ...] = ()
    robot_start: tuple[float, float, float] | None = None
    arena_walls: bool = True
    lidar: LidarParams = field(default_factory=LidarParams)

    def __post_init__(self):
        if self.kind not in ("sr", "mr1", "mr2", "custom"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.person_speed[0] < 0 or self.person_speed[1] < self.person_speed[0]:
            raise ValueError("person_speed must be a nonnegative (lo, hi) range")
        if not 0.0 <= self.dropout_prob < 1.0:
            raise ValueError("dropout_prob must be in [0, 1)")
        x0, y0, x1, y1 = self.arena
        if not (x1 > x0 and y1 > y0):
            raise ValueError("arena must have positive extent")


@dataclass
class AgentModel:
    id: int
    radius: float
    position: np.ndarray
    velocity: np.ndarray
    scripted: bool = False
    next_resample: float = 0.0

    def copy(self) -> "AgentModel":
        return AgentModel(
            self.id,
            self.radius,
            self.position.copy(),
            self.velocity.copy(),
            self.scripted,
            self.next_resample,
        )


@dataclass
class WorldState:
    time: float
    robot: Pose2D
    robot_twist: tuple[float, float]  # (v, omega)
    agents: list[AgentModel]
    circles: tuple[Circle, ...]
    segments: tuple[Segment, ...]
    arena: tuple[float, float, float, float]
    #: Furniture edges agents must keep clear of (subset of ``segments``).
    keep_out: tuple[Segment, ...] = ()


def _point_segment_distance(p: np.ndarray, seg: Segment) -> tuple[float, np.ndarray]:
    """Distance from a point to a segment and the outward unit direction."""
    a = np.array([seg.x1, seg.y1])
    b = np.array([seg.x2, seg.y2])
    ab = b - a
    denom = float(ab @ ab)
    u = 0.0 if denom == 0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    closest = a + u * ab
    delta = p - closest
    d = float(np.hypot(*delta))
    direction = delta / d if d > 1e-9 else np.array([0.0, 1.0])
    return d, direction


def _reflect_axis(p: float, v: float, lo: float, hi: float) -> tuple[float, float]:
    if p < lo:
        return lo + (lo - p), abs(v)
    if p > hi:
        return hi - (p - hi), -abs(v)
    return p, v


def step_world(
    state: WorldState,
    dt: float,
    wall_margin: float = WALL_MARGIN,
    comfort: float = COMFORT_SEPARATION,
    min_separation: float = MIN_SEPARATION,
) -> WorldState:
    """Advance positions by one kinematic step.

    Non-scripted agents reflect off an inset arena boundary and repel each
    other: softly inside the comfort distance, with a hard projection at the
    minimum separation. The robot integrates unicycle kinematics. Policy
    decisions (velocity resampling, steering) are not made here.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    x0, y0, x1, y1 = state.arena
    agents = [a.copy() for a in state.agents]
    for a in agents:
        a.position = a.position + a.velocity * dt
        if a.scripted:
            continue
        px, vx = _reflect_axis(
            a.position[0], a.velocity[0], x0 + wall_margin, x1 - wall_margin
        )
        py, vy = _reflect_axis(
            a.position[1], a.velocity[1], y0 + wall_margin, y1 - wall_margin
        )
        a.position = np.array([px, py])
        a.velocity = np.array([vx, vy])

    free = [a for a in agents if not a.scripted]
    robot_xy = np.array([state.robot.x, state.robot.y])
    for _ in range(2):
        for i in range(len(free)):
            for j in range(i + 1, len(free)):
                delta = free[j].position - free[i].position
                d = float(np.hypot(*delta))
                unit = delta / d if d > 1e-9 else np.array([1.0, 0.0])
                if d < min_separation:
                    shift = 0.5 * (min_separation - d)
                elif d < comfort:
                    # Mutual avoidance comparable to walking speed, so paths
                    # bend around each other instead of merging bodies.
                    shift = (comfort - d) * dt
                else:
                    continue
                free[i].position = free[i].position - unit * shift
                free[j].position = free[j].position + unit * shift
        # People step around the robot rather than over it.
        for a in free:
            delta = a.position - robot_xy
            d = float(np.hypot(*delta))
            if d < min_separation:
                unit = delta / d if d > 1e-9 else np.array([1.0, 0.0])
                a.position = robot_xy + unit * min_separation
            elif d < comfort:
                unit = delta / d
                a.position = a.position + unit * (comfort - d) * dt
        # ... and around the furniture rather than through it.
        for a in free:
            for c in state.circles:
                clear = a.radius + c.radius + 0.12
                delta = a.position - np.array([c.x, c.y])
                d = float(np.hypot(*delta))
                if d < clear:
                    unit = delta / d if d > 1e-9 else np.array([1.0, 0.0])
                    a.position = np.array([c.x, c.y]) + unit * clear
            for seg in state.keep_out:
                clear = a.radius + 0.15
                d, direction = _point_segment_distance(a.position, seg)
                if d < clear:
                    a.position = a.position + direction * (clear - d)
        for a in free:
            a.position = np.clip(
                a.position,
                [x0 + wall_margin, y0 + wall_margin],
                [x1 - wall_margin, y1 - wall_margin],
            )

    v, omega = state.robot_twist
    r = state.robot
    nx = r.x + v * math.cos(r.theta) * dt
    ny = r.y + v * math.sin(r.theta) * dt
    nx = min(max(nx, x0 + ROBOT_WALL_MARGIN), x1 - ROBOT_WALL_MARGIN)
    ny = min(max(ny, y0 + ROBOT_WALL_MARGIN), y1 - ROBOT_WALL_MARGIN)
    robot = Pose2D(nx, ny, normalize_angle(r.theta + omega * dt), state.time + dt)

    return WorldState(
        time=state.time + dt,
        robot=robot,
        robot_twist=state.robot_twist,
        agents=agents,
        circles=state.circles,
        segments=state.segments,
        arena=state.arena,
        keep_out=state.keep_out,
    )


def _ray_circles(
    origin: np.ndarray, dirs: np.ndarray, circles: Sequence[tuple[float, float, float]]
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-hit distances and the index of the hit circle per beam."""
    n = len(dirs)
    best = np.full(n, np.inf)
    label = np.full(n, -1, dtype=int)
    for k, (cx, cy, rad) in enumerate(circles):
        m = np.array([cx, cy]) - origin
        b = dirs @ m
        c0 = float(m @ m) - rad * rad
        disc = b * b - c0
        ok = disc >= 0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        t_near = b - sq
        t_far = b + sq
        t = np.where(t_near > 1e-9, t_near, t_far)
        hit = ok & (t > 1e-9) & (t < best)
        best = np.where(hit, t, best)
        label = np.where(hit, k, label)
    return best, label


def _ray_segments(
    origin: np.ndarray, dirs: np.ndarray, segments: Sequence[Segment]
) -> np.ndarray:
    """Nearest-hit distances against line segments per beam."""
    n = len(dirs)
    best = np.full(n, np.inf)
    for seg in segments:
        p = np.array([seg.x1, seg.y1])
        s = np.array([seg.x2 - seg.x1, seg.y2 - seg.y1])
        q = p - origin
        denom = dirs[:, 0] * s[1] - dirs[:, 1] * s[0]
        qxs = q[0] * s[1] - q[1] * s[0]
        qxd = q[0] * dirs[:, 1] - q[1] * dirs[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = qxs / denom
            u = qxd / denom
        hit = (np.abs(denom) > 1e-12) & (t > 1e-9) & (u >= 0.0) & (u <= 1.0)
        best = np.where(hit & (t < best), t, best)
    return best


def raycast_scan(
    state: WorldState,
    lidar: LidarParams,
    noise_std: float = 0.0,
    dropout_prob: float = 0.0,
    rng: np.random.Generator | None = None,
    with_labels: bool = False,
):
    """Cast one scan from the robot pose against agents and static geometry.

    Occlusion falls out of nearest-hit selection. Gaussian range noise is
    truncated at three sigmas (so a return never overshoots the true surface
    by more than 3*noise_std) and each returning beam independently drops to
    no-return with ``dropout_prob``. With ``with_labels`` the per-beam hit
    attribution is returned as well: an agent id, STATIC_LABEL, or NO_LABEL.
    """
    pose = state.robot
    origin = np.array([pose.x, pose.y])
    angles = pose.theta + lidar.angle_min + np.arange(lidar.n_beams) * lidar.angle_increment
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)

    agent_circles = [
        (float(a.position[0]), float(a.position[1]), a.radius) for a in state.agents
    ]
    t_agents, which_agent = _ray_circles(origin, dirs, agent_circles)
    t_static_c, _ = _ray_circles(
        origin, dirs, [(c.x, c.y, c.radius) for c in state.circles]
    )
    t_static_s = _ray_segments(origin, dirs, state.segments)
    t_static = np.minimum(t_static_c, t_static_s)

    best = np.minimum(t_agents, t_static)
    labels = np.full(lidar.n_beams, NO_LABEL, dtype=int)
    agent_ids = np.array([a.id for a in state.agents], dtype=int)
    agent_hit = (t_agents <= t_static) & np.isfinite(t_agents)
    if len(agent_ids):
        labels[agent_hit] = agent_ids[which_agent[agent_hit]]
    static_hit = np.isfinite(t_static) & ~agent_hit
    labels[static_hit] = STATIC_LABEL

    in_range = best <= lidar.range_max
    ranges = np.where(in_range, best, NO_RETURN)
    labels[~in_range] = NO_LABEL

    finite = np.isfinite(ranges)
    if rng is not None and noise_std > 0:
        noise = np.clip(
            rng.normal(0.0, noise_std, lidar.n_beams), -3 * noise_std, 3 * noise_std
        )
        ranges = np.where(finite, np.clip(ranges + noise, 1e-6, lidar.range_max), ranges)
    if rng is not None and dropout_prob > 0:
        dropped = finite & (rng.random(lidar.n_beams) < dropout_prob)
        ranges = np.where(dropped, NO_RETURN, ranges)
        labels[dropped] = NO_LABEL

    scan = LidarScan(
        timestamp=state.time,
        ranges=ranges,
        angle_min=lidar.angle_min,
        angle_increment=lidar.angle_increment,
        range_max=lidar.range_max,
        pose=pose,
    )
    if with_labels:
        return scan, labels
    return scan


def emit_ground_truth(state: WorldState) -> GroundTruthFrame:
    """Agent centers and robot pose at the current simulation time."""
    return GroundTruthFrame(
        timestamp=state.time,
        persons=tuple(
            (a.id, PointXY(float(a.position[0]), float(a.position[1]), frame=ODOM_FRAME))
            for a in state.agents
        ),
        robot_pose=state.robot,
    )


def _default_clutter(
    arena: tuple[float, float, float, float],
    rng: np.random.Generator,
    keep_clear: tuple[float, float],
) -> tuple[tuple[Circle, ...], tuple[Segment, ...]]:
    """Moderate clutter at the arena edges, as a knee-height scan plane sees
    furniture: chairs appear as four thin legs, tables as a straight front
    edge plus legs. Thin posts and straight runs are what a person detector
    has to reject in a real room; person-diameter blobs are not placed
    because nothing at scan height looks like one.

    Everything keeps 0.45 m of clearance from the walls so furniture and
    wall returns never bridge into one compound cluster (a leg nub on a wall
    run can mimic a torso arc), and the ``keep_clear`` spot where the robot
    starts stays free.
    """
    x0, y0, x1, y1 = arena
    span_x = x1 - x0
    span_y = y1 - y0
    leg_r = 0.03
    wall_off = 0.45

    def chair(cx: float, cy: float, half: float = 0.21) -> tuple[Circle, ...]:
        return tuple(
            Circle(cx + sx * half, cy + sy * half, leg_r)
            for sx, sy in ((-1, -1), (1, -1), (-1, 1), (1, 1))
        )

    def spot(fixed: float, lo: float, hi: float, horizontal: bool) -> tuple[float, float]:
        x = y = 0.0
        for _ in range(20):
            at = float(rng.uniform(lo, hi))
            x, y = (at, fixed) if horizontal else (fixed, at)
            if math.hypot(x - keep_clear[0], y - keep_clear[1]) >= 1.2:
                break
        return x, y

    def table(
        fixed: float, lo: float, hi: float, horizontal: bool, back: float
    ) -> tuple[Segment, tuple[Circle, Circle]]:
        # Legs sit inset behind the front edge (toward the wall), so the
        # edge itself stays a clean straight run from every viewpoint.
        ends = ((lo, fixed), (lo + 1.2, fixed))
        for _ in range(20):
            at = float(rng.uniform(lo, hi))
            if horizontal:
                ends = ((at, fixed), (at + 1.2, fixed))
            else:
                ends = ((fixed, at), (fixed, at + 1.2))
            if all(
                math.hypot(ex - keep_clear[0], ey - keep_clear[1]) >= 1.2
                for ex, ey in ends
            ):
                break
        (ax, ay), (bx, by) = ends
        if horizontal:
            legs = (Circle(ax + 0.15, ay + back, leg_r), Circle(bx - 0.15, by + back, leg_r))
        else:
            legs = (Circle(ax + back, ay + 0.15, leg_r), Circle(bx + back, by - 0.15, leg_r))
        return Segment(ax, ay, bx, by), legs

    # Chair leg centers sit at wall_off + half so every leg keeps clearance.
    chair_row = wall_off + 0.21
    circles: tuple[Circle, ...] = ()
    circles += chair(*spot(y0 + chair_row, x0 + 0.2 * span_x, x0 + 0.8 * span_x, True))
    circles += chair(*spot(y1 - chair_row, x0 + 0.2 * span_x, x0 + 0.8 * span_x, True))

    segments: list[Segment] = []
    for fixed, lo, hi, horizontal, back in (
        (y1 - wall_off, x0 + 0.2 * span_x, x0 + 0.8 * span_x - 1.2, True, 0.15),
        (x1 - wall_off, y0 + 0.2 * span_y, y0 + 0.8 * span_y - 1.2, False, 0.15),
    ):
        seg, legs = table(fixed, lo, hi, horizontal, back)
        segments.append(seg)
        circles += legs
    return circles, tuple(segments)


def _arena_walls(arena: tuple[float, float, float, float]) -> tuple[Segment, ...]:
    x0, y0, x1, y1 = arena
    return (
        Segment(x0, y0, x1, y0),
        Segment(x1, y0, x1, y1),
        Segment(x1, y1, x0, y1),
        Segment(x0, y1, x0, y0),
    )


class Scenario:
    """A scenario bound to its seed: initial world plus deterministic policy
    streams. ``run()`` yields GroundTruthFrame objects at 100 Hz interleaved
    with LidarScan objects at the lidar rate, in time order."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        seq = np.random.SeedSequence(cfg.seed)
        world_seed, sensor_seed = seq.spawn(2)
        self._rng_world = np.random.default_rng(world_seed)
        self._rng_sensor = np.random.default_rng(sensor_seed)
        self.lidar = cfg.lidar
        self.state = self._build_initial_state()
        self._robot_next_resample = 0.0
        self._robot_v = 0.0
        self._robot_omega = 0.0

    def _build_initial_state(self) -> WorldState:
        cfg = self.cfg
        rng = self._rng_world
        x0, y0, x1, y1 = cfg.arena

        if cfg.robot_start is not None:
            rx, ry, rtheta = cfg.robot_start
        elif cfg.kind == "sr":
            # Stationary robot near one wall looking across the arena keeps
            # every walkable spot inside the 270-degree wedge.
            rx, ry, rtheta = x0 + ROBOT_WALL_MARGIN + 0.1, (y0 + y1) / 2.0, 0.0
        else:
            rx, ry, rtheta = (x0 + x1) / 2.0, (y0 + y1) / 2.0, 0.0
        robot = Pose2D(rx, ry, rtheta, 0.0)

        circles: tuple[Circle, ...] = ()
        segments: list[Segment] = []
        keep_out: list[Segment] = []
        if cfg.arena_walls:
            segments.extend(_arena_walls(cfg.arena))
        if cfg.clutter is None and cfg.kind != "custom":
            circles, clutter_segs = _default_clutter(cfg.arena, rng, (rx, ry))
            segments.extend(clutter_segs)
            keep_out.extend(clutter_segs)
        elif cfg.clutter:
            for shape in cfg.clutter:
                if isinstance(shape, Circle):
                    circles = circles + (shape,)
                elif isinstance(shape, Segment):
                    segments.append(shape)
                    keep_out.append(shape)
                else:
                    raise ValueError(f"unsupported clutter shape {shape!r}")
        segments.extend(cfg.occluder_walls)

        agents: list[AgentModel] = []
        if cfg.kind == "custom":
            for sa in cfg.scripted_agents:
                agents.append(
                    AgentModel(
                        id=sa.id,
                        radius=sa.radius,
                        position=np.array([sa.x, sa.y], dtype=float),
                        velocity=np.array([sa.vx, sa.vy], dtype=float),
                        scripted=True,
                    )
                )
        else:
            agents = self._place_persons(robot, circles, tuple(keep_out), rng)
        return WorldState(
            time=0.0,
            robot=robot,
            robot_twist=(0.0, 0.0),
            agents=agents,
            circles=circles,
            segments=tuple(segments),
            arena=cfg.arena,
            keep_out=tuple(keep_out),
        )

    def _place_persons(
        self,
        robot: Pose2D,
        circles: tuple[Circle, ...],
        keep_out: tuple[Segment, ...],
        rng: np.random.Generator,
    ) -> list[AgentModel]:
        cfg = self.cfg
        x0, y0, x1, y1 = cfg.arena
        lo = np.array([x0 + WALL_MARGIN, y0 + WALL_MARGIN])
        hi = np.array([x1 - WALL_MARGIN, y1 - WALL_MARGIN])
        agents: list[AgentModel] = []
        for pid in range(cfg.n_persons):
            for _attempt in range(200):
                pos = rng.uniform(lo, hi)
                if any(
                    np.hypot(*(pos - a.position)) < COMFORT_SEPARATION for a in agents
                ):
                    continue
                if np.hypot(pos[0] - robot.x, pos[1] - robot.y) < 1.0:
                    continue
                if any(
                    np.hypot(pos[0] - c.x, pos[1] - c.y)
                    < c.radius + cfg.person_radius + 0.3
                    for c in circles
                ):
                    continue
                if any(
                    _point_segment_distance(pos, seg)[0] < cfg.person_radius + 0.3
                    for seg in keep_out
                ):
                    continue
                break
            else:
                raise RuntimeError("could not place agents without overlap")
            heading = rng.uniform(-math.pi, math.pi)
            speed = rng.uniform(*cfg.person_speed)
            agents.append(
                AgentModel(
                    id=pid,
                    radius=cfg.person_radius,
                    position=pos,
                    velocity=speed * np.array([math.cos(heading), math.sin(heading)]),
                    next_resample=0.0,
                )
            )
        return agents

    # -- policies ---------------------------------------------------------

    def _agent_policy(self, t: float):
        """First half: straight lines (reflections only). Second half: the
        walk re-aims at random intervals."""
        cfg = self.cfg
        if cfg.kind == "custom" or t < cfg.duration / 2.0:
            return
        rng = self._rng_world
        for a in self.state.agents:
            if a.scripted or t < a.next_resample:
                continue
            heading = rng.uniform(-math.pi, math.pi)
            speed = rng.uniform(*cfg.person_speed)
            a.velocity = speed * np.array([math.cos(heading), math.sin(heading)])
            a.next_resample = t + rng.uniform(1.0, 3.0)

    def _robot_policy(self, t: float):
        cfg = self.cfg
        if cfg.kind in ("sr", "custom"):
            self.state.robot_twist = (0.0, 0.0)
            return
        rng = self._rng_world
        if t >= self._robot_next_resample:
            self._robot_v = float(rng.uniform(-cfg.robot_linear_max, cfg.robot_linear_max))
            if cfg.kind == "mr2":
                self._robot_omega = float(
                    rng.uniform(-cfg.robot_angular_max, cfg.robot_angular_max)
                )
                self._robot_next_resample = t + float(rng.uniform(0.8, 2.0))
            else:
                self._robot_next_resample = t + float(rng.uniform(1.0, 2.5))
        omega = self._robot_omega
        if cfg.kind == "mr1":
            # Steer the wedge at the crowd so nobody slips behind the robot.
            r = self.state.robot
            if self.state.agents:
                centroid = np.mean([a.position for a in self.state.agents], axis=0)
                bearing = math.atan2(centroid[1] - r.y, centroid[0] - r.x)
                err = normalize_angle(bearing - r.theta)
                omega = max(-cfg.robot_angular_max, min(cfg.robot_angular_max, 2.0 * err))
            else:
                omega = 0.0
        v = self._robot_v
        # Reverse instead of driving into a wall.
        r = self.state.robot
        x0, y0, x1, y1 = cfg.arena
        ahead_x = r.x + v * math.cos(r.theta) * 0.5
        ahead_y = r.y + v * math.sin(r.theta) * 0.5
        if not (
            x0 + ROBOT_WALL_MARGIN <= ahead_x <= x1 - ROBOT_WALL_MARGIN
            and y0 + ROBOT_WALL_MARGIN <= ahead_y <= y1 - ROBOT_WALL_MARGIN
        ):
            v = -v
            self._robot_v = v
        self.state.robot_twist = (v, omega)

    # -- main loop --------------------------------------------------------

    def run(self, with_labels: bool = False) -> Iterator:
        """Generate the full event stream for the configured duration.

        Yields GroundTruthFrame and LidarScan objects in time order; with
        ``with_labels`` each scan arrives as a (scan, labels) tuple carrying
        per-beam hit attribution.
        """
        cfg = self.cfg
        gt_dt = 1.0 / GT_RATE_HZ
        ticks_per_scan = round(GT_RATE_HZ / self.lidar.rate_hz)
        n_ticks = round(cfg.duration * GT_RATE_HZ)
        for k in range(n_ticks + 1):
            # Pin both clocks to the exact rational tick so timestamps never
            # drift from float accumulation across a long run.
            self.state.time = k / GT_RATE_HZ
            self.state.robot = replace(self.state.robot, timestamp=self.state.time)
            yield emit_ground_truth(self.state)
            if k % ticks_per_scan == 0:
                yield raycast_scan(
                    self.state,
                    self.lidar,
                    noise_std=cfg.noise_std,
                    dropout_prob=cfg.dropout_prob,
                    rng=self._rng_sensor,
                    with_labels=with_labels,
                )
            if k < n_ticks:
                self._agent_policy(self.state.time)
                self._robot_policy(self.state.time)
                self.state = step_world(self.state, gt_dt)


def generate_scenario(cfg: ScenarioConfig) -> Scenario:
    """Build a scenario (initial world plus seeded policy streams)."""
    return Scenario(cfg)


def run_scenario(
    cfg: ScenarioConfig,
) -> tuple[list[LidarScan], list[GroundTruthFrame]]:
    """Convenience wrapper: materialize the scan and ground-truth streams."""
    scans: list[LidarScan] = []
    gt: list[GroundTruthFrame] = []
    for event in generate_scenario(cfg).run():
        if isinstance(event, LidarScan):
            scans.append(event)
        else:
            gt.append(event)
    return scans, gt


def run_scenario_with_labels(
    cfg: ScenarioConfig,
) -> tuple[list[LidarScan], list[GroundTruthFrame], list[np.ndarray]]:
    """Like run_scenario, also returning per-scan beam-hit labels."""
    scans: list[LidarScan] = []
    gt: list[GroundTruthFrame] = []
    labels: list[np.ndarray] = []
    for event in generate_scenario(cfg).run(with_labels=True):
        if isinstance(event, GroundTruthFrame):
            gt.append(event)
        else:
            scan, lab = event
            scans.append(scan)
            labels.append(lab)
    return scans, gt, labels
