"""Point-mass locomotion tasks: Normal, Directional (8-way) and Deceptive (U-trap).

The agent is a unicycle: it turns by ``action[0] * max_turn_rate * dt`` and
then moves ``max(0, action[1]) * max_speed * dt`` along its new heading.
In the Deceptive variant a U of axis-aligned walls, open toward -x, sits in
front of the start.

The simulation kernels are compiled with numba. The public helpers
(``make_observation``, ``step_dynamics``, ``resolve_walls``) call the same
kernels the batched evaluator uses, so they cannot drift apart.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numba
import numpy as np

from .core import BehaviorDescriptor, as_array
from .errors import DimensionMismatch
from .policy import PolicySpec, mlp_forward_into, param_count

BASE_OBS_DIM = 4
GOAL_OBS_DIM = 2
ACTION_DIM = 2
BC_DIM = 2
N_DIRECTIONS = 8
POSITION_SCALE = 10.0


class Variant(str, Enum):
    NORMAL = "normal"
    DIRECTIONAL = "directional"
    DECEPTIVE = "deceptive"


class FitnessDef(str, Enum):
    FINAL_X = "final_x"
    # identical to FINAL_X while episodes start at the origin
    NET_X_DISPLACEMENT = "net_x_displacement"


@dataclass(frozen=True)
class TrapGeometry:
    front_wall_x: float = 4.0
    side_wall_y: float = 2.0
    side_wall_length: float = 4.0
    wall_thickness: float = 0.2

    def __post_init__(self):
        for name in ("front_wall_x", "side_wall_y", "side_wall_length", "wall_thickness"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def rectangles(self) -> np.ndarray:
        """Inflated wall rectangles as rows (x_lo, x_hi, y_lo, y_hi)."""
        h = self.wall_thickness / 2.0
        fx, sy, L = self.front_wall_x, self.side_wall_y, self.side_wall_length
        return np.array(
            [
                [fx - h, fx + h, -sy - h, sy + h],
                [fx - L - h, fx + h, sy - h, sy + h],
                [fx - L - h, fx + h, -sy - h, -sy + h],
            ],
            dtype=np.float64,
        )

    def segments(self) -> list[tuple[tuple[float, float], tuple[float, float]]]:
        """Wall centre lines, for drawing."""
        fx, sy, L = self.front_wall_x, self.side_wall_y, self.side_wall_length
        return [
            ((fx, -sy), (fx, sy)),
            ((fx - L, sy), (fx, sy)),
            ((fx - L, -sy), (fx, -sy)),
        ]


@dataclass(frozen=True)
class EnvironmentSpec:
    variant: Variant = Variant.NORMAL
    max_steps: int = 200
    dt: float = 0.1
    max_speed: float = 1.0
    max_turn_rate: float = math.pi / 2
    trap: TrapGeometry | None = None
    fitness_def: FitnessDef = FitnessDef.FINAL_X

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "fitness_def", FitnessDef(self.fitness_def))
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        for name in ("dt", "max_speed", "max_turn_rate"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if (self.trap is not None) != (self.variant is Variant.DECEPTIVE):
            raise ValueError("a trap is required for, and only allowed in, the deceptive variant")

    @classmethod
    def deceptive(cls, trap: TrapGeometry | None = None, **kw) -> "EnvironmentSpec":
        return cls(variant=Variant.DECEPTIVE, trap=trap or TrapGeometry(), **kw)

    @property
    def obs_dim(self) -> int:
        return BASE_OBS_DIM + (GOAL_OBS_DIM if self.variant is Variant.DIRECTIONAL else 0)

    @property
    def action_dim(self) -> int:
        return ACTION_DIM

    @property
    def bc_dim(self) -> int:
        return BC_DIM

    @property
    def max_fitness(self) -> float:
        return self.max_speed * self.dt * self.max_steps

    def walls(self) -> np.ndarray:
        if self.trap is None:
            return np.zeros((0, 4))
        return self.trap.rectangles()


@dataclass(frozen=True)
class AgentState:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0


@dataclass(frozen=True, eq=False)
class EpisodeResult:
    fitness: float
    behavior: BehaviorDescriptor
    steps_taken: int
    goal_index: int | None = None
    # rows (step, x, y, heading), step 0 being the start pose
    trajectory: np.ndarray | None = field(default=None, repr=False)


def goal_vector(k: int) -> tuple[float, float]:
    angle = k * (2.0 * math.pi / N_DIRECTIONS)
    return math.cos(angle), math.sin(angle)


def goal_index_for_seed(episode_seed: int) -> int:
    return int(np.random.Generator(np.random.PCG64(episode_seed)).integers(N_DIRECTIONS))


# ---------------------------------------------------------------- kernels


@numba.njit(cache=True, nogil=True)
def _inside_open(x, y, walls):
    for w in range(walls.shape[0]):
        if walls[w, 0] < x < walls[w, 1] and walls[w, 2] < y < walls[w, 3]:
            return True
    return False


@numba.njit(cache=True, nogil=True)
def _sweep_hits(x0, y0, x1, y1, walls):
    # Axis-aligned move from (x0, y0) to (x1, y1); exactly one coordinate changes.
    # Blocked if the closed segment meets the open interior of any wall.
    lo_x, hi_x = min(x0, x1), max(x0, x1)
    lo_y, hi_y = min(y0, y1), max(y0, y1)
    for w in range(walls.shape[0]):
        if lo_x < walls[w, 1] and hi_x > walls[w, 0] and lo_y < walls[w, 3] and hi_y > walls[w, 2]:
            return True
    return False


@numba.njit(cache=True, nogil=True)
def _resolve(x, y, dx, dy, walls):
    ax = dx
    if dx != 0.0 and _sweep_hits(x, y, x + dx, y, walls):
        ax = 0.0
    ay = dy
    if dy != 0.0 and _sweep_hits(x + ax, y, x + ax, y + dy, walls):
        ay = 0.0
    return ax, ay


@numba.njit(cache=True, nogil=True)
def _observe(x, y, heading, use_goal, gx, gy, obs):
    obs[0] = x / 10.0
    obs[1] = y / 10.0
    obs[2] = math.cos(heading)
    obs[3] = math.sin(heading)
    if use_goal:
        obs[4] = gx
        obs[5] = gy


@numba.njit(cache=True, nogil=True)
def _step(x, y, heading, turn, throttle, consts, walls):
    # consts: dt, max_speed, max_turn_rate
    turn = min(1.0, max(-1.0, turn))
    throttle = min(1.0, max(-1.0, throttle))
    dt = consts[0]
    heading = heading + turn * consts[2] * dt
    speed = max(0.0, throttle) * consts[1]
    dx = speed * dt * math.cos(heading)
    dy = speed * dt * math.sin(heading)
    if walls.shape[0] > 0:
        dx, dy = _resolve(x, y, dx, dy, walls)
    return x + dx, y + dy, heading


@numba.njit(cache=True, nogil=True)
def _episode(params, sizes, use_goal, gx, gy, consts, walls, max_steps, traj):
    width = 0
    for s in sizes:
        width = max(width, s)
    buf_a = np.empty(width)
    buf_b = np.empty(width)
    obs = np.empty(sizes[0])
    act = np.empty(sizes[sizes.shape[0] - 1])
    record = traj.shape[0] > 0
    x = 0.0
    y = 0.0
    h = 0.0
    if record:
        traj[0, 0] = x
        traj[0, 1] = y
        traj[0, 2] = h
    for t in range(max_steps):
        _observe(x, y, h, use_goal, gx, gy, obs)
        mlp_forward_into(params, sizes, obs, buf_a, buf_b, act)
        x, y, h = _step(x, y, h, act[0], act[1], consts, walls)
        if record:
            traj[t + 1, 0] = x
            traj[t + 1, 1] = y
            traj[t + 1, 2] = h
    return x, y, h


@numba.njit(cache=True, nogil=True)
def _episode_batch(thetas, sizes, use_goal, goals, consts, walls, max_steps, out):
    empty = np.empty((0, 3))
    for i in range(thetas.shape[0]):
        x, y, h = _episode(thetas[i], sizes, use_goal, goals[i, 0], goals[i, 1], consts, walls, max_steps, empty)
        out[i, 0] = x
        out[i, 1] = y
        out[i, 2] = h


# ---------------------------------------------------------------- public API


def _consts(spec: EnvironmentSpec) -> np.ndarray:
    return np.array([spec.dt, spec.max_speed, spec.max_turn_rate], dtype=np.float64)


def make_observation(state: AgentState, spec: EnvironmentSpec, goal: tuple[float, float] | None = None) -> np.ndarray:
    use_goal = spec.variant is Variant.DIRECTIONAL
    if use_goal and goal is None:
        raise ValueError("directional observations need a goal vector")
    gx, gy = goal if use_goal else (0.0, 0.0)
    obs = np.empty(spec.obs_dim)
    _observe(float(state.x), float(state.y), float(state.heading), use_goal, float(gx), float(gy), obs)
    return obs


def resolve_walls(pos, proposed_delta, trap: TrapGeometry) -> np.ndarray:
    """Per-axis block-and-slide: x first, then y, each cancelled if it would cross a wall."""
    ax, ay = _resolve(float(pos[0]), float(pos[1]), float(proposed_delta[0]), float(proposed_delta[1]), trap.rectangles())
    return np.array([ax, ay])


def step_dynamics(state: AgentState, action, spec: EnvironmentSpec) -> AgentState:
    a = np.asarray(action, dtype=np.float64).reshape(-1)
    if a.size != ACTION_DIM:
        raise DimensionMismatch(f"action must have {ACTION_DIM} components")
    x, y, h = _step(float(state.x), float(state.y), float(state.heading), a[0], a[1], _consts(spec), spec.walls())
    return AgentState(x, y, h)


def episode_fitness(x: float, y: float, spec: EnvironmentSpec, goal: tuple[float, float] | None = None) -> float:
    if spec.variant is Variant.DIRECTIONAL:
        return x * goal[0] + y * goal[1]
    # start is the origin, so both definitions reduce to the final x
    return x - 0.0 if spec.fitness_def is FitnessDef.NET_X_DISPLACEMENT else x


def _check_dims(theta: np.ndarray, spec: EnvironmentSpec, policy: PolicySpec) -> None:
    if policy.obs_dim != spec.obs_dim or policy.action_dim != spec.action_dim:
        raise DimensionMismatch(
            f"policy {policy.obs_dim}->{policy.action_dim} does not fit environment "
            f"{spec.obs_dim}->{spec.action_dim}"
        )
    if theta.shape[-1] != param_count(policy):
        raise DimensionMismatch(f"expected {param_count(policy)} parameters, got {theta.shape[-1]}")


def run_episode(
    params,
    spec: EnvironmentSpec,
    policy: PolicySpec,
    episode_seed: int = 0,
    record_trajectory: bool = False,
    goal_index: int | None = None,
) -> EpisodeResult:
    """Roll out one full episode. ``goal_index`` overrides the seeded direction."""
    theta = np.ascontiguousarray(as_array(params), dtype=np.float64)
    _check_dims(theta, spec, policy)
    use_goal = spec.variant is Variant.DIRECTIONAL
    k = None
    gx = gy = 0.0
    if use_goal:
        k = goal_index_for_seed(episode_seed) if goal_index is None else int(goal_index)
        gx, gy = goal_vector(k)
    traj = np.empty((spec.max_steps + 1, 3) if record_trajectory else (0, 3))
    x, y, h = _episode(theta, policy.layer_sizes_array(), use_goal, gx, gy, _consts(spec), spec.walls(), spec.max_steps, traj)
    if record_trajectory:
        steps = np.arange(spec.max_steps + 1, dtype=np.float64)[:, None]
        traj = np.hstack([steps, traj])
    return EpisodeResult(
        fitness=episode_fitness(x, y, spec, (gx, gy)),
        behavior=BehaviorDescriptor([x, y]),
        steps_taken=spec.max_steps,
        goal_index=k,
        trajectory=traj if record_trajectory else None,
    )


def run_batch(
    thetas: np.ndarray,
    spec: EnvironmentSpec,
    policy: PolicySpec,
    goal_indices: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate every row of ``thetas``; returns (fitness (n,), behaviors (n, 2)).

    Row i gives exactly the same result as ``run_episode(thetas[i], ...)``.
    """
    thetas = np.ascontiguousarray(thetas, dtype=np.float64)
    _check_dims(thetas, spec, policy)
    n = thetas.shape[0]
    use_goal = spec.variant is Variant.DIRECTIONAL
    goals = np.zeros((n, 2))
    if use_goal:
        if goal_indices is None or len(goal_indices) != n:
            raise DimensionMismatch("directional batches need one goal index per row")
        for i, k in enumerate(goal_indices):
            goals[i] = goal_vector(int(k))
    out = np.empty((n, 3))
    _episode_batch(thetas, policy.layer_sizes_array(), use_goal, goals, _consts(spec), spec.walls(), spec.max_steps, out)
    x, y = out[:, 0], out[:, 1]
    if use_goal:
        fitness = x * goals[:, 0] + y * goals[:, 1]
    else:
        fitness = x.copy()
    return fitness, out[:, :2].copy()


def write_trajectory_csv(result: EpisodeResult, path) -> None:
    if result.trajectory is None:
        raise ValueError("episode was run without trajectory recording")
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "x", "y", "heading"])
        for step, x, y, h in result.trajectory:
            w.writerow([int(step), repr(float(x)), repr(float(y)), repr(float(h))])
