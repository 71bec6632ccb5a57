"""Core swarm types, parameter validation and deterministic initialization.

Positions are metres, velocities metres per step. A :class:`SwarmState` keeps
its drones as parallel numpy arrays (ids, roles, positions, velocities) so the
force engine can work on whole-swarm snapshots; :attr:`SwarmState.drones`
exposes the same data as :class:`DroneState` records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSwarmError, ParameterError, UnknownDroneError

Vec3 = np.ndarray  # shape (3,), float64

REPULSION_LAWS = ("radial", "axial")


def vec3(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> Vec3:
    return np.array([x, y, z], dtype=float)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


class DroneRole(str, Enum):
    CENTRAL = "central"
    PERIPHERAL = "peripheral"


@dataclass(frozen=True)
class DroneState:
    id: int
    role: DroneRole
    position: Vec3
    velocity: Vec3 = field(default_factory=vec3)

    def __post_init__(self):
        object.__setattr__(self, "position", _frozen(np.asarray(self.position, dtype=float)))
        object.__setattr__(self, "velocity", _frozen(np.asarray(self.velocity, dtype=float)))
        if self.position.shape != (3,) or self.velocity.shape != (3,):
            raise ParameterError("position and velocity must be 3-vectors")
        if self.id < 0:
            raise ParameterError("drone id must be >= 0")

    @property
    def is_central(self) -> bool:
        return self.role is DroneRole.CENTRAL


@dataclass(frozen=True)
class SwarmParams:
    """All tunables of a simulation.

    ``a`` and ``r_gain`` are the attraction and repulsion gains. The defaults
    are the compactness-parameter mapping evaluated at ``cp=40``; use
    :func:`vbca.forces.params_for_cp` to build a consistent set for another
    CP value.
    """

    a: float = 0.15
    r_gain: float = 64.8  # m^2/step, = KAPPA * a * cp^2 at cp=40
    cp: float = 40.0
    r_t: float = 80.0
    r_c: float = 60.0
    c_obs: float = 40.0
    epsilon: float = 0.1
    v_max: float | None = None  # None -> r_t / 4
    jitter_radius: float = 0.5
    seed: int = 0
    ss_threshold: float = 0.002
    ss_window: int = 5
    max_steps: int = 2000
    taper_width: float = 12.0
    repulsion_law: str = "radial"

    @property
    def step_clamp(self) -> float:
        return self.r_t / 4.0 if self.v_max is None else self.v_max

    def with_(self, **changes) -> "SwarmParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def validate_params(params: SwarmParams) -> list[str]:
    """Return a list of violated constraints; an empty list means valid."""
    errors = []
    for name in ("a", "r_gain", "cp", "r_t", "r_c", "c_obs", "epsilon",
                 "jitter_radius", "ss_threshold", "taper_width"):
        value = getattr(params, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            errors.append(f"{name} must be a finite number")
    if errors:
        return errors

    for name in ("a", "r_gain", "cp", "r_t", "c_obs", "epsilon", "jitter_radius"):
        if getattr(params, name) <= 0:
            errors.append(f"{name} must be > 0")
    if params.r_c < 0:
        errors.append("r_c must be >= 0")
    if params.jitter_radius >= params.r_t / 10:
        errors.append("jitter_radius must be < r_t/10")
    if params.v_max is not None and not (math.isfinite(params.v_max) and params.v_max > 0):
        errors.append("v_max must be > 0")
    if params.ss_threshold <= 0:
        errors.append("ss_threshold must be > 0")
    if not isinstance(params.ss_window, int) or params.ss_window < 1:
        errors.append("ss_window must be >= 1")
    if not isinstance(params.max_steps, int) or params.max_steps < 0:
        errors.append("max_steps must be >= 0")
    if not isinstance(params.seed, int) or not 0 <= params.seed < 2**64:
        errors.append("seed must be an unsigned 64-bit integer")
    if not 0 <= params.taper_width < params.r_t:
        errors.append("taper_width must be in [0, r_t)")
    if params.repulsion_law not in REPULSION_LAWS:
        errors.append(f"repulsion_law must be one of {REPULSION_LAWS}")
    return errors


def check_params(params: SwarmParams) -> None:
    errors = validate_params(params)
    if errors:
        raise ParameterError("; ".join(errors))


@dataclass(frozen=True, eq=False)
class SwarmState:
    """Immutable snapshot of the swarm at one integration step."""

    step: int
    ids: np.ndarray
    central: np.ndarray  # bool mask
    positions: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        central = np.asarray(self.central, dtype=bool)
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        vel = np.asarray(self.velocities, dtype=float).reshape(-1, 3)
        n = len(ids)
        if n == 0:
            raise DegenerateSwarmError("a swarm needs at least one drone")
        if central.shape != (n,) or pos.shape != (n, 3) or vel.shape != (n, 3):
            raise ParameterError("inconsistent array shapes in SwarmState")
        if central.sum() != 1:
            raise DegenerateSwarmError("exactly one central drone is required")
        if len(np.unique(ids)) != n or (ids < 0).any():
            raise ParameterError("drone ids must be unique and non-negative")
        if not (np.isfinite(pos).all() and np.isfinite(vel).all()):
            raise ParameterError("non-finite position or velocity")
        if self.step < 0:
            raise ParameterError("step must be >= 0")
        object.__setattr__(self, "ids", _frozen(ids))
        object.__setattr__(self, "central", _frozen(central))
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "velocities", _frozen(vel))

    @classmethod
    def from_drones(cls, drones: Iterable[DroneState], step: int = 0) -> "SwarmState":
        drones = list(drones)
        if not drones:
            raise DegenerateSwarmError("a swarm needs at least one drone")
        return cls(
            step=step,
            ids=[d.id for d in drones],
            central=[d.is_central for d in drones],
            positions=[d.position for d in drones],
            velocities=[d.velocity for d in drones],
        )

    @property
    def drones(self) -> tuple[DroneState, ...]:
        return tuple(
            DroneState(
                int(i),
                DroneRole.CENTRAL if c else DroneRole.PERIPHERAL,
                p,
                v,
            )
            for i, c, p, v in zip(self.ids, self.central, self.positions, self.velocities)
        )

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def central_index(self) -> int:
        return int(np.flatnonzero(self.central)[0])

    @property
    def central_id(self) -> int:
        return int(self.ids[self.central_index])

    @property
    def central_position(self) -> Vec3:
        return self.positions[self.central_index]

    @property
    def peripheral_ids(self) -> np.ndarray:
        return self.ids[~self.central]

    @property
    def n_peripheral(self) -> int:
        return len(self.ids) - 1

    def index_of(self, drone_id: int) -> int:
        hit = np.flatnonzero(self.ids == drone_id)
        if len(hit) == 0:
            raise UnknownDroneError(drone_id)
        return int(hit[0])

    def drone(self, drone_id: int) -> DroneState:
        return self.drones[self.index_of(drone_id)]

    def central_distances(self) -> np.ndarray:
        """Distance of every drone to the central drone (0 for the central)."""
        return np.linalg.norm(self.positions - self.central_position, axis=1)

    def permuted(self, order: Sequence[int]) -> "SwarmState":
        order = np.asarray(order)
        return SwarmState(self.step, self.ids[order], self.central[order],
                          self.positions[order], self.velocities[order])

    def same_as(self, other: "SwarmState") -> bool:
        """Bit-for-bit equality of every field."""
        return (
            self.step == other.step
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.central, other.central)
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.velocities, other.velocities)
        )


def _ball_offsets(rng: np.random.Generator, k: int, radius: float) -> np.ndarray:
    directions = rng.normal(size=(k, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(k) ** (1.0 / 3.0)
    return directions * radii[:, None]


def initialize(k_peripheral: int, params: SwarmParams) -> SwarmState:
    """Central drone at the origin plus ``k_peripheral`` jittered peripherals.

    Every drone starts at the common deployment point; peripherals get an
    independent offset drawn uniformly from the ball of radius
    ``params.jitter_radius``, seeded by ``params.seed``.
    """
    check_params(params)
    if k_peripheral < 1:
        raise DegenerateSwarmError("at least one peripheral drone is required")

    rng = np.random.default_rng(params.seed)
    offsets = _ball_offsets(rng, k_peripheral, params.jitter_radius)
    # Coincident peripherals make the repulsion term undefined; redraw.
    while len(np.unique(offsets, axis=0)) < k_peripheral or (
        np.linalg.norm(offsets, axis=1) >= params.jitter_radius
    ).any():
        offsets = _ball_offsets(rng, k_peripheral, params.jitter_radius)

    n = k_peripheral + 1
    positions = np.zeros((n, 3))
    positions[1:] = offsets
    central = np.zeros(n, dtype=bool)
    central[0] = True
    return SwarmState(0, np.arange(n), central, positions, np.zeros((n, 3)))
