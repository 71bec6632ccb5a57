"""Virtual-force engine: neighbour discovery, attraction, repulsion and the
synchronous position update.

Every peripheral drone is pulled toward the central drone and pushed away from
the peripheral drones within transmission range. Velocities are recomputed
from the previous snapshot each step (Jacobi update), the resulting
displacement is clamped to ``v_max``, and the central drone never moves.

Two repulsion laws are available:

``radial``
    ``r_gain * delta / |delta|**2`` per neighbour: an inverse-distance push
    along the line joining the two drones. This is the default; it settles
    into the canonical electron-pair geometries.
``axial``
    ``r_gain * (1/dx, 1/dy, 1/dz)`` per neighbour, each axis treated on its
    own. Both laws agree for drones separated along a single axis.

Repulsion from a neighbour fades linearly to zero over the last
``taper_width`` metres before ``r_t``, which keeps the force continuous as
neighbours enter or leave range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConnectivityLossError, ParameterError
from .model import DroneState, SwarmParams, SwarmState, Vec3, check_params
from .topology import StepMetrics, step_metrics, steady_state_reached

# Calibration constant of the compactness mapping r_gain = KAPPA * a * cp^2.
# With it a three-drone ring at cp=10 settles at 10 * sqrt(KAPPA) = 5.20 m.
KAPPA = 0.27
DEFAULT_BASE_A = 0.15

_AXES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}


@dataclass(frozen=True)
class NeighborSet:
    owner: int
    members: frozenset[int]

    def __contains__(self, drone_id: int) -> bool:
        return drone_id in self.members

    def __len__(self) -> int:
        return len(self.members)


class RunResult(NamedTuple):
    final: SwarmState
    history: list[StepMetrics]
    converged: bool


def cp_to_gains(cp: float, base_a: float = DEFAULT_BASE_A) -> tuple[float, float]:
    """Map the compactness parameter to ``(a, r_gain)``.

    The equilibrium distance to the central drone scales with
    ``sqrt(r_gain / a)``, so the quadratic mapping makes it linear in ``cp``.
    """
    if not cp > 0 or not base_a > 0:
        raise ParameterError("cp and base_a must be > 0")
    return base_a, KAPPA * base_a * cp * cp


def params_for_cp(cp: float, base_a: float = DEFAULT_BASE_A, **overrides) -> SwarmParams:
    a, r_gain = cp_to_gains(cp, base_a)
    return SwarmParams(a=a, r_gain=r_gain, cp=cp, **overrides)


def find_direct_neighbors(state: SwarmState, d: int, r_t: float) -> NeighborSet:
    """Drones within ``r_t`` (inclusive) of drone ``d``."""
    i = state.index_of(d)
    dist = np.linalg.norm(state.positions - state.positions[i], axis=1)
    hit = (dist <= r_t) & (state.ids != d)
    return NeighborSet(d, frozenset(int(x) for x in state.ids[hit]))


def delta(component, d: DroneState, n: DroneState) -> float:
    """Signed per-axis separation: ``d``'s coordinate minus ``n``'s."""
    try:
        axis = _AXES[component]
    except KeyError:
        raise ParameterError(f"unknown axis {component!r}") from None
    return float(d.position[axis] - n.position[axis])


def attraction_velocity(
    d: DroneState, neighbor_positions: Sequence[Vec3], a: float, step: int = -1
) -> Vec3:
    """``a * (centroid - p_d)`` over the given (central) neighbour positions."""
    if len(neighbor_positions) == 0:
        raise ConnectivityLossError(d.id, step)
    centroid = np.mean(np.asarray(neighbor_positions, dtype=float), axis=0)
    return a * (centroid - d.position)


def pair_repulsion(separation: np.ndarray, epsilon: float, law: str = "radial") -> np.ndarray:
    """Unscaled repulsion term(s) for separation vector(s) ``p_d - p_n``.

    Accepts shape ``(3,)`` or ``(..., 3)``. Terms whose separation is below
    ``epsilon`` (per axis for ``axial``, in norm for ``radial``) are zero.
    """
    sep = np.asarray(separation, dtype=float)
    if law == "axial":
        safe = np.where(np.abs(sep) >= epsilon, sep, np.inf)
        return 1.0 / safe
    if law == "radial":
        sq = np.einsum("...i,...i->...", sep, sep)
        safe = np.where(sq >= epsilon * epsilon, sq, np.inf)
        return sep / safe[..., None]
    raise ParameterError(f"unknown repulsion law {law!r}")


def taper_weight(distance, r_t: float, taper_width: float):
    """1 well inside range, falling linearly to 0 at ``r_t``; 0 beyond it."""
    distance = np.asarray(distance, dtype=float)
    inside = distance <= r_t
    if taper_width <= 0:
        return inside.astype(float)
    return np.where(inside, np.clip((r_t - distance) / taper_width, 0.0, 1.0), 0.0)


def repulsion_velocity(
    d: DroneState,
    neighbors: Sequence[DroneState],
    r_gain: float,
    epsilon: float,
    law: str = "radial",
    weights: Sequence[float] | None = None,
) -> Vec3:
    """Repulsion of ``d`` from peripheral ``neighbors``, pushing ``d`` away."""
    if not neighbors:
        return np.zeros(3)
    sep = d.position - np.array([n.position for n in neighbors])
    terms = pair_repulsion(sep, epsilon, law)
    if weights is not None:
        terms = terms * np.asarray(weights, dtype=float)[:, None]
    return r_gain * terms.sum(axis=0)


def _clamp(velocity: np.ndarray, limit: float) -> np.ndarray:
    speed = np.linalg.norm(velocity, axis=1)
    scale = np.where(speed > limit, limit / np.where(speed > 0, speed, 1.0), 1.0)
    return velocity * scale[:, None]


def step_velocities(state: SwarmState, params: SwarmParams) -> np.ndarray:
    """Clamped per-drone displacement for the next step, in the state's order.

    Work happens in ascending-id order so the result for each drone does not
    depend on how the input list is arranged.
    """
    order = np.argsort(state.ids, kind="stable")
    pos = state.positions[order]
    central = state.central[order]
    c = int(np.flatnonzero(central)[0])

    sep = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(sep, axis=2)
    in_range = dist <= params.r_t
    np.fill_diagonal(in_range, False)

    lost = ~central & ~in_range[:, c]
    if lost.any():
        i = int(np.flatnonzero(lost)[0])
        raise ConnectivityLossError(int(state.ids[order][i]), state.step, float(dist[i, c]))

    velocity = params.a * (pos[c] - pos)

    periph_pair = in_range & ~central[:, None] & ~central[None, :]
    weight = np.where(periph_pair, taper_weight(dist, params.r_t, params.taper_width), 0.0)
    terms = pair_repulsion(sep, params.epsilon, params.repulsion_law)
    velocity = velocity + params.r_gain * (terms * weight[:, :, None]).sum(axis=1)
    velocity[c] = 0.0
    velocity = _clamp(velocity, params.step_clamp)

    out = np.empty_like(velocity)
    out[order] = velocity
    return out


def step(state: SwarmState, params: SwarmParams) -> SwarmState:
    """One synchronous update; returns a new state with ``step + 1``."""
    velocity = step_velocities(state, params)
    return SwarmState(
        state.step + 1,
        state.ids,
        state.central,
        state.positions + velocity,
        velocity,
    )


def _farthest_peripheral(state: SwarmState) -> tuple[int, float]:
    dist = state.central_distances()
    i = int(np.argmax(np.where(state.central, -1.0, dist)))
    return int(state.ids[i]), float(dist[i])


def run_to_steady_state(
    initial: SwarmState,
    params: SwarmParams,
    on_step: Callable[[SwarmState, StepMetrics], None] | None = None,
) -> RunResult:
    """Step until the steady-state predicate holds or ``max_steps`` run out.

    ``history`` holds one :class:`StepMetrics` per executed step. Losing full
    connectivity at any step raises :class:`ConnectivityLossError`.
    ``on_step`` sees every new state with its metrics, before that check.
    """
    check_params(params)
    state = initial
    history: list[StepMetrics] = []
    for _ in range(params.max_steps):
        nxt = step(state, params)
        metrics = step_metrics(state, nxt, params)
        history.append(metrics)
        if on_step is not None:
            on_step(nxt, metrics)
        if not metrics.fully_connected:
            drone_id, distance = _farthest_peripheral(nxt)
            raise ConnectivityLossError(drone_id, nxt.step, distance)
        state = nxt
        if steady_state_reached(history, params.ss_threshold, params.ss_window):
            return RunResult(state, history, True)
    return RunResult(state, history, False)
