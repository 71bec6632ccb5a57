"""Connectivity, steady-state detection and per-step swarm metrics."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateSwarmError, StateMismatchError
from .model import SwarmParams, SwarmState


@dataclass(frozen=True)
class StepMetrics:
    step: int
    max_displacement: float  # m
    mean_position_variation: float  # m
    avg_central_distance: float  # m
    fully_connected: bool
    collision_violations: int

    def to_dict(self) -> dict:
        return asdict(self)


class PositionVariation(NamedTuple):
    ids: np.ndarray  # peripheral ids, ascending
    values: np.ndarray  # |change in central distance| per drone, m
    mean: float


def _pairwise_distances(positions: np.ndarray) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.linalg.norm(diff, axis=2)


def star_connected(state: SwarmState, r_t: float) -> bool:
    """Every peripheral within ``r_t`` of the central drone."""
    return bool((state.central_distances() <= r_t).all())


def graph_connected(state: SwarmState, r_t: float) -> bool:
    """Connectivity of the graph with edges between drones at most ``r_t`` apart."""
    adjacency = _pairwise_distances(state.positions) <= r_t
    seen = np.zeros(len(state), dtype=bool)
    seen[0] = True
    frontier = seen.copy()
    while frontier.any():
        reach = adjacency[frontier].any(axis=0) & ~seen
        seen |= reach
        frontier = reach
    return bool(seen.all())


def is_fully_connected(state: SwarmState, r_t: float) -> bool:
    """Graph connectivity plus the star constraint to the central drone."""
    # The star constraint implies graph connectivity, so it is checked first.
    return star_connected(state, r_t) and graph_connected(state, r_t)


def avg_central_distance(state: SwarmState) -> float:
    if state.n_peripheral == 0:
        raise DegenerateSwarmError("no peripheral drones")
    return float(state.central_distances()[~state.central].mean())


def _aligned(prev: SwarmState, curr: SwarmState) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays mapping both states onto ascending drone id."""
    a, b = np.argsort(prev.ids), np.argsort(curr.ids)
    if not np.array_equal(prev.ids[a], curr.ids[b]) or not np.array_equal(
        prev.central[a], curr.central[b]
    ):
        raise StateMismatchError("states describe different drones")
    return a, b


def position_variation(prev: SwarmState, curr: SwarmState) -> PositionVariation:
    """Absolute change of each peripheral's distance to the central drone.

    The central drone is excluded. Whether a drone approaches or drifts away,
    the magnitude of the change is reported.
    """
    if curr.step != prev.step + 1:
        raise StateMismatchError(
            f"expected consecutive steps, got {prev.step} and {curr.step}"
        )
    a, b = _aligned(prev, curr)
    periph = ~prev.central[a]
    before = prev.central_distances()[a][periph]
    after = curr.central_distances()[b][periph]
    values = np.abs(after - before)
    mean = float(values.mean()) if len(values) else 0.0
    return PositionVariation(prev.ids[a][periph], values, mean)


def max_displacement(prev: SwarmState, curr: SwarmState) -> float:
    a, b = _aligned(prev, curr)
    moved = np.linalg.norm(curr.positions[b] - prev.positions[a], axis=1)
    return float(moved.max())


def collision_violations(state: SwarmState, r_c: float) -> int:
    """Number of unordered drone pairs closer than ``r_c``."""
    dist = _pairwise_distances(state.positions)
    i, j = np.triu_indices(len(state), 1)
    return int((dist[i, j] < r_c).sum())


def steady_state_reached(
    history: Sequence[StepMetrics], ss_threshold: float, ss_window: int
) -> bool:
    if len(history) < ss_window:
        return False
    return all(
        m.max_displacement < ss_threshold and m.fully_connected
        for m in history[-ss_window:]
    )


def step_metrics(prev: SwarmState, curr: SwarmState, params: SwarmParams) -> StepMetrics:
    variation = position_variation(prev, curr)
    return StepMetrics(
        step=curr.step,
        max_displacement=max_displacement(prev, curr),
        mean_position_variation=variation.mean,
        avg_central_distance=avg_central_distance(curr) if curr.n_peripheral else 0.0,
        fully_connected=is_fully_connected(curr, params.r_t),
        collision_violations=collision_violations(curr, params.r_c),
    )
