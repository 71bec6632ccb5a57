import numpy as np
import pytest

from vbca.errors import DegenerateSwarmError, StateMismatchError
from vbca.model import SwarmState
from vbca.topology import (
    StepMetrics,
    avg_central_distance,
    collision_violations,
    graph_connected,
    is_fully_connected,
    position_variation,
    steady_state_reached,
)


def state(points, step=0, central=0):
    pts = np.asarray(points, dtype=float)
    mask = np.zeros(len(pts), dtype=bool)
    mask[central] = True
    return SwarmState(step, np.arange(len(pts)), mask, pts, np.zeros_like(pts))


def test_connected_within_half_range():
    assert is_fully_connected(state([[0, 0, 0], [40, 0, 0], [0, -39, 0], [0, 0, 20]]), 80)


def test_star_constraint_separates_from_graph():
    s = state([[0, 0, 0], [70, 0, 0], [140, 0, 0]])
    assert graph_connected(s, 80)
    assert not is_fully_connected(s, 80)


def test_lone_central_is_connected():
    assert is_fully_connected(state([[1, 2, 3]]), 80)


def test_avg_central_distance():
    assert avg_central_distance(state([[0, 0, 0], [4, 0, 0], [0, 6, 0]])) == 5
    r = 17.0
    dirs = np.array([[1, 0, 0], [0, -1, 0], [0, 0, 1], [0.6, 0.8, 0]])
    assert avg_central_distance(state(np.vstack([[0, 0, 0], r * dirs]))) == pytest.approx(r)
    with pytest.raises(DegenerateSwarmError):
        avg_central_distance(state([[0, 0, 0]]))


@pytest.mark.parametrize("before, after, expected", [(10, 9, 1), (10, 12, 2), (10, 10, 0)])
def test_position_variation(before, after, expected):
    pv = position_variation(state([[0, 0, 0], [before, 0, 0]]), state([[0, 0, 0], [0, after, 0]], 1))
    assert pv.values.tolist() == [expected]
    assert pv.mean == expected


def test_position_variation_excludes_central_and_checks_steps():
    a = state([[0, 0, 0], [3, 0, 0], [0, 4, 0]])
    pv = position_variation(a, state(a.positions, 1))
    assert pv.ids.tolist() == [1, 2]
    with pytest.raises(StateMismatchError):
        position_variation(a, state(a.positions, 2))


def metrics(displacements, connected=None):
    connected = connected or [True] * len(displacements)
    return [StepMetrics(i + 1, d, 0.0, 1.0, c, 0) for i, (d, c) in enumerate(zip(displacements, connected))]


def test_steady_state_predicate():
    assert not steady_state_reached(metrics([0.0] * 4), 0.2, 5)
    assert steady_state_reached(metrics([0.1, 0.1, 0.05, 0.02, 0.01]), 0.2, 5)
    assert not steady_state_reached(
        metrics([0.1, 0.1, 0.05, 0.02, 0.01], [True, True, False, True, True]), 0.2, 5)
    assert not steady_state_reached(metrics([0.1, 0.3, 0.05, 0.02, 0.01]), 0.2, 5)


def test_collision_violations():
    assert collision_violations(state([[0, 0, 0], [70, 0, 0]]), 60) == 0
    assert collision_violations(state([[0, 0, 0], [50, 0, 0]]), 60) == 1
    assert collision_violations(state(np.zeros((5, 3))), 60) == 10
