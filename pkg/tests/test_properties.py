"""Randomized invariants of the update rule and the geometry fingerprint."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vbca.forces import pair_repulsion, step, step_velocities
from vbca.geometry import spectrum_of
from vbca.model import SwarmParams, SwarmState

CASES = settings(max_examples=1000, deadline=None)

coords = st.floats(-35, 35, allow_nan=False, allow_infinity=False)


@st.composite
def swarms(draw):
    k = draw(st.integers(1, 9))
    # Peripherals within 35*sqrt(3) < 80 m of the central drone keep every
    # drone in range, so the step never raises.
    offsets = draw(arrays(np.float64, (k, 3), elements=coords))
    centre = draw(arrays(np.float64, 3, elements=st.floats(-500, 500)))
    pos = np.vstack([np.zeros(3), offsets]) + centre
    ids = draw(st.permutations(range(k + 1)))
    central = np.array([i == 0 for i in range(k + 1)])
    return SwarmState(draw(st.integers(0, 100)), ids, central, pos, np.zeros_like(pos))


params = st.builds(
    SwarmParams,
    a=st.floats(0.01, 1.0),
    r_gain=st.floats(0.1, 300.0),
    repulsion_law=st.sampled_from(["radial", "axial"]),
    taper_width=st.sampled_from([0.0, 12.0]),
    v_max=st.one_of(st.none(), st.floats(0.5, 30.0)),
)


@CASES
@given(swarms(), params)
def test_central_drone_never_moves(state, p):
    nxt = step(state, p)
    c = state.central_index
    assert np.array_equal(nxt.positions[c], state.positions[c])


@CASES
@given(swarms(), params)
def test_displacement_bounded_by_clamp(state, p):
    v = step_velocities(state, p)
    assert (np.linalg.norm(v, axis=1) <= p.step_clamp * (1 + 1e-12)).all()


@CASES
@given(arrays(np.float64, 3, elements=st.floats(-100, 100)), st.sampled_from(["radial", "axial"]))
def test_repulsion_antisymmetric(sep, law):
    assert np.array_equal(pair_repulsion(sep, 0.1, law), -pair_repulsion(-sep, 0.1, law))


@CASES
@given(swarms(), params, st.randoms(use_true_random=False))
def test_update_independent_of_order(state, p, rnd):
    order = list(range(len(state)))
    rnd.shuffle(order)
    a = step(state, p)
    b = step(state.permuted(order), p)
    assert np.array_equal(a.positions[order], b.positions)
    assert np.array_equal(a.velocities[order], b.velocities)


def rotation(q):
    q = q / np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


@st.composite
def directions(draw):
    k = draw(st.integers(2, 8))
    d = draw(arrays(np.float64, (k, 3), elements=st.floats(-1, 1)))
    norms = np.linalg.norm(d, axis=1)
    if (norms < 0.1).any():
        d[norms < 0.1] += np.eye(3)[np.arange(k)[norms < 0.1] % 3]
    return d


@CASES
@given(
    directions(),
    arrays(np.float64, 4, elements=st.floats(-1, 1)).filter(lambda q: np.linalg.norm(q) > 0.1),
    st.floats(0.01, 1000),
)
def test_spectrum_rotation_and_scale_invariant(d, q, scale):
    moved = scale * d @ rotation(q).T
    assert np.allclose(spectrum_of(moved), spectrum_of(d), atol=1e-6)
