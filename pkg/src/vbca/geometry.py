"""Reference electron-pair geometries, swarm classification and the
exact-placement coverage baseline.

Each geometry is a set of unit directions around the central drone. The
fingerprint used for classification is the sorted list of pairwise angles
between peripheral directions, which ignores rotation and distance scale.

Polar angles of the non-regular shapes (square pyramid, capped octahedron,
square antiprism) are where the tangential forces vanish for an
inverse-distance pair force on the unit sphere, the same pair law the force
engine uses by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coverage import CoverageEstimate, swarm_coverage
from .errors import DegenerateSwarmError, ParameterError, UnsupportedKError
from .model import SwarmState

SQUARE_PYRAMID_POLAR = 104.4775110543
CAPPED_OCTAHEDRON_POLAR = (73.1705030971, 128.5251384176)
SQUARE_ANTIPRISM_POLAR = 55.6243031833


class DegenerateDirectionError(DegenerateSwarmError):
    """A peripheral drone sits on top of the central drone."""


@dataclass(frozen=True)
class ReferenceGeometry:
    name: str
    k: int
    directions: np.ndarray
    angle_spectrum: np.ndarray  # degrees, ascending
    standard: bool = True


@dataclass(frozen=True)
class ClassificationResult:
    best_match: str
    rms_angle_error: float  # degrees
    runner_up: str | None
    runner_up_error: float  # degrees, inf when there is no runner-up

    def to_dict(self) -> dict:
        return {
            "best_match": self.best_match,
            "rms_angle_error": self.rms_angle_error,
            "runner_up": self.runner_up,
            "runner_up_error": self.runner_up_error,
        }


def _sph(polar_deg: float, azimuth_deg: float) -> list[float]:
    t, p = math.radians(polar_deg), math.radians(azimuth_deg)
    return [math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)]


def _ring(n: int, polar: float = 90.0, phase: float = 0.0) -> list[list[float]]:
    return [_sph(polar, phase + 360.0 * i / n) for i in range(n)]


_NORTH, _SOUTH = [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]

# (name, standard?, directions)
_CATALOGUE: dict[int, list[tuple[str, bool, list[list[float]]]]] = {
    2: [("linear", True, [_NORTH, _SOUTH])],
    3: [("trigonal-planar", True, _ring(3))],
    4: [("tetrahedral", True, [list(np.array(v) / math.sqrt(3)) for v in
                               ([1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1])])],
    5: [
        ("trigonal-bipyramidal", True, [_NORTH, _SOUTH] + _ring(3)),
        ("square-pyramidal", False, [_NORTH] + _ring(4, SQUARE_PYRAMID_POLAR)),
    ],
    6: [("octahedral", True, [[1, 0, 0], [-1, 0, 0], [0, 1, 0],
                              [0, -1, 0], [0, 0, 1], [0, 0, -1]])],
    7: [
        ("pentagonal-bipyramidal", True, [_NORTH, _SOUTH] + _ring(5)),
        ("capped-octahedral", False, [_NORTH]
         + _ring(3, CAPPED_OCTAHEDRON_POLAR[0])
         + _ring(3, CAPPED_OCTAHEDRON_POLAR[1], 60.0)),
    ],
    8: [("square-antiprismatic", True, _ring(4, SQUARE_ANTIPRISM_POLAR)
         + _ring(4, 180.0 - SQUARE_ANTIPRISM_POLAR, 45.0))],
}


def spectrum_of(directions: np.ndarray) -> np.ndarray:
    """Sorted pairwise angles (degrees) between the rows of ``directions``."""
    u = np.asarray(directions, dtype=float)
    u = u / np.linalg.norm(u, axis=1, keepdims=True)
    i, j = np.triu_indices(len(u), 1)
    # atan2 stays accurate near 0 and 180 degrees, where arccos does not.
    sin = np.linalg.norm(np.cross(u[i], u[j]), axis=1)
    cos = np.einsum("ij,ij->i", u[i], u[j])
    return np.sort(np.degrees(np.arctan2(sin, cos)))


def _build(name: str, k: int, standard: bool, dirs: list[list[float]]) -> ReferenceGeometry:
    d = np.asarray(dirs, dtype=float)
    d = d / np.linalg.norm(d, axis=1, keepdims=True)
    d.flags.writeable = False
    spec = spectrum_of(d)
    spec.flags.writeable = False
    return ReferenceGeometry(name, k, d, spec, standard)


_GEOMETRIES = {
    k: [_build(name, k, std, dirs) for name, std, dirs in entries]
    for k, entries in _CATALOGUE.items()
}

SUPPORTED_K = tuple(sorted(_GEOMETRIES))


def reference_geometry(k: int) -> list[ReferenceGeometry]:
    """Standard geometry for ``k`` peripherals followed by any alternatives."""
    if k not in _GEOMETRIES:
        raise UnsupportedKError(f"no reference geometry for k={k}; supported {SUPPORTED_K}")
    return list(_GEOMETRIES[k])


def standard_geometry(k: int) -> ReferenceGeometry:
    return reference_geometry(k)[0]


def peripheral_directions(state: SwarmState) -> np.ndarray:
    offsets = state.positions[~state.central] - state.central_position
    norms = np.linalg.norm(offsets, axis=1)
    if (norms == 0).any():
        raise DegenerateDirectionError("peripheral drone coincides with the central drone")
    return offsets / norms[:, None]


def angle_spectrum(state: SwarmState) -> np.ndarray:
    if state.n_peripheral < 2:
        raise DegenerateSwarmError("need at least two peripheral drones")
    return spectrum_of(peripheral_directions(state))


def rms_spectrum_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.mean((np.asarray(a) - np.asarray(b)) ** 2)))


def classify_geometry(
    state: SwarmState, candidates: Sequence[ReferenceGeometry] | None = None
) -> ClassificationResult:
    """Closest reference geometry by RMS difference of sorted angle spectra."""
    if candidates is None:
        candidates = reference_geometry(state.n_peripheral)
    if not candidates:
        raise ParameterError("no candidate geometries")
    if any(c.k != state.n_peripheral for c in candidates):
        raise ParameterError("candidate k does not match the swarm's peripheral count")
    spec = angle_spectrum(state)
    scored = sorted(
        ((rms_spectrum_error(spec, c.angle_spectrum), not c.standard, c.name) for c in candidates),
    )
    best = scored[0]
    if len(scored) > 1:
        return ClassificationResult(best[2], best[0], scored[1][2], scored[1][0])
    return ClassificationResult(best[2], best[0], None, math.inf)


def radial_uniformity(state: SwarmState) -> float:
    """Max over min peripheral distance to the central drone."""
    dist = state.central_distances()[~state.central]
    if dist.min() == 0:
        return math.inf
    return float(dist.max() / dist.min())


def placement(k: int, distance: float) -> SwarmState:
    """Central drone at the origin and ``k`` peripherals on the standard geometry."""
    if distance < 0:
        raise ParameterError("distance must be >= 0")
    dirs = standard_geometry(k).directions
    n = k + 1
    positions = np.zeros((n, 3))
    positions[1:] = distance * dirs
    central = np.zeros(n, dtype=bool)
    central[0] = True
    return SwarmState(0, np.arange(n), central, positions, np.zeros((n, 3)))


def baseline_coverage(
    k: int,
    distance: float,
    c_obs: float,
    samples: int = 1_000_000,
    seed: int = 0,
    include_central: bool = True,
) -> CoverageEstimate:
    """Coverage of drones placed exactly on the standard geometry."""
    return swarm_coverage(placement(k, distance), c_obs, samples, seed, include_central)


def reference_table() -> str:
    """Plain-text CSV of every encoded geometry's unit directions."""
    lines = ["name,k,standard,index,x,y,z"]
    for k in SUPPORTED_K:
        for g in _GEOMETRIES[k]:
            for i, (x, y, z) in enumerate(g.directions):
                lines.append(f"{g.name},{k},{int(g.standard)},{i},{x:.12f},{y:.12f},{z:.12f}")
    return "\n".join(lines) + "\n"
