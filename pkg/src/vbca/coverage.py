"""Volume coverage of a swarm's sensing spheres.

The union volume is estimated by uniform sampling over the tight bounding box
of all spheres. Samples are drawn in fixed-size chunks, each from its own
generator seeded with ``(seed, chunk_index)``, so the estimate is identical
however the chunks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .model import SwarmState

CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class CoverageEstimate:
    volume: float  # m^3
    std_error: float  # m^3
    samples: int
    bounding_box: tuple[tuple[float, float, float], tuple[float, float, float]]

    @property
    def box_volume(self) -> float:
        lo, hi = np.asarray(self.bounding_box[0]), np.asarray(self.bounding_box[1])
        return float(np.prod(hi - lo))

    def to_dict(self) -> dict:
        return {
            "volume": self.volume,
            "std_error": self.std_error,
            "samples": self.samples,
            "bounding_box": [list(self.bounding_box[0]), list(self.bounding_box[1])],
        }


def sphere_volume(radius: float) -> float:
    return 4.0 / 3.0 * math.pi * radius**3


def max_volume(observation_ranges: Sequence[float]) -> float:
    """Sum of the full sphere volumes, ignoring any overlap."""
    ranges = list(observation_ranges)
    if not ranges:
        raise ParameterError("at least one observation range is required")
    if any(not r > 0 for r in ranges):
        raise ParameterError("observation ranges must be > 0")
    return sum(sphere_volume(r) for r in ranges)


def two_sphere_union_exact(r1: float, r2: float, d: float) -> float:
    """Exact volume of the union of two spheres whose centres are ``d`` apart."""
    if not (r1 > 0 and r2 > 0):
        raise ParameterError("radii must be > 0")
    if d < 0:
        raise ParameterError("distance must be >= 0")
    v1, v2 = sphere_volume(r1), sphere_volume(r2)
    if d >= r1 + r2:
        return v1 + v2
    if d <= abs(r1 - r2):
        return max(v1, v2)
    lens = (
        math.pi
        * (r1 + r2 - d) ** 2
        * (d * d + 2 * d * (r1 + r2) - 3 * (r1 - r2) ** 2)
        / (12 * d)
    )
    return v1 + v2 - lens


def _chunk_hits(
    index: int, size: int, seed: int, lo: np.ndarray, span: np.ndarray,
    centers: np.ndarray, radii_sq: np.ndarray,
) -> int:
    rng = np.random.default_rng([seed, index])
    pts = lo + span * rng.random((size, 3))
    hit = np.zeros(size, dtype=bool)
    for c, r2 in zip(centers, radii_sq):
        d = pts - c
        hit |= np.einsum("ij,ij->i", d, d) <= r2
    return int(hit.sum())


def union_volume_mc(
    centers: Sequence[Sequence[float]],
    radii: Sequence[float],
    samples: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
) -> CoverageEstimate:
    centers = np.asarray(centers, dtype=float).reshape(-1, 3)
    radii = np.asarray(radii, dtype=float).ravel()
    if len(centers) == 0 or len(centers) != len(radii):
        raise ParameterError("centers and radii must be non-empty and of equal length")
    if (radii <= 0).any():
        raise ParameterError("radii must be > 0")
    if samples < 1000:
        raise ParameterError("at least 1000 samples are required")

    lo = (centers - radii[:, None]).min(axis=0)
    hi = (centers + radii[:, None]).max(axis=0)
    span = hi - lo
    box = float(np.prod(span))

    sizes = [CHUNK_SIZE] * (samples // CHUNK_SIZE)
    if samples % CHUNK_SIZE:
        sizes.append(samples % CHUNK_SIZE)
    radii_sq = radii * radii
    args = [(i, n, seed, lo, span, centers, radii_sq) for i, n in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            hits = sum(pool.map(lambda a: _chunk_hits(*a), args))
    else:
        hits = sum(_chunk_hits(*a) for a in args)

    p = hits / samples
    return CoverageEstimate(
        volume=box * p,
        std_error=box * math.sqrt(p * (1.0 - p) / samples),
        samples=samples,
        bounding_box=(tuple(map(float, lo)), tuple(map(float, hi))),
    )


def swarm_coverage(
    state: SwarmState,
    c_obs: float,
    samples: int = 1_000_000,
    seed: int = 0,
    include_central: bool = True,
) -> CoverageEstimate:
    """Union of equal sensing spheres centred on the drones."""
    if not c_obs > 0:
        raise ParameterError("c_obs must be > 0")
    centers = state.positions if include_central else state.positions[~state.central]
    return union_volume_mc(centers, [c_obs] * len(centers), samples, seed)
