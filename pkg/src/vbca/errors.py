"""Exception hierarchy shared by the simulator modules."""

from __future__ import annotations


class VBCAError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(VBCAError, ValueError):
    """Invalid parameter or configuration value."""


class DegenerateSwarmError(VBCAError, ValueError):
    """A swarm too small (or too collapsed) for the requested operation."""


class UnknownDroneError(VBCAError, KeyError):
    """Lookup of a drone id that is not present in the state."""


class StateMismatchError(VBCAError, ValueError):
    """Two states that were expected to describe the same swarm do not."""


class UnsupportedKError(VBCAError, ValueError):
    """No reference geometry is encoded for the requested peripheral count."""


class ConnectivityLossError(VBCAError):
    """A peripheral drone lost its link to the central drone."""

    def __init__(self, drone_id: int, step: int, distance: float | None = None):
        self.drone_id = drone_id
        self.step = step
        self.distance = distance
        msg = f"drone {drone_id} lost the central drone at step {step}"
        if distance is not None:
            msg += f" (distance {distance:.3f} m)"
        super().__init__(msg)
