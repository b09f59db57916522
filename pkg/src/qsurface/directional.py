"""Direction/length representation of observations and sampled quantile surfaces.

A quantile surface (QS) is stored as radii over a fixed grid of unit
directions around the point estimate. In two dimensions the sampled surface
is a polygon, so its area is exact via the shoelace formula; for higher
dimensions only a Monte Carlo volume is available.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numkit import InvalidParameterError, Rng


class DegenerateObservationError(ValueError):
    """The observation coincides with the point estimate, so it has no direction."""


class UnsupportedDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class DirectionalObservation:
    direction: np.ndarray
    length: float


@dataclass
class QuantileSurfaceForecast:
    """Radii (levels x directions) of one forecast around ``origin``."""

    origin: np.ndarray
    levels: np.ndarray
    directions: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.levels = np.asarray(self.levels, dtype=float)
        self.directions = np.asarray(self.directions, dtype=float)
        self.radii = np.asarray(self.radii, dtype=float)
        check_levels(self.levels)
        if self.radii.shape != (len(self.levels), len(self.directions)):
            raise ValueError(
                f"radii shape {self.radii.shape} does not match "
                f"{len(self.levels)} levels x {len(self.directions)} directions"
            )
        if np.any(self.radii < 0):
            raise ValueError("radii must be nonnegative")
        if np.any(np.diff(self.radii, axis=0) < 0):
            raise ValueError("radii cross between levels")

    @property
    def dimension(self) -> int:
        return self.origin.shape[0]

    def vertices(self, level_index: int) -> np.ndarray:
        return self.origin + self.radii[level_index][:, None] * self.directions


def check_levels(levels) -> np.ndarray:
    levels = np.asarray(levels, dtype=float)
    if levels.ndim != 1 or levels.size == 0:
        raise InvalidParameterError("levels must be a nonempty 1-D sequence")
    if np.any((levels <= 0) | (levels >= 1)):
        raise InvalidParameterError("levels must lie in (0, 1)")
    if np.any(np.diff(levels) <= 0):
        raise InvalidParameterError("levels must be strictly ascending")
    return levels


def forecast_adjust(observation, point_estimate) -> np.ndarray:
    o = np.asarray(observation, dtype=float)
    y = np.asarray(point_estimate, dtype=float)
    if o.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {o.shape} vs {y.shape}")
    return o - y


def decompose(adjusted) -> DirectionalObservation:
    v = np.asarray(adjusted, dtype=float)
    length = float(np.linalg.norm(v))
    if length == 0.0:
        raise DegenerateObservationError("zero-length adjusted observation has no direction")
    return DirectionalObservation(v / length, length)


def decompose_many(adjusted) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`decompose` over rows; zero rows get a NaN direction and length 0."""
    v = np.asarray(adjusted, dtype=float)
    lengths = np.linalg.norm(v, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        directions = v / lengths[:, None]
    return directions, lengths


def direction_grid(count: int, dimension: int = 2) -> np.ndarray:
    """``count`` unit vectors counterclockwise from the first axis."""
    if dimension != 2:
        raise UnsupportedDimensionError("direction grids are only defined for 2-D targets")
    if count < 3:
        raise InvalidParameterError("need at least 3 directions to span a polygon")
    angles = 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(angles), np.sin(angles)])


def contains(surface: QuantileSurfaceForecast, level_index: int, observation,
             radius_at: Callable[[np.ndarray, int], float]) -> bool:
    """Whether ``observation`` lies in the level's surface.

    ``radius_at(direction, level_index)`` evaluates the forecasting model at
    the observation's own direction. The boundary counts as inside, and an
    observation sitting on the origin is always inside.
    """
    if not 0 <= level_index < len(surface.levels):
        raise IndexError(f"level index {level_index} out of range")
    adjusted = forecast_adjust(observation, surface.origin)
    try:
        obs = decompose(adjusted)
    except DegenerateObservationError:
        return True
    return bool(obs.length <= radius_at(obs.direction, level_index))


def shoelace_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def polygon_area(surface: QuantileSurfaceForecast, level_index: int) -> float:
    if surface.dimension != 2:
        raise UnsupportedDimensionError("exact area only for 2-D surfaces; use monte_carlo_volume")
    if len(surface.directions) < 3:
        raise InvalidParameterError("need at least 3 directions")
    return shoelace_area(surface.vertices(level_index))


def polygon_areas(radii, directions) -> np.ndarray:
    """Shoelace areas for many star polygons sharing one direction grid.

    ``radii`` has shape (..., D); the origin offset does not change the area.
    """
    r = np.asarray(radii, dtype=float)
    d = np.asarray(directions, dtype=float)
    # cross(u_j, u_{j+1}) is shared by every polygon on the grid
    cross = d[:, 0] * np.roll(d[:, 1], -1) - np.roll(d[:, 0], -1) * d[:, 1]
    return 0.5 * np.abs(np.sum(r * np.roll(r, -1, axis=-1) * cross, axis=-1))


def monte_carlo_volume(member: Callable[[np.ndarray], np.ndarray], low, high,
                       samples: int, rng: Rng) -> float:
    """Box volume times the fraction of uniform box samples accepted by ``member``.

    ``member`` maps an (n, K) array of points to a boolean array of length n.
    """
    low = np.asarray(low, dtype=float)
    high = np.asarray(high, dtype=float)
    if samples < 1:
        raise InvalidParameterError("samples must be >= 1")
    if low.shape != high.shape or np.any(high <= low):
        raise InvalidParameterError("degenerate bounding box")
    points = rng.uniform(low, high, size=(samples, low.shape[0]))
    inside = np.asarray(member(points), dtype=bool)
    return float(np.prod(high - low)) * float(np.count_nonzero(inside)) / samples


def star_member(origin, directions, radii) -> Callable[[np.ndarray], np.ndarray]:
    """Membership predicate for a 2-D star polygon given by radii on a direction grid.

    Points are located in their angular wedge and compared with the polygon
    edge, so the predicate describes exactly the region measured by the
    shoelace formula.
    """
    origin = np.asarray(origin, dtype=float)
    directions = np.asarray(directions, dtype=float)
    radii = np.asarray(radii, dtype=float)
    angles = np.mod(np.arctan2(directions[:, 1], directions[:, 0]), 2 * np.pi)
    order = np.argsort(angles)
    angles, directions, radii = angles[order], directions[order], radii[order]
    verts = radii[:, None] * directions

    def member(points):
        p = np.asarray(points, dtype=float) - origin
        theta = np.mod(np.arctan2(p[:, 1], p[:, 0]), 2 * np.pi)
        j = np.searchsorted(angles, theta, side="right") - 1
        j = np.mod(j, len(angles))
        a = verts[j]
        b = verts[np.mod(j + 1, len(angles))]
        # inside iff p is on the origin side of edge a->b
        edge = (b[:, 0] - a[:, 0]) * (p[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (p[:, 0] - a[:, 0])
        return edge >= 0

    return member
