"""Replication pressure over radial axes and vertex duplication surgery.

A point pulled strongly in opposing directions accumulates high replication
pressure: for each of 36 axes (10 degrees apart) through the point, all force
vectors on it are perpendicularly projected onto the axis; the summed
magnitudes of positive-side and negative-side projections are added, and the
point's pressure is the maximum over the axes. Duplication splits the point's
out-neighbours across the line perpendicular to the maximizing axis, parks
the new projection at the centroid of its share, and redistributes mass in
proportion to retained out-degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distances import NeighbourhoodGraph
from .errors import InvalidInputError
from .model import EmbeddingState, Layer, ProjectedPoint


@dataclass(frozen=True)
class PressureResult:
    """Maximum per-axis pressure and the (undirected) angle where it occurs."""

    pressure: float
    best_axis_angle: float  # radians in [0, pi)


class DuplicationOutcome(Enum):
    SUCCESS = "success"
    FAILED = "failed"  # surgery would leave one side without neighbours
    REJECTED = "rejected"  # instance already at the projection cap


def axis_directions(axis_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Nominal angles and unit direction vectors of the radial axis set.

    Axes sit at k * (360/axis_count) degrees. For an even count the second
    half is built as the exact negation of the first so that an axis and its
    opposite carry bitwise-equal pressure and the tie-break lands on the
    smaller angle.
    """
    if axis_count < 1:
        raise InvalidInputError("axis_count must be >= 1")
    step = 2.0 * math.pi / axis_count
    angles = np.arange(axis_count) * step
    if axis_count % 2 == 0:
        half = axis_count // 2
        first = np.stack([np.cos(angles[:half]), np.sin(angles[:half])], axis=1)
        dirs = np.concatenate([first, -first])
    else:
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return angles, dirs


def replication_pressure(forces, axis_count: int = 36) -> PressureResult:
    """Pressure of one point given the force vectors applied to it.

    Ties between equally pressured axes resolve to the smallest angle; with
    no forces the pressure is 0 at angle 0.
    """
    F = np.asarray(forces, dtype=np.float64)
    if F.size == 0:
        return PressureResult(0.0, 0.0)
    F = F.reshape(-1, 2)
    angles, dirs = axis_directions(axis_count)
    projections = F @ dirs.T
    per_axis = np.abs(projections).sum(axis=0)
    best = int(per_axis.argmax())  # argmax returns the first (smallest-angle) max
    return PressureResult(float(per_axis[best]), float(angles[best]))


def axis_pressures(forces, angle: float) -> tuple[float, float]:
    """Positive-side and negative-side pressure on the directed axis at angle."""
    F = np.asarray(forces, dtype=np.float64).reshape(-1, 2)
    if F.size == 0:
        return 0.0, 0.0
    proj = F @ np.array([math.cos(angle), math.sin(angle)])
    positive = float(proj[proj > 0.0].sum())
    negative = float(-proj[proj < 0.0].sum())
    return positive, negative


def duplication_direction(forces, best_axis_angle: float) -> float:
    """Orient the maximizing axis toward its stronger positive side.

    The half-plane that will feed the second projection lies on the strictly
    positive side of the returned direction; ties keep the axis angle itself.
    """
    positive, negative = axis_pressures(forces, best_axis_angle)
    if negative > positive:
        return best_axis_angle + math.pi
    return best_axis_angle


def select_gray_budget(pressures, n: int, sigma_factor: float = 1.2, cap_fraction: float = 0.25) -> int:
    """Maximum number of instances allowed into the gray layer.

    Counts points whose pressure falls strictly outside
    mean +- sigma_factor * (population) std, then caps that count at
    floor(n * cap_fraction) so the red layer keeps at least 75% of the
    instances under the defaults.
    """
    p = np.asarray(pressures, dtype=np.float64)
    mean = float(p.mean())
    sigma = float(p.std())
    low = mean - sigma_factor * sigma
    high = mean + sigma_factor * sigma
    outside = int(np.count_nonzero((p < low) | (p > high)))
    cap = int(math.floor(n * cap_fraction))
    return min(outside, cap)


def duplicate_point(
    state: EmbeddingState,
    graph: NeighbourhoodGraph,
    point: int,
    axis_angle: float,
    max_projections: int = 2,
) -> DuplicationOutcome:
    """Attempt to split one gray point into two projections.

    Surgery: (1) out-neighbours strictly on the positive side of the line
    through the point perpendicular to axis_angle move to the new second
    projection (boundary neighbours stay); (2) the second projection is
    placed at the centroid of its share; (3) remaining out-neighbours
    strictly closer to the second projection move over as well. Masses are
    rescaled by the retained out-degree fractions c2/c1 and c3/c1. If either
    side would end up with no neighbours the attempt fails and nothing -
    graph, positions, masses, layers - changes.
    """
    pt = state.points[point]
    if pt.layer is not Layer.GRAY:
        raise InvalidInputError("only gray-layer points can be duplicated")
    if len(state.projections_of[pt.instance_index]) >= max_projections:
        return DuplicationOutcome.REJECTED

    neighbours = graph.out_neighbours[point]
    c1 = len(neighbours)
    if c1 == 0:
        return DuplicationOutcome.FAILED
    direction = np.array([math.cos(axis_angle), math.sin(axis_angle)])
    origin = state.positions[point]

    second_share = []
    first_share = []
    for nb in neighbours:
        offset = state.positions[nb] - origin
        if float(offset @ direction) > 0.0:
            second_share.append(nb)
        else:
            first_share.append(nb)
    if not second_share or not first_share:
        return DuplicationOutcome.FAILED

    centroid = state.positions[second_share].mean(axis=0)

    kept = []
    for nb in first_share:
        to_second = state.positions[nb] - centroid
        to_first = state.positions[nb] - origin
        if float(to_second @ to_second) < float(to_first @ to_first):
            second_share.append(nb)
        else:
            kept.append(nb)
    if not kept:
        return DuplicationOutcome.FAILED

    c2 = len(kept)
    c3 = len(second_share)
    original_mass = pt.mass
    second = ProjectedPoint(
        instance_index=pt.instance_index,
        position=centroid.copy(),
        layer=Layer.GRAY,
        mass=original_mass * (c3 / c1),
        frozen=False,
        ineffective=False,
        is_second_projection=True,
    )
    new_index = state.add_projection(second)
    assert new_index == len(graph.out_neighbours)
    graph.out_neighbours[point] = kept
    graph.out_neighbours.append(second_share)
    pt.mass = original_mass * (c2 / c1)
    return DuplicationOutcome.SUCCESS
