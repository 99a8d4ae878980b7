"""Domain types for layered multi-point embeddings and the initial random layout.

A run embeds n data instances into a 2-D visual space. Each instance owns one
or two projected points; every point carries a layer tag (red = more reliable,
gray = less reliable), a mass used when applying attractive forces, and two
activity flags:

* frozen      -- the point does not move but may still exert forces,
* ineffective -- the point neither moves nor exerts forces (implies frozen).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import InvalidInputError


class Layer(Enum):
    RED = "red"
    GRAY = "gray"


METRICS = ("euclidean", "cosine", "precomputed")
MODES = ("faithful", "aggregate")


@dataclass
class DataSet:
    """Input instances: raw vectors, a precomputed distance matrix, or both.

    When both are present the precomputed matrix wins for distance
    computation. The matrix must be n x n with a zero diagonal and
    non-negative entries; symmetry is not required.
    """

    instances: Optional[np.ndarray] = None
    precomputed_distances: Optional[np.ndarray] = None
    labels: Optional[list[str]] = None

    def __post_init__(self):
        if self.instances is None and self.precomputed_distances is None:
            raise InvalidInputError("a DataSet needs vectors or a distance matrix")
        if self.instances is not None:
            self.instances = np.asarray(self.instances, dtype=np.float64)
            if self.instances.ndim != 2:
                raise InvalidInputError("instance vectors must form a 2-D array")
        if self.precomputed_distances is not None:
            d = np.asarray(self.precomputed_distances, dtype=np.float64)
            if d.ndim != 2 or d.shape[0] != d.shape[1]:
                raise InvalidInputError("distance matrix must be square")
            if self.instances is not None and self.instances.shape[0] != d.shape[0]:
                raise InvalidInputError("vector count does not match distance matrix size")
            if np.any(np.diagonal(d) != 0.0):
                raise InvalidInputError("distance matrix diagonal must be zero")
            if np.any(d < 0.0):
                raise InvalidInputError("distance matrix entries must be non-negative")
            self.precomputed_distances = d
        if self.labels is not None:
            self.labels = [str(x) for x in self.labels]
            if len(self.labels) != self.n:
                raise InvalidInputError(
                    f"expected {self.n} labels, got {len(self.labels)}"
                )

    @property
    def n(self) -> int:
        if self.precomputed_distances is not None:
            return self.precomputed_distances.shape[0]
        return self.instances.shape[0]

    @classmethod
    def from_vectors(cls, vectors, labels=None) -> "DataSet":
        return cls(instances=np.asarray(vectors, dtype=np.float64), labels=labels)

    @classmethod
    def from_distance_matrix(cls, matrix, labels=None) -> "DataSet":
        return cls(precomputed_distances=np.asarray(matrix, dtype=np.float64), labels=labels)


@dataclass
class RunConfig:
    """All tunables of a run.

    b adjusts visual density (larger b weakens attraction growth with
    distance), p_hat is the out-degree of the neighbourhood graph, z the
    neighbourhood size of the distance transform, u_bar the maximum
    temperature. The four phase_iterations default to 500/450/390/490
    (1830 total).
    """

    p_hat: int = 20
    b: float = 0.9
    z: int = 20
    u_bar: float = 100.0
    width: float = 1000.0
    height: float = 1000.0
    phase_iterations: tuple[int, int, int, int] = (500, 450, 390, 490)
    frame_margin_fraction: float = 0.05
    metric: str = "euclidean"
    seed: int = 0
    gray_sigma_factor: float = 1.2
    gray_cap_fraction: float = 0.25
    axis_count: int = 36
    max_projections: int = 2
    parallel: bool = False
    workers: Optional[int] = None
    mode: str = "faithful"
    snapshot_every: int = 0

    def __post_init__(self):
        self.phase_iterations = tuple(int(v) for v in self.phase_iterations)
        if len(self.phase_iterations) != 4 or any(v <= 0 for v in self.phase_iterations):
            raise InvalidInputError("phase_iterations must be four positive integers")
        if self.metric not in METRICS:
            raise InvalidInputError(f"metric must be one of {METRICS}")
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {MODES}")
        if self.p_hat < 1:
            raise InvalidInputError("p_hat must be >= 1")
        if self.z < 1:
            raise InvalidInputError("z must be >= 1")
        if self.u_bar <= 0:
            raise InvalidInputError("u_bar must be positive")
        if self.width <= 0 or self.height <= 0:
            raise InvalidInputError("width and height must be positive")
        if self.frame_margin_fraction < 0:
            raise InvalidInputError("frame_margin_fraction must be >= 0")
        if self.axis_count < 1:
            raise InvalidInputError("axis_count must be >= 1")
        if self.max_projections < 1:
            raise InvalidInputError("max_projections must be >= 1")

    def validate_against(self, n: int):
        """Check size-dependent bounds once the instance count is known."""
        if not 1 <= self.p_hat <= n - 1:
            raise InvalidInputError(f"p_hat must be in [1, {n - 1}], got {self.p_hat}")
        if not 1 <= self.z <= n - 1:
            raise InvalidInputError(f"z must be in [1, {n - 1}], got {self.z}")


@dataclass(frozen=True)
class Frame:
    """Axis-aligned border rectangle; points are clamped onto it."""

    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def contains(self, xy) -> bool:
        return (
            self.min_x <= xy[0] <= self.max_x and self.min_y <= xy[1] <= self.max_y
        )


@dataclass
class ProjectedPoint:
    """One projection of a data instance in visual space.

    position is a length-2 float64 view into the owning state's position
    buffer, so kernels that mutate the buffer are visible here and vice
    versa.
    """

    instance_index: int
    position: np.ndarray
    layer: Layer = Layer.RED
    mass: float = 1.0
    frozen: bool = False
    ineffective: bool = False
    is_second_projection: bool = False


@dataclass
class EmbeddingState:
    """All projected points plus the run-wide layout constants.

    positions is the (P, 2) float64 buffer backing every point's position
    view; it is the array handed to the force kernels. gamma and dv_max are
    fixed for the whole run (dv_max is written exactly once, right after the
    initial random layout).
    """

    points: list[ProjectedPoint]
    projections_of: dict[int, list[int]]
    positions: np.ndarray
    frame: Optional[Frame] = None
    temperature: float = 0.0
    dv_max: float = 1.0
    gamma: float = 1.0
    phase: int = 1
    iteration_in_phase: int = 0

    @property
    def n(self) -> int:
        return len(self.projections_of)

    @property
    def point_count(self) -> int:
        return len(self.points)

    def add_projection(self, point: ProjectedPoint) -> int:
        """Append a point, growing the position buffer; returns its index."""
        new_positions = np.empty((len(self.points) + 1, 2), dtype=np.float64)
        new_positions[:-1] = self.positions
        new_positions[-1] = point.position
        self.positions = new_positions
        self.points.append(point)
        for idx, pt in enumerate(self.points):
            pt.position = self.positions[idx]
        index = len(self.points) - 1
        self.projections_of.setdefault(point.instance_index, []).append(index)
        return index

    def copy(self) -> "EmbeddingState":
        positions = self.positions.copy()
        points = [
            ProjectedPoint(
                instance_index=pt.instance_index,
                position=positions[idx],
                layer=pt.layer,
                mass=pt.mass,
                frozen=pt.frozen,
                ineffective=pt.ineffective,
                is_second_projection=pt.is_second_projection,
            )
            for idx, pt in enumerate(self.points)
        ]
        return EmbeddingState(
            points=points,
            projections_of={i: list(v) for i, v in self.projections_of.items()},
            positions=positions,
            frame=self.frame,
            temperature=self.temperature,
            dv_max=self.dv_max,
            gamma=self.gamma,
            phase=self.phase,
            iteration_in_phase=self.iteration_in_phase,
        )

    def validate(self, max_projections: int = 2):
        """Assert the structural invariants; raises AssertionError on violation."""
        seen = set()
        for inst, idxs in self.projections_of.items():
            assert 1 <= len(idxs) <= max_projections, f"instance {inst} has {len(idxs)} projections"
            if len(idxs) >= 2:
                for idx in idxs:
                    assert self.points[idx].layer is Layer.GRAY, (
                        f"instance {inst} has multiple projections but point {idx} is not gray"
                    )
            for idx in idxs:
                assert self.points[idx].instance_index == inst
                seen.add(idx)
        assert seen == set(range(len(self.points)))
        for idx, pt in enumerate(self.points):
            assert pt.mass > 0, f"point {idx} has non-positive mass"
            if pt.ineffective:
                assert pt.frozen, f"point {idx} is ineffective but not frozen"
            if pt.is_second_projection:
                assert pt.layer is Layer.GRAY
            if self.frame is not None:
                assert self.frame.contains(self.positions[idx]), (
                    f"point {idx} at {self.positions[idx]} escapes the frame"
                )


def optimal_distance(width: float, height: float, n: int) -> float:
    """Force-balance length scale: sqrt(width * height / n).

    n is the data instance count, not the (varying) projected point count.
    """
    if width <= 0 or height <= 0 or n <= 0:
        raise InvalidInputError("width, height and n must all be positive")
    return math.sqrt(width * height / n)


def max_pairwise_distance(positions: np.ndarray, block: int = 512) -> float:
    """Largest Euclidean distance between any two rows of positions."""
    positions = np.asarray(positions, dtype=np.float64)
    best = 0.0
    for start in range(0, positions.shape[0], block):
        chunk = positions[start : start + block]
        diff = chunk[:, None, :] - positions[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        best = max(best, float(d2.max()))
    return math.sqrt(best)


def init_random_embedding(data: DataSet, cfg: RunConfig) -> EmbeddingState:
    """Place one red projection per instance uniformly at random.

    Positions are drawn from the seeded generator over [0, width) x
    [0, height); dv_max is fixed here from this layout and never touched
    again.
    """
    n = data.n
    if n < 2:
        raise InvalidInputError("need at least 2 instances to embed")
    rng = np.random.default_rng(cfg.seed)
    positions = rng.random((n, 2), dtype=np.float64)
    positions[:, 0] *= cfg.width
    positions[:, 1] *= cfg.height
    points = [
        ProjectedPoint(instance_index=i, position=positions[i]) for i in range(n)
    ]
    return EmbeddingState(
        points=points,
        projections_of={i: [i] for i in range(n)},
        positions=positions,
        frame=None,
        temperature=0.0,
        dv_max=max_pairwise_distance(positions),
        gamma=optimal_distance(cfg.width, cfg.height, n),
        phase=1,
        iteration_in_phase=0,
    )
