"""Raw distances, the neighbourhood-normalized transform, and the kNN graph.

The transform maps each raw distance through two per-instance arctangent
normalizers and averages them:

    delta(i, j) = (atan(raw(i, j) * m_i) + atan(raw(i, j) * m_j)) / 2

where m_i is chosen so that atan(d_iz * m_i) = 1 for d_iz the raw distance
from instance i to its z-th nearest other instance. Both arctangent terms use
raw(i, j) (not raw(j, i)); a non-symmetric input therefore stays
non-symmetric, merely damped toward symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .model import DataSet

_ROW_BLOCK = 256


@dataclass
class DistanceModel:
    """Frozen distance data for one run."""

    raw: np.ndarray
    normalizers: np.ndarray
    transformed: np.ndarray
    delta_max: float


@dataclass
class NeighbourhoodGraph:
    """Directed graph over projected points: per-point ordered out-neighbour lists.

    Vertices are projected-point indices. Initially point i's list holds the
    p_hat instances nearest to instance i; duplication later appends vertices
    and moves edges between lists. Two opposite edges between the same pair
    are distinct edges.
    """

    out_neighbours: list[list[int]]

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.out_neighbours)

    def copy(self) -> "NeighbourhoodGraph":
        return NeighbourhoodGraph([list(nbrs) for nbrs in self.out_neighbours])


def _pairwise_euclidean(vectors: np.ndarray) -> np.ndarray:
    n = vectors.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    for start in range(0, n, _ROW_BLOCK):
        chunk = vectors[start : start + _ROW_BLOCK]
        diff = chunk[:, None, :] - vectors[None, :, :]
        out[start : start + _ROW_BLOCK] = np.sqrt(
            np.einsum("ijk,ijk->ij", diff, diff)
        )
    return out


def _pairwise_cosine(vectors: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->i", vectors, vectors))
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise InvalidInputError(
            f"cosine distance undefined for all-zero vector (instance {bad})"
        )
    unit = vectors / norms[:, None]
    # 1 - cos(u, v) == |u - v|^2 / 2 for unit vectors; this form is exact at 0
    # for identical rows and never goes negative.
    n = unit.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    for start in range(0, n, _ROW_BLOCK):
        chunk = unit[start : start + _ROW_BLOCK]
        diff = chunk[:, None, :] - unit[None, :, :]
        out[start : start + _ROW_BLOCK] = 0.5 * np.einsum("ijk,ijk->ij", diff, diff)
    return out


def compute_raw_distances(data: DataSet, metric: str) -> np.ndarray:
    """Raw n x n distances under the chosen metric, diagonal forced to zero."""
    if metric == "precomputed":
        if data.precomputed_distances is None:
            raise InvalidInputError("metric 'precomputed' needs a distance matrix")
        raw = data.precomputed_distances.copy()
        if np.any(raw < 0.0):
            raise InvalidInputError("precomputed distances must be non-negative")
    elif metric in ("euclidean", "cosine"):
        if data.precomputed_distances is not None:
            # Precomputed wins whenever it is present.
            raw = data.precomputed_distances.copy()
        else:
            if data.instances is None:
                raise InvalidInputError(f"metric '{metric}' needs instance vectors")
            if metric == "euclidean":
                raw = _pairwise_euclidean(data.instances)
            else:
                raw = _pairwise_cosine(data.instances)
    else:
        raise InvalidInputError(f"unknown metric '{metric}'")
    np.fill_diagonal(raw, 0.0)
    return raw


def kth_neighbour_distances(raw: np.ndarray, z: int) -> np.ndarray:
    """Distance from each instance to its z-th nearest other instance.

    Ties are broken toward the lower instance index (irrelevant for the
    distance value itself but fixed for reproducibility).
    """
    n = raw.shape[0]
    if not 1 <= z <= n - 1:
        raise InvalidInputError(f"z must be in [1, {n - 1}], got {z}")
    work = raw.copy()
    np.fill_diagonal(work, np.inf)
    # stable sort keeps equal distances in index order
    ordered = np.sort(work, axis=1, kind="stable")
    return ordered[:, z - 1]


def compute_normalizers(raw: np.ndarray, z: int) -> np.ndarray:
    """Per-instance normalizers m_i = tan(1) / d_iz.

    Closed form of atan(d_iz * m_i) = 1. Raises when some instance's z-th
    neighbour is coincident with it (d_iz = 0), which leaves m_i undefined.
    """
    d_z = kth_neighbour_distances(raw, z)
    if np.any(d_z == 0.0):
        bad = int(np.flatnonzero(d_z == 0.0)[0])
        raise DegenerateInputError(
            f"instance {bad} has a zero distance to its {z}-th nearest neighbour; "
            "the neighbourhood normalizer is undefined"
        )
    return math.tan(1.0) / d_z


def transform_distances(raw: np.ndarray, normalizers: np.ndarray) -> tuple[np.ndarray, float]:
    """Apply the neighbourhood-normalized transform; returns (matrix, max entry).

    Entries live in [0, pi/2). Symmetric input yields symmetric output; for
    non-symmetric input the (i, j) and (j, i) entries generally differ but
    are closer to each other than the raw pair was.
    """
    m = np.asarray(normalizers, dtype=np.float64)
    if np.any(m <= 0.0):
        raise InvalidInputError("normalizers must all be positive")
    transformed = 0.5 * (
        np.arctan(raw * m[:, None]) + np.arctan(raw * m[None, :])
    )
    return transformed, float(transformed.max())


def build_neighbourhood_graph(transformed: np.ndarray, p_hat: int) -> NeighbourhoodGraph:
    """Directed p_hat-nearest-neighbour graph under transformed distances.

    Point i gets out-edges to the p_hat other instances with smallest
    delta(i, j), ties broken toward the lower instance index. No
    symmetrization.
    """
    n = transformed.shape[0]
    if not 1 <= p_hat <= n - 1:
        raise InvalidInputError(f"p_hat must be in [1, {n - 1}], got {p_hat}")
    work = transformed.copy()
    np.fill_diagonal(work, np.inf)
    order = np.argsort(work, axis=1, kind="stable")
    return NeighbourhoodGraph([list(map(int, order[i, :p_hat])) for i in range(n)])


def build_distance_model(data: DataSet, metric: str, z: int) -> DistanceModel:
    """Run the two distance preliminaries for a data set."""
    raw = compute_raw_distances(data, metric)
    normalizers = compute_normalizers(raw, z)
    transformed, delta_max = transform_distances(raw, normalizers)
    return DistanceModel(
        raw=raw, normalizers=normalizers, transformed=transformed, delta_max=delta_max
    )
