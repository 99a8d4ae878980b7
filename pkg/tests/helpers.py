"""Independent brute-force oracles and state builders shared by the tests.

Everything here is deliberately written with plain Python loops and math
functions, separate from the package's vectorized code paths, so the tests
compare two independent routes to the same numbers.
"""

import math
from collections import Counter

import numpy as np

from redgray.distances import NeighbourhoodGraph
from redgray.model import EmbeddingState, Layer, ProjectedPoint


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def pressure_oracle(forces, axis_count=36):
    """Max over axes of (positive + negative) perpendicular projection sums."""
    best = 0.0
    step = 2.0 * math.pi / axis_count
    for k in range(axis_count):
        dx, dy = math.cos(k * step), math.sin(k * step)
        pos = 0.0
        neg = 0.0
        for fx, fy in forces:
            s = fx * dx + fy * dy
            if s > 0.0:
                pos += s
            elif s < 0.0:
                neg += -s
        best = max(best, pos + neg)
    return best


def knn_vote_oracle(positions, instances, layers, labels, eval_layers, class_layers, k,
                    exclude_instance=True):
    """Leave-instance-out layered KNN accuracy, plain loops throughout."""
    candidates = [p for p in range(len(positions)) if layers[p] in class_layers]
    queried = sorted({instances[p] for p in range(len(positions)) if layers[p] in eval_layers})
    correct = 0
    for inst in queried:
        hit = False
        for p in range(len(positions)):
            if instances[p] != inst or layers[p] not in eval_layers:
                continue
            if exclude_instance:
                eligible = [q for q in candidates if instances[q] != inst]
            else:
                eligible = [q for q in candidates if q != p]
            assert len(eligible) >= k, "oracle needs enough neighbours"
            ranked = sorted(
                eligible,
                key=lambda q: ((positions[q][0] - positions[p][0]) ** 2
                               + (positions[q][1] - positions[p][1]) ** 2, q),
            )
            votes = Counter(labels[instances[q]] for q in ranked[:k])
            top = max(votes.values())
            if votes[labels[inst]] == top:
                hit = True
                break
        correct += hit
    return correct / len(queried)


def plain_loo_knn_accuracy(positions, labels, k):
    """Ordinary leave-one-out KNN classification accuracy on 2-D points."""
    n = len(positions)
    correct = 0
    for i in range(n):
        ranked = sorted(
            (j for j in range(n) if j != i),
            key=lambda j: ((positions[j][0] - positions[i][0]) ** 2
                           + (positions[j][1] - positions[i][1]) ** 2, j),
        )
        votes = Counter(labels[j] for j in ranked[:k])
        top = max(votes.values())
        if votes[labels[i]] == top:
            correct += 1
    return correct / n


def surgery_oracle(positions, neighbours, point, axis_angle):
    """Expected duplication partition: (kept, moved, centroid) or None on failure."""
    dx, dy = math.cos(axis_angle), math.sin(axis_angle)
    px, py = positions[point]
    second = [nb for nb in neighbours
              if (positions[nb][0] - px) * dx + (positions[nb][1] - py) * dy > 0.0]
    first = [nb for nb in neighbours if nb not in second]
    if not second or not first:
        return None
    cx = sum(positions[nb][0] for nb in second) / len(second)
    cy = sum(positions[nb][1] for nb in second) / len(second)
    kept = []
    moved = []
    for nb in first:
        to_second = (positions[nb][0] - cx) ** 2 + (positions[nb][1] - cy) ** 2
        to_first = (positions[nb][0] - px) ** 2 + (positions[nb][1] - py) ** 2
        (moved if to_second < to_first else kept).append(nb)
    if not kept:
        return None
    return kept, second + moved, (cx, cy)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def make_state(positions, layers=None, frozen=None, ineffective=None, masses=None,
               gamma=10.0, dv_max=100.0, temperature=1.0, frame=None, seconds=None):
    """State with one projection per instance, point i owning instance i."""
    positions = np.array(positions, dtype=np.float64)
    count = positions.shape[0]
    layers = layers or [Layer.RED] * count
    frozen = frozen or [False] * count
    ineffective = ineffective or [False] * count
    masses = masses or [1.0] * count
    seconds = seconds or [False] * count
    points = [
        ProjectedPoint(
            instance_index=i,
            position=positions[i],
            layer=layers[i],
            mass=masses[i],
            frozen=frozen[i],
            ineffective=ineffective[i],
            is_second_projection=seconds[i],
        )
        for i in range(count)
    ]
    return EmbeddingState(
        points=points,
        projections_of={i: [i] for i in range(count)},
        positions=positions,
        frame=frame,
        temperature=temperature,
        dv_max=dv_max,
        gamma=gamma,
    )


def random_duplication_case(rng, min_points=6, max_points=16):
    """Random all-gray state, a graph and an axis angle for duplication tests."""
    count = int(rng.integers(min_points, max_points + 1))
    positions = rng.uniform(0.0, 100.0, size=(count, 2))
    state = make_state(positions, layers=[Layer.GRAY] * count)
    out = []
    for p in range(count):
        others = [q for q in range(count) if q != p]
        degree = int(rng.integers(1, len(others) + 1))
        chosen = rng.choice(others, size=degree, replace=False)
        out.append([int(q) for q in chosen])
    graph = NeighbourhoodGraph(out)
    point = int(rng.integers(0, count))
    angle = float(rng.uniform(0.0, 2.0 * math.pi))
    return state, graph, point, angle


def snapshot_for_comparison(state, graph):
    """Everything a failed duplication must leave untouched."""
    return (
        state.positions.copy(),
        [pt.mass for pt in state.points],
        [pt.layer for pt in state.points],
        [pt.frozen for pt in state.points],
        [pt.ineffective for pt in state.points],
        {i: list(v) for i, v in state.projections_of.items()},
        [list(nbrs) for nbrs in graph.out_neighbours],
    )


def half_moons_with_bridge(n_per_moon=45, n_bridge=10, noise=0.06, seed=99):
    """Two interleaved half-moons joined by a short bridge of ambiguous points.

    Bridge points take the label of the moon their end of the bridge touches,
    so their visual-space neighbourhoods mix labels.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, math.pi, n_per_moon)
    moon_a = np.stack([np.cos(t), np.sin(t)], axis=1)
    moon_b = np.stack([1.0 - np.cos(t), 0.5 - np.sin(t)], axis=1)
    s = np.linspace(0.15, 0.85, n_bridge)
    start = np.array([1.0, 0.0])   # right tip of moon a
    end = np.array([0.0, 0.5])     # left tip of moon b
    bridge = start[None, :] + s[:, None] * (end - start)[None, :]
    vectors = np.concatenate([moon_a, moon_b, bridge])
    vectors += rng.normal(scale=noise, size=vectors.shape)
    labels = (
        ["a"] * n_per_moon
        + ["b"] * n_per_moon
        + ["a" if v < 0.5 else "b" for v in s]
    )
    return vectors, labels
