import math

import numpy as np
import pytest

from redgray import (
    DataSet,
    DegenerateInputError,
    InvalidInputError,
    build_neighbourhood_graph,
    compute_normalizers,
    compute_raw_distances,
    transform_distances,
)
from redgray.distances import kth_neighbour_distances


def bisect_normalizer(d_z):
    """Solve atan(d_z * m) = 1 for m without the closed form."""
    lo, hi = 0.0, 1.0
    while math.atan(d_z * hi) < 1.0:
        hi *= 2.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if math.atan(d_z * mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def test_euclidean_345():
    data = DataSet.from_vectors([[0.0, 0.0], [3.0, 4.0]])
    raw = compute_raw_distances(data, "euclidean")
    assert raw[0, 1] == 5.0 and raw[1, 0] == 5.0
    assert raw[0, 0] == 0.0 and raw[1, 1] == 0.0


def test_cosine_identical_rows_are_exactly_zero():
    data = DataSet.from_vectors([[2.0, 1.0], [2.0, 1.0], [0.0, 5.0]])
    raw = compute_raw_distances(data, "cosine")
    assert raw[0, 1] == 0.0


def test_cosine_orthogonal_unit_vectors():
    data = DataSet.from_vectors([[1.0, 0.0], [0.0, 1.0]])
    raw = compute_raw_distances(data, "cosine")
    assert raw[0, 1] == 1.0


def test_cosine_zero_vector_rejected():
    data = DataSet.from_vectors([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(InvalidInputError):
        compute_raw_distances(data, "cosine")


def test_cosine_never_negative():
    rng = np.random.default_rng(0)
    data = DataSet.from_vectors(rng.normal(size=(30, 6)))
    raw = compute_raw_distances(data, "cosine")
    assert np.all(raw >= 0.0)
    assert np.all(raw <= 2.0 + 1e-12)


def test_precomputed_passthrough_and_diagonal():
    m = np.array([[0.0, 2.0], [3.0, 0.0]])
    data = DataSet.from_distance_matrix(m)
    raw = compute_raw_distances(data, "precomputed")
    assert np.array_equal(raw, m)
    raw[0, 1] = 99.0
    assert data.precomputed_distances[0, 1] == 2.0  # copy, not alias


def test_precomputed_wins_over_vectors():
    data = DataSet(
        instances=np.array([[0.0], [3.0]]),
        precomputed_distances=np.array([[0.0, 7.0], [7.0, 0.0]]),
    )
    raw = compute_raw_distances(data, "euclidean")
    assert raw[0, 1] == 7.0


def test_precomputed_requires_matrix():
    data = DataSet.from_vectors([[0.0], [1.0]])
    with pytest.raises(InvalidInputError):
        compute_raw_distances(data, "precomputed")


def test_kth_neighbour_excludes_self():
    raw = np.array(
        [[0.0, 1.0, 4.0], [1.0, 0.0, 2.0], [4.0, 2.0, 0.0]]
    )
    assert np.array_equal(kth_neighbour_distances(raw, 1), [1.0, 1.0, 2.0])
    assert np.array_equal(kth_neighbour_distances(raw, 2), [4.0, 2.0, 4.0])


def test_normalizer_unity_when_kth_distance_is_tan_one():
    t = math.tan(1.0)
    raw = np.array([[0.0, t, 9.0], [t, 0.0, 9.0], [9.0, 9.0, 0.0]])
    m = compute_normalizers(raw, 1)
    assert m[0] == pytest.approx(1.0, abs=1e-15)
    assert m[1] == pytest.approx(1.0, abs=1e-15)


def test_normalizer_matches_root_finding():
    rng = np.random.default_rng(1)
    for d_z in rng.uniform(0.01, 50.0, size=25):
        closed = math.tan(1.0) / d_z
        numeric = bisect_normalizer(d_z)
        assert closed == pytest.approx(numeric, rel=1e-12)


def test_normalizer_halves_when_distance_doubles():
    raw = np.array([[0.0, 2.0], [2.0, 0.0]])
    doubled = 2.0 * raw
    m1 = compute_normalizers(raw, 1)
    m2 = compute_normalizers(doubled, 1)
    assert np.allclose(m2, m1 / 2.0, rtol=0, atol=0)


def test_normalizer_property_atan_is_one():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(4, 12))
        pts = rng.normal(size=(n, 3))
        raw = compute_raw_distances(DataSet.from_vectors(pts), "euclidean")
        z = int(rng.integers(1, n))
        m = compute_normalizers(raw, z)
        d_z = kth_neighbour_distances(raw, z)
        assert np.max(np.abs(np.arctan(d_z * m) - 1.0)) < 1e-12


def test_normalizer_zero_kth_distance_names_instance():
    raw = np.zeros((3, 3))
    raw[0, 2] = raw[2, 0] = 5.0
    raw[1, 2] = raw[2, 1] = 5.0
    # instances 0 and 1 are coincident
    with pytest.raises(DegenerateInputError, match="instance 0"):
        compute_normalizers(raw, 1)


def test_transform_zero_stays_zero():
    raw = np.array([[0.0, 1.0], [1.0, 0.0]])
    t, _ = transform_distances(raw, compute_normalizers(raw, 1))
    assert t[0, 0] == 0.0 and t[1, 1] == 0.0


def test_transform_is_one_at_neighbourhood_scale():
    # raw(i, j) equal to both endpoints' z-th neighbour distance gives delta = 1
    raw = np.array([[0.0, 3.0, 9.0], [3.0, 0.0, 9.0], [9.0, 9.0, 0.0]])
    m = compute_normalizers(raw, 1)
    t, _ = transform_distances(raw, m)
    assert t[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_transform_limit_is_half_pi():
    # two tight pairs far apart: both normalizers come from the tight side,
    # so the cross distance drives both arctangent terms toward pi/2
    raw = np.array(
        [
            [0.0, 1.0, 1e14, 1e14],
            [1.0, 0.0, 1e14, 1e14],
            [1e14, 1e14, 0.0, 1.0],
            [1e14, 1e14, 1.0, 0.0],
        ]
    )
    t, t_max = transform_distances(raw, compute_normalizers(raw, 1))
    assert t[0, 2] < math.pi / 2
    assert t[0, 2] == pytest.approx(math.pi / 2, abs=1e-9)
    assert t_max == t.max()


def test_transform_monotone_in_raw_entry():
    rng = np.random.default_rng(3)
    m = rng.uniform(0.1, 3.0, size=2)
    values = np.sort(rng.uniform(0.01, 20.0, size=30))
    deltas = [
        0.5 * (math.atan(v * m[0]) + math.atan(v * m[1])) for v in values
    ]
    assert all(a < b for a, b in zip(deltas, deltas[1:]))


def test_transform_preserves_symmetry():
    rng = np.random.default_rng(4)
    pts = rng.normal(size=(20, 4))
    raw = compute_raw_distances(DataSet.from_vectors(pts), "euclidean")
    t, _ = transform_distances(raw, compute_normalizers(raw, 5))
    assert np.max(np.abs(t - t.T)) < 1e-12


def test_transform_damps_asymmetry():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = 8
        raw = rng.uniform(0.5, 10.0, size=(n, n))
        np.fill_diagonal(raw, 0.0)
        t, _ = transform_distances(raw, compute_normalizers(raw, 3))
        for i in range(n):
            for j in range(i + 1, n):
                if raw[i, j] + raw[j, i] == 0.0:
                    continue
                rel_raw = abs(raw[i, j] - raw[j, i]) / (raw[i, j] + raw[j, i])
                rel_t = abs(t[i, j] - t[j, i]) / (t[i, j] + t[j, i])
                assert rel_t <= rel_raw + 1e-12


def test_graph_collinear_brute_force():
    raw = compute_raw_distances(
        DataSet.from_vectors([[0.0], [1.0], [10.0]]), "euclidean"
    )
    m = compute_normalizers(raw, 1)
    t, _ = transform_distances(raw, m)
    graph = build_neighbourhood_graph(t, 1)
    # brute-force nearest under the transform
    for i in range(3):
        expected = min(
            (j for j in range(3) if j != i),
            key=lambda j: (0.5 * (math.atan(raw[i, j] * m[i]) + math.atan(raw[i, j] * m[j])), j),
        )
        assert graph.out_neighbours[i] == [expected]
    assert graph.out_neighbours[0] == [1]
    assert graph.out_neighbours[1] == [0]
    assert graph.out_neighbours[2] == [1]


def test_graph_complete_at_max_p_hat():
    rng = np.random.default_rng(6)
    raw = compute_raw_distances(DataSet.from_vectors(rng.normal(size=(6, 2))), "euclidean")
    t, _ = transform_distances(raw, compute_normalizers(raw, 2))
    graph = build_neighbourhood_graph(t, 5)
    for i in range(6):
        assert sorted(graph.out_neighbours[i]) == [j for j in range(6) if j != i]


def test_graph_tie_break_prefers_lower_index():
    # equilateral triangle: every pair at the same distance
    raw = np.full((3, 3), 2.0)
    np.fill_diagonal(raw, 0.0)
    t, _ = transform_distances(raw, compute_normalizers(raw, 1))
    graph = build_neighbourhood_graph(t, 1)
    assert graph.out_neighbours == [[1], [0], [0]]


def test_graph_out_degree_is_p_hat():
    rng = np.random.default_rng(7)
    raw = compute_raw_distances(DataSet.from_vectors(rng.normal(size=(15, 3))), "euclidean")
    t, _ = transform_distances(raw, compute_normalizers(raw, 4))
    for p_hat in (1, 4, 9):
        graph = build_neighbourhood_graph(t, p_hat)
        assert all(len(nbrs) == p_hat for nbrs in graph.out_neighbours)
        assert all(i not in nbrs for i, nbrs in enumerate(graph.out_neighbours))


def test_graph_rejects_bad_p_hat():
    t = np.zeros((4, 4))
    with pytest.raises(InvalidInputError):
        build_neighbourhood_graph(t, 4)
