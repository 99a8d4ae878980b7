from pathlib import Path

import pytest

from redgray import RunConfig, run
from redgray.dataio import load_dataset

DATA_DIR = Path(__file__).parent / "data"
IRIS_SEEDS = (0, 1, 2, 3, 4)


@pytest.fixture(scope="session")
def iris_dataset():
    return load_dataset(DATA_DIR / "iris.csv", "vectors", label_column=-1)


@pytest.fixture(scope="session")
def iris_runs(iris_dataset):
    """Five full default-length runs at the published IRIS settings.

    Shared by the reproduction and structural-invariant checks; snapshots
    every 50 iterations let the invariants be probed across phases 2-4.
    """
    runs = []
    for seed in IRIS_SEEDS:
        cfg = RunConfig(
            p_hat=20, b=-0.1, metric="euclidean", seed=seed, snapshot_every=50
        )
        runs.append((cfg, run(iris_dataset, cfg)))
    return runs
