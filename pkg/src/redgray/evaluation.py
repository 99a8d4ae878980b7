"""Layered KNN classification accuracy of a multi-point embedding.

For evaluation layers L and classification layers Lhat, the measure is the
fraction of instances owning at least one projection in L whose label wins
(or ties) the plurality vote of the k nearest Lhat-projections around any of
their L-projections. Projections of the queried instance itself never vote
for it (switchable; see lambda_measure).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EvaluationError, InvalidInputError
from .model import EmbeddingState, Layer


@dataclass(frozen=True)
class LambdaSpec:
    """Which layers are evaluated, which layers vote, and the vote size k."""

    evaluation_layers: frozenset
    classification_layers: frozenset
    k: int = 15

    def __post_init__(self):
        object.__setattr__(self, "evaluation_layers", frozenset(self.evaluation_layers))
        object.__setattr__(self, "classification_layers", frozenset(self.classification_layers))
        if not self.evaluation_layers or not self.classification_layers:
            raise InvalidInputError("evaluation and classification layers must be non-empty")
        for layer in self.evaluation_layers | self.classification_layers:
            if not isinstance(layer, Layer):
                raise InvalidInputError(f"not a layer: {layer!r}")
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")


def lambda_measure_points(
    positions: np.ndarray,
    instances: Sequence[int],
    layers: Sequence[Layer],
    labels: Sequence[str],
    spec: LambdaSpec,
    exclude_instance_duplicates: bool = True,
) -> float:
    """Measure on raw point arrays; see lambda_measure for semantics."""
    positions = np.asarray(positions, dtype=np.float64)
    instances = np.asarray(instances, dtype=np.int64)
    point_count = positions.shape[0]
    if len(layers) != point_count or instances.shape[0] != point_count:
        raise InvalidInputError("positions, instances and layers must align")
    labels = [str(x) for x in labels]

    eval_mask = np.fromiter(
        (layer in spec.evaluation_layers for layer in layers), np.bool_, point_count
    )
    class_mask = np.fromiter(
        (layer in spec.classification_layers for layer in layers), np.bool_, point_count
    )
    candidates = np.flatnonzero(class_mask)
    if candidates.size == 0:
        raise EvaluationError("no projection lies in the classification layers")

    evaluated = sorted(set(instances[eval_mask].tolist()))
    if not evaluated:
        raise EvaluationError("no instance has a projection in the evaluation layers")

    cand_instances = instances[candidates]
    cand_positions = positions[candidates]
    correct = 0
    for inst in evaluated:
        hit = False
        for p in np.flatnonzero(eval_mask & (instances == inst)):
            if exclude_instance_duplicates:
                keep = cand_instances != inst
            else:
                keep = candidates != p
            eligible = candidates[keep]
            if eligible.size < spec.k:
                raise EvaluationError(
                    f"projection of instance {inst} has only {eligible.size} eligible "
                    f"neighbours; use k <= {eligible.size}"
                )
            diff = cand_positions[keep] - positions[p]
            d2 = np.einsum("ij,ij->i", diff, diff)
            # nearest k by distance, ties at the cut going to the lower point index
            order = np.lexsort((eligible, d2))
            votes = Counter(labels[instances[q]] for q in eligible[order[: spec.k]])
            top = max(votes.values())
            if votes[labels[inst]] == top:
                hit = True
                break
        correct += hit
    return correct / len(evaluated)


def lambda_measure(
    embedding: EmbeddingState,
    labels: Sequence[str],
    spec: LambdaSpec,
    exclude_instance_duplicates: bool = True,
) -> float:
    """Layered KNN accuracy of an embedding, in [0, 1].

    An instance counts as correct when any of its evaluation-layer
    projections sees its own label among the plurality winners of the k
    nearest classification-layer projections. All projections of the queried
    instance are excluded from its neighbour sets by default; with
    exclude_instance_duplicates=False only the query projection itself is.
    """
    if labels is None or len(labels) != embedding.n:
        raise InvalidInputError("labels must cover every instance")
    return lambda_measure_points(
        embedding.positions,
        [pt.instance_index for pt in embedding.points],
        [pt.layer for pt in embedding.points],
        labels,
        spec,
        exclude_instance_duplicates,
    )
