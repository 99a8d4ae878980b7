"""Two-layer multi-point 2-D data embeddings.

Projects each data instance onto one or two points of a 2-D visual space
split into a red (more reliable) and a gray (less reliable) layer, using a
four-phase force-directed layout over a directed nearest-neighbour graph
with pressure-guided vertex duplication, plus a layered KNN accuracy measure
and static SVG rendering.
"""

from .dataio import file_checksum, load_dataset, load_labels
from .distances import (
    DistanceModel,
    NeighbourhoodGraph,
    build_distance_model,
    build_neighbourhood_graph,
    compute_normalizers,
    compute_raw_distances,
    transform_distances,
)
from .document import DocumentPoint, EmbeddingDocument, document_from_state, query_rect
from .errors import (
    DegenerateInputError,
    EvaluationError,
    InvalidInputError,
    ParseError,
    RedGrayError,
)
from .evaluation import LambdaSpec, lambda_measure, lambda_measure_points
from .forces import (
    ForceRecord,
    attractive_pass,
    clamp_to_frame,
    repulsive_pass,
    temperature_for,
)
from .model import (
    DataSet,
    EmbeddingState,
    Frame,
    Layer,
    ProjectedPoint,
    RunConfig,
    init_random_embedding,
    optimal_distance,
)
from .phases import RunTrace, Snapshot, run
from .render import render_svg
from .splitting import (
    DuplicationOutcome,
    PressureResult,
    duplicate_point,
    duplication_direction,
    replication_pressure,
    select_gray_budget,
)

__all__ = [
    "DataSet",
    "RunConfig",
    "Layer",
    "ProjectedPoint",
    "EmbeddingState",
    "Frame",
    "init_random_embedding",
    "optimal_distance",
    "DistanceModel",
    "NeighbourhoodGraph",
    "compute_raw_distances",
    "compute_normalizers",
    "transform_distances",
    "build_neighbourhood_graph",
    "build_distance_model",
    "ForceRecord",
    "temperature_for",
    "clamp_to_frame",
    "repulsive_pass",
    "attractive_pass",
    "PressureResult",
    "DuplicationOutcome",
    "replication_pressure",
    "duplication_direction",
    "select_gray_budget",
    "duplicate_point",
    "run",
    "RunTrace",
    "Snapshot",
    "LambdaSpec",
    "lambda_measure",
    "lambda_measure_points",
    "EmbeddingDocument",
    "DocumentPoint",
    "document_from_state",
    "query_rect",
    "load_dataset",
    "load_labels",
    "file_checksum",
    "render_svg",
    "RedGrayError",
    "InvalidInputError",
    "DegenerateInputError",
    "ParseError",
    "EvaluationError",
]

__version__ = "0.1.0"
