"""Four-phase controller: orchestrates passes, layer transitions, duplication.

Phase 1 draws the graph freely (no frame). Phase 2 rings the layout with a
frame, then moves one highest-pressure point per iteration to the gray layer
(freezing it as ineffective) until a budget derived from the first
iteration's pressures is spent. Phase 3 reverses the freezing: gray points
become effective and mobile, red points freeze in place but keep exerting
forces. Phase 4 tries once to duplicate every gray point, then refines.
Every iteration runs one repulsive pass followed by one attractive pass.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .distances import DistanceModel, NeighbourhoodGraph, build_distance_model, build_neighbourhood_graph
from .evaluation import LambdaSpec, lambda_measure
from .forces import ForceRecord, attractive_pass, pass_salt, repulsive_pass, temperature_for
from .model import DataSet, EmbeddingState, Frame, Layer, RunConfig, init_random_embedding
from .splitting import (
    DuplicationOutcome,
    duplicate_point,
    duplication_direction,
    replication_pressure,
    select_gray_budget,
)

ProgressCallback = Callable[[int, int, float, int], None]


@dataclass
class Snapshot:
    iteration: int  # global iteration number, 1-based
    phase: int
    state: EmbeddingState


@dataclass
class RunTrace:
    """Outcome of a run: optional per-iteration snapshots plus the result.

    selected_result defaults to the final iteration's state; callers with
    labels may re-point it at the best snapshot via select_best_by_lambda.
    """

    snapshots: list[Snapshot] = field(default_factory=list)
    selected_result: Optional[EmbeddingState] = None

    def select_best_by_lambda(self, labels, spec: LambdaSpec) -> EmbeddingState:
        """Re-select the snapshot (or final state) with the highest measure."""
        candidates = [s.state for s in self.snapshots]
        if self.selected_result is not None and (
            not candidates or candidates[-1] is not self.selected_result
        ):
            candidates.append(self.selected_result)
        best = max(candidates, key=lambda st: lambda_measure(st, labels, spec))
        self.selected_result = best
        return best


def make_frame(state: EmbeddingState, margin_fraction: float) -> Frame:
    """Bounding box of the current layout, expanded per side by the fraction
    of each axis extent."""
    xs = state.positions[:, 0]
    ys = state.positions[:, 1]
    margin_x = (float(xs.max()) - float(xs.min())) * margin_fraction
    margin_y = (float(ys.max()) - float(ys.min())) * margin_fraction
    return Frame(
        min_x=float(xs.min()) - margin_x,
        min_y=float(ys.min()) - margin_y,
        max_x=float(xs.max()) + margin_x,
        max_y=float(ys.max()) + margin_y,
    )


def _point_pressures(record: ForceRecord, point_count: int, axis_count: int) -> np.ndarray:
    return np.array(
        [
            replication_pressure(record.forces_on(p), axis_count).pressure
            for p in range(point_count)
        ]
    )


def _mark_highest_pressure(state: EmbeddingState, pressures: np.ndarray) -> int:
    """Freeze the highest-pressure live point as ineffective and turn it gray."""
    candidates = [p for p in range(len(state.points)) if not state.points[p].ineffective]
    best = max(candidates, key=lambda p: (pressures[p], -p))
    pt = state.points[best]
    pt.ineffective = True
    pt.frozen = True
    pt.layer = Layer.GRAY
    return best


def _duplication_sweep(state: EmbeddingState, graph: NeighbourhoodGraph, record: ForceRecord, cfg: RunConfig) -> int:
    """Try to duplicate every gray point once, in ascending point order."""
    gray_points = [
        p for p in range(len(state.points)) if state.points[p].layer is Layer.GRAY
    ]
    successes = 0
    for p in gray_points:
        forces = record.forces_on(p)
        pressure = replication_pressure(forces, cfg.axis_count)
        angle = duplication_direction(forces, pressure.best_axis_angle)
        outcome = duplicate_point(state, graph, p, angle, cfg.max_projections)
        if outcome is DuplicationOutcome.SUCCESS:
            successes += 1
    return successes


def run(
    data: DataSet,
    cfg: RunConfig,
    progress: Optional[ProgressCallback] = None,
) -> RunTrace:
    """Execute the full pipeline and return its trace.

    progress, when given, is called once per iteration with
    (global_iteration, phase, temperature, point_count).
    """
    cfg.validate_against(data.n)
    distance_model = build_distance_model(data, cfg.metric, cfg.z)
    graph = build_neighbourhood_graph(distance_model.transformed, cfg.p_hat)
    state = init_random_embedding(data, cfg)

    executor = None
    if cfg.parallel:
        executor = ThreadPoolExecutor(max_workers=cfg.workers or os.cpu_count() or 1)
    try:
        trace = _run_phases(state, graph, distance_model, cfg, progress, executor)
    finally:
        if executor is not None:
            executor.shutdown()
    return trace


def _run_phases(
    state: EmbeddingState,
    graph: NeighbourhoodGraph,
    distance_model: DistanceModel,
    cfg: RunConfig,
    progress: Optional[ProgressCallback],
    executor,
) -> RunTrace:
    trace = RunTrace()
    n = state.n
    global_iteration = 0
    gray_budget: Optional[int] = None
    marked = 0

    for phase in (1, 2, 3, 4):
        state.phase = phase
        if phase == 2:
            # the frame appears here and stays until the end of the run
            state.frame = make_frame(state, cfg.frame_margin_fraction)
        elif phase == 3:
            for pt in state.points:
                if pt.layer is Layer.GRAY:
                    pt.ineffective = False
                    pt.frozen = False
                else:
                    pt.frozen = True

        for mu in range(cfg.phase_iterations[phase - 1]):
            state.iteration_in_phase = mu
            global_iteration += 1
            state.temperature = temperature_for(phase, mu, cfg.u_bar)

            if phase == 2:
                recording = mu == 0 or (gray_budget is not None and marked < gray_budget)
            else:
                recording = phase == 4 and mu == 0
            record = ForceRecord(len(state.points)) if recording else None

            repulsive_pass(
                state,
                mode=cfg.mode,
                record=record,
                executor=executor,
                salt=pass_salt(cfg.seed, global_iteration, 0),
            )
            attractive_pass(
                state,
                graph,
                distance_model,
                cfg.b,
                record=record,
                executor=executor,
                salt=pass_salt(cfg.seed, global_iteration, 1),
            )

            if phase == 2 and recording:
                pressures = _point_pressures(record, len(state.points), cfg.axis_count)
                if mu == 0:
                    gray_budget = select_gray_budget(
                        pressures, n, cfg.gray_sigma_factor, cfg.gray_cap_fraction
                    )
                if marked < gray_budget:
                    _mark_highest_pressure(state, pressures)
                    marked += 1
            elif phase == 4 and mu == 0:
                _duplication_sweep(state, graph, record, cfg)

            if progress is not None:
                progress(global_iteration, phase, state.temperature, len(state.points))
            if cfg.snapshot_every > 0 and global_iteration % cfg.snapshot_every == 0:
                trace.snapshots.append(Snapshot(global_iteration, phase, state.copy()))

        state.validate(cfg.max_projections)

    trace.selected_result = state
    return trace
