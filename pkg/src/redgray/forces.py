"""Per-iteration repulsive and attractive passes, temperature schedule, clamping.

Repulsion follows the classic pair law |f_r| = gamma^2 / D_v and treats every
pair of projected points with unit mass. Attraction acts along directed graph
edges with base magnitude psi = (D_v / gamma)^(1 - b), adjusted by a
distance-preservation term h = delta/delta_max - D_v/dv_max whose influence is
clamped to half of psi; the resulting force is divided by the moving point's
mass. Every accumulated move is capped at the iteration temperature and, when
a border frame exists, clamped onto it.

Two repulsive modes exist:

* "faithful"  -- a point moves once per (instance pair) step, i.e. repulsion
  from each other instance is applied immediately. Sequential by contract.
* "aggregate" -- all repulsion on a point is accumulated first and applied as
  one capped move. Work is split into fixed-size chunks whose results are
  combined in chunk order, so outputs are bitwise identical for any number of
  worker threads.

Hot loops are numba-compiled; positions are mutated in place in the state's
(P, 2) float64 buffer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .distances import DistanceModel, NeighbourhoodGraph
from .errors import InvalidInputError
from .model import EmbeddingState, Frame

EPS_COINCIDENT = 1e-9
REPULSIVE_CHUNK = 64  # aggregate-mode targets per chunk (fixed; not tied to workers)
ATTRACTIVE_CHUNK = 2048  # edges per chunk (fixed; not tied to workers)

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi


def temperature_for(phase: int, mu: int, u_bar: float) -> float:
    """Temperature of iteration mu (0-based) of a phase, clamped at 0.

    Phase 1 cools as if the phase were the first half of a 1000-iteration
    run; phases 2-4 continue as if they were its second half (offsets 500
    and 510).
    """
    if phase == 1:
        t = (1000.0 - mu) * u_bar / 1000.0
    elif phase == 2:
        t = (1000.0 - (mu + 500.0)) * u_bar / 1000.0
    elif phase in (3, 4):
        t = (1000.0 - (mu + 510.0)) * u_bar / 1000.0
    else:
        raise InvalidInputError(f"phase must be 1..4, got {phase}")
    return max(t, 0.0)


def clamp_to_frame(position, frame: Frame):
    """Componentwise clamp of a 2-D position onto the frame."""
    return np.array(
        [
            min(max(position[0], frame.min_x), frame.max_x),
            min(max(position[1], frame.min_y), frame.max_y),
        ]
    )


def repulsion_magnitude(dv: float, gamma: float) -> float:
    return gamma * gamma / dv


def base_attraction(dv: float, gamma: float, b: float) -> float:
    return (dv / gamma) ** (1.0 - b)


def adjusted_attraction(psi: float, h: float) -> float:
    """psi with the distance term h folded in, limited to half of |psi|."""
    if h > 0.0:
        return psi + min(abs(psi) * 0.5, h)
    return psi + max(abs(psi) * (-0.5), h)


def pass_salt(seed: int, iteration: int, tag: int) -> np.uint64:
    """Deterministic 64-bit salt for the coincident-point jitter of one pass."""
    x = (
        (seed & _MASK64) * 0x9E3779B97F4A7C15
        ^ (iteration & _MASK64) * 0xBF58476D1CE4E5B9
        ^ (tag & _MASK64) * 0x94D049BB133111EB
    ) & _MASK64
    return np.uint64(x)


@dataclass
class ForceRecord:
    """Individual force vectors applied during the current iteration.

    Holds, per projected point, the attractive and repulsive contributions it
    received (forces, not accelerations: mass division is not included).
    Never populated for frozen points; ineffective points contribute nothing.
    Cleared at the start of every recorded iteration.
    """

    point_count: int
    _rep: list = field(default_factory=list, repr=False)
    _att: list = field(default_factory=list, repr=False)
    _index: Optional[tuple] = field(default=None, repr=False)

    def clear(self):
        self._rep.clear()
        self._att.clear()
        self._index = None

    def add_repulsive(self, targets, fx, fy):
        self._rep.append((targets, fx, fy))
        self._index = None

    def add_attractive(self, targets, fx, fy):
        self._att.append((targets, fx, fy))
        self._index = None

    def _build_index(self):
        if self._index is not None:
            return
        tagged = []
        for tag, chunks in ((0, self._rep), (1, self._att)):
            for targets, fx, fy in chunks:
                tags = np.full(len(targets), tag, dtype=np.int8)
                tagged.append((targets, fx, fy, tags))
        if tagged:
            targets = np.concatenate([t[0] for t in tagged])
            forces = np.stack(
                [
                    np.concatenate([t[1] for t in tagged]),
                    np.concatenate([t[2] for t in tagged]),
                ],
                axis=1,
            )
            tags = np.concatenate([t[3] for t in tagged])
        else:
            targets = np.empty(0, dtype=np.int64)
            forces = np.empty((0, 2), dtype=np.float64)
            tags = np.empty(0, dtype=np.int8)
        order = np.argsort(targets, kind="stable")
        sorted_targets = targets[order]
        starts = np.searchsorted(sorted_targets, np.arange(self.point_count))
        ends = np.searchsorted(sorted_targets, np.arange(self.point_count), side="right")
        self._index = (order, forces, tags, starts, ends)

    def forces_on(self, point: int) -> np.ndarray:
        """All force vectors applied to one point this iteration, (M, 2)."""
        self._build_index()
        order, forces, _, starts, ends = self._index
        return forces[order[starts[point] : ends[point]]]

    def repulsive_on(self, point: int) -> np.ndarray:
        self._build_index()
        order, forces, tags, starts, ends = self._index
        idx = order[starts[point] : ends[point]]
        return forces[idx[tags[idx] == 0]]

    def attractive_on(self, point: int) -> np.ndarray:
        self._build_index()
        order, forces, tags, starts, ends = self._index
        idx = order[starts[point] : ends[point]]
        return forces[idx[tags[idx] == 1]]


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _mix64(x):
    x = (x + _GOLDEN)
    x = (x ^ (x >> np.uint64(30))) * _MIX_A
    x = (x ^ (x >> np.uint64(27))) * _MIX_B
    return x ^ (x >> np.uint64(31))


@njit(cache=True, inline="always")
def _jitter_offset(salt, a, b):
    """Tiny displacement standing in for the zero vector between coincident
    points: magnitude EPS_COINCIDENT, direction keyed on (salt, a, b)."""
    h = _mix64(salt ^ _mix64(np.uint64(a) * _MIX_A) ^ _mix64(np.uint64(b) * _MIX_B))
    u = (h >> np.uint64(11)) * _INV_2_53
    ang = _TWO_PI * u
    return EPS_COINCIDENT * math.cos(ang), EPS_COINCIDENT * math.sin(ang)


@njit(cache=True)
def _repulsive_faithful_kernel(
    pos,
    frozen,
    ineffective,
    inst_ptr,
    inst_pts,
    gamma2,
    temperature,
    has_frame,
    fminx,
    fminy,
    fmaxx,
    fmaxy,
    salt,
    do_record,
    rec_target,
    rec_fx,
    rec_fy,
):
    n = inst_ptr.shape[0] - 1
    nrec = 0
    for i in range(n):
        for j in range(n):
            for ti in range(inst_ptr[i], inst_ptr[i + 1]):
                a = inst_pts[ti]
                if frozen[a]:
                    continue
                tx = 0.0
                ty = 0.0
                for rj in range(inst_ptr[j], inst_ptr[j + 1]):
                    c = inst_pts[rj]
                    if c == a or ineffective[c]:
                        continue
                    dx = pos[c, 0] - pos[a, 0]
                    dy = pos[c, 1] - pos[a, 1]
                    d2 = dx * dx + dy * dy
                    if d2 == 0.0:
                        dx, dy = _jitter_offset(salt, a, c)
                        d2 = dx * dx + dy * dy
                    fx = -gamma2 * dx / d2
                    fy = -gamma2 * dy / d2
                    tx += fx
                    ty += fy
                    if do_record:
                        rec_target[nrec] = a
                        rec_fx[nrec] = fx
                        rec_fy[nrec] = fy
                        nrec += 1
                norm = math.sqrt(tx * tx + ty * ty)
                if norm > temperature:
                    scale = temperature / norm
                    tx *= scale
                    ty *= scale
                pos[a, 0] += tx
                pos[a, 1] += ty
                if has_frame:
                    if pos[a, 0] < fminx:
                        pos[a, 0] = fminx
                    elif pos[a, 0] > fmaxx:
                        pos[a, 0] = fmaxx
                    if pos[a, 1] < fminy:
                        pos[a, 1] = fminy
                    elif pos[a, 1] > fmaxy:
                        pos[a, 1] = fmaxy
    return nrec


@njit(cache=True, nogil=True)
def _repulsive_aggregate_kernel(
    pos, frozen, ineffective, lo, hi, gamma2, salt, accum, do_record, rec_target, rec_fx, rec_fy
):
    P = pos.shape[0]
    nrec = 0
    for a in range(lo, hi):
        if frozen[a]:
            continue
        tx = 0.0
        ty = 0.0
        for c in range(P):
            if c == a or ineffective[c]:
                continue
            dx = pos[c, 0] - pos[a, 0]
            dy = pos[c, 1] - pos[a, 1]
            d2 = dx * dx + dy * dy
            if d2 == 0.0:
                dx, dy = _jitter_offset(salt, a, c)
                d2 = dx * dx + dy * dy
            fx = -gamma2 * dx / d2
            fy = -gamma2 * dy / d2
            tx += fx
            ty += fy
            if do_record:
                rec_target[nrec] = a
                rec_fx[nrec] = fx
                rec_fy[nrec] = fy
                nrec += 1
        accum[a, 0] = tx
        accum[a, 1] = ty
    return nrec


@njit(cache=True, nogil=True)
def _attractive_kernel(
    pos,
    frozen,
    ineffective,
    mass,
    point_instance,
    edge_src,
    edge_dst,
    e_lo,
    e_hi,
    delta,
    delta_max,
    dv_max,
    gamma,
    b,
    salt,
    accum,
    do_record,
    rec_target,
    rec_fx,
    rec_fy,
):
    nrec = 0
    exponent = 1.0 - b
    for e in range(e_lo, e_hi):
        a = edge_src[e]
        c = edge_dst[e]
        if frozen[a] or ineffective[c]:
            continue
        dx = pos[c, 0] - pos[a, 0]
        dy = pos[c, 1] - pos[a, 1]
        d2 = dx * dx + dy * dy
        if d2 == 0.0:
            dx, dy = _jitter_offset(salt, a, c)
            d2 = dx * dx + dy * dy
        dv = math.sqrt(d2)
        psi = (dv / gamma) ** exponent
        h = delta[point_instance[a], point_instance[c]] / delta_max - dv / dv_max
        if h > 0.0:
            adj = psi * 0.5
            if h < adj:
                adj = h
            psi_hat = psi + adj
        else:
            adj = psi * (-0.5)
            if h > adj:
                adj = h
            psi_hat = psi + adj
        fx = psi_hat * dx / dv
        fy = psi_hat * dy / dv
        accum[a, 0] += fx / mass[a]
        accum[a, 1] += fy / mass[a]
        accum[c, 0] -= fx / mass[c]
        accum[c, 1] -= fy / mass[c]
        if do_record:
            rec_target[nrec] = a
            rec_fx[nrec] = fx
            rec_fy[nrec] = fy
            nrec += 1
            if not frozen[c]:
                rec_target[nrec] = c
                rec_fx[nrec] = -fx
                rec_fy[nrec] = -fy
                nrec += 1
    return nrec


# ---------------------------------------------------------------------------
# array packing
# ---------------------------------------------------------------------------


def _flag_arrays(state: EmbeddingState):
    P = len(state.points)
    frozen = np.fromiter((pt.frozen for pt in state.points), np.bool_, P)
    ineffective = np.fromiter((pt.ineffective for pt in state.points), np.bool_, P)
    return frozen, ineffective


def _instance_csr(state: EmbeddingState):
    n = state.n
    P = len(state.points)
    ptr = np.zeros(n + 1, dtype=np.int64)
    pts = np.empty(P, dtype=np.int64)
    cursor = 0
    for i in range(n):
        for idx in state.projections_of[i]:
            pts[cursor] = idx
            cursor += 1
        ptr[i + 1] = cursor
    return ptr, pts


def _edge_arrays(state: EmbeddingState, graph: NeighbourhoodGraph):
    src: list[int] = []
    dst: list[int] = []
    for i in range(state.n):
        for p in state.projections_of[i]:
            for q in graph.out_neighbours[p]:
                src.append(p)
                dst.append(q)
    return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)


def _frame_args(frame: Optional[Frame]):
    if frame is None:
        return False, 0.0, 0.0, 0.0, 0.0
    return True, frame.min_x, frame.min_y, frame.max_x, frame.max_y


def _apply_moves(state: EmbeddingState, accum, frozen):
    """One capped move per unfrozen point from accumulated forces, then clamp.

    Frozen points are untouched entirely: no move and no clamp (clamping is
    movement too).
    """
    norms = np.sqrt(accum[:, 0] ** 2 + accum[:, 1] ** 2)
    scale = np.ones_like(norms)
    over = norms > state.temperature
    scale[over] = state.temperature / norms[over]
    moves = accum * scale[:, None]
    moves[frozen] = 0.0
    state.positions += moves
    if state.frame is not None:
        free = ~frozen
        state.positions[free, 0] = np.clip(
            state.positions[free, 0], state.frame.min_x, state.frame.max_x
        )
        state.positions[free, 1] = np.clip(
            state.positions[free, 1], state.frame.min_y, state.frame.max_y
        )


# ---------------------------------------------------------------------------
# public passes
# ---------------------------------------------------------------------------


def repulsive_pass(
    state: EmbeddingState,
    *,
    mode: str = "faithful",
    record: Optional[ForceRecord] = None,
    executor=None,
    salt=np.uint64(0),
):
    """Apply one iteration of repulsive forces; mutates positions in place.

    In faithful mode each unfrozen point moves once per other instance, with
    every move capped at the temperature; aggregate mode applies a single
    capped move per point. Forces received from ineffective points are zero.
    When record is given, each individual contribution is logged for the
    receiving (unfrozen) point.
    """
    pos = state.positions
    P = pos.shape[0]
    frozen, ineffective = _flag_arrays(state)
    gamma2 = state.gamma * state.gamma
    do_record = record is not None
    if mode == "faithful":
        cap = P * P
        rec_target = np.empty(cap if do_record else 0, dtype=np.int64)
        rec_fx = np.empty(cap if do_record else 0, dtype=np.float64)
        rec_fy = np.empty(cap if do_record else 0, dtype=np.float64)
        inst_ptr, inst_pts = _instance_csr(state)
        has_frame, fminx, fminy, fmaxx, fmaxy = _frame_args(state.frame)
        nrec = _repulsive_faithful_kernel(
            pos,
            frozen,
            ineffective,
            inst_ptr,
            inst_pts,
            gamma2,
            float(state.temperature),
            has_frame,
            fminx,
            fminy,
            fmaxx,
            fmaxy,
            np.uint64(salt),
            do_record,
            rec_target,
            rec_fx,
            rec_fy,
        )
        if do_record:
            record.add_repulsive(rec_target[:nrec].copy(), rec_fx[:nrec].copy(), rec_fy[:nrec].copy())
    elif mode == "aggregate":
        accum = np.zeros((P, 2), dtype=np.float64)
        chunks = [(lo, min(lo + REPULSIVE_CHUNK, P)) for lo in range(0, P, REPULSIVE_CHUNK)]
        buffers = []
        for lo, hi in chunks:
            cap = (hi - lo) * max(P - 1, 1)
            buffers.append(
                (
                    np.empty(cap if do_record else 0, dtype=np.int64),
                    np.empty(cap if do_record else 0, dtype=np.float64),
                    np.empty(cap if do_record else 0, dtype=np.float64),
                )
            )

        def run_chunk(ci):
            lo, hi = chunks[ci]
            rt, rx, ry = buffers[ci]
            return _repulsive_aggregate_kernel(
                pos, frozen, ineffective, lo, hi, gamma2, np.uint64(salt), accum, do_record, rt, rx, ry
            )

        if executor is None:
            counts = [run_chunk(ci) for ci in range(len(chunks))]
        else:
            counts = list(executor.map(run_chunk, range(len(chunks))))
        if do_record:
            for (rt, rx, ry), cnt in zip(buffers, counts):
                record.add_repulsive(rt[:cnt].copy(), rx[:cnt].copy(), ry[:cnt].copy())
        _apply_moves(state, accum, frozen)
    else:
        raise InvalidInputError(f"unknown repulsive mode '{mode}'")


def attractive_pass(
    state: EmbeddingState,
    graph: NeighbourhoodGraph,
    distance_model: DistanceModel,
    b: float,
    *,
    record: Optional[ForceRecord] = None,
    executor=None,
    salt=np.uint64(0),
):
    """Apply one iteration of attractive forces along graph edges.

    All edge forces are accumulated first (divided by the receiving point's
    mass), then every unfrozen point makes one capped move and is clamped to
    the frame. Edges are processed in fixed chunks and chunk results combined
    in order, so the outcome does not depend on the worker count.
    """
    pos = state.positions
    P = pos.shape[0]
    frozen, ineffective = _flag_arrays(state)
    mass = np.fromiter((pt.mass for pt in state.points), np.float64, P)
    point_instance = np.fromiter((pt.instance_index for pt in state.points), np.int64, P)
    edge_src, edge_dst = _edge_arrays(state, graph)
    E = edge_src.shape[0]
    do_record = record is not None
    chunks = [(lo, min(lo + ATTRACTIVE_CHUNK, E)) for lo in range(0, E, ATTRACTIVE_CHUNK)]
    if not chunks:
        chunks = [(0, 0)]
    accums = [np.zeros((P, 2), dtype=np.float64) for _ in chunks]
    buffers = []
    for lo, hi in chunks:
        cap = 2 * max(hi - lo, 1)
        buffers.append(
            (
                np.empty(cap if do_record else 0, dtype=np.int64),
                np.empty(cap if do_record else 0, dtype=np.float64),
                np.empty(cap if do_record else 0, dtype=np.float64),
            )
        )

    def run_chunk(ci):
        lo, hi = chunks[ci]
        rt, rx, ry = buffers[ci]
        return _attractive_kernel(
            pos,
            frozen,
            ineffective,
            mass,
            point_instance,
            edge_src,
            edge_dst,
            lo,
            hi,
            distance_model.transformed,
            distance_model.delta_max,
            state.dv_max,
            state.gamma,
            b,
            np.uint64(salt),
            accums[ci],
            do_record,
            rt,
            rx,
            ry,
        )

    if executor is None:
        counts = [run_chunk(ci) for ci in range(len(chunks))]
    else:
        counts = list(executor.map(run_chunk, range(len(chunks))))
    total = accums[0]
    for extra in accums[1:]:
        total += extra
    if do_record:
        for (rt, rx, ry), cnt in zip(buffers, counts):
            record.add_attractive(rt[:cnt].copy(), rx[:cnt].copy(), ry[:cnt].copy())
    _apply_moves(state, total, frozen)
