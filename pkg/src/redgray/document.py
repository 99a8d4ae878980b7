"""Lossless text serialization of a finished embedding.

The document is a whitespace-separated table with a commented header: one
'# key = value' line per run setting (config echo, seed, phase iteration
counts, input checksum) followed by a column-name line and one row per
projected point. Floats are written with repr() so parse(serialize(doc))
reproduces the document exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .model import EmbeddingState, Layer, RunConfig

FORMAT_MARKER = "redgray-embedding v1"
COLUMNS = "instance x y layer second mass"


@dataclass(frozen=True)
class DocumentPoint:
    instance: int
    x: float
    y: float
    layer: str
    second: bool
    mass: float


@dataclass
class EmbeddingDocument:
    metadata: dict
    points: list

    def serialize(self) -> str:
        lines = [f"# {FORMAT_MARKER}"]
        for key, value in self.metadata.items():
            lines.append(f"# {key} = {value}")
        lines.append(COLUMNS)
        for p in self.points:
            lines.append(
                f"{p.instance} {p.x!r} {p.y!r} {p.layer} {int(p.second)} {p.mass!r}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "EmbeddingDocument":
        lines = text.splitlines()
        if not lines or lines[0].strip() != f"# {FORMAT_MARKER}":
            raise ParseError(f"not an embedding document (missing '{FORMAT_MARKER}' header)")
        metadata: dict = {}
        points: list = []
        header_seen = False
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if " = " not in body:
                    raise ParseError(f"line {lineno}: malformed metadata line: {line!r}")
                key, value = body.split(" = ", 1)
                metadata[key.strip()] = value
                continue
            if not header_seen:
                if line.strip() != COLUMNS:
                    raise ParseError(
                        f"line {lineno}: expected column header {COLUMNS!r}, got {line!r}"
                    )
                header_seen = True
                continue
            cells = line.split()
            if len(cells) != 6:
                raise ParseError(f"line {lineno}: expected 6 columns, got {len(cells)}")
            try:
                instance = int(cells[0])
                x = float(cells[1])
                y = float(cells[2])
                second = bool(int(cells[4]))
                mass = float(cells[5])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
            layer = cells[3]
            if layer not in ("red", "gray"):
                raise ParseError(f"line {lineno}: unknown layer {layer!r}")
            points.append(DocumentPoint(instance, x, y, layer, second, mass))
        if not header_seen:
            raise ParseError("missing column header line")
        return cls(metadata=metadata, points=points)

    # -- typed views -------------------------------------------------------

    def positions(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.points], dtype=np.float64)

    def instances(self) -> list:
        return [p.instance for p in self.points]

    def layers(self) -> list:
        return [Layer(p.layer) for p in self.points]

    def instance_count(self) -> int:
        return len({p.instance for p in self.points})

    def siblings(self) -> dict:
        """instance -> list of point row indices (1 or 2 entries)."""
        table: dict = {}
        for idx, p in enumerate(self.points):
            table.setdefault(p.instance, []).append(idx)
        return table


def document_from_state(
    state: EmbeddingState, cfg: RunConfig, data_checksum: str = ""
) -> EmbeddingDocument:
    """Snapshot the embedding plus the settings that produced it."""
    metadata = {
        "seed": str(cfg.seed),
        "metric": cfg.metric,
        "mode": cfg.mode,
        "b": repr(cfg.b),
        "p_hat": str(cfg.p_hat),
        "z": str(cfg.z),
        "u_bar": repr(cfg.u_bar),
        "width": repr(cfg.width),
        "height": repr(cfg.height),
        "phase_iterations": " ".join(str(v) for v in cfg.phase_iterations),
        "frame_margin_fraction": repr(cfg.frame_margin_fraction),
        "gray_sigma_factor": repr(cfg.gray_sigma_factor),
        "gray_cap_fraction": repr(cfg.gray_cap_fraction),
        "axis_count": str(cfg.axis_count),
        "max_projections": str(cfg.max_projections),
        "parallel": str(int(cfg.parallel)),
        "data_checksum": data_checksum,
    }
    points = [
        DocumentPoint(
            instance=pt.instance_index,
            x=float(state.positions[idx, 0]),
            y=float(state.positions[idx, 1]),
            layer=pt.layer.value,
            second=pt.is_second_projection,
            mass=float(pt.mass),
        )
        for idx, pt in enumerate(state.points)
    ]
    return EmbeddingDocument(metadata=metadata, points=points)


def query_rect(
    document: EmbeddingDocument, x0: float, y0: float, x1: float, y1: float
) -> list:
    """Points inside the rectangle, each paired with its sibling projection.

    Returns (point, sibling-or-None) tuples in point order; the sibling is
    the other projection of the same instance when the instance has two.
    Every contained projection of a duplicated instance yields its own entry.
    """
    lo_x, hi_x = min(x0, x1), max(x0, x1)
    lo_y, hi_y = min(y0, y1), max(y0, y1)
    siblings = document.siblings()
    result = []
    for idx, p in enumerate(document.points):
        if lo_x <= p.x <= hi_x and lo_y <= p.y <= hi_y:
            others = [q for q in siblings[p.instance] if q != idx]
            sibling = document.points[others[0]] if others else None
            result.append((p, sibling))
    return result
