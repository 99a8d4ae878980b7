"""Static SVG rendering of an embedding document.

Visual metaphors: points are filled with their class colour (single default
colour without labels); gray-layer points carry a black circle outline, or
are drawn smaller under the "small-gray" metaphor; second projections get a
black dot inside. The gray layer is drawn first so red points win overlaps.
Output bytes are a pure function of the inputs.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .document import EmbeddingDocument
from .errors import InvalidInputError

PALETTE = (
    "#e6194b",
    "#3cb44b",
    "#4363d8",
    "#f58231",
    "#911eb4",
    "#46f0f0",
    "#f032e6",
    "#bcf60c",
    "#fabebe",
    "#008080",
    "#e6beff",
    "#9a6324",
)
DEFAULT_COLOUR = "#4682b4"
METAPHORS = ("circle-gray", "small-gray")

_POINT_RADIUS = 4.0
_SMALL_RADIUS = 2.4
_DOT_RADIUS = 1.4
_MARGIN = 30.0
_LEGEND_STEP = 18.0


def _colour_map(labels: Sequence[str]) -> dict:
    classes = sorted(set(labels))
    return {cls: PALETTE[i % len(PALETTE)] for i, cls in enumerate(classes)}


def render_svg(
    document: EmbeddingDocument,
    labels: Optional[Sequence[str]] = None,
    metaphor: str = "circle-gray",
    size: float = 900.0,
) -> str:
    """Render the document as an SVG string."""
    if metaphor not in METAPHORS:
        raise InvalidInputError(f"metaphor must be one of {METAPHORS}")
    points = document.points
    if not points:
        raise InvalidInputError("document has no points to render")
    if labels is not None and len(labels) <= max(p.instance for p in points):
        raise InvalidInputError("labels do not cover every instance in the document")

    xs = [p.x for p in points]
    ys = [p.y for p in points]
    min_x, max_x = min(xs), max(xs)
    min_y, max_y = min(ys), max(ys)
    extent_x = max(max_x - min_x, 1e-12)
    extent_y = max(max_y - min_y, 1e-12)
    plot = size - 2 * _MARGIN
    scale = min(plot / extent_x, plot / extent_y)
    offset_x = _MARGIN + (plot - scale * extent_x) / 2
    offset_y = _MARGIN + (plot - scale * extent_y) / 2

    def to_px(x: float, y: float) -> tuple[float, float]:
        # y flipped: larger embedding y renders higher up
        return offset_x + (x - min_x) * scale, offset_y + (max_y - y) * scale

    colours = _colour_map(labels) if labels is not None else None

    def circle(cx, cy, r, fill, stroke=None, stroke_width=0.0):
        attrs = f'cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" fill="{fill}"'
        if stroke is not None:
            attrs += f' stroke="{stroke}" stroke-width="{stroke_width:.2f}"'
        return f"  <circle {attrs}/>"

    body = []
    # gray layer first, red layer on top
    ordering = [i for i, p in enumerate(points) if p.layer == "gray"] + [
        i for i, p in enumerate(points) if p.layer == "red"
    ]
    for idx in ordering:
        p = points[idx]
        cx, cy = to_px(p.x, p.y)
        fill = colours[labels[p.instance]] if colours else DEFAULT_COLOUR
        if p.layer == "gray":
            if metaphor == "circle-gray":
                body.append(circle(cx, cy, _POINT_RADIUS, fill, stroke="black", stroke_width=1.2))
            else:
                body.append(circle(cx, cy, _SMALL_RADIUS, fill))
        else:
            body.append(circle(cx, cy, _POINT_RADIUS, fill))
        if p.second:
            body.append(circle(cx, cy, _DOT_RADIUS, "black"))

    legend = []
    if colours:
        for i, (cls, colour) in enumerate(sorted(colours.items())):
            y = _MARGIN + i * _LEGEND_STEP
            legend.append(circle(_MARGIN, y, 5.0, colour))
            legend.append(
                f'  <text x="{_MARGIN + 12:.2f}" y="{y + 4:.2f}" '
                f'font-family="sans-serif" font-size="12">{cls}</text>'
            )

    header = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}" '
        f'viewBox="0 0 {size:.0f} {size:.0f}">'
    )
    background = f'  <rect width="{size:.0f}" height="{size:.0f}" fill="white"/>'
    return "\n".join([header, background] + body + legend + ["</svg>"]) + "\n"
