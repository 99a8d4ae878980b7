"""Command-line interface: embed, evaluate, render, query-rect.

Settings can also come from a plain key=value config file (--config);
explicit flags always win. All commands exit 0 on success and nonzero with a
diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataio import file_checksum, load_dataset, load_labels
from .document import EmbeddingDocument, document_from_state, query_rect
from .errors import EvaluationError, InvalidInputError, RedGrayError
from .evaluation import LambdaSpec, lambda_measure_points
from .model import Layer, RunConfig
from .phases import run
from .render import METAPHORS, render_svg

_RED = frozenset({Layer.RED})
_GRAY = frozenset({Layer.GRAY})
_BOTH = frozenset({Layer.RED, Layer.GRAY})

# Table layout: (evaluation layers, classification layers)
LAYER_COMBINATIONS = (
    (_BOTH, _BOTH),
    (_BOTH, _RED),
    (_RED, _RED),
    (_GRAY, _GRAY),
    (_GRAY, _RED),
    (_GRAY, _BOTH),
)

_CONFIG_CONVERTERS = {
    "input": str,
    "output": str,
    "format": str,
    "metric": str,
    "mode": str,
    "label_column": int,
    "b": float,
    "p_hat": int,
    "z": int,
    "u_bar": float,
    "width": float,
    "height": float,
    "seed": int,
    "frame_margin": float,
    "snapshots": int,
    "workers": int,
    "iterations": lambda s: [int(v) for v in s.split()],
    "parallel": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


def _layer_name(layers) -> str:
    names = [layer.value for layer in (Layer.RED, Layer.GRAY) if layer in layers]
    return "+".join(names)


def _load_config_file(path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}: line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_CONVERTERS:
            raise InvalidInputError(f"{path}: line {lineno}: unknown setting {key!r}")
        try:
            values[key] = _CONFIG_CONVERTERS[key](value.strip())
        except ValueError as exc:
            raise InvalidInputError(f"{path}: line {lineno}: {exc}") from None
    return values


def _read_labels(args, needed_for: str):
    if args.labels:
        return load_labels(args.labels)
    if args.input:
        if args.label_column is None:
            raise InvalidInputError(
                f"{needed_for} needs --label-column when labels come from --input"
            )
        data = load_dataset(args.input, args.format, args.label_column)
        if data.labels is None:
            raise InvalidInputError(f"{args.input} provided no labels")
        return data.labels
    return None


def cmd_embed(args) -> int:
    data = load_dataset(args.input, args.format, args.label_column)
    cfg = RunConfig(
        p_hat=args.p_hat,
        b=args.b,
        z=args.z,
        u_bar=args.u_bar,
        width=args.width,
        height=args.height,
        phase_iterations=tuple(args.iterations),
        frame_margin_fraction=args.frame_margin,
        metric=args.metric,
        seed=args.seed,
        parallel=args.parallel,
        workers=args.workers,
        mode=args.mode,
        snapshot_every=args.snapshots,
    )

    progress = None
    if args.verbose:
        total = sum(cfg.phase_iterations)

        def progress(iteration, phase, temperature, point_count):
            if iteration % 250 == 0 or iteration == total:
                print(
                    f"iteration {iteration}/{total} phase {phase} "
                    f"temperature {temperature:.2f} points {point_count}",
                    file=sys.stderr,
                )

    trace = run(data, cfg, progress=progress)
    document = document_from_state(
        trace.selected_result, cfg, data_checksum=file_checksum(args.input)
    )
    Path(args.output).write_text(document.serialize())
    if args.verbose:
        print(f"wrote {args.output}", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    document = EmbeddingDocument.parse(Path(args.document).read_text())
    labels = _read_labels(args, "evaluate")
    if labels is None:
        raise InvalidInputError("evaluate needs labels (--labels or --input/--label-column)")
    if len(labels) < document.instance_count():
        raise InvalidInputError(
            f"{len(labels)} labels for {document.instance_count()} instances"
        )
    positions = document.positions()
    instances = document.instances()
    layers = document.layers()
    for eval_layers, class_layers in LAYER_COMBINATIONS:
        spec = LambdaSpec(eval_layers, class_layers, k=args.k)
        try:
            value = lambda_measure_points(positions, instances, layers, labels, spec)
            cell = f"{100.0 * value:.3f}%"
        except EvaluationError as exc:
            cell = "n/a"
            print(f"note: {exc}", file=sys.stderr)
        print(
            f"evaluation={_layer_name(eval_layers):<8} "
            f"classification={_layer_name(class_layers):<8} lambda={cell}"
        )
    return 0


def cmd_render(args) -> int:
    document = EmbeddingDocument.parse(Path(args.document).read_text())
    labels = _read_labels(args, "render")
    svg = render_svg(document, labels=labels, metaphor=args.metaphor, size=args.size)
    Path(args.output).write_text(svg)
    return 0


def cmd_query_rect(args) -> int:
    document = EmbeddingDocument.parse(Path(args.document).read_text())
    try:
        x0, y0, x1, y1 = (float(v) for v in args.rect.split(","))
    except ValueError:
        raise InvalidInputError("--rect expects x0,y0,x1,y1") from None
    for point, sibling in query_rect(document, x0, y0, x1, y1):
        line = (
            f"instance={point.instance} x={point.x!r} y={point.y!r} "
            f"layer={point.layer} second={int(point.second)}"
        )
        if sibling is not None:
            line += (
                f" sibling_x={sibling.x!r} sibling_y={sibling.y!r} "
                f"sibling_layer={sibling.layer}"
            )
        print(line)
    return 0


def _add_label_source(parser):
    parser.add_argument("--labels", help="file with one label per instance line")
    parser.add_argument("--input", help="original data table to take labels from")
    parser.add_argument("--format", default="vectors", choices=("vectors", "distance_matrix"))
    parser.add_argument("--label-column", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="redgray", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    embed = sub.add_parser("embed", help="compute an embedding document")
    embed.add_argument("--config", help="key=value settings file; flags override it")
    embed.add_argument("--input", required=True)
    embed.add_argument("--format", default="vectors", choices=("vectors", "distance_matrix"))
    embed.add_argument("--metric", default="euclidean", choices=("euclidean", "cosine", "precomputed"))
    embed.add_argument("--label-column", type=int, default=None)
    embed.add_argument("--b", type=float, default=0.9)
    embed.add_argument("--p-hat", type=int, default=20)
    embed.add_argument("--z", type=int, default=20)
    embed.add_argument("--u-bar", type=float, default=100.0)
    embed.add_argument("--iterations", type=int, nargs=4, default=[500, 450, 390, 490],
                       metavar=("P1", "P2", "P3", "P4"))
    embed.add_argument("--width", type=float, default=1000.0)
    embed.add_argument("--height", type=float, default=1000.0)
    embed.add_argument("--seed", type=int, default=0)
    embed.add_argument("--frame-margin", type=float, default=0.05)
    embed.add_argument("--snapshots", type=int, default=0,
                       help="store every k-th iteration in the trace (0 = off)")
    embed.add_argument("--parallel", action="store_true")
    embed.add_argument("--workers", type=int, default=None)
    embed.add_argument("--mode", default="faithful", choices=("faithful", "aggregate"))
    embed.add_argument("--output", required=True)
    embed.add_argument("--verbose", action="store_true")
    embed.set_defaults(func=cmd_embed)
    subparsers["embed"] = embed

    evaluate = sub.add_parser("evaluate", help="print the layered KNN accuracy table")
    evaluate.add_argument("--document", required=True)
    evaluate.add_argument("--k", type=int, default=15)
    _add_label_source(evaluate)
    evaluate.set_defaults(func=cmd_evaluate)
    subparsers["evaluate"] = evaluate

    render = sub.add_parser("render", help="render a document to SVG")
    render.add_argument("--document", required=True)
    render.add_argument("--output", required=True)
    render.add_argument("--metaphor", default="circle-gray", choices=METAPHORS)
    render.add_argument("--size", type=float, default=900.0)
    _add_label_source(render)
    render.set_defaults(func=cmd_render)
    subparsers["render"] = render

    query = sub.add_parser("query-rect", help="list points in a rectangle and their duplicates")
    query.add_argument("--document", required=True)
    query.add_argument("--rect", required=True, help="x0,y0,x1,y1 in embedding coordinates")
    query.set_defaults(func=cmd_query_rect)
    subparsers["query-rect"] = query

    return parser, subparsers


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            subparsers[args.command].set_defaults(**_load_config_file(args.config))
            args = parser.parse_args(argv)
        return args.func(args)
    except RedGrayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
