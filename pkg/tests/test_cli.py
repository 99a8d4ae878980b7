import numpy as np
import pytest

from redgray.cli import main
from redgray.document import EmbeddingDocument


@pytest.fixture(scope="module")
def tiny_csv(tmp_path_factory):
    rng = np.random.default_rng(0)
    root = tmp_path_factory.mktemp("cli")
    a = rng.normal(loc=(0.0, 0.0), size=(7, 2))
    b = rng.normal(loc=(8.0, 0.0), size=(7, 2))
    path = root / "tiny.csv"
    lines = []
    for row, label in [(r, "a") for r in a] + [(r, "b") for r in b]:
        lines.append(f"{float(row[0])!r},{float(row[1])!r},{label}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture(scope="module")
def embedded_doc(tiny_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-out") / "tiny.embedding"
    code = main(
        [
            "embed",
            "--input", str(tiny_csv),
            "--label-column", "-1",
            "--p-hat", "4",
            "--z", "4",
            "--seed", "3",
            "--iterations", "40", "35", "20", "30",
            "--output", str(out),
        ]
    )
    assert code == 0
    return out


def test_embed_writes_parseable_document(embedded_doc, tiny_csv):
    doc = EmbeddingDocument.parse(embedded_doc.read_text())
    assert doc.instance_count() == 14
    assert doc.metadata["seed"] == "3"
    assert doc.metadata["p_hat"] == "4"
    assert doc.metadata["data_checksum"].startswith("sha256:")


def test_embed_same_seed_same_bytes(tiny_csv, tmp_path, embedded_doc):
    out = tmp_path / "again.embedding"
    code = main(
        [
            "embed",
            "--input", str(tiny_csv),
            "--label-column", "-1",
            "--p-hat", "4",
            "--z", "4",
            "--seed", "3",
            "--iterations", "40", "35", "20", "30",
            "--output", str(out),
        ]
    )
    assert code == 0
    assert out.read_bytes() == embedded_doc.read_bytes()


def test_evaluate_prints_six_rows(embedded_doc, tiny_csv, capsys):
    code = main(
        [
            "evaluate",
            "--document", str(embedded_doc),
            "--input", str(tiny_csv),
            "--label-column", "-1",
            "--k", "3",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 6
    assert out[0].startswith("evaluation=red+gray classification=red+gray lambda=")
    assert out[2].startswith("evaluation=red      classification=red      lambda=")
    for line in out:
        assert line.endswith("%") or line.endswith("n/a")


def test_evaluate_accepts_labels_file(embedded_doc, tmp_path, capsys):
    labels = tmp_path / "labels.txt"
    labels.write_text("\n".join(["a"] * 7 + ["b"] * 7) + "\n")
    code = main(["evaluate", "--document", str(embedded_doc), "--labels", str(labels), "--k", "3"])
    assert code == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 6


def test_render_writes_svg(embedded_doc, tiny_csv, tmp_path):
    out = tmp_path / "plot.svg"
    code = main(
        [
            "render",
            "--document", str(embedded_doc),
            "--input", str(tiny_csv),
            "--label-column", "-1",
            "--output", str(out),
        ]
    )
    assert code == 0
    svg = out.read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert "<circle" in svg


def test_query_rect_runs(embedded_doc, capsys):
    code = main(["query-rect", "--document", str(embedded_doc), "--rect=-1e9,-1e9,1e9,1e9"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    doc = EmbeddingDocument.parse(embedded_doc.read_text())
    assert len(lines) == len(doc.points)
    sibling_lines = [ln for ln in lines if "sibling_x=" in ln]
    duplicated = sum(1 for idxs in doc.siblings().values() if len(idxs) == 2)
    assert len(sibling_lines) == 2 * duplicated


def test_config_file_supplies_defaults(tiny_csv, tmp_path, embedded_doc, capsys):
    config = tmp_path / "run.conf"
    config.write_text(
        "\n".join(
            [
                "# settings for the tiny dataset",
                "p_hat = 4",
                "z = 4",
                "seed = 3",
                "iterations = 40 35 20 30",
            ]
        )
        + "\n"
    )
    out = tmp_path / "fromconfig.embedding"
    code = main(
        [
            "embed",
            "--config", str(config),
            "--input", str(tiny_csv),
            "--label-column", "-1",
            "--output", str(out),
        ]
    )
    assert code == 0
    assert out.read_bytes() == embedded_doc.read_bytes()
    # explicit flags beat the config file
    out2 = tmp_path / "override.embedding"
    code = main(
        [
            "embed",
            "--config", str(config),
            "--input", str(tiny_csv),
            "--label-column", "-1",
            "--seed", "4",
            "--output", str(out2),
        ]
    )
    assert code == 0
    assert out2.read_bytes() != embedded_doc.read_bytes()
    assert EmbeddingDocument.parse(out2.read_text()).metadata["seed"] == "4"


def test_evaluate_single_layer_matches_plain_loo_knn(tmp_path, capsys):
    from helpers import plain_loo_knn_accuracy
    from redgray.document import DocumentPoint, EmbeddingDocument

    rng = np.random.default_rng(5)
    positions = rng.uniform(0.0, 20.0, size=(18, 2))
    labels = [("a", "b", "c")[int(rng.integers(0, 3))] for _ in range(18)]
    doc = EmbeddingDocument(
        metadata={},
        points=[
            DocumentPoint(i, float(x), float(y), "red", False, 1.0)
            for i, (x, y) in enumerate(positions)
        ],
    )
    doc_path = tmp_path / "single.embedding"
    doc_path.write_text(doc.serialize())
    labels_path = tmp_path / "labels.txt"
    labels_path.write_text("\n".join(labels) + "\n")
    code = main(["evaluate", "--document", str(doc_path), "--labels", str(labels_path), "--k", "4"])
    assert code == 0
    out = capsys.readouterr().out.strip().splitlines()
    expected = plain_loo_knn_accuracy(positions.tolist(), labels, 4)
    red_red = next(ln for ln in out if ln.startswith("evaluation=red      classification=red "))
    assert red_red.endswith(f"lambda={100.0 * expected:.3f}%")


def test_missing_input_is_a_clean_error(tmp_path, capsys):
    code = main(
        [
            "embed",
            "--input", str(tmp_path / "absent.csv"),
            "--output", str(tmp_path / "x.embedding"),
        ]
    )
    assert code == 1
    assert "error" in capsys.readouterr().err.lower()


def test_bad_rect_is_a_clean_error(embedded_doc, capsys):
    code = main(["query-rect", "--document", str(embedded_doc), "--rect", "1,2,3"])
    assert code == 1
    assert "x0,y0,x1,y1" in capsys.readouterr().err


def test_unknown_config_key_is_a_clean_error(tiny_csv, tmp_path, capsys):
    config = tmp_path / "bad.conf"
    config.write_text("surprise = 1\n")
    code = main(
        [
            "embed",
            "--config", str(config),
            "--input", str(tiny_csv),
            "--output", str(tmp_path / "x.embedding"),
        ]
    )
    assert code == 1
    assert "surprise" in capsys.readouterr().err
