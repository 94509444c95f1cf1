import xml.etree.ElementTree as ET

import pytest

from treelm.reporting import (
    FigureDatum,
    ReportBundle,
    bar_chart_svg,
    load_bundle,
    render_bar_chart_svg,
    save_bundle,
    write_table_tsv,
)


def sample_bundle():
    return ReportBundle(
        suite="demo",
        analysis="wh-interaction",
        meta={"seed": 1},
        tables={"summary": [["measure", "value"], ["mean", "2.0"]]},
        figure_title="demo conditions",
        figure=[
            FigureDatum("that_nogap", "rnng", 10.0, 1.0, ""),
            FigureDatum("what_gap", "rnng", 8.0, 0.5, "strong"),
            FigureDatum("that_nogap", "lstm-lm", 11.0, 1.5, ""),
            FigureDatum("what_gap", "lstm-lm", 12.0, 0.25, "strong"),
        ],
    )


def test_bundle_round_trip(tmp_path):
    bundle = sample_bundle()
    path = tmp_path / "bundle.json"
    save_bundle(bundle, path)
    loaded = load_bundle(path)
    assert loaded.to_dict() == bundle.to_dict()


def test_svg_is_well_formed_xml():
    svg = bar_chart_svg(sample_bundle())
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")


def test_every_figure_datum_rendered():
    bundle = sample_bundle()
    svg = bar_chart_svg(bundle)
    root = ET.fromstring(svg)
    ns = {"s": "http://www.w3.org/2000/svg"}
    bars = root.findall(".//s:rect", ns)
    # one background rect + legend swatches + one bar per datum
    data_bars = len(bars) - 1 - len({d.series for d in bundle.figure})
    assert data_bars == len(bundle.figure)
    texts = [t.text for t in root.findall(".//s:text", ns)]
    assert "that_nogap" in texts and "what_gap" in texts
    assert "▲" in texts  # grammaticality marker row


def test_negative_values_render(tmp_path):
    bundle = ReportBundle(
        suite="neg", analysis="npi",
        figure=[FigureDatum("c", "m", -3.0, 0.5, "reduced")],
    )
    render_bar_chart_svg(bundle, tmp_path / "f.svg")
    root = ET.fromstring((tmp_path / "f.svg").read_text())
    assert root is not None


def test_table_tsv_with_meta_header(tmp_path):
    path = tmp_path / "t.tsv"
    write_table_tsv([["a", "b"], ["1", "2"]], path, {"hash": "xyz"})
    content = path.read_text()
    assert content == "# hash: xyz\na\tb\n1\t2\n"


def test_deterministic_svg_bytes(tmp_path):
    assert bar_chart_svg(sample_bundle()) == bar_chart_svg(sample_bundle())
