import math
import xml.etree.ElementTree as ET

import pytest

from riffgauge import render_box_plot
from riffgauge.plotting import (
    BOX_WIDTH,
    MARGIN_LEFT,
    MARGIN_TOP,
    PLOT_HEIGHT,
    SLOT_WIDTH,
    nice_ticks,
)

SUMMARY = ("ref", (1.0, 2.0, 3.0, 4.0, 5.0))


class TestGeometry:
    def test_constants(self):
        assert (MARGIN_LEFT, MARGIN_TOP, SLOT_WIDTH, BOX_WIDTH, PLOT_HEIGHT) == (
            60.0, 20.0, 100.0, 48.0, 320.0,
        )

    def test_known_coordinates(self):
        # data range [1,5] padded 5% each side -> value window [0.8, 5.2]
        svg = render_box_plot([SUMMARY], "pce")
        assert '<line x1="86.00" y1="180.00" x2="134.00" y2="180.00"/>' in svg  # median
        assert '<rect x="86.00" y="107.27" width="48.00" height="145.45"/>' in svg
        assert '<line x1="110.00" y1="325.45" x2="110.00" y2="252.73"/>' in svg  # lower whisker
        assert '<line x1="110.00" y1="107.27" x2="110.00" y2="34.55"/>' in svg  # upper whisker
        assert '<line x1="98.00" y1="325.45" x2="122.00" y2="325.45"/>' in svg  # bottom cap
        assert '<line x1="98.00" y1="34.55" x2="122.00" y2="34.55"/>' in svg  # top cap

    def test_degenerate_summary_collapses_to_one_height(self):
        svg = render_box_plot([("only", (7.0, 7.0, 7.0, 7.0, 7.0))], "np")
        # window widens by +-1 around the point, so 7 sits at mid-height
        assert svg.count('y1="180.00"') >= 3
        assert '<rect x="86.00" y="180.00" width="48.00" height="0.00"/>' in svg

    def test_second_box_shifts_one_slot(self):
        svg = render_box_plot([SUMMARY, ("gen", (1.0, 2.0, 3.0, 4.0, 5.0))], "pce")
        assert '<line x1="186.00" y1="180.00" x2="234.00" y2="180.00"/>' in svg

    def test_canvas_size_follows_corpus_count(self):
        one = render_box_plot([SUMMARY], "pce")
        two = render_box_plot([SUMMARY, ("gen", (2.0, 2.5, 3.0, 3.5, 4.0))], "pce")
        assert 'width="180.00"' in one
        assert 'width="280.00"' in two
        assert 'height="380.00"' in one


class TestDocument:
    def test_parses_as_xml(self):
        svg = render_box_plot([SUMMARY, ("gen", (2.0, 2.5, 3.0, 3.5, 4.0))], "pol")
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")

    def test_box_group_per_corpus(self):
        svg = render_box_plot([SUMMARY, ("gen", (2.0, 2.5, 3.0, 3.5, 4.0))], "pce")
        assert svg.count('<g class="box"') == 2

    def test_byte_deterministic(self):
        args = ([SUMMARY, ("gen", (2.0, 2.5, 3.0, 3.5, 4.0))], "pce")
        assert render_box_plot(*args) == render_box_plot(*args)

    def test_labels_are_escaped(self):
        svg = render_box_plot([("a<b&c", (1.0, 1.0, 2.0, 3.0, 3.0))], "x<&y")
        assert "a&lt;b&amp;c" in svg
        assert "x&lt;&amp;y" in svg
        ET.fromstring(svg)

    def test_metric_title_present(self):
        svg = render_box_plot([SUMMARY], "polr")
        assert ">polr</text>" in svg

    def test_trailing_newline(self):
        assert render_box_plot([SUMMARY], "pce").endswith("</svg>\n")

    def test_axis_tick_labels(self):
        svg = render_box_plot([SUMMARY], "pce")
        for label in ("1.00", "2.00", "3.00", "4.00", "5.00"):
            assert f">{label}</text>" in svg


class TestValidation:
    def test_empty_summaries_rejected(self):
        with pytest.raises(ValueError):
            render_box_plot([], "pce")

    def test_disordered_summary_rejected(self):
        with pytest.raises(ValueError):
            render_box_plot([("bad", (5.0, 2.0, 3.0, 4.0, 1.0))], "pce")

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError):
            render_box_plot([("bad", (1.0, 2.0, 3.0))], "pce")

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            render_box_plot([("bad", (1.0, 2.0, math.nan, 4.0, 5.0))], "pce")


class TestNiceTicks:
    def test_unit_window(self):
        assert nice_ticks(0.8, 5.2, 5) == [1.0, 2.0, 3.0, 4.0, 5.0]

    def test_small_range(self):
        ticks = nice_ticks(0.0, 1.0, 5)
        assert ticks[0] == 0.0 and ticks[-1] == 1.0
        assert ticks == pytest.approx([0.0, 0.2, 0.4, 0.6, 0.8, 1.0], abs=1e-12)

    def test_mantissa_is_1_2_or_5(self):
        cases = [(-3.7, 12.9), (0.001, 0.009), (10, 100000), (-0.5, 0.5)]
        for lo, hi in cases:
            ticks = nice_ticks(lo, hi, 5)
            assert len(ticks) >= 2
            step = ticks[1] - ticks[0]
            mantissa = step / 10 ** math.floor(math.log10(step))
            assert min(abs(mantissa - m) for m in (1.0, 2.0, 5.0, 10.0)) < 1e-9

    def test_ticks_lie_inside_window(self):
        for lo, hi in [(0.8, 5.2), (-10, 3), (2.4, 2.9)]:
            for tick in nice_ticks(lo, hi, 5):
                assert lo - 1e-9 <= tick <= hi + 1e-9

    def test_ticks_ascend_evenly(self):
        ticks = nice_ticks(-7.3, 11.2, 5)
        steps = {round(b - a, 9) for a, b in zip(ticks, ticks[1:])}
        assert len(steps) == 1
