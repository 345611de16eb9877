"""Unit tests for report CSVs, aggregation, histograms and curves."""

import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from eigengs_cli.services import aggregate_reports, find_reports, radius_histogram
from eigengs_core.models import REPORT_COLUMNS, ColorSpace, EigenGaussianModel, FitReport, GaussianCloud
from eigengs_core.storage import format_value, read_report, render_curve_svg, write_report, write_rows

SVG = "{http://www.w3.org/2000/svg}"


def make_report(psnrs, ssims=None, every=10) -> FitReport:
    report = FitReport()
    ssims = ssims or [0.5] * len(psnrs)
    for i, (p, s) in enumerate(zip(psnrs, ssims)):
        report.record(i * every, 1.0 / (i + 1), p, s, 0.1 * i)
    return report


@pytest.mark.unit
class TestReportCsv:
    """Tests for fit report serialization."""

    def test_round_trip_preserves_values(self, tmp_path):
        """Test that written reports read back with identical floats."""
        report = FitReport()
        report.record(0, 0.123456789012345, 9.08514, 0.3, 0.0)
        report.record(50, 1e-9, math.inf, 1.0, 2.5)

        restored = read_report(write_report(report, tmp_path / "run.csv"))

        assert restored.rows == report.rows

    def test_header(self, tmp_path):
        """Test the fixed column order."""
        path = write_report(make_report([20.0]), tmp_path / "r.csv")
        assert path.read_text().splitlines()[0] == ",".join(REPORT_COLUMNS)

    def test_rejects_foreign_csv(self, tmp_path):
        """Test that a CSV with another header raises ValueError."""
        path = write_rows(tmp_path / "other.csv", ("image", "status"), [("a.png", "ok")])
        with pytest.raises(ValueError):
            read_report(path)

    def test_rejects_out_of_order_rows(self, tmp_path):
        """Test that decreasing iterations raise ValueError."""
        path = write_rows(tmp_path / "bad.csv", REPORT_COLUMNS, [(10, 1.0, 1.0, 0.1, 0.0), (0, 1.0, 1.0, 0.1, 0.1)])
        with pytest.raises(ValueError):
            read_report(path)

    def test_format_value(self):
        """Test that numpy floats format like Python floats."""
        assert format_value(np.float64(0.1)) == "0.1"
        assert format_value(3) == "3"
        assert format_value("x") == "x"

    def test_report_enforces_order(self):
        """Test that appending a repeated iteration raises ValueError."""
        report = make_report([10.0])
        with pytest.raises(ValueError):
            report.record(0, 0.1, 10.0, 0.5, 1.0)


@pytest.mark.unit
class TestAggregate:
    """Tests for cross-report statistics."""

    def test_mean_and_population_std(self):
        """Test per-iteration mean and population standard deviation."""
        rows = aggregate_reports([make_report([20.0, 30.0]), make_report([24.0, 40.0])], threshold_db=35.0)

        assert [r.iteration for r in rows] == [0, 10]
        assert rows[0].count == 2
        assert rows[0].psnr_mean == pytest.approx(22.0)
        assert rows[0].psnr_std == pytest.approx(2.0)
        assert rows[1].psnr_mean == pytest.approx(35.0)
        assert rows[1].psnr_std == pytest.approx(5.0)

    def test_threshold_is_strict(self):
        """Test that a PSNR equal to the threshold does not count."""
        rows = aggregate_reports([make_report([35.0]), make_report([35.5])], threshold_db=35.0)
        assert rows[0].pct_above_threshold == pytest.approx(50.0)

    def test_uneven_reports(self):
        """Test that iterations sampled by only some reports are counted separately."""
        rows = aggregate_reports([make_report([20.0, 21.0, 22.0]), make_report([20.0])], threshold_db=35.0)
        assert [r.count for r in rows] == [2, 1, 1]

    def test_infinite_psnr(self):
        """Test that infinite PSNR gives an infinite mean and undefined std."""
        rows = aggregate_reports([make_report([math.inf]), make_report([30.0])], threshold_db=35.0)
        assert rows[0].psnr_mean == math.inf
        assert math.isnan(rows[0].psnr_std)
        assert rows[0].pct_above_threshold == pytest.approx(50.0)

    def test_ten_reports_against_hand_statistics(self, rng):
        """Test the aggregate of ten reports against statistics computed directly."""
        psnrs = rng.uniform(20.0, 40.0, size=(10, 3))
        ssims = rng.uniform(0.5, 1.0, size=(10, 3))
        rows = aggregate_reports(
            [make_report(list(p), list(s)) for p, s in zip(psnrs, ssims)], threshold_db=30.0
        )

        assert [r.count for r in rows] == [10, 10, 10]
        for j, row in enumerate(rows):
            assert row.psnr_mean == pytest.approx(psnrs[:, j].mean(), abs=1e-9)
            assert row.psnr_std == pytest.approx(psnrs[:, j].std(), abs=1e-9)
            assert row.ssim_mean == pytest.approx(ssims[:, j].mean(), abs=1e-9)
            assert row.ssim_std == pytest.approx(ssims[:, j].std(), abs=1e-9)
            assert row.pct_above_threshold == pytest.approx(10.0 * np.count_nonzero(psnrs[:, j] > 30.0))

    def test_find_reports(self, tmp_path):
        """Test recursive glob discovery in sorted order."""
        for name in ("b/x.csv", "a/y.csv", "a/z.txt"):
            path = tmp_path / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("")
        found = find_reports(str(tmp_path / "**" / "*.csv"))
        assert [p.relative_to(tmp_path).as_posix() for p in found] == ["a/y.csv", "b/x.csv"]


@pytest.mark.unit
class TestRadiusHistogram:
    """Tests for per-partition radius histograms."""

    def test_partitions_and_totals(self, model_factory, rng):
        """Test that each partition's counts add up to its size."""
        model = model_factory(rng, n=20, k=3, n_low=5, k_low=1)
        rows = radius_histogram(model, bins=4)

        assert {r[0] for r in rows} == {"low", "high"}
        assert sum(r[3] for r in rows if r[0] == "low") == 5
        assert sum(r[3] for r in rows if r[0] == "high") == 15

    def test_single_partition(self, model_factory, rng):
        """Test that an undivided model yields one partition."""
        rows = radius_histogram(model_factory(rng, n=8), bins=3)
        assert [r[0] for r in rows] == ["all"] * 3
        assert sum(r[3] for r in rows) == 8

    def test_max_radius_clamps_into_last_bin(self, model_factory, rng):
        """Test that radii beyond the range are counted in the last bin."""
        model = model_factory(rng, n=10)
        rows = radius_histogram(model, bins=2, max_radius=0.5)
        assert rows[-1][2] == pytest.approx(0.5)
        assert rows[-1][3] == 10

    def test_known_radii(self):
        """Test that isotropic radii 1 and 4 fall in separate halves of [0, 5]."""
        scales = np.array([1.0, 4.0])
        fac = np.column_stack([np.log(1.0 / scales), np.zeros(2), np.log(1.0 / scales)])
        cloud = GaussianCloud(np.zeros((2, 2)), fac)
        model = EigenGaussianModel(cloud, np.ones((2, 1, 1)), 0, 0, 8, 8, ColorSpace.LINEAR)

        rows = radius_histogram(model, bins=2, max_radius=5.0)

        assert [(r[1], r[2]) for r in rows] == [(0.0, 2.5), (2.5, 5.0)]
        assert [r[3] for r in rows] == [1, 1]

    def test_invalid_bins(self, model_factory, rng):
        """Test that zero bins raise ValueError."""
        with pytest.raises(ValueError):
            radius_histogram(model_factory(rng, n=3), bins=0)


@pytest.mark.unit
class TestCurveSvg:
    """Tests for the PSNR chart."""

    @staticmethod
    def layers(svg_text):
        root = ET.fromstring(svg_text)
        return {element.get("id"): element for element in root.iter() if element.get("id")}

    def test_elements(self):
        """Test that the chart has a line, a band and a threshold marker."""
        layers = self.layers(
            render_curve_svg([0, 50, 100], [20.0, 28.0, 33.0], [1.0, 2.0, 1.5], threshold_db=35.0)
        )
        assert {"psnr", "band", "threshold"} <= set(layers)
        assert len(list(layers["psnr"].iter(f"{SVG}use"))) == 3

    def test_non_finite_points_dropped(self):
        """Test that infinite means are left out of the line."""
        layers = self.layers(render_curve_svg([0, 10], [25.0, math.inf]))
        assert len(list(layers["psnr"].iter(f"{SVG}use"))) == 1

    def test_without_optional_layers(self):
        """Test that no band or threshold is drawn unless requested."""
        layers = self.layers(render_curve_svg([0, 10], [25.0, 26.0]))
        assert "psnr" in layers
        assert "band" not in layers
        assert "threshold" not in layers
