import numpy as np
import pytest

from drivebc.archive import WindowBatch
from drivebc.evaluation import EvalReport, evaluate_predictions, results_table
from drivebc.plots import (PlotSpec, parse_series_csv, render_plot, render_svg,
                           series_csv)


def fixture_batch(windows_per_clip, horizon=5):
    """Batch with per-window targets set to zero; predictions drive the MAE."""
    n = sum(windows_per_clip)
    seg_index = np.concatenate([np.full(c, i, dtype=np.int64)
                                for i, c in enumerate(windows_per_clip)])
    return WindowBatch(
        features=np.zeros((n, 10, 12)),
        target=np.zeros((n, horizon, 2)),
        raw_target=np.zeros((n, horizon, 2)),
        last_accel=np.zeros((n, 2)),
        segment_ids=[f"clip{i}" for i in range(len(windows_per_clip))],
        segment_index=seg_index,
        start_index=np.zeros(n, dtype=np.int64))


class TestEvaluate:
    def test_perfect_predictor(self):
        batch = fixture_batch([3, 2])
        report = evaluate_predictions(np.zeros((5, 5, 2)), batch)
        assert report.mae_x == 0.0 and report.mae_y == 0.0

    def test_constant_offset(self):
        batch = fixture_batch([2])
        batch.target[:] = [0.5, -0.5]
        report = evaluate_predictions(np.zeros((2, 5, 2)), batch)
        assert np.isclose(report.mae_x, 0.5)
        assert np.isclose(report.mae_y, 0.5)

    def test_unweighted_clip_mean(self):
        # clip0 has 1 window with MAE 0.2; clip1 has 3 windows with MAE 0.4:
        # the aggregate must be 0.3 regardless of the window counts
        batch = fixture_batch([1, 3])
        preds = np.zeros((4, 5, 2))
        preds[0, :, :] = 0.2
        preds[1:, :, :] = 0.4
        report = evaluate_predictions(preds, batch)
        assert np.isclose(report.mae_x, 0.3)
        assert np.isclose(report.mae_y, 0.3)
        assert report.clip_count == 2
        assert np.isclose(report.per_clip["clip0"][0], 0.2)
        assert np.isclose(report.per_clip["clip1"][0], 0.4)

    def test_aggregate_is_mean_of_clips(self):
        rng = np.random.default_rng(0)
        batch = fixture_batch([4, 2, 7])
        preds = rng.normal(size=(13, 5, 2))
        report = evaluate_predictions(preds, batch)
        assert abs(report.mae_x - np.mean([v[0] for v in report.per_clip.values()])) < 1e-12
        assert abs(report.mae_y - np.mean([v[1] for v in report.per_clip.values()])) < 1e-12

    def test_order_invariance(self):
        rng = np.random.default_rng(1)
        batch = fixture_batch([3, 3])
        preds = rng.normal(size=(6, 5, 2))
        r1 = evaluate_predictions(preds, batch)
        perm = np.array([3, 4, 5, 0, 1, 2])
        batch2 = batch.select(perm)
        r2 = evaluate_predictions(preds[perm], batch2)
        assert np.isclose(r1.mae_x, r2.mae_x)
        assert np.isclose(r1.mae_y, r2.mae_y)

    def test_raw_target_diagnostic(self):
        batch = fixture_batch([2])
        batch.raw_target[:] = 1.0
        report = evaluate_predictions(np.zeros((2, 5, 2)), batch)
        assert np.isclose(report.mae_x, 0.0)
        assert np.isclose(report.raw_mae_x, 1.0)

    def test_empty_validation_rejected(self):
        batch = fixture_batch([1]).select(np.array([], dtype=np.int64))
        with pytest.raises(ValueError):
            evaluate_predictions(np.zeros((0, 5, 2)), batch)

    def test_shape_mismatch_rejected(self):
        batch = fixture_batch([1])
        with pytest.raises(ValueError):
            evaluate_predictions(np.zeros((1, 4, 2)), batch)


def report(model, x, y):
    return EvalReport(model_id=model, dataset_id="d", clip_count=1,
                      per_clip={"c": (x, y)}, mae_x=x, mae_y=y)


class TestResultsTable:
    def test_marks_column_minima(self):
        reports = [
            report("dense baseline", 0.4014, 0.4312),
            report("seq model, features only", 0.3179, 0.3088),
            report("seq model + front camera", 0.1379, 0.1278),
            report("seq model + all cameras", 0.1327, 0.1363),
        ]
        text, csv_text = results_table(reports)
        lines = text.splitlines()
        front_row = next(l for l in lines if "front camera" in l)
        all_row = next(l for l in lines if "all cameras" in l)
        assert "0.1278*" in front_row
        assert "0.1327*" in all_row
        assert "0.1379*" not in front_row
        csv_lines = csv_text.splitlines()
        assert csv_lines[0] == "model,mae_x,mae_y,min_x,min_y"
        front_csv = next(l for l in csv_lines if "front camera" in l)
        assert front_csv.endswith("0,1")

    def test_single_report_marked_twice(self):
        text, _ = results_table([report("only", 0.5, 0.25)])
        assert "0.5000*" in text and "0.2500*" in text

    def test_ties_all_marked(self):
        text, csv_text = results_table([report("a", 0.3, 0.4),
                                        report("b", 0.3, 0.5)])
        assert text.count("0.3000*") == 2
        assert sum(line.endswith("1,1") or line.endswith("1,0")
                   for line in csv_text.splitlines()[1:]) == 2

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            results_table([])


class TestPlots:
    def test_identical_series_csv_matches(self):
        frames = np.arange(10, 20)
        series = np.column_stack([np.linspace(-1, 1, 10), np.zeros(10)])
        svg, csv_text = render_plot(frames, series, series)
        parsed_frames, pred, truth = parse_series_csv(csv_text)
        assert np.array_equal(parsed_frames, frames)
        assert np.array_equal(pred, truth)
        assert svg.startswith("<svg")

    def test_clamp_keeps_csv_precision(self):
        frames = np.array([0, 1, 2])
        pred = np.array([[3.0, 0.0], [0.0, 0.0], [-2.5, 0.0]])
        truth = np.zeros((3, 2))
        svg, csv_text = render_plot(frames, pred, truth)
        assert "3.0" in csv_text       # full precision retained
        assert "-2.5" in csv_text
        # clipped points draw an overflow marker at the axis limit
        assert svg.count("<path") >= 2

    def test_out_of_range_values_clamped_in_svg(self):
        frames = np.array([0, 1])
        spec = PlotSpec()
        pred = np.array([[5.0, 0.0], [0.0, 0.0]])
        truth = np.zeros((2, 2))
        svg = render_svg(frames, pred, truth, spec)
        # the polyline must stay inside the panel: y of +5 clamps to y of +2
        top_panel_y = spec.margin_top  # value 2.0 maps to the panel top
        assert f'points="{spec.margin_left:.2f},{top_panel_y:.2f}' in svg

    def test_csv_row_count(self):
        frames = np.arange(7)
        series = np.zeros((7, 2))
        _, csv_text = render_plot(frames, series, series)
        assert len(csv_text.splitlines()) == 8  # header + 7 rows

    def test_round_trip_reproduces_svg_bitwise(self):
        rng = np.random.default_rng(5)
        frames = np.arange(30)
        pred = rng.normal(scale=1.5, size=(30, 2))
        truth = rng.normal(scale=1.5, size=(30, 2))
        svg1, csv_text = render_plot(frames, pred, truth)
        f2, p2, t2 = parse_series_csv(csv_text)
        svg2 = render_svg(f2, p2, t2)
        assert svg1 == svg2

    def test_axis_limits_fixed(self):
        spec = PlotSpec()
        assert spec.y_min == -2.0 and spec.y_max == 2.0
        svg = render_svg(np.arange(3), np.zeros((3, 2)), np.zeros((3, 2)), spec)
        assert ">-2<" in svg and ">2<" in svg  # tick labels at the limits

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            render_plot(np.arange(3), np.zeros((2, 2)), np.zeros((3, 2)))
