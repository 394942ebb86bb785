"""Tests for certification sweeps and gap charts."""

import json

import numpy as np
import pandas as pd
import pytest

from diamondnet.models import (
    ADDITIVE_GAP_BOUND,
    CSV_COLUMNS,
    MULTIPLICATIVE_RATIO_BOUND,
    Config,
    SweepSpec,
)
from diamondnet.sweep import SweepRunner, json_scalar
from diamondnet.visualization import GapChartGenerator


def _spec(tmp_path, **overrides):
    values = {
        "n_list": [2, 3],
        "g_min": 0.01,
        "g_max": 100.0,
        "h_min": 0.01,
        "h_max": 100.0,
        "points_per_decade": 1,
        "output": tmp_path / "sweep.csv",
    }
    values.update(overrides)
    return SweepSpec(**values)


def test_default_grid_certifies_gap_constants(tmp_path):
    """Test the gap constants over the default 10 x 33 x 33 grid."""
    config = Config()
    spec = SweepSpec(
        n_list=config.sweep_n_list,
        g_min=config.sweep_gain_min,
        g_max=config.sweep_gain_max,
        h_min=config.sweep_gain_min,
        h_max=config.sweep_gain_max,
        points_per_decade=config.sweep_points_per_decade,
        output=tmp_path / "sweep.csv",
    )

    df, summary = SweepRunner(spec, config, research=False, workers=1).run()

    assert summary.points == 10 * 33 * 33
    assert summary.violations == 0
    assert summary.max_additive_gap.value <= ADDITIVE_GAP_BOUND + 1e-9
    assert summary.max_multiplicative_ratio.value <= MULTIPLICATIVE_RATIO_BOUND * (1.0 + 1e-6)
    assert df["additive_gap"].max() == summary.max_additive_gap.value


def test_sweep_with_searches(tmp_path):
    """Test a small sweep with the numeric searches has no violations."""
    df, summary = SweepRunner(_spec(tmp_path), research=True, workers=1).run()

    assert len(df) == 2 * 5 * 5
    assert summary.violations == 0
    assert df["rho_cutset"].notna().all()
    assert (df["r_bursty_best"] >= df["thm1_lower"] - 1e-9).all()


def test_sweep_csv_output(tmp_path):
    """Test the CSV header and row count."""
    runner = SweepRunner(_spec(tmp_path), research=False, workers=1)
    df, _ = runner.run()

    path = runner.save(df)
    lines = path.read_text(encoding="utf-8").splitlines()

    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 50


def test_sweep_json_output(tmp_path):
    """Test JSON rows use the CSV column names and null for skipped searches."""
    spec = _spec(tmp_path, output=tmp_path / "sweep.json", format="json")
    runner = SweepRunner(spec, research=False, workers=1)
    df, _ = runner.run()

    records = json.loads(runner.save(df).read_text(encoding="utf-8"))

    assert len(records) == 50
    assert list(records[0]) == CSV_COLUMNS
    assert records[0]["rho_cutset"] is None
    assert records[0]["n"] == 2


def test_parallel_sweep_matches_serial(tmp_path):
    """Test worker processes return the same table in grid order."""
    spec = _spec(tmp_path, points_per_decade=3)
    serial, _ = SweepRunner(spec, research=False, workers=1).run()
    parallel, _ = SweepRunner(spec, research=False, workers=2).run()

    assert len(serial) == 2 * 13 * 13
    assert serial.equals(parallel)


def test_json_scalar():
    """Test JSON conversion of table cells."""
    assert json_scalar(float("nan")) is None
    assert json_scalar(None) is None
    assert json_scalar(np.float64(1.5)) == 1.5
    assert isinstance(json_scalar(np.int64(3)), int)
    assert json_scalar("HIGH") == "HIGH"


def test_gap_chart(tmp_path):
    """Test the gap chart is written as SVG."""
    df, _ = SweepRunner(_spec(tmp_path), research=False, workers=1).run()

    path = GapChartGenerator(df).plot_gap_maps(tmp_path / "charts" / "gaps.svg")

    assert path.exists()
    assert "<svg" in path.read_text(encoding="utf-8")


def test_gap_chart_empty_table(tmp_path):
    """Test that an empty table is skipped."""
    assert GapChartGenerator(pd.DataFrame(columns=CSV_COLUMNS)).plot_gap_maps(
        tmp_path / "gaps.svg"
    ) is None


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_sweep_creates_output_directory(tmp_path, fmt):
    """Test that missing parent directories are created."""
    spec = _spec(tmp_path, n_list=[2], output=tmp_path / "nested" / f"sweep.{fmt}", format=fmt)
    runner = SweepRunner(spec, research=False, workers=1)
    df, _ = runner.run()

    assert runner.save(df).exists()
