"""Unit tests for the python_pird.ingest module."""

from pathlib import Path

import numpy as np
import pytest

from python_pird.exceptions import (
    DataFormatError,
    EmptyDataError,
    MissingColumnError,
    NonFiniteDataError,
    ParameterError,
)
from python_pird.ingest import DatasetSpec, deseasonalize, detrend, load_csv, preprocess
from python_pird.models import PreprocessConfig
from python_pird.var_model import TimeSeriesSet


def write_csv(directory: Path, text: str) -> Path:
    """Write CSV text to a file."""
    path = directory / "input.csv"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    """Unit tests for the load_csv function."""

    def test_selected_columns(self, mock_csv_file: Path) -> None:
        """Test selected columns are loaded in order with their names."""
        series = load_csv(DatasetSpec(path=mock_csv_file, columns=["c", "a"]))
        assert series.labels == ("c", "a")
        assert series.n_samples == 240
        assert series.phases is None

    def test_all_numeric_columns(self, mock_csv_file: Path) -> None:
        """Test every column except the date column is loaded by default."""
        series = load_csv(DatasetSpec(path=mock_csv_file, date_column="date"))
        assert series.labels == ("a", "b", "c")
        np.testing.assert_array_equal(series.phases[:13], [*range(12), 0])

    def test_missing_column(self, mock_csv_file: Path) -> None:
        """Test an absent column is named."""
        with pytest.raises(MissingColumnError, match="Columns not found .*: d"):
            load_csv(DatasetSpec(path=mock_csv_file, columns=["a", "d"]))

    def test_non_numeric(self, tmp_path: Path) -> None:
        """Test a non-numeric entry is reported with its line."""
        path = write_csv(tmp_path, "a,b\n1.0,2.0\n3.0,oops\n5.0,6.0\n")
        with pytest.raises(DataFormatError, match="'oops' in column 'b' at line 3"):
            load_csv(DatasetSpec(path=path))

    def test_missing_value(self, tmp_path: Path) -> None:
        """Test an empty field is reported as a missing value with its line."""
        path = write_csv(tmp_path, "a,b\n1.0,2.0\n3.0,4.0\n,6.0\n")
        with pytest.raises(NonFiniteDataError, match="data row 3 \\(line 4\\)"):
            load_csv(DatasetSpec(path=path))

    def test_sentinel(self, tmp_path: Path) -> None:
        """Test the missing-value sentinel marks missing data."""
        path = write_csv(tmp_path, "a,b\n1.0,-999\n3.0,4.0\n")
        with pytest.raises(NonFiniteDataError, match="data row 1"):
            load_csv(DatasetSpec(path=path, missing_value=-999.0))

    def test_infinite(self, tmp_path: Path) -> None:
        """Test infinite entries are rejected."""
        path = write_csv(tmp_path, "a,b\n1.0,inf\n3.0,4.0\n")
        with pytest.raises(NonFiniteDataError):
            load_csv(DatasetSpec(path=path))

    def test_header_only(self, tmp_path: Path) -> None:
        """Test a file without data rows is rejected."""
        path = write_csv(tmp_path, "a,b\n")
        with pytest.raises(EmptyDataError, match="no data rows"):
            load_csv(DatasetSpec(path=path))

    def test_empty_file(self, tmp_path: Path) -> None:
        """Test an empty file is rejected."""
        path = write_csv(tmp_path, "")
        with pytest.raises(EmptyDataError):
            load_csv(DatasetSpec(path=path))

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test an unreadable file is reported."""
        with pytest.raises(DataFormatError, match="Cannot read"):
            load_csv(DatasetSpec(path=tmp_path / "absent.csv"))

    def test_ragged_rows(self, tmp_path: Path) -> None:
        """Test a row with too many fields is reported with its line."""
        path = write_csv(tmp_path, "a,b\n1.0,2.0\n3.0,4.0,5.0\n")
        with pytest.raises(DataFormatError, match="line 3"):
            load_csv(DatasetSpec(path=path))

    def test_bad_date(self, tmp_path: Path) -> None:
        """Test an unparseable date is reported with its line."""
        path = write_csv(tmp_path, "date,a\n2000-01-01,1.0\nnever,2.0\n")
        with pytest.raises(DataFormatError, match="line 3"):
            load_csv(DatasetSpec(path=path, date_column="date"))


class TestPreprocess:
    """Unit tests for detrending and deseasonalization."""

    def test_detrend(self) -> None:
        """Test a linear trend is removed exactly."""
        time = np.arange(50, dtype=float)
        series = TimeSeriesSet(samples=np.column_stack((2.0 + 3.0 * time, -time)))
        np.testing.assert_allclose(detrend(series).samples, 0.0, atol=1e-10)

    def test_detrend_too_short(self) -> None:
        """Test detrending needs three samples."""
        with pytest.raises(ParameterError):
            detrend(TimeSeriesSet(samples=np.arange(2.0)))

    def test_deseasonalize(self) -> None:
        """Test every phase has zero mean afterwards."""
        rng = np.random.default_rng(0)
        samples = rng.standard_normal((48, 2)) + np.tile(np.arange(12.0), 4)[:, np.newaxis]
        result = deseasonalize(TimeSeriesSet(samples=samples), 12)
        phase_means = result.samples.reshape(4, 12, 2).mean(axis=0)
        np.testing.assert_allclose(phase_means, 0.0, atol=1e-12)

    def test_deseasonalize_uses_phases(self) -> None:
        """Test known phases take precedence over the sample index."""
        samples = np.array([1.0, 5.0, 3.0, 7.0])
        series = TimeSeriesSet(samples=samples, phases=np.array([1, 0, 1, 0]))
        np.testing.assert_allclose(deseasonalize(series, 2).samples[:, 0], [-1.0, -1.0, 1.0, 1.0])

    @pytest.mark.parametrize(("n_samples", "period"), [(48, 1), (20, 12)])
    def test_deseasonalize_invalid(self, n_samples: int, period: int) -> None:
        """Test periods below 2 and series shorter than two periods are rejected."""
        with pytest.raises(ParameterError):
            deseasonalize(TimeSeriesSet(samples=np.zeros(n_samples)), period)

    def test_order_matters(self, mock_csv_file: Path) -> None:
        """Test both preprocessing orders are available and differ in general."""
        series = load_csv(DatasetSpec(path=mock_csv_file, columns=["a"]))
        default = preprocess(series, PreprocessConfig(period=12))
        swapped = preprocess(series, PreprocessConfig(period=12, deseasonalize_first=True))
        assert not np.allclose(default.samples, swapped.samples)

    def test_disabled(self, mock_series: TimeSeriesSet) -> None:
        """Test disabled steps leave the series unchanged."""
        result = preprocess(mock_series, PreprocessConfig(detrend=False, deseasonalize=False))
        np.testing.assert_array_equal(result.samples, mock_series.samples)

    def test_idempotent(self) -> None:
        """Test a second pass of either step leaves trend, season and AR data unchanged."""
        rng = np.random.default_rng(12)
        noise = rng.standard_normal((240, 2))
        for t in range(1, 240):
            noise[t] += 0.5 * noise[t - 1]
        time = np.arange(240, dtype=float)
        samples = noise + 0.02 * time[:, np.newaxis] + 3.0 * np.sin(2.0 * np.pi * time / 12.0)[:, np.newaxis]
        series = TimeSeriesSet(samples=samples)

        detrended = detrend(series)
        np.testing.assert_allclose(detrend(detrended).samples, detrended.samples, rtol=0.0, atol=1e-10)
        deseasonalized = deseasonalize(series, 12)
        np.testing.assert_allclose(
            deseasonalize(deseasonalized, 12).samples, deseasonalized.samples, rtol=0.0, atol=1e-10
        )
        phase_means = deseasonalized.samples.reshape(20, 12, 2).mean(axis=0)
        np.testing.assert_allclose(phase_means, 0.0, atol=1e-10)
