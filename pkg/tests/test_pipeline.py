"""Unit tests for the python_pird.pipeline module."""

from pathlib import Path

import pytest

from python_pird.exceptions import InvalidSelectionError
from python_pird.ingest import DatasetSpec, load_csv
from python_pird.models import AnalysisConfig, EstimationConfig
from python_pird.pipeline import analyze_dataset, analyze_source_pairs, fit_var
from python_pird.pird import summarize
from python_pird.var_model import TimeSeriesSet


@pytest.fixture
def mock_dataset(mock_csv_file: Path) -> TimeSeriesSet:
    """Provide the monthly dataset with month phases."""
    return load_csv(DatasetSpec(path=mock_csv_file, date_column="date"))


class TestFitVar:
    """Unit tests for the fit_var function."""

    def test_fixed_order(self, mock_series: TimeSeriesSet) -> None:
        """Test a fixed order skips selection."""
        fitted = fit_var(mock_series, EstimationConfig(order=2))
        assert fitted.order == 2
        assert fitted.model.order == 2
        assert fitted.criteria == {}

    def test_selected_order(self, mock_series: TimeSeriesSet) -> None:
        """Test the selected order minimizes the criterion."""
        fitted = fit_var(mock_series, EstimationConfig(max_order=3))
        assert list(fitted.criteria) == [1, 2, 3]
        assert fitted.order == min(fitted.criteria, key=fitted.criteria.__getitem__)
        assert fitted.model.order == fitted.order


class TestAnalyzeDataset:
    """Unit tests for the analyze_dataset function."""

    def test_driven_target(self, mock_dataset: TimeSeriesSet, mock_analysis_config: AnalysisConfig) -> None:
        """Test the driving channel carries more unique information than the unrelated one."""
        analysis = analyze_dataset(mock_dataset, 2, [0, 1], mock_analysis_config)
        summary = summarize(analysis.result)
        assert analysis.channels == (2, 0, 1)
        assert analysis.result.labels == ("c", "a", "b")
        assert analysis.result.target == 0
        assert analysis.result.sources == (1, 2)
        assert summary.unique[0] > summary.unique[1]
        assert analysis.result.joint_mir > 0.05
        assert len(analysis.static.unique) == 2

    def test_band(self, mock_dataset: TimeSeriesSet, mock_analysis_config: AnalysisConfig) -> None:
        """Test the band is passed through."""
        analysis = analyze_dataset(mock_dataset, 2, [0, 1], mock_analysis_config, band=[0.0, 0.5])
        assert analysis.result.band == (0.0, 0.5)

    def test_invalid_selection(self, mock_dataset: TimeSeriesSet, mock_analysis_config: AnalysisConfig) -> None:
        """Test the target cannot be a source."""
        with pytest.raises(InvalidSelectionError):
            analyze_dataset(mock_dataset, 0, [0, 1], mock_analysis_config)


class TestAnalyzeSourcePairs:
    """Unit tests for the analyze_source_pairs function."""

    def test_pairs(self, mock_dataset: TimeSeriesSet, mock_analysis_config: AnalysisConfig) -> None:
        """Test one decomposition per pair of candidates."""
        pairs = analyze_source_pairs(mock_dataset, 1, [0, 2], mock_analysis_config)
        assert len(pairs) == 1
        assert pairs[0].sources == (0, 2)
        assert pairs[0].labels == ("a", "c")
        assert len(pairs[0].summary.unique) == 2

    def test_single_candidate(self, mock_dataset: TimeSeriesSet, mock_analysis_config: AnalysisConfig) -> None:
        """Test at least two candidates are required."""
        with pytest.raises(InvalidSelectionError, match="at least two"):
            analyze_source_pairs(mock_dataset, 2, [0], mock_analysis_config)
