"""End-to-end analysis of measured series: preprocess, fit a VAR, decompose."""

import logging
from collections.abc import Sequence
from itertools import combinations

from pydantic import BaseModel, ConfigDict, Field

from python_pird.exceptions import InvalidSelectionError
from python_pird.ingest import preprocess
from python_pird.models import AnalysisConfig, EstimationConfig, PirdSummary
from python_pird.pird import PirdResult, check_selection, decompose, static_pid_from_data, summarize
from python_pird.spectral import FrequencyGrid
from python_pird.var_model import TimeSeriesSet, VarModel, estimate, information_criteria, order_from_criteria

logger = logging.getLogger(__name__)


class FittedVar(BaseModel):
    """VAR model fitted to data together with its order selection."""

    model_config = ConfigDict(frozen=True)

    model: VarModel = Field(description="Least-squares estimate.")
    order: int = Field(description="Order of the model.")
    criteria: dict[int, float] = Field(default_factory=dict, description="AIC per candidate order, empty if fixed.")


class DatasetAnalysis(BaseModel):
    """Decomposition of one target against its sources in measured data.

    Channel indices of ``result`` refer to the analyzed channels: the target is 0, the sources follow in order.
    """

    model_config = ConfigDict(frozen=True)

    channels: tuple[int, ...] = Field(description="Channels of the input series: target first, then the sources.")
    fitted: FittedVar = Field(description="VAR fitted to the analyzed channels.")
    result: PirdResult = Field(description="Rate decomposition of the fitted model.")
    static: PirdSummary = Field(description="Zero-lag decomposition from the sample covariance.")


class PairAnalysis(BaseModel):
    """Decomposition of the target against one pair of candidate sources."""

    sources: tuple[int, int] = Field(description="Channels of the input series used as sources.")
    labels: tuple[str, str] = Field(description="Labels of the two sources.")
    order: int = Field(description="Selected VAR order.")
    summary: PirdSummary = Field(description="Rate decomposition summary.")
    static: PirdSummary = Field(description="Zero-lag decomposition summary.")


def fit_var(series: TimeSeriesSet, estimation: EstimationConfig) -> FittedVar:
    """Fit a VAR with a fixed order or the order minimizing the AIC.

    :param TimeSeriesSet series: Observed, preprocessed series
    :param EstimationConfig estimation: Estimation options
    :return FittedVar: The fitted model and its AIC table
    """
    if estimation.order is not None:
        return FittedVar(model=estimate(series, estimation.order), order=estimation.order)
    criteria = information_criteria(series, estimation.max_order)
    order = order_from_criteria(criteria)
    return FittedVar(model=estimate(series, order), order=order, criteria=criteria)


def analyze_dataset(
    series: TimeSeriesSet,
    target: int,
    sources: Sequence[int],
    config: AnalysisConfig,
    band: Sequence[float] | None = None,
    *,
    preprocessed: bool = False,
) -> DatasetAnalysis:
    """Preprocess, fit a VAR on the target and source channels, and decompose.

    :param TimeSeriesSet series: Observed series
    :param int target: 0-based target channel
    :param Sequence[int] sources: 0-based source channels
    :param AnalysisConfig config: Analysis options
    :param Sequence[float] | None band: Optional integration band
    :param bool preprocessed: Skip preprocessing if the series is already preprocessed
    :return DatasetAnalysis: Fitted model, decomposition and static decomposition
    """
    check_selection(series.n_channels, target, sources)
    channels = (target, *sources)
    selected = series.select(channels)
    if not preprocessed:
        selected = preprocess(selected, config.preprocess)

    fitted = fit_var(selected, config.estimation)
    analyzed_sources = list(range(1, len(channels)))
    result = decompose(
        fitted.model,
        target=0,
        sources=analyzed_sources,
        grid=FrequencyGrid.uniform(config.grid.n_frequencies),
        band=band,
        max_sources=config.lattice.max_sources,
        tolerance=config.consistency_tolerance,
        labels=selected.labels,
    )
    static = static_pid_from_data(selected, 0, analyzed_sources, config.lattice.max_sources)
    return DatasetAnalysis(channels=channels, fitted=fitted, result=result, static=static)


def analyze_source_pairs(
    series: TimeSeriesSet,
    target: int,
    candidates: Sequence[int],
    config: AnalysisConfig,
    band: Sequence[float] | None = None,
) -> list[PairAnalysis]:
    """Decompose the target against every pair of candidate sources, one triplet at a time.

    :param TimeSeriesSet series: Observed series
    :param int target: 0-based target channel
    :param Sequence[int] candidates: 0-based candidate source channels, at least two
    :param AnalysisConfig config: Analysis options
    :param Sequence[float] | None band: Optional integration band
    :return list[PairAnalysis]: One entry per pair, in combination order
    :raise InvalidSelectionError: If fewer than two candidates are given
    """
    if len(candidates) < 2:  # noqa: PLR2004
        msg = f"Pair analysis needs at least two candidate sources, got {list(candidates)}"
        logger.error(msg)
        raise InvalidSelectionError(msg)
    check_selection(series.n_channels, target, candidates)
    prepared = preprocess(series, config.preprocess)

    pairs = []
    for first, second in combinations(candidates, 2):
        analysis = analyze_dataset(prepared, target, [first, second], config, band, preprocessed=True)
        pairs.append(
            PairAnalysis(
                sources=(first, second),
                labels=(series.labels[first], series.labels[second]),
                order=analysis.fitted.order,
                summary=summarize(analysis.result),
                static=analysis.static,
            )
        )
        logger.info("Analyzed source pair (%s, %s)", series.labels[first], series.labels[second])
    return pairs
