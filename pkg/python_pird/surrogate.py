"""Shuffle surrogates and empirical significance of decomposition rates."""

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from python_pird.exceptions import EstimationError, ParameterError, PirdError
from python_pird.models import AnalysisConfig, PirdSummary, Units
from python_pird.pipeline import analyze_dataset
from python_pird.pird import summarize
from python_pird.var_model import TimeSeriesSet

logger = logging.getLogger(__name__)

MIN_SURROGATES = 20
SIGNIFICANCE_METHOD = "two-sided percentile band of the surrogate distribution"
ORDER_POLICY = "VAR order re-selected by AIC for every surrogate"


def shuffle_surrogate(series: TimeSeriesSet, seed: int | np.random.SeedSequence | None) -> TimeSeriesSet:
    """Permute time points with one random permutation shared by all channels.

    Temporal structure is destroyed while zero-lag cross-covariances are preserved.

    :param TimeSeriesSet series: Original series
    :param int | SeedSequence | None seed: Seed of the permutation
    :return TimeSeriesSet: Row-permuted series without seasonal phases
    :raise ParameterError: If the series has fewer than 2 samples
    """
    if series.n_samples < 2:  # noqa: PLR2004
        msg = f"Shuffling needs at least 2 samples, got {series.n_samples}"
        logger.error(msg)
        raise ParameterError(msg)
    permutation = np.random.default_rng(seed).permutation(series.n_samples)
    return TimeSeriesSet(samples=series.samples[permutation], labels=series.labels)


def quantities(summary: PirdSummary, joint_mir: float) -> dict[str, float]:
    """Tested quantities of one decomposition.

    :param PirdSummary summary: Decomposition summary
    :param float joint_mir: Joint MIR
    :return dict[str, float]: Quantity values keyed by name
    """
    values = {"joint_mir": joint_mir, "redundancy": summary.redundancy}
    values.update({f"unique_{source}": value for source, value in enumerate(summary.unique, start=1)})
    values.update({"synergy": summary.synergy, "net_synergy": summary.net_synergy})
    return values


class QuantityTest(BaseModel):
    """Significance of one quantity against its surrogate distribution."""

    name: str = Field(description="Quantity name.")
    original: float = Field(description="Value on the original data.")
    lower: float = Field(description="Lower percentile of the surrogate distribution.")
    upper: float = Field(description="Upper percentile of the surrogate distribution.")
    significant: bool = Field(description="Whether the original value lies outside [lower, upper].")


class SurrogateEnsemble(BaseModel):
    """Decompositions of all successful surrogates."""

    count: int = Field(description="Number of surrogates requested.")
    seed: int | None = Field(description="Master seed.")
    orders: list[int] = Field(description="Selected VAR order per successful surrogate.")
    summaries: list[PirdSummary] = Field(description="Decomposition summary per successful surrogate.")
    values: list[dict[str, float]] = Field(description="Tested quantities per successful surrogate.")
    n_failed: int = Field(default=0, description="Surrogates whose analysis failed.")
    thresholds: dict[str, tuple[float, float]] = Field(
        default_factory=dict, description="Lower and upper percentile per quantity."
    )

    def to_frame(self) -> pd.DataFrame:
        """Tabulate the surrogate distributions, one row per successful surrogate.

        :return pd.DataFrame: Columns ``surrogate``, ``order`` and one per quantity
        """
        frame = pd.DataFrame(self.values)
        frame.insert(0, "order", self.orders)
        frame.insert(0, "surrogate", range(len(self.values)))
        return frame


class SignificanceReport(BaseModel):
    """Surrogate test of every decomposition quantity."""

    target: int = Field(description="0-based target channel.")
    sources: list[int] = Field(description="0-based source channels.")
    alpha: float = Field(description="Two-sided significance level.")
    percentiles: tuple[float, float] = Field(description="Percentiles bounding the surrogate band.")
    order: int = Field(description="VAR order selected on the original data.")
    original: PirdSummary = Field(description="Decomposition of the original data.")
    tests: list[QuantityTest] = Field(description="Test per quantity.")
    ensemble: SurrogateEnsemble = Field(description="Surrogate decompositions.")
    metadata: dict[str, str] = Field(default_factory=dict, description="Conventions used.")

    def to_units(self, units: Units) -> "SignificanceReport":
        """Convert every rate of the report, originals and surrogates alike, to other units.

        :param Units units: Target units
        :return SignificanceReport: Converted copy
        """
        factor = units.scale / self.original.units.scale
        ensemble = self.ensemble.model_copy(
            update={
                "summaries": [summary.to_units(units) for summary in self.ensemble.summaries],
                "values": [{name: value * factor for name, value in values.items()} for values in self.ensemble.values],
                "thresholds": {
                    name: (lower * factor, upper * factor) for name, (lower, upper) in self.ensemble.thresholds.items()
                },
            }
        )
        tests = [
            test.model_copy(
                update={"original": test.original * factor, "lower": test.lower * factor, "upper": test.upper * factor}
            )
            for test in self.tests
        ]
        return self.model_copy(update={"original": self.original.to_units(units), "tests": tests, "ensemble": ensemble})

    def test(self, name: str) -> QuantityTest:
        """Test of one quantity.

        :param str name: Quantity name, e.g. ``joint_mir``
        :return QuantityTest: The test
        """
        return next(test for test in self.tests if test.name == name)


def significance(
    series: TimeSeriesSet,
    target: int,
    sources: Sequence[int],
    n_surrogates: int = 100,
    alpha: float = 0.05,
    seed: int | None = None,
    config: AnalysisConfig | None = None,
    workers: int = 1,
) -> SignificanceReport:
    """Test decomposition rates against shuffle surrogates of the same series.

    The original and every surrogate go through order selection, estimation and decomposition; surrogate seeds
    are spawned from the master seed so the report does not depend on ``workers``.

    :param TimeSeriesSet series: Preprocessed series
    :param int target: 0-based target channel
    :param Sequence[int] sources: 0-based source channels
    :param int n_surrogates: Number of surrogates, at least 20
    :param float alpha: Two-sided significance level
    :param int | None seed: Master seed
    :param AnalysisConfig | None config: Analysis options; preprocessing is not applied
    :param int workers: Threads analyzing surrogates
    :return SignificanceReport: Tests, surrogate distributions and failure count
    :raise ParameterError: If n_surrogates, alpha or workers is out of range
    :raise EstimationError: If every surrogate fails
    """
    if n_surrogates < MIN_SURROGATES or not 0.0 < alpha < 1.0 or workers < 1:
        msg = (
            f"Need n_surrogates >= {MIN_SURROGATES}, 0 < alpha < 1 and workers >= 1, "
            f"got {n_surrogates}, {alpha} and {workers}"
        )
        logger.error(msg)
        raise ParameterError(msg)
    config = config or AnalysisConfig()

    original = analyze_dataset(series, target, sources, config, preprocessed=True)
    original_summary = summarize(original.result)
    original_values = quantities(original_summary, original.result.joint_mir)

    def analyze(child: np.random.SeedSequence) -> tuple[int, PirdSummary, dict[str, float]] | None:
        try:
            analysis = analyze_dataset(shuffle_surrogate(series, child), target, sources, config, preprocessed=True)
        except PirdError as e:
            logger.warning("Surrogate analysis failed: %s", e)
            return None
        summary = summarize(analysis.result)
        return analysis.fitted.order, summary, quantities(summary, analysis.result.joint_mir)

    children = np.random.SeedSequence(seed).spawn(n_surrogates)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        outcomes = list(executor.map(analyze, children))
    succeeded = [outcome for outcome in outcomes if outcome is not None]
    if not succeeded:
        msg = f"All {n_surrogates} surrogate analyses failed"
        logger.error(msg)
        raise EstimationError(msg)

    percentiles = (100.0 * alpha / 2.0, 100.0 * (1.0 - alpha / 2.0))
    thresholds: dict[str, tuple[float, float]] = {}
    tests = []
    for name, value in original_values.items():
        lower, upper = np.percentile([values[name] for _, _, values in succeeded], percentiles)
        thresholds[name] = (float(lower), float(upper))
        tests.append(
            QuantityTest(
                name=name, original=value, lower=lower, upper=upper, significant=bool(value < lower or value > upper)
            )
        )

    ensemble = SurrogateEnsemble(
        count=n_surrogates,
        seed=seed,
        orders=[order for order, _, _ in succeeded],
        summaries=[summary for _, summary, _ in succeeded],
        values=[values for _, _, values in succeeded],
        n_failed=n_surrogates - len(succeeded),
        thresholds=thresholds,
    )
    logger.info(
        "Tested %d quantities against %d surrogates (%d failed)", len(tests), n_surrogates, ensemble.n_failed
    )
    return SignificanceReport(
        target=target,
        sources=list(sources),
        alpha=alpha,
        percentiles=percentiles,
        order=original.fitted.order,
        original=original_summary,
        tests=tests,
        ensemble=ensemble,
        metadata={"significance": SIGNIFICANCE_METHOD, "order_selection": ORDER_POLICY},
    )
