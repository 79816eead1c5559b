"""Loading of multichannel CSV time series and detrending/deseasonalization."""

import logging
import re
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from python_pird.exceptions import (
    DataFormatError,
    EmptyDataError,
    MissingColumnError,
    NonFiniteDataError,
    ParameterError,
)
from python_pird.models import PreprocessConfig
from python_pird.var_model import TimeSeriesSet

logger = logging.getLogger(__name__)

DESEASONALIZATION_METHOD = "per-phase mean subtraction"
DETREND_METHOD = "per-channel least-squares linear trend"
HEADER_LINES = 1


class DatasetSpec(BaseModel):
    """Description of a CSV dataset: header row, one column per channel, one row per time point."""

    path: Path = Field(description="CSV file to read.")
    columns: list[str] | None = Field(default=None, description="Channels to keep, in order; all numeric if None.")
    date_column: str | None = Field(default=None, description="Optional date column used to infer seasonal phases.")
    sampling: str = Field(default="monthly", description="Sampling interval descriptor, e.g. 'monthly'.")
    missing_value: float | None = Field(default=None, description="Sentinel marking missing values.")


def _file_line(row: int) -> int:
    """File line of a 0-based data row."""
    return row + HEADER_LINES + 1


def _read(spec: DatasetSpec) -> pd.DataFrame:
    try:
        return pd.read_csv(spec.path, na_values=None if spec.missing_value is None else [spec.missing_value])
    except pd.errors.EmptyDataError as e:
        msg = f"File {spec.path} is empty"
        logger.exception(msg)
        raise EmptyDataError(msg) from e
    except pd.errors.ParserError as e:
        line = re.search(r"line (\d+)", str(e))
        msg = f"Cannot parse {spec.path}" + (f" at line {line.group(1)}" if line else "") + f": {e}"
        logger.exception(msg)
        raise DataFormatError(msg) from e
    except OSError as e:
        msg = f"Cannot read {spec.path}: {e}"
        logger.exception(msg)
        raise DataFormatError(msg) from e


def _phases(frame: pd.DataFrame, spec: DatasetSpec) -> np.ndarray | None:
    if spec.date_column is None:
        return None
    dates = pd.to_datetime(frame[spec.date_column], errors="coerce")
    if dates.isna().any():
        row = int(np.flatnonzero(dates.isna().to_numpy())[0])
        msg = f"Unparseable date in column '{spec.date_column}' at line {_file_line(row)}"
        logger.error(msg)
        raise DataFormatError(msg)
    if spec.sampling == "monthly":
        return (dates.dt.month - 1).to_numpy(dtype=np.int64)
    return None


def load_csv(spec: DatasetSpec) -> TimeSeriesSet:
    """Load selected numeric columns of a CSV file.

    :param DatasetSpec spec: Dataset description
    :return TimeSeriesSet: Samples with column names as labels and, for dated monthly data, month phases
    :raise DataFormatError: If the file cannot be parsed or holds non-numeric entries
    :raise EmptyDataError: If the file has no data rows
    :raise MissingColumnError: If a requested column is absent
    :raise NonFiniteDataError: If a selected entry is missing or non-finite
    """
    frame = _read(spec)
    if frame.empty:
        msg = f"File {spec.path} has no data rows"
        logger.error(msg)
        raise EmptyDataError(msg)

    wanted = [*(spec.columns or []), *([spec.date_column] if spec.date_column else [])]
    if missing := [column for column in wanted if column not in frame.columns]:
        msg = f"Columns not found in {spec.path}: {', '.join(missing)} (available: {', '.join(frame.columns)})"
        logger.error(msg)
        raise MissingColumnError(msg)

    columns = spec.columns or [column for column in frame.columns if column != spec.date_column]
    values = frame[columns].apply(pd.to_numeric, errors="coerce")
    unparsed = values.isna() & frame[columns].notna()
    if unparsed.to_numpy().any():
        row, position = np.argwhere(unparsed.to_numpy())[0]
        column = columns[position]
        msg = f"Non-numeric entry '{frame[column].iloc[row]}' in column '{column}' at line {_file_line(row)}"
        logger.error(msg)
        raise DataFormatError(msg)

    samples = values.to_numpy(dtype=float)
    if not np.all(np.isfinite(samples)):
        row = int(np.flatnonzero(~np.all(np.isfinite(samples), axis=1))[0])
        msg = f"Missing or non-finite value in data row {row + 1} (line {_file_line(row)})"
        logger.error(msg)
        raise NonFiniteDataError(msg)

    logger.info("Loaded %d samples of %d channels from %s", samples.shape[0], samples.shape[1], spec.path)
    return TimeSeriesSet(samples=samples, labels=tuple(str(column) for column in columns), phases=_phases(frame, spec))


def detrend(series: TimeSeriesSet) -> TimeSeriesSet:
    """Remove a least-squares linear trend from every channel.

    :param TimeSeriesSet series: Input series
    :return TimeSeriesSet: Detrended series with zero channel means
    :raise ParameterError: If there are fewer than 3 samples
    """
    if series.n_samples < 3:  # noqa: PLR2004
        msg = f"Detrending needs at least 3 samples, got {series.n_samples}"
        logger.error(msg)
        raise ParameterError(msg)
    time = np.arange(series.n_samples, dtype=float)
    design = np.column_stack((np.ones_like(time), time - time.mean()))
    fit = np.linalg.lstsq(design, series.samples, rcond=None)[0]
    return series.with_samples(series.samples - design @ fit)


def deseasonalize(series: TimeSeriesSet, period: int) -> TimeSeriesSet:
    """Subtract the per-phase mean of every channel.

    Phases come from the series (e.g. calendar months) when known, otherwise from the sample index modulo the
    period.

    :param TimeSeriesSet series: Input series
    :param int period: Seasonal period in samples
    :return TimeSeriesSet: Series whose every phase has zero mean
    :raise ParameterError: If period < 2 or the series is shorter than two periods
    """
    if period < 2:  # noqa: PLR2004
        msg = f"Seasonal period must be >= 2, got {period}"
        logger.error(msg)
        raise ParameterError(msg)
    if series.n_samples < 2 * period:
        msg = f"Deseasonalizing with period {period} needs at least {2 * period} samples, got {series.n_samples}"
        logger.error(msg)
        raise ParameterError(msg)

    phases = (series.phases if series.phases is not None else np.arange(series.n_samples)) % period
    means = pd.DataFrame(series.samples).groupby(phases).transform("mean").to_numpy()
    return series.with_samples(series.samples - means)


def preprocess(series: TimeSeriesSet, config: PreprocessConfig) -> TimeSeriesSet:
    """Apply the configured detrending and deseasonalization in the configured order.

    :param TimeSeriesSet series: Input series
    :param PreprocessConfig config: Preprocessing options
    :return TimeSeriesSet: Preprocessed series
    """
    steps = [
        (config.detrend, "detrend", detrend),
        (config.deseasonalize, "deseasonalize", lambda s: deseasonalize(s, config.period)),
    ]
    if config.deseasonalize_first:
        steps.reverse()
    for enabled, name, step in steps:
        if enabled:
            series = step(series)
            logger.debug("Applied %s", name)
    return series
