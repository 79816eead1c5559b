"""Simulation sweeps of a three-node VAR(1) network over a modulation parameter d."""

import logging
from enum import StrEnum

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator

from python_pird.exceptions import ParameterError
from python_pird.models import EstimationConfig, PirdSummary, SweepRow, Units
from python_pird.pipeline import fit_var
from python_pird.pird import decompose, gaussian_mi, static_pid, summarize
from python_pird.spectral import DEFAULT_N_FREQUENCIES, FrequencyGrid
from python_pird.var_model import VarModel, autocovariance, simulate

logger = logging.getLogger(__name__)

CHANNELS = ("x1", "x2", "y")
TARGET = 2
SOURCES = (0, 1)
DEFAULT_D_VALUES = tuple(round(0.05 * step, 2) for step in range(21))
CSV_COLUMNS = [
    "d",
    "joint_mir",
    "pird_R",
    "pird_U1",
    "pird_U2",
    "pird_S",
    "zero_lag_mi",
    "pid_R",
    "pid_U1",
    "pid_U2",
    "pid_S",
]


class SweepSetting(StrEnum):
    """Parameterizations of the network.

    NO_INSTANTANEOUS: lagged coupling towards the target grows with d while source memory fades, without zero-lag
    effects. TRANSITION: zero-lag innovation correlations fade with d while all lagged effects grow.
    """

    NO_INSTANTANEOUS = "no-instantaneous"
    TRANSITION = "transition"

    @classmethod
    def parse(cls, value: str) -> "SweepSetting":
        """Parse a setting by name or by number (1 or 2).

        :param str value: Setting name or number
        :return SweepSetting: The setting
        :raise ParameterError: If the value names no setting
        """
        aliases = {"1": cls.NO_INSTANTANEOUS, "2": cls.TRANSITION}
        try:
            return aliases.get(value) or cls(value)
        except ValueError as e:
            msg = f"Unknown sweep setting '{value}', expected one of: 1, 2, {', '.join(cls)}"
            logger.exception(msg)
            raise ParameterError(msg) from e


class SweepConfig(BaseModel):
    """Configuration of one sweep."""

    setting: SweepSetting = Field(description="Network parameterization.")
    d_values: tuple[float, ...] = Field(default=DEFAULT_D_VALUES, min_length=1, description="Modulation values.")
    n_frequencies: int = Field(default=DEFAULT_N_FREQUENCIES, ge=3, description="Frequency grid size.")
    estimate: bool = Field(default=False, description="Decompose models estimated from simulated data.")
    n_samples: int = Field(default=4096, ge=100, description="Simulated samples per row in estimate mode.")
    estimation: EstimationConfig = Field(
        default_factory=lambda: EstimationConfig(max_order=10), description="VAR options in estimate mode."
    )
    seed: int | None = Field(default=None, description="Master seed in estimate mode.")

    @field_validator("d_values")
    @classmethod
    def _check_d_values(cls, values: tuple[float, ...]) -> tuple[float, ...]:
        if bad := [value for value in values if not 0.0 <= value <= 1.0]:
            msg = f"d values must be within [0, 1], got {bad}"
            raise ValueError(msg)
        return tuple(sorted(values))


def _flatten(summary: PirdSummary) -> list[float]:
    """R, U1, U2, S of a two-source summary."""
    return [summary.redundancy, *summary.unique, summary.synergy]


class SweepResult(BaseModel):
    """Decomposition curves of a sweep, one row per d in increasing order."""

    setting: SweepSetting = Field(description="Network parameterization.")
    estimated: bool = Field(description="Whether rows come from estimated models.")
    rows: list[SweepRow] = Field(description="Sweep rows.")

    def to_frame(self, units: Units = Units.NATS) -> pd.DataFrame:
        """Tabulate the sweep with the columns of :data:`CSV_COLUMNS`.

        :param Units units: Units of every rate
        :return pd.DataFrame: One row per d
        """
        records = []
        for row in self.rows:
            pird, pid = row.pird.to_units(units), row.pid.to_units(units)
            records.append(
                [row.d, row.joint_mir * units.scale, *_flatten(pird), row.zero_lag_mi * units.scale, *_flatten(pid)]
            )
        return pd.DataFrame(records, columns=CSV_COLUMNS)


def build_model(setting: SweepSetting, d: float) -> VarModel:
    """Three-node VAR(1) over channels (x1, x2, y) for modulation d.

    x1 and x2 drive each other and y at lag 1; innovations have unit variance.

    :param SweepSetting setting: Parameterization
    :param float d: Modulation parameter in [0, 1]
    :return VarModel: The model
    :raise ParameterError: If d is outside [0, 1]
    """
    if not 0.0 <= d <= 1.0:
        msg = f"Modulation parameter d must be within [0, 1], got {d}"
        logger.error(msg)
        raise ParameterError(msg)

    cov = np.eye(3)
    if setting is SweepSetting.NO_INSTANTANEOUS:
        a, b, c = 0.8 * (1.0 - d), 0.1, d
    else:
        a, b, c = 0.2 * d, 0.1 * d, 0.6 * d
        cov[0, 1] = cov[1, 0] = 0.25 * (1.0 - d)
        cov[0, 2] = cov[2, 0] = 0.5 * (1.0 - d)
        cov[1, 2] = cov[2, 1] = 0.25 * (1.0 - d)

    coeffs = np.array([[[a, b, 0.0], [b, a, 0.0], [c, c, 0.0]]])
    return VarModel(coeffs=coeffs, innovation_cov=cov)


def zero_lag_covariance(model: VarModel) -> np.ndarray:
    """Process covariance R(0) from the discrete Lyapunov equation of the companion form.

    :param VarModel model: Stable model
    :return np.ndarray: Covariance, shape (M, M)
    """
    return autocovariance(model, 0)[0]


def _true_row(setting: SweepSetting, d: float, grid: FrequencyGrid) -> SweepRow:
    model = build_model(setting, d)
    result = decompose(model, TARGET, SOURCES, grid=grid)
    cov = zero_lag_covariance(model)
    return SweepRow(
        d=d,
        joint_mir=result.joint_mir,
        zero_lag_mi=gaussian_mi(cov, list(SOURCES), [TARGET]),
        pird=summarize(result),
        pid=static_pid(cov, TARGET, SOURCES),
    )


def _estimated_row(config: SweepConfig, d: float, seed: np.random.SeedSequence, grid: FrequencyGrid) -> SweepRow:
    series = simulate(build_model(config.setting, d), config.n_samples, seed=seed, labels=CHANNELS)
    fitted = fit_var(series, config.estimation)
    result = decompose(fitted.model, TARGET, SOURCES, grid=grid)
    cov = np.cov(series.samples, rowvar=False)
    return SweepRow(
        d=d,
        joint_mir=result.joint_mir,
        zero_lag_mi=gaussian_mi(cov, list(SOURCES), [TARGET]),
        pird=summarize(result),
        pid=static_pid(cov, TARGET, SOURCES),
    )


def run_sweep(config: SweepConfig) -> SweepResult:
    """Decompose the network for every d, from true parameters or from estimated models.

    :param SweepConfig config: Sweep configuration
    :return SweepResult: Rows in increasing d
    """
    grid = FrequencyGrid.uniform(config.n_frequencies)
    seeds = np.random.SeedSequence(config.seed).spawn(len(config.d_values))
    rows = [
        _estimated_row(config, d, seed, grid) if config.estimate else _true_row(config.setting, d, grid)
        for d, seed in zip(config.d_values, seeds, strict=True)
    ]
    logger.info("Swept %d values of d in setting '%s'", len(rows), config.setting)
    return SweepResult(setting=config.setting, estimated=config.estimate, rows=rows)
