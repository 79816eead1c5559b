"""Vector autoregressive models: representation, simulation, estimation and order selection."""

import logging
from collections.abc import Mapping, Sequence
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import null_space, solve_discrete_lyapunov

from python_pird.exceptions import EstimationError, NonFiniteDataError, ParameterError, StabilityError
from python_pird.models import VarModelDocument

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
DEFAULT_BURN_IN = 1000
ESTIMATION_MARGIN = 10
AIC_VARIANT = "AIC(p) = ln det Sigma(p) + 2 p M^2 / T, T = common residual count (max_order dropped)"
COVARIANCE_DIVISOR = "residual covariance divided by the residual count n - p"


def _frozen(array: NDArray[Any]) -> NDArray[Any]:
    array.flags.writeable = False
    return array


class TimeSeriesSet(BaseModel):
    """Multichannel time series, one row per time point."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    samples: np.ndarray = Field(description="Samples, n time points x M channels.")
    labels: tuple[str, ...] = Field(default=(), description="Channel names; generated when empty.")
    phases: np.ndarray | None = Field(default=None, description="Seasonal phase of every sample.")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:  # noqa: ANN401
        if not isinstance(data, dict):
            return data
        samples = np.array(data["samples"], dtype=float)
        if samples.ndim == 1:
            samples = samples[:, np.newaxis]
        data = {**data, "samples": _frozen(samples)}
        if not data.get("labels"):
            data["labels"] = tuple(f"x{channel + 1}" for channel in range(samples.shape[1]))
        if data.get("phases") is not None:
            data["phases"] = _frozen(np.array(data["phases"], dtype=np.int64))
        return data

    @model_validator(mode="after")
    def _check(self) -> "TimeSeriesSet":
        if self.samples.ndim != 2 or self.samples.shape[0] == 0:  # noqa: PLR2004
            msg = f"Time series must be a non-empty n x M matrix, got shape {self.samples.shape}"
            raise ValueError(msg)
        if len(self.labels) != self.samples.shape[1]:
            msg = f"Got {len(self.labels)} labels for {self.samples.shape[1]} channels"
            raise ValueError(msg)
        if self.phases is not None and self.phases.shape != (self.samples.shape[0],):
            msg = f"Phases must have one entry per sample, got shape {self.phases.shape}"
            raise ValueError(msg)
        if not np.all(np.isfinite(self.samples)):
            row = int(np.flatnonzero(~np.all(np.isfinite(self.samples), axis=1))[0])
            msg = f"Time series contains non-finite values (first at sample {row})"
            raise NonFiniteDataError(msg)
        return self

    @property
    def n_samples(self) -> int:
        """Number of time points n."""
        return int(self.samples.shape[0])

    @property
    def n_channels(self) -> int:
        """Number of channels M."""
        return int(self.samples.shape[1])

    def with_samples(self, samples: NDArray[np.float64]) -> "TimeSeriesSet":
        """Copy with new samples, keeping labels and phases.

        :param NDArray samples: Replacement samples of the same shape
        :return TimeSeriesSet: New series
        """
        return TimeSeriesSet(samples=samples, labels=self.labels, phases=self.phases)

    def select(self, channels: Sequence[int]) -> "TimeSeriesSet":
        """Keep the given channels, in the given order.

        :param Sequence[int] channels: 0-based channel indices
        :return TimeSeriesSet: Series restricted to the channels
        """
        return TimeSeriesSet(
            samples=self.samples[:, list(channels)],
            labels=tuple(self.labels[channel] for channel in channels),
            phases=self.phases,
        )


class VarModel(BaseModel):
    """Order-p VAR model x_t = Σ_k A_k x_{t-k} + e_t with Cov(e_t) = Σ.

    Stability is not enforced on construction so unstable fits can be reported; operations that need
    stationarity call :func:`check_stability`.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coeffs: np.ndarray = Field(description="Lag matrices, shape (p, M, M).")
    innovation_cov: np.ndarray = Field(description="Innovation covariance, shape (M, M).")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:  # noqa: ANN401
        if not isinstance(data, dict):
            return data
        cov = np.array(data["innovation_cov"], dtype=float)
        dim = cov.shape[0] if cov.ndim == 2 else 0  # noqa: PLR2004
        coeffs = np.array(data.get("coeffs", []), dtype=float).reshape(-1, dim, dim)
        return {"coeffs": _frozen(coeffs), "innovation_cov": _frozen(cov)}

    @model_validator(mode="after")
    def _check(self) -> "VarModel":
        cov = self.innovation_cov
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] == 0:  # noqa: PLR2004
            msg = f"Innovation covariance must be a non-empty square matrix, got shape {cov.shape}"
            raise ValueError(msg)
        if not np.allclose(cov, cov.T, rtol=0.0, atol=SYMMETRY_TOLERANCE):
            msg = "Innovation covariance is not symmetric"
            raise ValueError(msg)
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as e:
            msg = "Innovation covariance is not positive definite"
            raise ValueError(msg) from e
        return self

    @property
    def dim(self) -> int:
        """Number of processes M."""
        return int(self.innovation_cov.shape[0])

    @property
    def order(self) -> int:
        """Number of lags p."""
        return int(self.coeffs.shape[0])

    @classmethod
    def from_document(cls, document: VarModelDocument) -> "VarModel":
        """Build a model from its JSON document.

        :param VarModelDocument document: Parsed document
        :return VarModel: The model
        """
        return cls.model_validate({"coeffs": document.coeffs, "innovation_cov": document.innovation_cov})

    def to_document(self) -> VarModelDocument:
        """Serialize to the JSON document {dim, order, coeffs, innovation_cov}.

        :return VarModelDocument: The document
        """
        return VarModelDocument(
            dim=self.dim,
            order=self.order,
            coeffs=self.coeffs.tolist(),
            innovation_cov=self.innovation_cov.tolist(),
        )


def companion_matrix(model: VarModel) -> NDArray[np.float64]:
    """Companion matrix of the VAR, shape (Mp, Mp).

    :param VarModel model: The model
    :return NDArray: Companion matrix (empty for p = 0)
    """
    dim, order = model.dim, model.order
    companion = np.zeros((dim * order, dim * order))
    if order:
        companion[:dim, :] = np.hstack(list(model.coeffs))
        companion[dim:, :-dim] = np.eye(dim * (order - 1))
    return companion


def companion_spectral_radius(model: VarModel) -> float:
    """Largest eigenvalue modulus of the companion matrix.

    :param VarModel model: The model
    :return float: Spectral radius, 0 for p = 0
    """
    if model.order == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(companion_matrix(model)))))


def check_stability(model: VarModel) -> float:
    """Ensure the model is stable.

    :param VarModel model: The model
    :return float: Companion spectral radius
    :raise StabilityError: If the spectral radius is not below 1
    """
    if (radius := companion_spectral_radius(model)) >= 1.0:
        msg = f"VAR model is not stable: companion spectral radius {radius:.6f} >= 1"
        logger.error(msg)
        raise StabilityError(msg)
    return radius


def autocovariance(model: VarModel, max_lag: int) -> NDArray[np.float64]:
    """Process autocovariances R(k) = E[x_t x_{t-k}^T] for k = 0..max_lag.

    Lags below p come from the discrete Lyapunov equation of the companion form, higher lags from the
    Yule-Walker recursion R(k) = Σ_j A_j R(k - j).

    :param VarModel model: Stable model
    :param int max_lag: Largest lag
    :return NDArray: Autocovariances, shape (max_lag + 1, M, M)
    :raise StabilityError: If the model is not stable
    """
    check_stability(model)
    dim, order = model.dim, model.order
    lags = np.zeros((max_lag + 1, dim, dim))
    if order == 0:
        lags[0] = model.innovation_cov
        return lags

    noise = np.zeros((dim * order, dim * order))
    noise[:dim, :dim] = model.innovation_cov
    state_cov = solve_discrete_lyapunov(companion_matrix(model), noise)
    for lag in range(min(order, max_lag + 1)):
        lags[lag] = state_cov[:dim, lag * dim : (lag + 1) * dim]
    lags[0] = 0.5 * (lags[0] + lags[0].T)

    for lag in range(order, max_lag + 1):
        lags[lag] = sum(model.coeffs[j - 1] @ lags[lag - j] for j in range(1, order + 1))
    return lags


def simulate(
    model: VarModel,
    n_samples: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int | np.random.SeedSequence | None = None,
    labels: Sequence[str] = (),
) -> TimeSeriesSet:
    """Simulate a realization driven by Gaussian innovations with covariance Σ.

    Correlated innovations are obtained from i.i.d. standard normals through the lower Cholesky factor.

    :param VarModel model: Stable model
    :param int n_samples: Number of returned samples
    :param int burn_in: Discarded initial samples
    :param int | SeedSequence | None seed: Seed of the random generator
    :param Sequence[str] labels: Channel names
    :return TimeSeriesSet: The realization
    :raise StabilityError: If the model is not stable
    :raise ParameterError: If n_samples or burn_in is invalid
    """
    if n_samples <= 0 or burn_in < 0:
        msg = f"Need n_samples > 0 and burn_in >= 0, got {n_samples} and {burn_in}"
        logger.error(msg)
        raise ParameterError(msg)
    check_stability(model)

    rng = np.random.default_rng(seed)
    total = n_samples + burn_in
    factor = np.linalg.cholesky(model.innovation_cov)
    series = rng.standard_normal((total, model.dim)) @ factor.T

    if model.order:
        stacked = np.hstack(list(model.coeffs))
        order = model.order
        for t in range(order, total):
            series[t] += stacked @ series[t - order : t][::-1].ravel()

    logger.debug(
        "Simulated %d samples (burn-in %d) of a %d-channel VAR(%d)", n_samples, burn_in, model.dim, model.order
    )
    return TimeSeriesSet(samples=series[burn_in:], labels=tuple(labels))


def _regression(
    samples: NDArray[np.float64], order: int, start: int
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Stack lagged regressors [x_{t-1}, ..., x_{t-p}] and responses x_t for t = start..n-1."""
    n = samples.shape[0]
    lagged = [samples[start - lag : n - lag] for lag in range(1, order + 1)]
    regressors = np.hstack(lagged) if lagged else np.zeros((n - start, 0))
    return samples[start:], regressors


def _check_channels(series: TimeSeriesSet, centered: NDArray[np.float64]) -> None:
    scale = np.maximum(np.abs(series.samples).max(axis=0), 1.0)
    if constant := [series.labels[channel] for channel in np.flatnonzero(centered.std(axis=0) <= 1e-12 * scale)]:
        msg = f"Rank-deficient regressors: constant channels {', '.join(constant)}"
        logger.error(msg)
        raise EstimationError(msg)


def _fit(
    series: TimeSeriesSet, order: int, start: int
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Least-squares fit on residual rows start..n-1, returning coefficients and residual covariance."""
    dim = series.n_channels
    centered = series.samples - series.samples.mean(axis=0)
    _check_channels(series, centered)
    response, regressors = _regression(centered, order, start)

    if order == 0:
        residuals = response
        coeffs = np.zeros((0, dim, dim))
    else:
        if np.linalg.matrix_rank(regressors) < regressors.shape[1]:
            weights = np.abs(null_space(regressors)).max(axis=1)
            involved = sorted({int(column) % dim for column in np.flatnonzero(weights > 1e-8)})
            msg = "Rank-deficient regressors: collinear channels " + ", ".join(series.labels[c] for c in involved)
            logger.error(msg)
            raise EstimationError(msg)
        solution = np.linalg.lstsq(regressors, response, rcond=None)[0]
        coeffs = np.stack([solution[lag * dim : (lag + 1) * dim].T for lag in range(order)])
        residuals = response - regressors @ solution

    cov = residuals.T @ residuals / residuals.shape[0]
    return coeffs, 0.5 * (cov + cov.T)


def _require_samples(series: TimeSeriesSet, order: int) -> None:
    if series.n_samples <= series.n_channels * order + order + ESTIMATION_MARGIN:
        msg = (
            f"Not enough samples to fit a VAR({order}) on {series.n_channels} channels: "
            f"need more than {series.n_channels * order + order + ESTIMATION_MARGIN}, got {series.n_samples}"
        )
        logger.error(msg)
        raise EstimationError(msg)


def estimate(series: TimeSeriesSet, order: int) -> VarModel:
    """Fit a VAR by ordinary least squares, equation by equation.

    The series is centered first. The innovation covariance is the residual covariance with divisor n - p.

    :param TimeSeriesSet series: Observed series
    :param int order: Model order p >= 0
    :return VarModel: Fitted model
    :raise EstimationError: If there are too few samples or the regressors are rank deficient
    """
    if order < 0:
        msg = f"Model order must be >= 0, got {order}"
        logger.error(msg)
        raise ParameterError(msg)
    _require_samples(series, order)
    coeffs, cov = _fit(series, order, start=order)
    try:
        model = VarModel(coeffs=coeffs, innovation_cov=cov)
    except ValueError as e:
        msg = f"Residual covariance of the VAR({order}) fit is singular"
        logger.exception(msg)
        raise EstimationError(msg) from e
    logger.info("Estimated VAR(%d) on %d samples of %d channels", order, series.n_samples, series.n_channels)
    return model


def information_criteria(series: TimeSeriesSet, max_order: int) -> dict[int, float]:
    """AIC of every candidate order 1..max_order, all fitted on the same residual rows.

    :param TimeSeriesSet series: Observed series
    :param int max_order: Largest candidate order
    :return dict[int, float]: AIC per order
    :raise ParameterError: If max_order < 1
    :raise EstimationError: If a candidate fit fails
    """
    if max_order < 1:
        msg = f"max_order must be >= 1, got {max_order}"
        logger.error(msg)
        raise ParameterError(msg)
    _require_samples(series, max_order)

    dim = series.n_channels
    n_effective = series.n_samples - max_order
    criteria: dict[int, float] = {}
    for order in range(1, max_order + 1):
        _, cov = _fit(series, order, start=max_order)
        sign, logdet = np.linalg.slogdet(cov)
        if sign <= 0:
            msg = f"Residual covariance of the VAR({order}) candidate is singular"
            logger.error(msg)
            raise EstimationError(msg)
        criteria[order] = float(logdet + 2.0 * order * dim**2 / n_effective)
        logger.debug("AIC(%d) = %.6f", order, criteria[order])
    return criteria


def order_from_criteria(criteria: Mapping[int, float]) -> int:
    """Pick the order with the smallest AIC.

    :param Mapping[int, float] criteria: AIC per candidate order
    :return int: Selected order
    """
    selected = min(criteria, key=criteria.__getitem__)
    logger.info("Selected VAR order %d (max_order=%d)", selected, max(criteria))
    return selected


def select_order(series: TimeSeriesSet, max_order: int) -> int:
    """Select the VAR order minimizing the AIC.

    :param TimeSeriesSet series: Observed series
    :param int max_order: Largest candidate order
    :return int: Selected order
    """
    return order_from_criteria(information_criteria(series, max_order))
