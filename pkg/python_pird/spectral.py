"""Cross-spectral densities of VAR models and spectral mutual information rates."""

import logging
import math
from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import trapezoid

from python_pird.exceptions import (
    BandRangeError,
    DegenerateCovarianceError,
    DegenerateSpectrumError,
    InvalidSelectionError,
    NonstationarityError,
    ParameterError,
)
from python_pird.var_model import VarModel, autocovariance, check_stability

logger = logging.getLogger(__name__)

DEFAULT_N_FREQUENCIES = 1025
HERMITIAN_TOLERANCE = 1e-10
PIVOT_THRESHOLD = 1e-12
DECAY_THRESHOLD = 1e-8
BAND_TOLERANCE = 1e-9
QUADRATURE_RULE = "trapezoid on [0, pi]; (1/2pi) integral over [-pi, pi] taken as (1/pi) integral over [0, pi]"


class FrequencyGrid(BaseModel):
    """Normalized angular frequencies on [0, pi] with quadrature weights for (1/pi) ∫_0^pi."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    points: np.ndarray = Field(description="Strictly increasing frequencies, 0 and pi included.")
    weights: np.ndarray = Field(description="Trapezoidal weights; they sum to 1.")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:  # noqa: ANN401
        if not isinstance(data, dict):
            return data
        points = np.array(data["points"], dtype=float)
        if data.get("weights") is None:
            weights = np.zeros_like(points)
            if points.ndim == 1 and points.size > 1:
                steps = np.diff(points)
                weights[:-1] += steps / 2.0
                weights[1:] += steps / 2.0
            weights /= math.pi
        else:
            weights = np.array(data["weights"], dtype=float)
        points.flags.writeable = False
        weights.flags.writeable = False
        return {"points": points, "weights": weights}

    @model_validator(mode="after")
    def _check(self) -> "FrequencyGrid":
        if self.points.ndim != 1 or self.points.size < 2 or self.weights.shape != self.points.shape:  # noqa: PLR2004
            msg = "Frequency grid needs at least two points and one weight per point"
            raise ValueError(msg)
        if np.any(np.diff(self.points) <= 0.0):
            msg = "Frequency grid points must be strictly increasing"
            raise ValueError(msg)
        if abs(self.points[0]) > 1e-12 or abs(self.points[-1] - math.pi) > 1e-12:  # noqa: PLR2004
            msg = f"Frequency grid must span [0, pi], got [{self.points[0]}, {self.points[-1]}]"
            raise ValueError(msg)
        if abs(self.weights.sum() - 1.0) > 1e-12:  # noqa: PLR2004
            msg = f"Quadrature weights must sum to 1, got {self.weights.sum()}"
            raise ValueError(msg)
        return self

    @classmethod
    def uniform(cls, n_points: int = DEFAULT_N_FREQUENCIES) -> "FrequencyGrid":
        """Equally spaced grid with trapezoidal weights.

        :param int n_points: Number of points, at least 2
        :return FrequencyGrid: The grid
        """
        return cls(points=np.linspace(0.0, math.pi, n_points))

    @property
    def n_points(self) -> int:
        """Number of grid points."""
        return int(self.points.size)


class SpectralDensity(BaseModel):
    """Hermitian positive semi-definite cross-spectral matrices P(ω) on a grid."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: FrequencyGrid = Field(description="Frequencies the matrices are evaluated at.")
    matrices: np.ndarray = Field(description="Complex matrices, shape (K, M, M).")

    @model_validator(mode="after")
    def _check(self) -> "SpectralDensity":
        matrices = self.matrices
        expected = (self.grid.n_points, matrices.shape[-1], matrices.shape[-1])
        if matrices.ndim != 3 or matrices.shape != expected:  # noqa: PLR2004
            msg = f"Spectral matrices must have shape ({self.grid.n_points}, M, M), got {matrices.shape}"
            raise ValueError(msg)
        scale = max(1.0, float(np.abs(matrices).max(initial=0.0)))
        if not np.allclose(matrices, matrices.conj().transpose(0, 2, 1), rtol=0.0, atol=HERMITIAN_TOLERANCE * scale):
            msg = "Spectral matrices are not Hermitian"
            logger.error(msg)
            raise DegenerateSpectrumError(msg)
        eigenvalues = np.linalg.eigvalsh(matrices)
        if (floor := float(eigenvalues.min(initial=0.0))) < -HERMITIAN_TOLERANCE * scale:
            omega = self.grid.points[int(np.argmin(eigenvalues.min(axis=1)))]
            msg = f"Spectral matrix is not positive semi-definite at omega={omega:.6f} (eigenvalue {floor:.3e})"
            logger.error(msg)
            raise DegenerateSpectrumError(msg)
        return self

    @property
    def dim(self) -> int:
        """Number of processes M."""
        return int(self.matrices.shape[1])

    def submatrices(self, channels: Sequence[int]) -> NDArray[np.complex128]:
        """Principal submatrices P_channels(ω) at every grid point.

        :param Sequence[int] channels: 0-based channel indices
        :return NDArray: Shape (K, len(channels), len(channels))
        """
        index = np.asarray(channels, dtype=int)
        return self.matrices[:, index[:, np.newaxis], index[np.newaxis, :]]


class OracleEstimate(BaseModel):
    """Time-domain estimate of a mutual information rate."""

    rate: float = Field(description="Increment I_n - I_(n-1) of the block mutual information, nats per sample.")
    max_lag: int = Field(description="Number of blocks n.")
    decayed: bool = Field(description="Whether the autocovariance has decayed at max_lag.")


def var_to_spectrum(model: VarModel, grid: FrequencyGrid) -> SpectralDensity:
    """Spectral density P(ω) = H(ω) Σ H(ω)^H with H(ω) = (I - Σ_k A_k e^{-iωk})^{-1}.

    :param VarModel model: Stable model
    :param FrequencyGrid grid: Frequency grid
    :return SpectralDensity: Spectral matrices on the grid
    :raise NonstationarityError: If I - Σ_k A_k e^{-iωk} is singular at a grid point
    :raise StabilityError: If the model is not stable
    """
    phases = np.exp(-1j * np.outer(grid.points, np.arange(1, model.order + 1)))
    inverse_transfer = np.eye(model.dim) - np.einsum("kl,lij->kij", phases, model.coeffs)

    singular_values = np.linalg.svd(inverse_transfer, compute_uv=False)
    conditioning = singular_values[:, -1] / np.maximum(singular_values[:, 0], 1.0)
    if np.any(conditioning < PIVOT_THRESHOLD):
        omega = grid.points[int(np.argmin(conditioning))]
        msg = f"VAR transfer function is singular at omega={omega:.6f}; the model is not stationary"
        logger.error(msg)
        raise NonstationarityError(msg)
    check_stability(model)

    transfer = np.linalg.inv(inverse_transfer)
    matrices = transfer @ model.innovation_cov @ transfer.conj().transpose(0, 2, 1)
    matrices = 0.5 * (matrices + matrices.conj().transpose(0, 2, 1))
    logger.debug("Computed %d x %d spectral matrices at %d frequencies", model.dim, model.dim, grid.n_points)
    return SpectralDensity(grid=grid, matrices=matrices)


def _check_groups(dim: int, group_a: Sequence[int], group_b: Sequence[int]) -> None:
    if not group_a or not group_b:
        msg = "Both channel groups must be non-empty"
        logger.error(msg)
        raise InvalidSelectionError(msg)
    if set(group_a) & set(group_b):
        msg = f"Channel groups {list(group_a)} and {list(group_b)} overlap"
        logger.error(msg)
        raise InvalidSelectionError(msg)
    if any(not 0 <= channel < dim for channel in (*group_a, *group_b)):
        msg = f"Channel indices must be within 0..{dim - 1}, got {list(group_a)} and {list(group_b)}"
        logger.error(msg)
        raise InvalidSelectionError(msg)


def _logdet(matrices: NDArray[np.complex128], points: NDArray[np.float64]) -> NDArray[np.float64]:
    """Log-determinants of Hermitian matrices via Cholesky, rejecting pivots below the threshold."""
    try:
        factors = np.linalg.cholesky(matrices)
    except np.linalg.LinAlgError as e:
        msg = "Cross-spectral submatrix is singular (Cholesky factorization failed)"
        logger.exception(msg)
        raise DegenerateSpectrumError(msg) from e

    pivots = np.abs(np.diagonal(factors, axis1=1, axis2=2)) ** 2
    scale = np.abs(np.diagonal(matrices, axis1=1, axis2=2)).max(axis=1)
    relative = pivots.min(axis=1) / scale
    if np.any(relative < PIVOT_THRESHOLD):
        omega = points[int(np.argmin(relative))]
        msg = f"Cross-spectral submatrix is singular at omega={omega:.6f} (relative pivot {relative.min():.3e})"
        logger.error(msg)
        raise DegenerateSpectrumError(msg)
    return np.log(pivots).sum(axis=1)


def spectral_mir_profile(
    spec: SpectralDensity, group_a: Sequence[int], group_b: Sequence[int]
) -> NDArray[np.float64]:
    """Spectral MIR density between two channel groups at every grid point.

    i(ω) = ½ log(|P_a(ω)| |P_b(ω)| / |P_ab(ω)|); scalar groups use the scalar determinant.

    :param SpectralDensity spec: Spectral density of the joint process
    :param Sequence[int] group_a: 0-based channels of the first group
    :param Sequence[int] group_b: 0-based channels of the second group
    :return NDArray: Density in nats, shape (K,)
    :raise InvalidSelectionError: If the groups are empty, overlap or exceed the dimension
    :raise DegenerateSpectrumError: If a submatrix is singular
    """
    _check_groups(spec.dim, group_a, group_b)
    points = spec.grid.points
    joint = [*group_a, *group_b]
    return 0.5 * (
        _logdet(spec.submatrices(group_a), points)
        + _logdet(spec.submatrices(group_b), points)
        - _logdet(spec.submatrices(joint), points)
    )


def spectral_mir(spec: SpectralDensity, group: Sequence[int], target_index: int, omega_index: int) -> float:
    """Spectral MIR density between a channel group and a scalar target at one grid point.

    :param SpectralDensity spec: Spectral density of the joint process
    :param Sequence[int] group: 0-based source channels
    :param int target_index: 0-based target channel
    :param int omega_index: Grid point index
    :return float: Density in nats
    """
    _check_groups(spec.dim, group, [target_index])
    matrices = spec.matrices[omega_index : omega_index + 1]
    points = spec.grid.points[omega_index : omega_index + 1]

    def logdet(channels: Sequence[int]) -> float:
        index = np.asarray(channels, dtype=int)
        return float(_logdet(matrices[:, index[:, np.newaxis], index[np.newaxis, :]], points)[0])

    return 0.5 * (logdet(group) + logdet([target_index]) - logdet([*group, target_index]))


def check_band(band: Sequence[float] | None) -> tuple[float, float] | None:
    """Validate an integration band [lo, hi] within [0, pi].

    :param Sequence[float] | None band: Band edges in rad/sample, or None for the full band
    :return tuple[float, float] | None: Validated band
    :raise BandRangeError: If the band is malformed or outside [0, pi]
    """
    if band is None:
        return None
    if len(band) != 2:  # noqa: PLR2004
        msg = f"Band must have exactly two edges, got {list(band)}"
        logger.error(msg)
        raise BandRangeError(msg)
    lo, hi = float(band[0]), float(band[1])
    if math.pi < hi <= math.pi + BAND_TOLERANCE:
        hi = math.pi
    if not 0.0 <= lo < hi <= math.pi:
        msg = f"Band [{band[0]}, {band[1]}] must satisfy 0 <= lo < hi <= pi"
        logger.error(msg)
        raise BandRangeError(msg)
    return lo, hi


def integrate(profile: NDArray[np.float64], grid: FrequencyGrid, band: Sequence[float] | None = None) -> float:
    """Integrate a spectral profile, normalized so the constant 1 integrates to 1 over [0, pi].

    Band limits are interpolated linearly so partial cells count with their exact width.

    :param NDArray profile: Values at the grid points
    :param FrequencyGrid grid: The grid
    :param Sequence[float] | None band: Optional band [lo, hi] within [0, pi]
    :return float: Rate in nats per sample
    :raise BandRangeError: If the band is malformed or outside [0, pi]
    """
    if (edges := check_band(band)) is None:
        return float(np.dot(grid.weights, profile))

    lo, hi = edges
    inside = (grid.points > lo) & (grid.points < hi)
    x = np.concatenate(([lo], grid.points[inside], [hi]))
    y = np.concatenate(([np.interp(lo, grid.points, profile)], profile[inside], [np.interp(hi, grid.points, profile)]))
    return float(trapezoid(y, x) / math.pi)


def block_covariance(lags: NDArray[np.float64], n_blocks: int) -> NDArray[np.float64]:
    """Covariance of the stacked vector (x_t, x_{t-1}, ..., x_{t-n+1}).

    :param NDArray lags: Autocovariances R(k) = E[x_t x_{t-k}^T], shape (L, M, M) with L >= n_blocks
    :param int n_blocks: Number of stacked time points
    :return NDArray: Block-Toeplitz matrix, shape (n M, n M)
    """
    dim = lags.shape[1]
    offsets = np.subtract.outer(np.arange(n_blocks), np.arange(n_blocks))
    blocks = lags[np.abs(offsets)]
    blocks = np.where((offsets > 0)[:, :, np.newaxis, np.newaxis], blocks.transpose(0, 1, 3, 2), blocks)
    return blocks.transpose(0, 2, 1, 3).reshape(n_blocks * dim, n_blocks * dim)


def _block_mi(cov: NDArray[np.float64], index_a: list[int], index_b: list[int]) -> float:
    def logdet(index: list[int]) -> float:
        sign, value = np.linalg.slogdet(cov[np.ix_(index, index)])
        if sign <= 0:
            msg = "Block covariance of the oracle is singular"
            logger.error(msg)
            raise DegenerateCovarianceError(msg)
        return float(value)

    return 0.5 * (logdet(index_a) + logdet(index_b) - logdet(index_a + index_b))


def time_domain_mir_oracle(
    model: VarModel, group_a: Sequence[int], group_b: Sequence[int], max_lag: int
) -> OracleEstimate:
    """Mutual information rate from block-Toeplitz covariances of growing histories.

    :param VarModel model: Stable model
    :param Sequence[int] group_a: 0-based channels of the first group
    :param Sequence[int] group_b: 0-based channels of the second group
    :param int max_lag: Number of blocks n, at least 2
    :return OracleEstimate: Increment I_n - I_(n-1) and the decay flag
    :raise StabilityError: If the model is not stable
    """
    if max_lag < 2:  # noqa: PLR2004
        msg = f"Oracle needs max_lag >= 2, got {max_lag}"
        logger.error(msg)
        raise ParameterError(msg)
    _check_groups(model.dim, group_a, group_b)
    lags = autocovariance(model, max_lag)
    cov = block_covariance(lags, max_lag)

    dim = model.dim

    def indices(group: Sequence[int], n_blocks: int) -> list[int]:
        return [block * dim + channel for block in range(n_blocks) for channel in group]

    current = _block_mi(cov, indices(group_a, max_lag), indices(group_b, max_lag))
    previous = _block_mi(cov, indices(group_a, max_lag - 1), indices(group_b, max_lag - 1))

    decayed = bool(np.abs(lags[max_lag]).max() <= DECAY_THRESHOLD * np.abs(lags[0]).max())
    if not decayed:
        logger.warning("Autocovariance has not decayed at lag %d; the oracle rate may be biased", max_lag)
    return OracleEstimate(rate=current - previous, max_lag=max_lag, decayed=decayed)
