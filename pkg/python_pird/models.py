"""Pydantic models for configuration, serialized documents and reports."""

from __future__ import annotations

import math
from enum import StrEnum

from pydantic import BaseModel, Field, model_validator
from python_template_server.models import BaseResponse, TemplateServerConfig


class Units(StrEnum):
    """Units in which information rates are reported."""

    NATS = "nats"
    BITS = "bits"

    @property
    def scale(self) -> float:
        """Factor converting nats to these units."""
        return 1.0 if self is Units.NATS else 1.0 / math.log(2.0)


# Analysis Configuration Models
class GridConfig(BaseModel):
    """Configuration model for the frequency grid."""

    n_frequencies: int = Field(default=1025, ge=3, description="Number of grid points on [0, pi].")


class EstimationConfig(BaseModel):
    """Configuration model for VAR simulation and estimation."""

    max_order: int = Field(default=20, ge=1, description="Largest candidate order for AIC selection.")
    order: int | None = Field(default=None, ge=0, description="Fixed model order; skips AIC selection if set.")
    burn_in: int = Field(default=1000, ge=0, description="Discarded initial samples when simulating.")


class PreprocessConfig(BaseModel):
    """Configuration model for data preprocessing."""

    detrend: bool = Field(default=True, description="Remove a least-squares linear trend per channel.")
    deseasonalize: bool = Field(default=True, description="Subtract the per-phase mean per channel.")
    period: int = Field(default=12, ge=2, description="Seasonal period in samples.")
    deseasonalize_first: bool = Field(default=False, description="Deseasonalize before detrending.")


class SurrogateConfig(BaseModel):
    """Configuration model for surrogate significance testing."""

    n_surrogates: int = Field(default=100, ge=20, description="Number of shuffle surrogates.")
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0, description="Two-sided significance level.")
    workers: int = Field(default=1, ge=1, description="Threads used to analyze surrogates.")


class LatticeConfig(BaseModel):
    """Configuration model for the redundancy lattice."""

    max_sources: int = Field(default=4, ge=1, description="Largest number of sources accepted.")


class AnalysisConfig(BaseModel):
    """Configuration model for the whole analysis."""

    grid: GridConfig = Field(default_factory=GridConfig, description="Frequency grid configuration.")
    estimation: EstimationConfig = Field(default_factory=EstimationConfig, description="VAR configuration.")
    preprocess: PreprocessConfig = Field(default_factory=PreprocessConfig, description="Preprocessing.")
    surrogate: SurrogateConfig = Field(default_factory=SurrogateConfig, description="Surrogate testing.")
    lattice: LatticeConfig = Field(default_factory=LatticeConfig, description="Lattice configuration.")
    units: Units = Field(default=Units.NATS, description="Units of reported rates.")
    consistency_tolerance: float = Field(
        default=1e-6, gt=0.0, description="Largest accepted consistency residual of a decomposition."
    )
    oracle_max_lag: int = Field(default=200, ge=2, description="Block length of the time-domain oracle.")


class PirdServerConfig(TemplateServerConfig):
    """Configuration model for the decomposition server."""

    analysis_config: AnalysisConfig = Field(default_factory=AnalysisConfig, description="Analysis configuration.")


# Serialized Documents
class VarModelDocument(BaseModel):
    """JSON document of a VAR model; matrices are row-major nested arrays."""

    dim: int | None = Field(default=None, description="Number of processes M (checked if given).")
    order: int | None = Field(default=None, description="Number of lags p (checked if given).")
    coeffs: list[list[list[float]]] = Field(description="Lag matrices A_1..A_p, each M x M.")
    innovation_cov: list[list[float]] = Field(description="Innovation covariance, M x M.")

    @model_validator(mode="after")
    def _check_declared_shape(self) -> VarModelDocument:
        if self.dim is not None and self.dim != len(self.innovation_cov):
            msg = f"Declared dim {self.dim} does not match innovation_cov size {len(self.innovation_cov)}"
            raise ValueError(msg)
        if self.order is not None and self.order != len(self.coeffs):
            msg = f"Declared order {self.order} does not match {len(self.coeffs)} coefficient matrices"
            raise ValueError(msg)
        return self


# Decomposition Reports
class PirdSummary(BaseModel):
    """Redundant, unique and synergistic rates of a decomposition."""

    total: float = Field(description="Joint information (rate) between target and all sources.")
    redundancy: float = Field(description="Redundancy R.")
    unique: list[float] = Field(description="Unique information U_i per source.")
    synergy: float = Field(description="Synergy S.")
    residual: float = Field(default=0.0, description="Atoms outside R, U and S (non-zero only for N > 2).")
    units: Units = Field(default=Units.NATS, description="Units of every value.")
    convention: str = Field(description="How atoms were grouped into R, U and S.")

    @property
    def net_synergy(self) -> float:
        """Synergy minus redundancy."""
        return self.synergy - self.redundancy

    def to_units(self, units: Units) -> PirdSummary:
        """Convert the summary to other units.

        :param Units units: Target units
        :return PirdSummary: Converted copy
        """
        factor = units.scale / self.units.scale
        return self.model_copy(
            update={
                "total": self.total * factor,
                "redundancy": self.redundancy * factor,
                "unique": [value * factor for value in self.unique],
                "synergy": self.synergy * factor,
                "residual": self.residual * factor,
                "units": units,
            }
        )


class AtomReport(BaseModel):
    """Rates of one lattice atom."""

    atom: list[list[int]] = Field(description="Atom as nested source indices, e.g. [[1], [2]].")
    label: str = Field(description="Compact atom label, e.g. '{1}{2}'.")
    cumulative: float = Field(description="Redundancy rate of the atom.")
    partial: float = Field(description="Information rate carried by the atom alone.")


class PirdReport(BaseModel):
    """JSON-ready result of a decomposition."""

    target: int = Field(description="Channel index of the target process.")
    sources: list[int] = Field(description="Channel indices of the source processes, in lattice order.")
    labels: list[str] = Field(default_factory=list, description="Channel labels, if known.")
    band: list[float] | None = Field(description="Integration band [lo, hi] in rad/sample, or full band.")
    units: Units = Field(description="Units of every rate.")
    joint_mir: float = Field(description="Mutual information rate between target and all sources.")
    marginal_mirs: list[float] = Field(description="Mutual information rate between target and each source.")
    atoms: list[AtomReport] = Field(description="Per-atom rates in lattice order.")
    residuals: dict[str, float] = Field(description="Consistency residuals of the decomposition.")
    summary: PirdSummary = Field(description="Redundant, unique and synergistic rates.")
    metadata: dict[str, str] = Field(default_factory=dict, description="Conventions used.")


# API Response Models
class DecomposeResponse(BaseResponse):
    """Response model for the decompose endpoint."""

    result: PirdReport = Field(description="Decomposition of the requested model.")


class StaticPidResponse(BaseResponse):
    """Response model for the static PID endpoint."""

    summary: PirdSummary = Field(description="Zero-lag decomposition.")


class SweepRow(BaseModel):
    """One modulation value of a simulation sweep."""

    d: float = Field(description="Modulation parameter.")
    joint_mir: float = Field(description="Joint mutual information rate.")
    zero_lag_mi: float = Field(description="Joint zero-lag mutual information.")
    pird: PirdSummary = Field(description="Rate decomposition.")
    pid: PirdSummary = Field(description="Zero-lag decomposition.")


class SweepResponse(BaseResponse):
    """Response model for the sweep endpoint."""

    rows: list[SweepRow] = Field(description="Sweep rows ordered by d.")


class LatticeResponse(BaseResponse):
    """Response model for the lattice endpoint."""

    atoms: list[list[list[int]]] = Field(description="Atoms in topological order.")
    down_sets: list[list[int]] = Field(description="Indices of strictly preceding atoms per atom.")


# API Request Models
class DecomposeRequest(BaseModel):
    """Request model for decomposing a VAR model."""

    model: VarModelDocument = Field(description="VAR model of the joint process.")
    target: int = Field(ge=0, description="Channel index of the target.")
    sources: list[int] = Field(min_length=1, description="Channel indices of the sources.")
    band: list[float] | None = Field(default=None, min_length=2, max_length=2, description="Band [lo, hi].")
    n_frequencies: int | None = Field(default=None, ge=3, description="Grid size override.")
    units: Units | None = Field(default=None, description="Units override.")


class StaticPidRequest(BaseModel):
    """Request model for a zero-lag decomposition."""

    covariance: list[list[float]] = Field(description="Covariance matrix of all channels.")
    target: int = Field(ge=0, description="Channel index of the target.")
    sources: list[int] = Field(min_length=1, description="Channel indices of the sources.")
    units: Units | None = Field(default=None, description="Units override.")


class SweepRequest(BaseModel):
    """Request model for a simulation sweep."""

    setting: str = Field(description="Sweep setting: 'no-instantaneous' or 'transition'.")
    d_values: list[float] | None = Field(default=None, description="Modulation values; default 0:0.05:1.")
    n_frequencies: int | None = Field(default=None, ge=3, description="Grid size override.")
    units: Units | None = Field(default=None, description="Units override.")
