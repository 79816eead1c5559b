"""Partial information rate decomposition by frequency-wise minimum mutual information."""

import logging
from collections.abc import Mapping, Sequence
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from python_pird.exceptions import ConsistencyError, DegenerateCovarianceError, InvalidSelectionError, ParameterError
from python_pird.lattice import (
    DEFAULT_MAX_SOURCES,
    Atom,
    AtomValues,
    RedundancyLattice,
    SourceSet,
    accumulate,
    enumerate_atoms,
    format_atom,
)
from python_pird.models import AtomReport, PirdReport, PirdSummary, Units
from python_pird.spectral import (
    QUADRATURE_RULE,
    FrequencyGrid,
    SpectralDensity,
    check_band,
    integrate,
    spectral_mir,
    spectral_mir_profile,
    time_domain_mir_oracle,
    var_to_spectrum,
)
from python_pird.var_model import TimeSeriesSet, VarModel

logger = logging.getLogger(__name__)

CONSISTENCY_TOLERANCE = 1e-6
NEGATIVITY_TOLERANCE = 1e-9
ZERO_PROFILE_THRESHOLD = 1e-14
PIVOT_THRESHOLD = 1e-12
REDUNDANCY_MEASURE = "minimum mutual information over the groups of an atom, pointwise in frequency"
CONVENTION_N1 = "N=1: U1 = joint information"
CONVENTION_N2 = "N=2: R = {1}{2}, U_i = {i}, S = {12}"
CONVENTION_GENERAL = (
    "non-canonical: R = bottom atom, U_i = {i}, S = atoms whose every group has >= 2 sources, "
    "residual = all other atoms"
)


def check_selection(dim: int, target: int, sources: Sequence[int]) -> None:
    """Validate a target channel and its source channels.

    :param int dim: Number of channels
    :param int target: 0-based target channel
    :param Sequence[int] sources: 0-based source channels
    :raise InvalidSelectionError: If indices are out of range, duplicated or the target is a source
    """
    if not sources:
        msg = "At least one source channel is required"
        logger.error(msg)
        raise InvalidSelectionError(msg)
    if any(not 0 <= channel < dim for channel in (target, *sources)):
        msg = f"Channel indices must be within 0..{dim - 1}, got target {target} and sources {list(sources)}"
        logger.error(msg)
        raise InvalidSelectionError(msg)
    if len(set(sources)) != len(sources):
        msg = f"Source channels must be unique, got {list(sources)}"
        logger.error(msg)
        raise InvalidSelectionError(msg)
    if target in sources:
        msg = f"Target channel {target} is also a source"
        logger.error(msg)
        raise InvalidSelectionError(msg)


def _channels(group: SourceSet, sources: Sequence[int]) -> list[int]:
    """Map 1-based source indices of a lattice group to data channels."""
    return [sources[member - 1] for member in group]


def _groups(lattice: RedundancyLattice) -> list[SourceSet]:
    return sorted({group for atom in lattice.atoms for group in atom}, key=lambda group: (len(group), group))


class PirdResult(BaseModel):
    """Rates and spectral profiles of every atom of one decomposition."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lattice: RedundancyLattice = Field(description="Lattice over the sources.")
    target: int = Field(description="0-based target channel.")
    sources: tuple[int, ...] = Field(description="0-based source channels; source i of the lattice is sources[i-1].")
    labels: tuple[str, ...] = Field(default=(), description="Channel labels, if known.")
    values: AtomValues = Field(description="Redundancy rates and atom rates in nats per sample.")
    cumulative_profiles: np.ndarray = Field(description="Redundancy-rate densities, shape (atoms, K).")
    partial_profiles: np.ndarray = Field(description="Atom-rate densities, shape (atoms, K).")
    grid: FrequencyGrid = Field(description="Frequency grid of the profiles.")
    band: tuple[float, float] | None = Field(default=None, description="Integration band, or None for [0, pi].")
    joint_mir: float = Field(description="MIR between the target and all sources.")
    marginal_mirs: tuple[float, ...] = Field(description="MIR between the target and each source.")
    residuals: dict[str, float] = Field(description="Absolute consistency residuals.")

    @cached_property
    def cumulative_rates(self) -> dict[Atom, float]:
        """Redundancy rate of every atom."""
        return self.values.cumulative_map()

    @cached_property
    def atom_rates(self) -> dict[Atom, float]:
        """Information rate of every atom."""
        return self.values.partial_map()

    @cached_property
    def spectral_profiles(self) -> dict[Atom, NDArray[np.float64]]:
        """Redundancy-rate density of every atom."""
        return dict(zip(self.lattice.atoms, self.cumulative_profiles, strict=True))

    @property
    def n_sources(self) -> int:
        """Number of sources N."""
        return self.lattice.n_sources

    def zero_atoms(self) -> set[Atom]:
        """Atoms whose atom-rate density is below the clamping threshold at every frequency."""
        peaks = np.abs(self.partial_profiles).max(axis=1)
        return {atom for atom, peak in zip(self.lattice.atoms, peaks, strict=True) if peak < ZERO_PROFILE_THRESHOLD}

    def to_report(self, units: Units = Units.NATS) -> PirdReport:
        """Build the JSON-ready report.

        :param Units units: Units of every reported rate
        :return PirdReport: The report
        """
        scale = units.scale
        atoms = [
            AtomReport(
                atom=[list(group) for group in atom],
                label=format_atom(atom),
                cumulative=cumulative * scale,
                partial=partial * scale,
            )
            for atom, cumulative, partial in zip(
                self.values.atoms, self.values.cumulative, self.values.partial, strict=True
            )
        ]
        return PirdReport(
            target=self.target,
            sources=list(self.sources),
            labels=list(self.labels),
            band=list(self.band) if self.band else None,
            units=units,
            joint_mir=self.joint_mir * scale,
            marginal_mirs=[value * scale for value in self.marginal_mirs],
            atoms=atoms,
            residuals=self.residuals,
            summary=summarize(self).to_units(units),
            metadata={
                "redundancy": REDUNDANCY_MEASURE,
                "quadrature": QUADRATURE_RULE,
                "n_frequencies": str(self.grid.n_points),
                "convention": summary_convention(self.n_sources),
            },
        )


def spectral_redundancy(
    spec: SpectralDensity, atom: Atom, target: int, omega_index: int, sources: Sequence[int]
) -> float:
    """Redundancy-rate density of an atom at one frequency: the minimum spectral MIR over its groups.

    :param SpectralDensity spec: Spectral density of the joint process
    :param Atom atom: Lattice atom over 1-based source indices
    :param int target: 0-based target channel
    :param int omega_index: Grid point index
    :param Sequence[int] sources: 0-based channel of each source
    :return float: Density in nats
    """
    return min(spectral_mir(spec, _channels(group, sources), target, omega_index) for group in atom)


def _cumulative_profiles(
    spec: SpectralDensity, lattice: RedundancyLattice, target: int, sources: Sequence[int]
) -> tuple[NDArray[np.float64], dict[SourceSet, NDArray[np.float64]]]:
    group_profiles = {
        group: spectral_mir_profile(spec, _channels(group, sources), [target]) for group in _groups(lattice)
    }
    profiles = np.stack([np.min([group_profiles[group] for group in atom], axis=0) for atom in lattice.atoms])
    return profiles, group_profiles


def _partial_profiles(lattice: RedundancyLattice, cumulative: NDArray[np.float64]) -> NDArray[np.float64]:
    """Möbius inversion applied frequency-wise."""
    partial = np.empty_like(cumulative)
    for position, down in enumerate(lattice.down_sets):
        partial[position] = cumulative[position] - partial[list(down)].sum(axis=0)
    return partial


def _residuals(
    lattice: RedundancyLattice, values: AtomValues, joint_mir: float, marginal_mirs: Sequence[float]
) -> dict[str, float]:
    accumulated = accumulate(lattice, values.partial_map())
    residuals = {"joint": abs(sum(values.partial) - joint_mir)}
    for source, marginal in enumerate(marginal_mirs, start=1):
        residuals[f"marginal_{source}"] = abs(accumulated[lattice.singleton(source)] - marginal)
    return residuals


def decompose(
    model: VarModel,
    target: int,
    sources: Sequence[int],
    grid: FrequencyGrid | None = None,
    band: Sequence[float] | None = None,
    max_sources: int = DEFAULT_MAX_SOURCES,
    tolerance: float = CONSISTENCY_TOLERANCE,
    labels: Sequence[str] = (),
) -> PirdResult:
    """Decompose the MIR between a target and its sources into lattice atoms.

    :param VarModel model: Stable model of the joint process
    :param int target: 0-based target channel
    :param Sequence[int] sources: 0-based source channels, in lattice order
    :param FrequencyGrid | None grid: Frequency grid; uniform with 1025 points by default
    :param Sequence[float] | None band: Optional integration band [lo, hi] within [0, pi]
    :param int max_sources: Largest accepted number of sources
    :param float tolerance: Largest accepted consistency residual
    :param Sequence[str] labels: Channel labels for reports
    :return PirdResult: The decomposition
    :raise InvalidSelectionError: If the channel selection is inconsistent
    :raise ConsistencyError: If atoms do not re-accumulate to the joint and marginal rates
    """
    check_selection(model.dim, target, sources)
    edges = check_band(band)
    lattice = enumerate_atoms(len(sources), max_sources)
    grid = grid or FrequencyGrid.uniform()
    spec = var_to_spectrum(model, grid)

    cumulative_profiles, group_profiles = _cumulative_profiles(spec, lattice, target, sources)
    partial_profiles = _partial_profiles(lattice, cumulative_profiles)

    cumulative = {
        atom: integrate(profile, grid, edges)
        for atom, profile in zip(lattice.atoms, cumulative_profiles, strict=True)
    }
    values = AtomValues.from_cumulative(lattice, cumulative)
    joint_mir = integrate(group_profiles[lattice.top[0]], grid, edges)
    marginal_mirs = tuple(integrate(group_profiles[(source,)], grid, edges) for source in range(1, len(sources) + 1))

    residuals = _residuals(lattice, values, joint_mir, marginal_mirs)
    if (worst := max(residuals.values())) > tolerance:
        msg = f"Decomposition is inconsistent: residual {worst:.3e} exceeds {tolerance:.1e}"
        logger.error(msg)
        raise ConsistencyError(msg)

    if (lowest := min(values.partial)) < -NEGATIVITY_TOLERANCE:
        logger.warning("Negative atom rate %.3e among %d atoms", lowest, len(lattice.atoms))

    logger.info(
        "Decomposed MIR %.6f nats of target %d into %d atoms (max residual %.2e)",
        joint_mir,
        target,
        len(lattice.atoms),
        worst,
    )
    return PirdResult(
        lattice=lattice,
        target=target,
        sources=tuple(sources),
        labels=tuple(labels),
        values=values,
        cumulative_profiles=cumulative_profiles,
        partial_profiles=partial_profiles,
        grid=grid,
        band=edges,
        joint_mir=joint_mir,
        marginal_mirs=marginal_mirs,
        residuals=residuals,
    )


def summary_convention(n_sources: int) -> str:
    """Describe how atoms are grouped into redundancy, unique information and synergy.

    :param int n_sources: Number of sources
    :return str: Convention label
    """
    if n_sources == 1:
        return CONVENTION_N1
    if n_sources == 2:  # noqa: PLR2004
        return CONVENTION_N2
    return CONVENTION_GENERAL


def _summary(
    lattice: RedundancyLattice, partial: Mapping[Atom, float], joint: float, zero: set[Atom] | None = None
) -> PirdSummary:
    values = {atom: 0.0 if zero and atom in zero else value for atom, value in partial.items()}
    n_sources = lattice.n_sources
    unique = [values[lattice.singleton(source)] for source in range(1, n_sources + 1)]
    if n_sources == 1:
        return PirdSummary(
            total=joint, redundancy=0.0, unique=unique, synergy=0.0, convention=summary_convention(n_sources)
        )

    synergistic = [atom for atom in lattice.atoms if all(len(group) >= 2 for group in atom)]  # noqa: PLR2004
    assigned = {lattice.bottom, *synergistic, *(lattice.singleton(source) for source in range(1, n_sources + 1))}
    return PirdSummary(
        total=joint,
        redundancy=values[lattice.bottom],
        unique=unique,
        synergy=sum(values[atom] for atom in synergistic),
        residual=sum(value for atom, value in values.items() if atom not in assigned),
        convention=summary_convention(n_sources),
    )


def summarize(result: PirdResult) -> PirdSummary:
    """Group atom rates into redundancy R, unique information U_i and synergy S.

    Atoms whose rate density is negligible at every frequency are reported as exactly zero.

    :param PirdResult result: The decomposition
    :return PirdSummary: Summary in nats per sample
    """
    return _summary(result.lattice, result.atom_rates, result.joint_mir, result.zero_atoms())


# Static decomposition
def gaussian_mi(covariance: NDArray[np.float64], group_a: Sequence[int], group_b: Sequence[int]) -> float:
    """Mutual information ½ log(|Σ_a| |Σ_b| / |Σ_ab|) of jointly Gaussian channel groups.

    :param NDArray covariance: Covariance of all channels
    :param Sequence[int] group_a: 0-based channels of the first group
    :param Sequence[int] group_b: 0-based channels of the second group
    :return float: Mutual information in nats
    :raise DegenerateCovarianceError: If a covariance block is singular
    """

    def logdet(channels: Sequence[int]) -> float:
        block = covariance[np.ix_(channels, channels)]
        try:
            factor = np.linalg.cholesky(block)
        except np.linalg.LinAlgError as e:
            msg = f"Covariance of channels {list(channels)} is not positive definite"
            logger.exception(msg)
            raise DegenerateCovarianceError(msg) from e
        pivots = np.diagonal(factor) ** 2
        if pivots.min() < PIVOT_THRESHOLD * np.abs(np.diagonal(block)).max():
            msg = f"Covariance of channels {list(channels)} is singular"
            logger.error(msg)
            raise DegenerateCovarianceError(msg)
        return float(np.log(pivots).sum())

    return 0.5 * (logdet(group_a) + logdet(group_b) - logdet([*group_a, *group_b]))


def static_atoms(
    covariance: NDArray[np.float64], target: int, sources: Sequence[int], max_sources: int = DEFAULT_MAX_SOURCES
) -> tuple[RedundancyLattice, AtomValues, float]:
    """Zero-lag minimum-MI redundancies and atoms.

    :param NDArray covariance: Covariance of all channels
    :param int target: 0-based target channel
    :param Sequence[int] sources: 0-based source channels
    :param int max_sources: Largest accepted number of sources
    :return tuple[RedundancyLattice, AtomValues, float]: Lattice, atom values and joint MI
    """
    covariance = np.asarray(covariance, dtype=float)
    if covariance.ndim != 2 or covariance.shape[0] != covariance.shape[1]:  # noqa: PLR2004
        msg = f"Covariance must be a square matrix, got shape {covariance.shape}"
        logger.error(msg)
        raise ParameterError(msg)
    check_selection(covariance.shape[0], target, sources)
    lattice = enumerate_atoms(len(sources), max_sources)
    informations = {group: gaussian_mi(covariance, _channels(group, sources), [target]) for group in _groups(lattice)}
    cumulative = {atom: min(informations[group] for group in atom) for atom in lattice.atoms}
    return lattice, AtomValues.from_cumulative(lattice, cumulative), informations[lattice.top[0]]


def static_pid(
    covariance: NDArray[np.float64], target: int, sources: Sequence[int], max_sources: int = DEFAULT_MAX_SOURCES
) -> PirdSummary:
    """Zero-lag Gaussian partial information decomposition with minimum-MI redundancy.

    :param NDArray covariance: Covariance of all channels
    :param int target: 0-based target channel
    :param Sequence[int] sources: 0-based source channels
    :param int max_sources: Largest accepted number of sources
    :return PirdSummary: Summary in nats
    :raise DegenerateCovarianceError: If the covariance of the involved channels is singular
    """
    lattice, values, joint = static_atoms(covariance, target, sources, max_sources)
    return _summary(lattice, values.partial_map(), joint)


def static_pid_from_data(
    series: TimeSeriesSet, target: int, sources: Sequence[int], max_sources: int = DEFAULT_MAX_SOURCES
) -> PirdSummary:
    """Zero-lag decomposition of measured data from the sample covariance.

    :param TimeSeriesSet series: Observed series
    :param int target: 0-based target channel
    :param Sequence[int] sources: 0-based source channels
    :param int max_sources: Largest accepted number of sources
    :return PirdSummary: Summary in nats
    """
    covariance = np.cov(series.samples, rowvar=False).reshape(series.n_channels, series.n_channels)
    return static_pid(covariance, target, sources, max_sources)


# Conservativeness
class AtomBound(BaseModel):
    """Redundancy rate of an atom against the time-domain MIR of its groups."""

    label: str = Field(description="Atom label.")
    redundancy: float = Field(description="Spectral redundancy rate.")
    bound: float = Field(description="Smallest time-domain MIR among the groups of the atom.")
    holds: bool = Field(description="Whether redundancy <= bound + tolerance.")


class ConservativenessReport(BaseModel):
    """Check that spectral redundancy rates never exceed the global group MIRs."""

    tolerance: float = Field(description="Slack allowed on every inequality.")
    max_lag: int = Field(description="Block length of the time-domain oracle.")
    oracle_decayed: bool = Field(description="Whether every oracle covariance had decayed.")
    atoms: list[AtomBound] = Field(description="Bound per atom, in lattice order.")
    singleton_gaps: list[float] = Field(description="Relative gap between spectral and oracle MIR per source.")
    units: Units = Field(default=Units.NATS, description="Units of every rate.")

    def to_units(self, units: Units) -> "ConservativenessReport":
        """Convert the rates of the report to other units; relative gaps are unitless.

        :param Units units: Target units
        :return ConservativenessReport: Converted copy
        """
        factor = units.scale / self.units.scale
        atoms = [
            atom.model_copy(update={"redundancy": atom.redundancy * factor, "bound": atom.bound * factor})
            for atom in self.atoms
        ]
        return self.model_copy(update={"atoms": atoms, "units": units})

    @property
    def violations(self) -> list[AtomBound]:
        """Atoms violating the bound."""
        return [atom for atom in self.atoms if not atom.holds]

    @property
    def passed(self) -> bool:
        """Whether every atom satisfies the bound."""
        return not self.violations


def conservativeness_check(
    result: PirdResult, model: VarModel, max_lag: int = 200, tolerance: float = CONSISTENCY_TOLERANCE
) -> ConservativenessReport:
    """Compare every redundancy rate with the time-domain MIR of the groups of its atom.

    :param PirdResult result: Full-band decomposition of ``model``
    :param VarModel model: The decomposed model
    :param int max_lag: Block length of the time-domain oracle
    :param float tolerance: Slack allowed on every inequality
    :return ConservativenessReport: Per-atom bounds and violations
    :raise ParameterError: If the decomposition is band-limited
    """
    if result.band is not None:
        msg = "Conservativeness is only defined for full-band decompositions"
        logger.error(msg)
        raise ParameterError(msg)

    estimates = {
        group: time_domain_mir_oracle(model, _channels(group, result.sources), [result.target], max_lag)
        for group in _groups(result.lattice)
    }
    bounds = []
    for atom in result.lattice.atoms:
        bound = min(estimates[group].rate for group in atom)
        redundancy = result.cumulative_rates[atom]
        bounds.append(
            AtomBound(
                label=format_atom(atom), redundancy=redundancy, bound=bound, holds=redundancy <= bound + tolerance
            )
        )
    gaps = [
        abs(marginal - estimates[(source,)].rate) / max(abs(estimates[(source,)].rate), 1e-12)
        for source, marginal in enumerate(result.marginal_mirs, start=1)
    ]

    report = ConservativenessReport(
        tolerance=tolerance,
        max_lag=max_lag,
        oracle_decayed=all(estimate.decayed for estimate in estimates.values()),
        atoms=bounds,
        singleton_gaps=gaps,
    )
    if report.violations:
        logger.warning(
            "Redundancy exceeds the time-domain bound for atoms %s", ", ".join(atom.label for atom in report.violations)
        )
    return report
