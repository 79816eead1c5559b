"""Pytest fixtures for the application's unit tests."""

from collections.abc import Callable, Generator
from pathlib import Path
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from python_pird.models import AnalysisConfig, PirdServerConfig
from python_pird.var_model import TimeSeriesSet, VarModel, companion_spectral_radius, simulate


# General fixtures
@pytest.fixture
def mock_replace_file() -> Generator[MagicMock]:
    """Mock the Path.replace() method."""
    with patch("pathlib.Path.replace") as mock_replace:
        yield mock_replace


# Analysis Configuration Models
@pytest.fixture
def mock_analysis_config_dict() -> dict:
    """Provide a mock analysis configuration dictionary."""
    return {
        "grid": {"n_frequencies": 257},
        "estimation": {"max_order": 4, "order": None, "burn_in": 500},
        "preprocess": {"detrend": True, "deseasonalize": True, "period": 12, "deseasonalize_first": False},
        "surrogate": {"n_surrogates": 20, "alpha": 0.1, "workers": 1},
        "lattice": {"max_sources": 4},
        "units": "nats",
        "consistency_tolerance": 1e-6,
        "oracle_max_lag": 200,
    }


@pytest.fixture
def mock_analysis_config(mock_analysis_config_dict: dict) -> AnalysisConfig:
    """Provide a mock AnalysisConfig instance."""
    return AnalysisConfig.model_validate(mock_analysis_config_dict)


@pytest.fixture
def mock_pird_server_config(mock_analysis_config: AnalysisConfig) -> PirdServerConfig:
    """Provide a mock PirdServerConfig instance."""
    return PirdServerConfig(analysis_config=mock_analysis_config)


# VAR models
@pytest.fixture
def mock_bivariate_model() -> VarModel:
    """Provide a stable VAR(1) where channel 0 drives channel 1."""
    return VarModel(
        coeffs=np.array([[[0.5, 0.0], [0.4, 0.3]]]),
        innovation_cov=np.array([[1.0, 0.2], [0.2, 1.0]]),
    )


@pytest.fixture
def mock_random_model() -> VarModel:
    """Provide a random stable 4-channel VAR(2) with correlated innovations."""
    rng = np.random.default_rng(7)
    coeffs = rng.normal(scale=0.2, size=(2, 4, 4))
    mixing = rng.normal(size=(4, 4))
    return VarModel(coeffs=coeffs * 0.6, innovation_cov=mixing @ mixing.T + np.eye(4))


@pytest.fixture
def mock_stable_model_factory() -> Callable[..., VarModel]:
    """Provide a factory of seeded random VAR models with companion spectral radius at most 0.7."""

    def factory(seed: int, dim: int = 3, order: int = 1) -> VarModel:
        rng = np.random.default_rng(seed)
        coeffs = rng.normal(scale=0.4, size=(order, dim, dim))
        mixing = rng.normal(size=(dim, dim))
        covariance = mixing @ mixing.T + 0.5 * np.eye(dim)
        radius = companion_spectral_radius(VarModel(coeffs=coeffs, innovation_cov=covariance))
        if radius > 0.7:  # noqa: PLR2004
            # Scaling A_k by c**k scales every companion eigenvalue by c
            coeffs = coeffs * (0.7 / radius) ** np.arange(1, order + 1)[:, np.newaxis, np.newaxis]
        return VarModel(coeffs=coeffs, innovation_cov=covariance)

    return factory


@pytest.fixture
def mock_white_noise_model() -> VarModel:
    """Provide a 3-channel VAR(0) with correlated innovations."""
    covariance = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 3.0]])
    return VarModel(coeffs=np.zeros((0, 3, 3)), innovation_cov=covariance)


# Time series
@pytest.fixture
def mock_series(mock_bivariate_model: VarModel) -> TimeSeriesSet:
    """Provide a simulated realization of the bivariate model."""
    return simulate(mock_bivariate_model, 2000, burn_in=200, seed=11, labels=("driver", "response"))


@pytest.fixture
def mock_csv_file(tmp_path: Path) -> Path:
    """Create a monthly CSV file with a trend and a seasonal cycle on three channels."""
    rng = np.random.default_rng(3)
    n_samples = 240
    months = np.arange(n_samples)
    noise = rng.standard_normal((n_samples, 3))
    for t in range(1, n_samples):
        noise[t, 2] += 0.6 * noise[t - 1, 0] + 0.3 * noise[t - 1, 2]
    season = np.sin(2.0 * np.pi * months / 12.0)
    values = noise + 0.01 * months[:, np.newaxis] + season[:, np.newaxis]

    lines = ["date,a,b,c"]
    for t in range(n_samples):
        date = f"{1990 + t // 12}-{t % 12 + 1:02d}-01"
        lines.append(f"{date},{values[t, 0]:.10f},{values[t, 1]:.10f},{values[t, 2]:.10f}")
    csv_path = tmp_path / "data.csv"
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return csv_path
