"""Unit tests for the python_pird.sweep module."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from python_pird.exceptions import ParameterError
from python_pird.models import EstimationConfig, Units
from python_pird.sweep import (
    CSV_COLUMNS,
    DEFAULT_D_VALUES,
    SweepConfig,
    SweepSetting,
    build_model,
    run_sweep,
    zero_lag_covariance,
)
from python_pird.var_model import check_stability


class TestSweepSetting:
    """Unit tests for the SweepSetting enum."""

    @pytest.mark.parametrize(
        ("value", "expected"),
        [
            ("1", SweepSetting.NO_INSTANTANEOUS),
            ("2", SweepSetting.TRANSITION),
            ("no-instantaneous", SweepSetting.NO_INSTANTANEOUS),
            ("transition", SweepSetting.TRANSITION),
        ],
    )
    def test_parse(self, value: str, expected: SweepSetting) -> None:
        """Test settings parse by number and by name."""
        assert SweepSetting.parse(value) is expected

    def test_parse_unknown(self) -> None:
        """Test an unknown setting is rejected."""
        with pytest.raises(ParameterError, match="Unknown sweep setting"):
            SweepSetting.parse("3")


class TestBuildModel:
    """Unit tests for the build_model function."""

    @pytest.mark.parametrize("setting", list(SweepSetting))
    @pytest.mark.parametrize("d", [0.0, 0.5, 1.0])
    def test_stable(self, setting: SweepSetting, d: float) -> None:
        """Test every model of both settings is stable."""
        assert check_stability(build_model(setting, d)) < 1.0

    def test_no_instantaneous(self) -> None:
        """Test the network without instantaneous effects has white unit innovations."""
        model = build_model(SweepSetting.NO_INSTANTANEOUS, 0.25)
        np.testing.assert_array_equal(model.innovation_cov, np.eye(3))
        np.testing.assert_allclose(model.coeffs[0], [[0.6, 0.1, 0.0], [0.1, 0.6, 0.0], [0.25, 0.25, 0.0]])

    def test_transition(self) -> None:
        """Test innovation correlations fade as lagged effects grow."""
        start = build_model(SweepSetting.TRANSITION, 0.0)
        end = build_model(SweepSetting.TRANSITION, 1.0)
        np.testing.assert_array_equal(start.coeffs, np.zeros((1, 3, 3)))
        assert start.innovation_cov[0, 2] == pytest.approx(0.5)
        np.testing.assert_array_equal(end.innovation_cov, np.eye(3))

    @pytest.mark.parametrize("d", [-0.1, 1.5])
    def test_out_of_range(self, d: float) -> None:
        """Test d outside [0, 1] is rejected."""
        with pytest.raises(ParameterError):
            build_model(SweepSetting.TRANSITION, d)

    def test_zero_lag_covariance(self) -> None:
        """Test the zero-lag covariance solves the Lyapunov equation."""
        model = build_model(SweepSetting.NO_INSTANTANEOUS, 0.5)
        covariance = zero_lag_covariance(model)
        a = model.coeffs[0]
        np.testing.assert_allclose(covariance, a @ covariance @ a.T + model.innovation_cov, atol=1e-12)


class TestSweepConfig:
    """Unit tests for the SweepConfig class."""

    def test_defaults(self) -> None:
        """Test the default modulation values run from 0 to 1 in steps of 0.05."""
        config = SweepConfig(setting=SweepSetting.TRANSITION)
        assert config.d_values == DEFAULT_D_VALUES
        assert len(config.d_values) == 21
        assert config.d_values[-1] == 1.0

    def test_sorted(self) -> None:
        """Test modulation values are sorted."""
        assert SweepConfig(setting=SweepSetting.TRANSITION, d_values=(1.0, 0.0, 0.5)).d_values == (0.0, 0.5, 1.0)

    def test_out_of_range(self) -> None:
        """Test modulation values outside [0, 1] are rejected."""
        with pytest.raises(ValidationError, match="within"):
            SweepConfig(setting=SweepSetting.TRANSITION, d_values=(0.5, 1.5))


class TestRunSweep:
    """Unit tests for the run_sweep function."""

    def test_true_parameters(self) -> None:
        """Test the sweep rows of the network without instantaneous effects."""
        result = run_sweep(
            SweepConfig(setting=SweepSetting.NO_INSTANTANEOUS, d_values=(1.0, 0.0, 0.5), n_frequencies=257)
        )
        assert [row.d for row in result.rows] == [0.0, 0.5, 1.0]
        assert not result.estimated
        assert result.rows[0].joint_mir == pytest.approx(0.0, abs=1e-10)
        assert result.rows[1].joint_mir == pytest.approx(0.2329, abs=1e-4)
        assert result.rows[2].joint_mir == pytest.approx(0.5504, abs=1e-4)
        assert result.rows[2].pird.synergy > result.rows[2].pird.redundancy
        assert result.rows[1].pid.redundancy > result.rows[1].pid.synergy

    def test_transition_zero_lag_collapse(self) -> None:
        """Test zero-lag information fades while the rate decomposition grows."""
        result = run_sweep(SweepConfig(setting=SweepSetting.TRANSITION, d_values=(0.0, 1.0), n_frequencies=257))
        start, end = result.rows
        assert end.zero_lag_mi < 0.25 * start.zero_lag_mi
        assert start.pird.redundancy == pytest.approx(start.pid.redundancy, abs=1e-9)
        assert end.pird.net_synergy > 0.0

    def test_frame(self) -> None:
        """Test the tabulated sweep in bits."""
        result = run_sweep(SweepConfig(setting=SweepSetting.NO_INSTANTANEOUS, d_values=(1.0,), n_frequencies=65))
        nats = result.to_frame()
        bits = result.to_frame(Units.BITS)
        assert list(nats.columns) == CSV_COLUMNS
        assert bits["joint_mir"].iloc[0] == pytest.approx(nats["joint_mir"].iloc[0] / math.log(2.0))
        assert bits["pird_S"].iloc[0] == pytest.approx(nats["pird_S"].iloc[0] / math.log(2.0))
        assert bits["d"].iloc[0] == 1.0

    def test_estimated(self) -> None:
        """Test estimated sweeps are reproducible and close to the true parameters."""
        config = SweepConfig(
            setting=SweepSetting.NO_INSTANTANEOUS,
            d_values=(1.0,),
            n_frequencies=129,
            estimate=True,
            n_samples=4000,
            estimation=EstimationConfig(max_order=3),
            seed=5,
        )
        first = run_sweep(config)
        second = run_sweep(config)
        assert first.estimated
        assert first.rows[0].joint_mir == second.rows[0].joint_mir
        assert first.rows[0].joint_mir == pytest.approx(0.5504, abs=0.1)
