"""Decomposition server module."""

import logging

import numpy as np
from fastapi import HTTPException, Request
from pydantic import ValidationError
from python_template_server.models import ResponseCode
from python_template_server.template_server import TemplateServer

from python_pird.exceptions import PirdError
from python_pird.lattice import enumerate_atoms
from python_pird.models import (
    DecomposeRequest,
    DecomposeResponse,
    LatticeResponse,
    PirdServerConfig,
    StaticPidRequest,
    StaticPidResponse,
    SweepRequest,
    SweepResponse,
)
from python_pird.pird import decompose, static_pid
from python_pird.spectral import FrequencyGrid
from python_pird.sweep import SweepConfig, SweepSetting, run_sweep
from python_pird.var_model import VarModel

logger = logging.getLogger(__name__)


class PirdServer(TemplateServer):
    """FastAPI server decomposing information rates of VAR models."""

    def __init__(self, config: PirdServerConfig | None = None) -> None:
        """Initialize the TemplateServer.

        :param PirdServerConfig | None config: Optional pre-loaded configuration
        """
        self.config: PirdServerConfig
        super().__init__(package_name="python-pird", config=config)

    def validate_config(self, config_data: dict) -> PirdServerConfig:
        """Validate configuration data against the PirdServerConfig model.

        :param dict config_data: The configuration data to validate
        :return PirdServerConfig: The validated configuration model
        """
        return PirdServerConfig.model_validate(config_data)  # type: ignore[no-any-return]

    def setup_routes(self) -> None:
        """Set up API routes."""
        self.add_route(
            endpoint="/decompose",
            handler_function=self.post_decompose,
            response_model=DecomposeResponse,
            methods=["POST"],
            limited=True,
            authentication_required=True,
        )
        self.add_route(
            endpoint="/static-pid",
            handler_function=self.post_static_pid,
            response_model=StaticPidResponse,
            methods=["POST"],
            limited=True,
            authentication_required=True,
        )
        self.add_route(
            endpoint="/sweep",
            handler_function=self.post_sweep,
            response_model=SweepResponse,
            methods=["POST"],
            limited=True,
            authentication_required=True,
        )
        self.add_route(
            endpoint="/lattice/{n_sources}",
            handler_function=self.get_lattice,
            response_model=LatticeResponse,
            methods=["GET"],
            limited=True,
            authentication_required=True,
        )

    @staticmethod
    def _bad_request(error: Exception) -> HTTPException:
        """Map an analysis or validation error to a 400 response."""
        msg = str(error)
        logger.error("Rejected request: %s", msg)
        return HTTPException(status_code=ResponseCode.BAD_REQUEST, detail=msg)

    async def post_decompose(self, request: Request) -> DecomposeResponse:
        """Handle decompose requests - decompose the MIR of a VAR model.

        :param Request request: The request object
        :return DecomposeResponse: Server response with the decomposition report
        :raise HTTPException: If the request is invalid or the model is degenerate
        """
        analysis_config = self.config.analysis_config
        try:
            decompose_request = DecomposeRequest.model_validate(await request.json())
            logger.info(
                "Received decompose request for target %d and sources %s",
                decompose_request.target,
                decompose_request.sources,
            )
            result = decompose(
                VarModel.from_document(decompose_request.model),
                decompose_request.target,
                decompose_request.sources,
                grid=FrequencyGrid.uniform(decompose_request.n_frequencies or analysis_config.grid.n_frequencies),
                band=decompose_request.band,
                max_sources=analysis_config.lattice.max_sources,
                tolerance=analysis_config.consistency_tolerance,
            )
        except (PirdError, ValidationError) as e:
            raise self._bad_request(e) from e

        msg = f"Decomposed MIR over {len(result.lattice.atoms)} atoms successfully."
        logger.info(msg)
        return DecomposeResponse(
            message=msg,
            result=result.to_report(decompose_request.units or analysis_config.units),
        )

    async def post_static_pid(self, request: Request) -> StaticPidResponse:
        """Handle static PID requests - decompose zero-lag mutual information.

        :param Request request: The request object
        :return StaticPidResponse: Server response with the decomposition summary
        :raise HTTPException: If the request is invalid or the covariance is degenerate
        """
        analysis_config = self.config.analysis_config
        try:
            pid_request = StaticPidRequest.model_validate(await request.json())
            logger.info("Received static PID request for target %d", pid_request.target)
            summary = static_pid(
                np.array(pid_request.covariance, dtype=float),
                pid_request.target,
                pid_request.sources,
                analysis_config.lattice.max_sources,
            )
        except (PirdError, ValidationError) as e:
            raise self._bad_request(e) from e

        msg = "Decomposed zero-lag mutual information successfully."
        logger.info(msg)
        return StaticPidResponse(message=msg, summary=summary.to_units(pid_request.units or analysis_config.units))

    async def post_sweep(self, request: Request) -> SweepResponse:
        """Handle sweep requests - decompose the three-node network over d.

        :param Request request: The request object
        :return SweepResponse: Server response with one row per d
        :raise HTTPException: If the request is invalid
        """
        analysis_config = self.config.analysis_config
        try:
            sweep_request = SweepRequest.model_validate(await request.json())
            logger.info("Received sweep request for setting: %s", sweep_request.setting)
            sweep_config = SweepConfig(
                setting=SweepSetting.parse(sweep_request.setting),
                n_frequencies=sweep_request.n_frequencies or analysis_config.grid.n_frequencies,
                **({"d_values": tuple(sweep_request.d_values)} if sweep_request.d_values else {}),
            )
            result = run_sweep(sweep_config)
        except (PirdError, ValidationError) as e:
            raise self._bad_request(e) from e

        units = sweep_request.units or analysis_config.units
        rows = [
            row.model_copy(
                update={
                    "joint_mir": row.joint_mir * units.scale,
                    "zero_lag_mi": row.zero_lag_mi * units.scale,
                    "pird": row.pird.to_units(units),
                    "pid": row.pid.to_units(units),
                }
            )
            for row in result.rows
        ]
        msg = f"Swept {len(rows)} values of d successfully."
        logger.info(msg)
        return SweepResponse(message=msg, rows=rows)

    async def get_lattice(self, request: Request, n_sources: int) -> LatticeResponse:
        """Handle lattice requests - enumerate the redundancy lattice.

        :param Request request: The request object
        :param int n_sources: Number of sources
        :return LatticeResponse: Server response with atoms and down-sets
        :raise HTTPException: If the number of sources is out of range
        """
        logger.info("Received lattice request for %d sources", n_sources)
        try:
            lattice = enumerate_atoms(n_sources, self.config.analysis_config.lattice.max_sources)
        except PirdError as e:
            raise self._bad_request(e) from e

        msg = f"Enumerated {len(lattice.atoms)} atoms successfully."
        logger.info(msg)
        return LatticeResponse(
            message=msg,
            atoms=[[list(group) for group in atom] for atom in lattice.atoms],
            down_sets=[list(down) for down in lattice.down_sets],
        )
