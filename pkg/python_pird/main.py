"""Command-line front end and HTTP server entry point."""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from python_pird.exceptions import InvalidSelectionError, ParameterError, PirdError
from python_pird.ingest import DESEASONALIZATION_METHOD, DETREND_METHOD, DatasetSpec, load_csv, preprocess
from python_pird.models import AnalysisConfig, Units, VarModelDocument
from python_pird.pipeline import analyze_dataset, analyze_source_pairs
from python_pird.pird import (
    REDUNDANCY_MEASURE,
    conservativeness_check,
    decompose,
    static_pid,
    summary_convention,
)
from python_pird.results import ResultWriter, pairs_frame, profiles_frame
from python_pird.server import PirdServer
from python_pird.spectral import QUADRATURE_RULE, FrequencyGrid
from python_pird.surrogate import ORDER_POLICY, SIGNIFICANCE_METHOD, significance
from python_pird.sweep import CHANNELS, SweepConfig, SweepSetting, build_model, run_sweep, zero_lag_covariance
from python_pird.var_model import AIC_VARIANT, COVARIANCE_DIVISOR, TimeSeriesSet, VarModel, simulate

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class Command(StrEnum):
    """CLI subcommands."""

    SIMULATE = "simulate"
    DECOMPOSE = "decompose"
    SWEEP = "sweep"
    SURROGATE = "surrogate"


class RunConfig(BaseModel):
    """Validated options of one CLI invocation."""

    model_config = ConfigDict(protected_namespaces=())

    command: Command = Field(description="Subcommand.")
    output: Path = Field(description="Output directory.")
    seed: int | None = Field(default=None, ge=0, description="Master seed of every random draw; drawn if not given.")
    units: Units = Field(default=Units.NATS, description="Units of reported rates.")
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig, description="Analysis options.")

    setting: SweepSetting | None = Field(default=None, description="Network parameterization.")
    d: float | None = Field(default=None, ge=0.0, le=1.0, description="Modulation parameter d in [0, 1].")
    d_values: list[float] | None = Field(default=None, min_length=1, description="Sweep values of d.")
    estimate: bool = Field(default=False, description="Sweep over estimated models.")
    model_path: Path | None = Field(default=None, description="VAR model JSON document.")
    n_samples: int = Field(default=4096, gt=0, description="Number of simulated samples.")

    input: Path | None = Field(default=None, description="Input CSV file.")
    columns: list[str] | None = Field(default=None, description="Columns to load.")
    date_column: str | None = Field(default=None, description="Date column used for seasonal phases.")
    missing_value: float | None = Field(default=None, description="Missing-value sentinel.")
    target: str | None = Field(default=None, description="Target column name or index.")
    sources: list[str] = Field(default_factory=list, description="Source column names or indices.")
    band: tuple[float, float] | None = Field(default=None, description="Integration band [lo, hi].")
    pairs: bool = Field(default=False, description="Decompose the target against every pair of sources.")

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        if self.command is Command.SIMULATE and self.model_path is None and (self.setting is None or self.d is None):
            msg = "simulate needs --model or both --setting and --d"
            raise ValueError(msg)
        if self.command is Command.SWEEP and self.setting is None:
            msg = "sweep needs --setting"
            raise ValueError(msg)
        if self.command in (Command.DECOMPOSE, Command.SURROGATE):
            if (self.input is None) == (self.model_path is None) or (
                self.command is Command.SURROGATE and self.input is None
            ):
                msg = f"{self.command} needs exactly one input: --input CSV" + (
                    " or --model JSON" if self.command is Command.DECOMPOSE else ""
                )
                raise ValueError(msg)
            if self.target is None or not self.sources:
                msg = f"{self.command} needs --target and --sources"
                raise ValueError(msg)
        if self.pairs and len(self.sources) < 2:  # noqa: PLR2004
            msg = "--pairs needs at least two --sources"
            raise ValueError(msg)
        if self.pairs and self.model_path is not None:
            msg = "--pairs needs --input CSV, not --model"
            raise ValueError(msg)
        if self.d_values is not None and any(not 0.0 <= d <= 1.0 for d in self.d_values):
            msg = "--d-values must be within [0, 1]"
            raise ValueError(msg)
        return self


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per command.

    :return argparse.ArgumentParser: The parser
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", type=Path, default=Path("results"), help="Output directory")
    common.add_argument("--seed", type=int, default=None, help="Master seed")
    common.add_argument("--units", choices=[unit.value for unit in Units], default=None, help="Units of rates")
    common.add_argument("--config", type=Path, default=None, help="JSON file with an analysis_config section")
    common.add_argument("--n-frequencies", type=int, default=None, help="Frequency grid size")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Log debug messages")
    verbosity.add_argument("--quiet", action="store_true", help="Log warnings and errors only")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", type=Path, default=None, help="CSV file, header row, one column per channel")
    data.add_argument("--columns", nargs="+", default=None, help="Columns to load")
    data.add_argument("--date-column", default=None, help="Date column used for seasonal phases")
    data.add_argument("--missing-value", type=float, default=None, help="Missing-value sentinel")
    data.add_argument("--target", default=None, help="Target column name or 0-based index")
    data.add_argument("--sources", nargs="+", default=[], help="Source column names or 0-based indices")
    data.add_argument("--order", type=int, default=None, help="Fixed VAR order (skips AIC selection)")
    data.add_argument("--max-order", type=int, default=None, help="Largest VAR order tried by the AIC")
    data.add_argument("--no-detrend", action="store_true", help="Skip linear detrending")
    data.add_argument("--no-deseasonalize", action="store_true", help="Skip deseasonalization")
    data.add_argument("--period", type=int, default=None, help="Seasonal period in samples")
    data.add_argument("--deseasonalize-first", action="store_true", help="Deseasonalize before detrending")

    parser = argparse.ArgumentParser(
        prog="python-pird", description="Partial information rate decomposition of Gaussian processes."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    simulate_parser = commands.add_parser(Command.SIMULATE, parents=[common], help="Simulate a VAR process")
    simulate_parser.add_argument("--setting", default=None, help="Network setting: 1, 2 or its name")
    simulate_parser.add_argument("--d", type=float, default=None, help="Modulation parameter in [0, 1]")
    simulate_parser.add_argument("--model", dest="model_path", type=Path, default=None, help="VAR model JSON")
    simulate_parser.add_argument("--n", dest="n_samples", type=int, default=4096, help="Number of samples")
    simulate_parser.add_argument("--burn-in", type=int, default=None, help="Discarded initial samples")

    decompose_parser = commands.add_parser(
        Command.DECOMPOSE, parents=[common, data], help="Decompose the MIR of a dataset or model"
    )
    decompose_parser.add_argument("--model", dest="model_path", type=Path, default=None, help="VAR model JSON")
    decompose_parser.add_argument("--band", nargs=2, type=float, default=None, help="Band [lo, hi] in rad/sample")
    decompose_parser.add_argument("--pairs", action="store_true", help="Decompose against every pair of sources")

    sweep_parser = commands.add_parser(Command.SWEEP, parents=[common], help="Sweep the three-node network")
    sweep_parser.add_argument("--setting", required=True, help="Network setting: 1, 2 or its name")
    sweep_parser.add_argument("--d-values", nargs="+", type=float, default=None, help="Values of d (0:0.05:1)")
    sweep_parser.add_argument("--estimate", action="store_true", help="Decompose models estimated from data")
    sweep_parser.add_argument("--n", dest="n_samples", type=int, default=4096, help="Samples per row (estimate)")
    sweep_parser.add_argument("--max-order", type=int, default=None, help="Largest VAR order (estimate)")

    surrogate_parser = commands.add_parser(
        Command.SURROGATE, parents=[common, data], help="Test decomposition rates against shuffle surrogates"
    )
    surrogate_parser.add_argument("--n-surrogates", type=int, default=None, help="Number of surrogates")
    surrogate_parser.add_argument("--alpha", type=float, default=None, help="Two-sided significance level")
    surrogate_parser.add_argument("--workers", type=int, default=None, help="Threads analyzing surrogates")
    return parser


def load_analysis_config(path: Path | None) -> dict[str, Any]:
    """Read the ``analysis_config`` section of a configuration file.

    :param Path | None path: Server or analysis configuration file; defaults apply if None
    :return dict[str, Any]: Raw analysis configuration
    :raise ParameterError: If the file cannot be read or is not a JSON object
    """
    if path is None:
        return {}
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        msg = f"Cannot read configuration file {path}: {e}"
        logger.exception(msg)
        raise ParameterError(msg) from e
    if not isinstance(document, dict):
        msg = f"Configuration file {path} must hold a JSON object"
        logger.error(msg)
        raise ParameterError(msg)
    return dict(document.get("analysis_config", document))


def _override(section: dict[str, Any], **values: Any) -> None:  # noqa: ANN401
    section.update({key: value for key, value in values.items() if value is not None})


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge the configuration file and command-line flags into a validated run configuration.

    :param argparse.Namespace args: Parsed arguments
    :return RunConfig: Validated configuration
    :raise ValidationError: If options are invalid or inconsistent
    """
    options = vars(args)
    analysis = load_analysis_config(options.get("config"))
    _override(analysis, units=options.get("units"))
    _override(analysis.setdefault("grid", {}), n_frequencies=options.get("n_frequencies"))
    _override(
        analysis.setdefault("estimation", {}),
        order=options.get("order"),
        max_order=options.get("max_order"),
        burn_in=options.get("burn_in"),
    )
    _override(
        analysis.setdefault("preprocess", {}),
        period=options.get("period"),
        detrend=False if options.get("no_detrend") else None,
        deseasonalize=False if options.get("no_deseasonalize") else None,
        deseasonalize_first=True if options.get("deseasonalize_first") else None,
    )
    _override(
        analysis.setdefault("surrogate", {}),
        n_surrogates=options.get("n_surrogates"),
        alpha=options.get("alpha"),
        workers=options.get("workers"),
    )

    seed = options.get("seed")
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
        logger.info("No --seed given, drew seed %d", seed)

    setting = options.get("setting")
    return RunConfig.model_validate(
        {
            **{key: value for key, value in options.items() if key in RunConfig.model_fields and value is not None},
            "seed": seed,
            "setting": SweepSetting.parse(setting) if setting is not None else None,
            "units": analysis.get("units", Units.NATS),
            "analysis": analysis,
        }
    )


def _decisions(config: RunConfig) -> dict[str, str]:
    preprocess_config = config.analysis.preprocess
    order = ["deseasonalize", "detrend"] if preprocess_config.deseasonalize_first else ["detrend", "deseasonalize"]
    n_sources = 2 if config.pairs or config.command is Command.SWEEP else len(config.sources)
    decisions = {
        "aic": AIC_VARIANT,
        "covariance_divisor": COVARIANCE_DIVISOR,
        "detrend": DETREND_METHOD,
        "deseasonalize": DESEASONALIZATION_METHOD,
        "preprocess_order": " -> ".join(order),
        "quadrature": QUADRATURE_RULE,
        "redundancy": REDUNDANCY_MEASURE,
        "significance": SIGNIFICANCE_METHOD,
        "surrogate_order": ORDER_POLICY,
        "units": config.units.value,
    }
    if n_sources:
        decisions["summary_convention"] = summary_convention(n_sources)
    return decisions


def _load_model(path: Path) -> VarModel:
    try:
        return VarModel.from_document(VarModelDocument.model_validate_json(path.read_text(encoding="utf-8")))
    except OSError as e:
        msg = f"Cannot read model file {path}: {e}"
        logger.exception(msg)
        raise ParameterError(msg) from e


def _resolve_channel(token: str, labels: Sequence[str]) -> int:
    if token in labels:
        return labels.index(token)
    if token.isdigit() and int(token) < len(labels):
        return int(token)
    msg = f"Unknown channel '{token}' (available: {', '.join(labels)})"
    logger.error(msg)
    raise InvalidSelectionError(msg)


def _load_series(config: RunConfig) -> tuple[TimeSeriesSet, int, list[int]]:
    series = load_csv(
        DatasetSpec(
            path=config.input,
            columns=config.columns,
            date_column=config.date_column,
            missing_value=config.missing_value,
        )
    )
    target = _resolve_channel(str(config.target), series.labels)
    return series, target, [_resolve_channel(source, series.labels) for source in config.sources]


def cmd_simulate(config: RunConfig, writer: ResultWriter) -> None:
    """Simulate a VAR process and write its samples and model.

    :param RunConfig config: Validated configuration
    :param ResultWriter writer: Output writer
    """
    if config.model_path is not None:
        model = _load_model(config.model_path)
        labels: tuple[str, ...] = ()
    else:
        model = build_model(config.setting, config.d)  # type: ignore[arg-type]
        labels = CHANNELS
    series = simulate(
        model, config.n_samples, burn_in=config.analysis.estimation.burn_in, seed=config.seed, labels=labels
    )
    writer.write_csv("series.csv", pd.DataFrame(series.samples, columns=list(series.labels)))
    writer.write_json("model.json", model.to_document())


def cmd_decompose(config: RunConfig, writer: ResultWriter) -> None:
    """Decompose a model or a dataset and write the reports and spectral profiles.

    :param RunConfig config: Validated configuration
    :param ResultWriter writer: Output writer
    """
    analysis_config = config.analysis
    if config.model_path is not None:
        model = _load_model(config.model_path)
        indices = [str(channel) for channel in range(model.dim)]
        target = _resolve_channel(str(config.target), indices)
        sources = [_resolve_channel(source, indices) for source in config.sources]
        result = decompose(
            model,
            target,
            sources,
            grid=FrequencyGrid.uniform(analysis_config.grid.n_frequencies),
            band=config.band,
            max_sources=analysis_config.lattice.max_sources,
            tolerance=analysis_config.consistency_tolerance,
        )
        static = static_pid(zero_lag_covariance(model), target, sources, analysis_config.lattice.max_sources)
        if config.band is None:
            report = conservativeness_check(
                result, model, analysis_config.oracle_max_lag, analysis_config.consistency_tolerance
            )
            writer.write_json("conservativeness.json", report.to_units(config.units))
    else:
        series, target, sources = _load_series(config)
        if config.pairs:
            pairs = analyze_source_pairs(series, target, sources, analysis_config, config.band)
            writer.write_csv("pairs.csv", pairs_frame(pairs, config.units))
            return
        analysis = analyze_dataset(series, target, sources, analysis_config, config.band)
        result, static = analysis.result, analysis.static
        writer.write_json("model.json", analysis.fitted.model.to_document())
        if analysis.fitted.criteria:
            writer.write_csv("aic.csv", pd.DataFrame(list(analysis.fitted.criteria.items()), columns=["order", "aic"]))

    writer.write_json("pird.json", result.to_report(config.units))
    writer.write_json("static_pid.json", static.to_units(config.units))
    writer.write_csv("profiles.csv", profiles_frame(result, units=config.units))
    writer.write_csv("atom_profiles.csv", profiles_frame(result, partial=True, units=config.units))


def cmd_sweep(config: RunConfig, writer: ResultWriter) -> None:
    """Run a sweep and write its curves.

    :param RunConfig config: Validated configuration
    :param ResultWriter writer: Output writer
    """
    sweep_config = SweepConfig(
        setting=config.setting,
        n_frequencies=config.analysis.grid.n_frequencies,
        estimate=config.estimate,
        n_samples=config.n_samples,
        estimation=config.analysis.estimation,
        seed=config.seed,
        **({"d_values": tuple(config.d_values)} if config.d_values else {}),
    )
    result = run_sweep(sweep_config)
    writer.write_csv("sweep.csv", result.to_frame(config.units))
    writer.write_json("sweep.json", result)


def cmd_surrogate(config: RunConfig, writer: ResultWriter) -> None:
    """Test decomposition rates of a dataset against shuffle surrogates.

    :param RunConfig config: Validated configuration
    :param ResultWriter writer: Output writer
    """
    series, target, sources = _load_series(config)
    surrogate_config = config.analysis.surrogate
    report = significance(
        preprocess(series, config.analysis.preprocess),
        target,
        sources,
        n_surrogates=surrogate_config.n_surrogates,
        alpha=surrogate_config.alpha,
        seed=config.seed,
        config=config.analysis,
        workers=surrogate_config.workers,
    ).to_units(config.units)
    writer.write_json("significance.json", report)
    writer.write_csv("surrogates.csv", report.ensemble.to_frame())


COMMANDS = {
    Command.SIMULATE: cmd_simulate,
    Command.DECOMPOSE: cmd_decompose,
    Command.SWEEP: cmd_sweep,
    Command.SURROGATE: cmd_surrogate,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one command and report its exit code.

    :param Sequence[str] | None argv: Arguments; ``sys.argv[1:]`` if None
    :return int: 0 on success, 2 for usage errors, 3 for data errors, 4 for numerical degeneracy
    """
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)

    try:
        config = build_run_config(args)
    except ValidationError as e:
        details = "; ".join(f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in e.errors())
        logger.error("Invalid options: %s", details)  # noqa: TRY400
        return ParameterError.exit_code
    except PirdError as e:
        return e.exit_code

    writer = ResultWriter(config.output)
    try:
        COMMANDS[config.command](config, writer)
    except ValidationError as e:
        logger.error("Invalid input document: %s", e)  # noqa: TRY400
        return ParameterError.exit_code
    except PirdError as e:
        logger.error("%s failed: %s", config.command, e)  # noqa: TRY400
        return e.exit_code

    writer.write_manifest(config, config.seed, _decisions(config))
    return 0


def run() -> None:
    """Run the command-line interface.

    :raise SystemExit: With the exit code of the command
    """
    sys.exit(main())


def serve() -> None:
    """Serve the decomposition API using uvicorn.

    :raise SystemExit: If configuration fails to load or SSL certificate files are missing
    """
    server = PirdServer()
    server.run()
