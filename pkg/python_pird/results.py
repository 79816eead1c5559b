"""Atomic writing of result files and of the run manifest."""

import json
import logging
import threading
from collections.abc import Mapping, Sequence
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import BaseModel

from python_pird.lattice import format_atom
from python_pird.models import Units
from python_pird.pipeline import PairAnalysis
from python_pird.pird import PirdResult

logger = logging.getLogger(__name__)

MANIFEST_FILENAME = "manifest.json"
TRACKED_PACKAGES = ("python-pird", "numpy", "scipy", "pandas", "pydantic")


def package_versions() -> dict[str, str]:
    """Installed versions of the packages that determine numerical results.

    :return dict[str, str]: Version per package, ``unknown`` if not installed
    """
    versions = {}
    for package in TRACKED_PACKAGES:
        try:
            versions[package] = version(package)
        except PackageNotFoundError:
            versions[package] = "unknown"
    return versions


def profiles_frame(result: PirdResult, *, partial: bool = False, units: Units = Units.NATS) -> pd.DataFrame:
    """Spectral profiles of every atom, one row per frequency.

    :param PirdResult result: The decomposition
    :param bool partial: Export atom-rate densities instead of redundancy-rate densities
    :param Units units: Units of the densities
    :return pd.DataFrame: Column ``omega`` followed by one column per atom label
    """
    profiles = result.partial_profiles if partial else result.cumulative_profiles
    frame = pd.DataFrame(profiles.T * units.scale, columns=[format_atom(atom) for atom in result.lattice.atoms])
    frame.insert(0, "omega", result.grid.points)
    return frame


def pairs_frame(pairs: Sequence[PairAnalysis], units: Units = Units.NATS) -> pd.DataFrame:
    """Rate and zero-lag decompositions of every source pair, one row per pair.

    :param Sequence[PairAnalysis] pairs: Pair analyses
    :param Units units: Units of every rate
    :return pd.DataFrame: Source labels, VAR order, then joint, R, U1, U2 and S for both decompositions
    """
    records = []
    for pair in pairs:
        pird, pid = pair.summary.to_units(units), pair.static.to_units(units)
        records.append(
            [
                *pair.labels,
                pair.order,
                pird.total,
                pird.redundancy,
                *pird.unique,
                pird.synergy,
                pid.total,
                pid.redundancy,
                *pid.unique,
                pid.synergy,
            ]
        )
    columns = ["source_1", "source_2", "order", "joint_mir", "pird_R", "pird_U1", "pird_U2", "pird_S"]
    return pd.DataFrame(records, columns=[*columns, "zero_lag_mi", "pid_R", "pid_U1", "pid_U2", "pid_S"])


class ResultWriter:
    """Thread-safe writer of JSON and CSV results into one output directory."""

    def __init__(self, output_directory: Path) -> None:
        """Initialize the result writer.

        :param Path output_directory: Directory receiving every file
        """
        self.output_directory = output_directory
        logger.info("Initializing ResultWriter in directory: %s", self.output_directory)
        self.output_directory.mkdir(parents=True, exist_ok=True)

        self._lock = threading.RLock()
        self._written: list[str] = []

    @property
    def written_files(self) -> list[str]:
        """Names of the files written so far, in order.

        :return list[str]: File names
        """
        return list(self._written)

    def _write_atomic(self, filename: str, content: str) -> Path:
        """Write text to the output directory atomically using temporary file + rename.

        This ensures no result file is ever left half-written.
        """
        filepath = self.output_directory / filename
        temp_filepath = filepath.with_suffix(filepath.suffix + ".tmp")

        with self._lock:
            try:
                with temp_filepath.open("w", encoding="utf-8", newline="") as f:
                    f.write(content)
                temp_filepath.replace(filepath)
                if filename not in self._written:
                    self._written.append(filename)
                logger.info("Wrote %s", filepath)
            except Exception:
                logger.exception("Failed to write %s!", filepath)
                if temp_filepath.exists():
                    temp_filepath.unlink()
                raise
        return filepath

    def write_json(self, filename: str, data: BaseModel | Mapping[str, Any]) -> Path:
        """Write a model or mapping as indented JSON.

        :param str filename: File name within the output directory
        :param BaseModel | Mapping[str, Any] data: Content
        :return Path: Path of the written file
        """
        payload = data.model_dump(mode="json") if isinstance(data, BaseModel) else dict(data)
        return self._write_atomic(filename, json.dumps(payload, ensure_ascii=False, indent=2) + "\n")

    def write_csv(self, filename: str, frame: pd.DataFrame) -> Path:
        """Write a data frame as CSV without its index.

        :param str filename: File name within the output directory
        :param pd.DataFrame frame: Content
        :return Path: Path of the written file
        """
        return self._write_atomic(filename, frame.to_csv(index=False, float_format="%.17g"))

    def write_manifest(self, config: BaseModel, seed: int | None, decisions: Mapping[str, str]) -> Path:
        """Write the manifest describing how every file of the run was produced.

        No timestamps are recorded so identical runs produce identical manifests.

        :param BaseModel config: Validated run configuration
        :param int | None seed: Master seed of the run
        :param Mapping[str, str] decisions: Conventions and design choices affecting the numbers
        :return Path: Path of the manifest
        """
        manifest = {
            "config": config.model_dump(mode="json"),
            "seed": seed,
            "versions": package_versions(),
            "decisions": dict(decisions),
            "files": self.written_files,
        }
        return self.write_json(MANIFEST_FILENAME, manifest)
