import json
import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pandas as pd
from platformdirs import user_data_dir
from rich.console import Console
from rich.table import Table

logger = logging.getLogger(__name__)

HASH_PREFIX = 12


class ReportHandler:
    """Writes run artifacts into one output directory, each tagged with the config hash."""

    def __init__(self, digest: str, out_dir: str | Path | None = None, app_name: str = "quakebend"):
        self.digest = digest
        if out_dir is None:
            out_dir = Path(user_data_dir(app_name)) / "runs" / digest[:HASH_PREFIX]
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self.path(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump({"config_hash": self.digest, **payload}, f, sort_keys=True, indent=2)
            f.write("\n")
        logger.debug("Wrote %s", path)
        return path

    def write_report(self, report: Dict[str, Any]) -> Path:
        """
        Writes the reproducible JSON report.

        Args:
            report (dict): JSON-serializable report body; must not contain wall-clock data.

        Returns:
            Path: Location of ``report.json``.
        """
        return self._write_json("report.json", report)

    def write_timings(self, timings: Dict[str, float]) -> Path:
        return self._write_json("timings.json", {"seconds": timings})

    def write_witness(self, error: Exception, witness: Dict[str, Any] | None) -> Path:
        return self._write_json(
            "witness.json",
            {"error": type(error).__name__, "message": str(error), "witness": witness},
        )

    def write_text_report(self, report: Dict[str, Any]) -> Path:
        """Renders the command summary and the check table as plain text."""
        path = self.path("report.txt")
        with open(path, "w", encoding="utf-8") as f:
            console = Console(file=f, width=120, force_terminal=False, color_system=None)
            console.print(f"quakebend {report['command']}  config-sha256: {self.digest}")
            console.print(f"status: {'passed' if report['passed'] else 'FAILED'}")
            for retry in report.get("retries", []):
                console.print(f"retried with basepoint offset {retry}")
            checks = report.get("checks", [])
            if checks:
                frame = pd.DataFrame(checks, columns=["name", "residual", "threshold", "passed"])
                table = Table(title="Checks")
                for column in frame.columns:
                    table.add_column(column)
                for row in frame.itertuples(index=False):
                    table.add_row(row.name, f"{row.residual:.3e}", f"{row.threshold:.1e}", "yes" if row.passed else "NO")
                console.print(table)
            summary = report.get("summary", {})
            if summary:
                table = Table(title="Summary")
                table.add_column("key")
                table.add_column("value")
                for key in sorted(summary):
                    table.add_row(key, str(summary[key]))
                console.print(table)
        return path

    def write_cloud_csv(self, points: np.ndarray, name: str = "limitset.csv") -> Path:
        """Unit-sphere coordinates with shortest round-trip decimals, after a hash comment line."""
        columns = [f"x{i + 1}" for i in range(points.shape[1])]
        frame = pd.DataFrame([[repr(float(v)) for v in row] for row in points], columns=columns)
        return self._write_csv(frame, name)

    def write_frame_csv(self, frame: pd.DataFrame, name: str) -> Path:
        return self._write_csv(frame, name)

    def _write_csv(self, frame: pd.DataFrame, name: str) -> Path:
        path = self.path(name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(f"# config-sha256: {self.digest}\n")
            frame.to_csv(f, index=False, lineterminator="\n")
        return path
