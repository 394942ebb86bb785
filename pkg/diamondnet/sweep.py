"""Gap-certification sweeps over (N, g, h) grids."""

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import pandas as pd
from pydantic import BaseModel

from diamondnet.config import resolve_config
from diamondnet.models import CSV_COLUMNS, Config, SweepSpec, SymmetricNetwork
from diamondnet.report import build_bound_report, check_report

logger = logging.getLogger(__name__)

SERIAL_THRESHOLD = 256


class ExtremePoint(BaseModel):
    value: float
    n: int
    g: float
    h: float


class SweepSummary(BaseModel):
    """Worst cases of a sweep and its violation count."""

    points: int
    max_additive_gap: ExtremePoint
    max_multiplicative_ratio: ExtremePoint
    violations: int
    violation_messages: list[str]
    output: Optional[str] = None


def json_scalar(value):
    """JSON-ready scalar: numpy types unwrapped, NaN as null."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return value.item() if hasattr(value, "item") else value


def _evaluate_point(args: tuple[int, float, float, Config, bool]) -> tuple[dict, list[str]]:
    n, g, h, config, research = args
    report = build_bound_report(SymmetricNetwork(n_relays=n, g=g, h=h), config, research)
    return report.csv_row(), check_report(report, config)


class SweepRunner:
    """Evaluates every grid point of a sweep and certifies the gap constants."""

    def __init__(
        self,
        spec: SweepSpec,
        config: Optional[Config] = None,
        research: bool = True,
        workers: Optional[int] = None,
    ):
        self.spec = spec
        self.config = resolve_config(config)
        self.research = research
        self.workers = workers or self.config.workers or os.cpu_count() or 1

    def run(self) -> tuple[pd.DataFrame, SweepSummary]:
        """
        Evaluate all points in grid order.

        Returns:
            Tuple of (table with CSV_COLUMNS, summary)
        """
        points = self.spec.points()
        logger.info(
            f"Sweeping {len(points)} points "
            f"({'with' if self.research else 'without'} numeric searches, {self.workers} workers)"
        )
        tasks = [(n, g, h, self.config, self.research) for n, g, h in points]

        if self.workers == 1 or len(tasks) < SERIAL_THRESHOLD:
            results = [_evaluate_point(task) for task in tasks]
        else:
            chunksize = max(1, len(tasks) // (self.workers * 8))
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                # map preserves submission order
                results = list(pool.map(_evaluate_point, tasks, chunksize=chunksize))

        df = pd.DataFrame([row for row, _ in results], columns=CSV_COLUMNS)
        messages = [
            f"N={row['n']}, g={row['g']:g}, h={row['h']:g}: {message}"
            for row, found in results
            for message in found
        ]
        summary = self._summarize(df, messages)
        logger.info(
            f"Max additive gap {summary.max_additive_gap.value:.6f}, "
            f"max ratio {summary.max_multiplicative_ratio.value:.6f}, "
            f"{summary.violations} violation(s)"
        )
        return df, summary

    def save(self, df: pd.DataFrame, output_file: Optional[Path] = None) -> Path:
        """Write the table as CSV (header row, LF endings) or as a JSON list of rows."""
        output_file = output_file or self.spec.output
        output_file.parent.mkdir(parents=True, exist_ok=True)

        if self.spec.format == "csv":
            df.to_csv(output_file, index=False, lineterminator="\n", encoding="utf-8")
        else:
            records = [
                {key: json_scalar(value) for key, value in row.items()}
                for row in df.to_dict(orient="records")
            ]
            with open(output_file, "w", encoding="utf-8", newline="\n") as f:
                json.dump(records, f, indent=2)
                f.write("\n")

        logger.info(f"Saved {len(df)} rows to {output_file}")
        return output_file

    def _summarize(self, df: pd.DataFrame, messages: list[str]) -> SweepSummary:
        def extreme(column: str) -> ExtremePoint:
            # idxmax returns the first maximum, i.e. the earliest grid point
            row = df.loc[df[column].idxmax()]
            return ExtremePoint(
                value=float(row[column]), n=int(row["n"]), g=float(row["g"]), h=float(row["h"])
            )

        return SweepSummary(
            points=len(df),
            max_additive_gap=extreme("additive_gap"),
            max_multiplicative_ratio=extreme("mult_ratio"),
            violations=len(messages),
            violation_messages=messages,
        )
