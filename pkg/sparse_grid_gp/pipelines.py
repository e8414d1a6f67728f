# Report pipeline
#
# Benchmark reports pass through process_item one by one and are written
# as a single CSV with the columns in constant.REPORT_COLUMNS.

import logging
from typing import Optional

import pandas as pd

from sparse_grid_gp import constant
from sparse_grid_gp.exceptions import ShapeError
from sparse_grid_gp.items import ExperimentReport
from sparse_grid_gp.utils import write_frame

logger = logging.getLogger(__name__)


class ReportPipeline:
    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.items: list[ExperimentReport] = []

    def process_item(self, item):
        if isinstance(item, dict):
            item = ExperimentReport.from_dict(item)
        if not isinstance(item, ExperimentReport):
            raise TypeError(f"expected an ExperimentReport, got {type(item).__name__}")
        self.items.append(item)
        return item

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([item.row() for item in self.items], columns=constant.REPORT_COLUMNS)

    def close(self) -> pd.DataFrame:
        frame = self.to_frame()
        if self.path:
            write_frame(self.path, frame)
            logger.info("Wrote %d report rows to %s", len(frame), self.path)
        return frame


def load_reports(path: str) -> list[ExperimentReport]:
    """Read a report CSV back into ExperimentReports (settings are not stored in the CSV)."""
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in constant.REPORT_COLUMNS if c not in frame.columns]
    if missing:
        raise ShapeError(f"{path} is missing report columns {missing}")
    return [ExperimentReport.from_dict(row) for row in frame.to_dict(orient="records")]
