from pathlib import Path
from typing import Optional, Sequence
import csv
import logging
import math

from app.core.analysis import SweepRow
from app.core.verify import SweepRecord
from app.service.schemas import SolveSummary
from utils.helper import format_float

logger = logging.getLogger(__name__)

SWEEP_FIELDS = [
    "method",
    "c",
    "ch",
    "theta",
    "n_unknowns",
    "inf_error",
    "rel_error",
    "assembly_ms",
    "solve_ms",
]

COEFF_FIELDS = ["scheme", "theta", "ch", "beta", "c1", "c2", "pole"]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "nan" if math.isnan(value) else format_float(value)
    return str(value)


def write_sweep_csv(path: str | Path, records: Sequence[SweepRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_FIELDS, lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow({name: _cell(getattr(rec, name)) for name in SWEEP_FIELDS})
    logger.info(f"Wrote {len(records)} sweep rows to {path}")
    return path


def write_coeffs_csv(
    path: str | Path, scheme_label: str, theta: float, rows: Sequence[SweepRow]
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=COEFF_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {
                    "scheme": scheme_label,
                    "theta": _cell(float(theta)),
                    "ch": _cell(row.ch),
                    "beta": _cell(row.beta),
                    "c1": _cell(row.c1),
                    "c2": _cell(row.c2),
                    "pole": "1" if row.pole else "0",
                }
            )
    logger.info(f"Wrote {len(rows)} coefficient rows to {path}")
    return path


def write_summary(path: str | Path, summary: SolveSummary) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote solve summary to {path}")
    return path


def output_path(directory: str, explicit: Optional[str], default_name: str) -> Path:
    return Path(explicit) if explicit else Path(directory) / default_name
