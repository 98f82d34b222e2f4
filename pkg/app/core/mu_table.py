"""
Calibrated adaptation constants (mu) and the sub-mesh resolution policy.

Rows are grouped into N_s regimes. A lookup goes to the first regime whose
last key is at or above the requested key and interpolates linearly inside
it; keys below the first row get the first mu.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple
import logging

import numpy as np

from app.core.errors import MuTableError, OutOfCalibrationError
from app.core.mesh import ElementKind
from config.config import settings
from utils.helper import format_float, iter_data_lines

logger = logging.getLogger(__name__)


class MuRow(NamedTuple):
    key: float
    mu: float
    n_s: int


@dataclass(frozen=True)
class Regime:
    n_s: int
    keys: Tuple[float, ...]
    mus: Tuple[float, ...]


@dataclass(frozen=True)
class MuTable:
    rows: Tuple[MuRow, ...]
    kind: ElementKind
    source: str = "<memory>"

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(MuRow(*r) for r in self.rows))
        object.__setattr__(self, "kind", ElementKind(self.kind))
        problem = check_rows(self.rows)
        if problem is not None:
            index, message = problem
            raise MuTableError(f"{self.source}: row {index}: {message}")

    @cached_property
    def regimes(self) -> Tuple[Regime, ...]:
        out: List[Regime] = []
        for row in self.rows:
            if out and out[-1].n_s == row.n_s:
                last = out[-1]
                out[-1] = Regime(row.n_s, last.keys + (row.key,), last.mus + (row.mu,))
            else:
                out.append(Regime(row.n_s, (row.key,), (row.mu,)))
        return tuple(out)

    @property
    def max_key(self) -> float:
        return self.rows[-1].key


def check_rows(rows) -> Optional[Tuple[int, str]]:
    """First ordering problem as (row index, message), or None"""
    if not rows:
        return 0, "table has no rows"
    seen_regimes = set()
    for k, row in enumerate(rows):
        if row.n_s < 3:
            return k, f"N_s={row.n_s} is below the minimum of 3"
        if not (row.key > 0 and np.isfinite(row.key) and np.isfinite(row.mu)):
            return k, f"key and mu must be finite with key > 0, got ({row.key}, {row.mu})"
        if k == 0:
            seen_regimes.add(row.n_s)
            continue
        prev = rows[k - 1]
        if row.key < prev.key:
            return k, f"keys must be non-decreasing ({row.key} after {prev.key})"
        if row.n_s == prev.n_s:
            if row.key == prev.key:
                return k, f"duplicate key {row.key} within the N_s={row.n_s} regime"
        elif row.n_s in seen_regimes:
            return k, f"N_s={row.n_s} regime is not contiguous"
        seen_regimes.add(row.n_s)
    return None


def load_mu_table(path: str | Path) -> MuTable:
    lines = iter_data_lines(path)
    header = next(lines, None)
    if header is None:
        raise MuTableError(f"{path}: empty table file")
    lineno, tokens = header
    if len(tokens) != 2 or tokens[0] != "kind":
        raise MuTableError(f"{path}: line {lineno}: expected 'kind tri|quad'")
    try:
        kind = ElementKind(tokens[1])
    except ValueError:
        raise MuTableError(f"{path}: line {lineno}: unknown kind {tokens[1]!r}") from None

    rows: List[MuRow] = []
    line_numbers: List[int] = []
    for lineno, tokens in lines:
        if len(tokens) != 3:
            raise MuTableError(f"{path}: line {lineno}: expected 'key mu ns'")
        try:
            rows.append(MuRow(float(tokens[0]), float(tokens[1]), int(tokens[2])))
        except ValueError:
            raise MuTableError(f"{path}: line {lineno}: malformed row {' '.join(tokens)!r}") from None
        line_numbers.append(lineno)

    problem = check_rows(rows)
    if problem is not None:
        index, message = problem
        where = f"line {line_numbers[index]}" if line_numbers else f"line {lineno}"
        raise MuTableError(f"{path}: {where}: {message}")

    table = MuTable(tuple(rows), kind, source=str(path))
    logger.info(f"Loaded {kind.value} mu table from {path}: {len(rows)} rows, max key {table.max_key}")
    return table


@lru_cache(maxsize=None)
def get_mu_table(kind: ElementKind, path: Optional[str] = None) -> MuTable:
    """Load (once) the table for ``kind``; ``path`` overrides the packaged file"""
    kind = ElementKind(kind)
    if path is None:
        path = (
            settings.TRIANGLE_MU_TABLE_FILE
            if kind is ElementKind.TRIANGLE
            else settings.QUAD_MU_TABLE_FILE
        )
    table = load_mu_table(path)
    if table.kind is not kind:
        raise MuTableError(f"{path}: holds a {table.kind.value} table, {kind.value} requested")
    return table


def _regime_for(table: MuTable, key: float) -> Optional[Regime]:
    for regime in table.regimes:
        if regime.keys[-1] >= key:
            return regime
    return None


def lookup_mu(table: MuTable, key: float, clamp: bool = False) -> Tuple[float, int]:
    """
    Return (mu, N_s) for a lookup key (c*m_i for triangles, c*h for quads).

    Keys above the last row raise ``OutOfCalibrationError`` carrying the
    clamped value, unless ``clamp`` is set, in which case that value is
    returned and a warning is logged.
    """
    if not key > 0:
        raise ValueError(f"mu lookup key must be positive, got {key}")

    regime = _regime_for(table, key)
    if regime is None:
        last = table.rows[-1]
        if not clamp:
            raise OutOfCalibrationError(key, last.mu, last.n_s, table.kind.value)
        logger.warning(
            f"Key {key:.6g} above the {table.kind.value} mu table (max {last.key}); "
            f"clamping to mu={last.mu}, N_s={last.n_s}"
        )
        return last.mu, last.n_s

    mu = float(np.interp(key, regime.keys, regime.mus))
    return mu, regime.n_s


def select_n_s(table: MuTable, key: float) -> int:
    regime = _regime_for(table, key)
    return regime.n_s if regime is not None else table.rows[-1].n_s


def dump_table(table: MuTable) -> str:
    lines = [f"# source: {table.source}", f"kind {table.kind.value}", "# key mu ns"]
    lines += [f"{format_float(r.key)} {format_float(r.mu)} {r.n_s}" for r in table.rows]
    return "\n".join(lines) + "\n"
