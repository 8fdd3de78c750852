"""
FunctionSample — 离散化函数数据及其 CSV 格式。

1-D: CSV 第一行为网格横坐标，其余每行一个函数的取值。
2-D: CSV 每行一个按行优先展平的 rows×cols 网格，旁边的 JSON sidecar 记录 {rows, cols}；
     网格取单位正方形上的单元中心。
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from otmap.core.errors import DomainError, UsageError
from otmap.io.tables import read_matrix, write_json, write_matrix

logger = logging.getLogger("otmap.fda")

PathLike = Union[str, Path]


def cell_centres(count: int) -> np.ndarray:
    """(k + 0.5)/count for k = 0..count−1."""
    return (np.arange(count, dtype=float) + 0.5) / count


@dataclass
class FunctionSample:
    """n discretized functions on a common grid.

    Attributes:
        grid: Strictly increasing abscissae (the row axis in 2-D mode).
        values: n × len(grid) matrix, or n × (rows·cols) in 2-D mode.
        col_grid: Column abscissae in 2-D mode, ``None`` otherwise.
    """

    grid: np.ndarray
    values: np.ndarray
    col_grid: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=float).reshape(-1)
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.col_grid is not None:
            self.col_grid = np.asarray(self.col_grid, dtype=float).reshape(-1)
        for g in (self.grid, self.col_grid):
            if g is None:
                continue
            if g.shape[0] < 2:
                raise DomainError("a function grid needs at least two points")
            if not np.all(np.diff(g) > 0):
                raise DomainError("grid abscissae must be strictly increasing")
        if self.values.shape[1] != self.points:
            raise DomainError(f"values have {self.values.shape[1]} columns, grid has {self.points} points")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("function values must be finite")

    @classmethod
    def grid_2d(cls, values: np.ndarray, rows: int, cols: int) -> "FunctionSample":
        """2-D sample on the cell-centred rows×cols grid of the unit square."""
        return cls(cell_centres(rows), values, col_grid=cell_centres(cols))

    @property
    def is_2d(self) -> bool:
        return self.col_grid is not None

    @property
    def shape(self) -> Tuple[int, ...]:
        if self.is_2d:
            return (self.grid.shape[0], self.col_grid.shape[0])
        return (self.grid.shape[0],)

    @property
    def points(self) -> int:
        return int(np.prod(self.shape))

    def __len__(self) -> int:
        return self.values.shape[0]

    def subset(self, rows: np.ndarray) -> "FunctionSample":
        return FunctionSample(self.grid, self.values[rows], col_grid=self.col_grid)


# ──────────────────────────────────────────────
# CSV
# ──────────────────────────────────────────────


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def read_functions(path: PathLike) -> FunctionSample:
    """Read a 1-D CSV (grid row first) or a 2-D CSV with its JSON sidecar."""
    path = Path(path)
    side = _sidecar(path)
    if side.is_file():
        try:
            meta = json.loads(side.read_text(encoding="utf-8"))
            rows, cols = int(meta["rows"]), int(meta["cols"])
        except (ValueError, KeyError, TypeError) as e:
            raise UsageError(f"{side}: expected a {{rows, cols}} object ({e})") from None
        return FunctionSample.grid_2d(read_matrix(path), rows, cols)
    data = read_matrix(path)
    if data.shape[0] < 2:
        raise DomainError(f"{path}: need a grid row and at least one function row")
    return FunctionSample(data[0], data[1:])


def write_functions(path: PathLike, fs: FunctionSample) -> Path:
    path = Path(path)
    if fs.is_2d:
        rows, cols = fs.shape
        write_json(_sidecar(path), {"rows": rows, "cols": cols})
        return write_matrix(path, fs.values)
    return write_matrix(path, np.vstack([fs.grid[None, :], fs.values]))
