"""CSV series files: header ``t,value`` (or ``t,gamma``), LF endings."""

from __future__ import annotations

import os

import numpy as np

__all__ = ["write_series", "read_series"]


def write_series(path, t, values, column: str = "value", digits: int = 17) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"t,{column}\n")
        for ti, vi in zip(t, values):
            fh.write(f"{ti:.{digits}g},{vi:.{digits}g}\n")


def read_series(path, column: str = "value") -> tuple[np.ndarray, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != f"t,{column}":
            raise ValueError(f"{os.fspath(path)}: expected header 't,{column}', got {header!r}")
        rows = [line.strip() for line in fh if line.strip()]
    data = np.array([[float(x) for x in r.split(",")] for r in rows], dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{os.fspath(path)}: every row needs exactly two fields")
    return data[:, 0], data[:, 1]
