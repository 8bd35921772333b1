"""Time series containers, CSV/JSON serialization and peak detection."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.signal import peak_prominences


@dataclass
class TimeSeries:
    """Sampled trajectories on a shared time grid (times in units of 1/d)."""

    t: np.ndarray
    channels: dict[str, np.ndarray]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.channels = {k: np.asarray(v, dtype=float) for k, v in self.channels.items()}
        for name, values in self.channels.items():
            if values.shape != self.t.shape:
                raise ValueError(
                    f"channel {name!r} has shape {values.shape}, time grid has {self.t.shape}"
                )

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    @property
    def step(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    def filename(self) -> str:
        m = self.metadata
        return f"{m.get('experiment', 'run')}_{m.get('n', 'x')}_{m.get('engine', 'analytic')}.csv"

    def to_csv(self, path: "str | Path") -> Path:
        """Header ``t,<channels...>``; floats written as shortest round-trip decimals."""
        path = Path(path)
        names = list(self.channels)
        columns = [self.t] + [self.channels[n] for n in names]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", *names])
            for row in zip(*columns):
                writer.writerow([repr(float(x)) for x in row])
        return path

    @classmethod
    def from_csv(cls, path: "str | Path", metadata=None) -> "TimeSeries":
        with Path(path).open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = np.array([[float(x) for x in row] for row in reader])
        rows = rows.reshape(-1, len(header))
        channels = {name: rows[:, i] for i, name in enumerate(header) if i > 0}
        return cls(rows[:, 0], channels, dict(metadata or {}))


@dataclass
class ExperimentReport:
    name: str
    series: list[TimeSeries]
    summary: dict[str, Any]
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "experiment": self.name,
            "metadata": _jsonable(self.metadata),
            "summary": _jsonable(self.summary),
            "series": [
                {"file": s.filename(), "metadata": _jsonable(s.metadata)} for s in self.series
            ],
        }

    def write(self, out_dir: "str | Path") -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [s.to_csv(out / s.filename()) for s in self.series]
        n = self.metadata.get("n", "x")
        report = out / f"{self.name}_{n}_report.json"
        report.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")
        written.append(report)
        return written


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def local_maxima(y) -> np.ndarray:
    """Indices of three-point local maxima; a plateau reports its earliest point."""
    y = np.asarray(y)
    inner = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])
    return np.flatnonzero(inner) + 1


def local_minima(y) -> np.ndarray:
    return local_maxima(-np.asarray(y))


def local_extrema(y) -> np.ndarray:
    return np.union1d(local_maxima(y), local_minima(y))


def prominent_maxima(y, min_prominence: float) -> np.ndarray:
    """Local maxima whose topographic prominence is at least ``min_prominence``."""
    idx = local_maxima(y)
    if len(idx) == 0:
        return idx
    prominence = peak_prominences(np.asarray(y, dtype=float), idx)[0]
    return idx[prominence >= min_prominence]
