import numpy as np
import pandas as pd
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Sequence
from lmft.utils.errors import ValidationError


@dataclass
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    channel_names: List[str]

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        self.values = values
        self.channel_names = [str(c) for c in self.channel_names]
        if values.ndim != 2 or values.shape[0] != self.times.size:
            raise ValidationError(f"values shape {values.shape} does not match {self.times.size} times")
        if values.shape[1] < 1 or len(self.channel_names) != values.shape[1]:
            raise ValidationError(f"{len(self.channel_names)} channel names for {values.shape[1]} channels")
        if len(set(self.channel_names)) != len(self.channel_names):
            raise ValidationError(f"Duplicate channel names: {self.channel_names}")
        if not np.all(np.isfinite(self.times)) or not np.all(np.isfinite(values)):
            raise ValidationError("TimeSeries times and values must be finite")
        steps = np.diff(self.times)
        if np.any(steps <= 0):
            row = int(np.flatnonzero(steps <= 0)[0]) + 1
            raise ValidationError(f"times must be strictly increasing (row {row})", {"row": row})

    @property
    def n_times(self) -> int:
        return int(self.times.size)

    @property
    def n_channels(self) -> int:
        return int(self.values.shape[1])

    def channel(self, index: int) -> np.ndarray:
        return self.values[:, index]

    def channel_index(self, name_or_index) -> int:
        if isinstance(name_or_index, (int, np.integer)):
            if not 0 <= name_or_index < self.n_channels:
                raise ValidationError(f"Channel index {name_or_index} out of range")
            return int(name_or_index)
        if name_or_index not in self.channel_names:
            raise ValidationError(f"Unknown channel: {name_or_index}")
        return self.channel_names.index(name_or_index)

    def window(self, start: float, end: float) -> "TimeSeries":
        mask = (self.times >= start) & (self.times <= end)
        if not np.any(mask):
            raise ValidationError(f"No samples in window [{start}, {end}]")
        return TimeSeries(self.times[mask], self.values[mask], list(self.channel_names))

    def to_frame(self, time_column: str = "time") -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=self.channel_names)
        frame.insert(0, time_column, self.times)
        return frame

    @staticmethod
    def from_arrays(times, values, channel_names: Optional[Sequence[str]] = None) -> "TimeSeries":
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if channel_names is None:
            channel_names = [f"c{i}" for i in range(values.shape[1])]
        return TimeSeries(times, values, list(channel_names))


@dataclass
class CellDiagnostics:
    query_index: int
    channel: str
    converged: bool = False
    log_marginal: Optional[float] = None
    seed_origin: Optional[str] = None
    failed: bool = False
    filled_from: Optional[int] = None
    error: Optional[str] = None
    n_points: int = 0
    weight_mean: Optional[float] = None
    iterations: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class FeatureSeries:
    """
    Output of the feature transformation: one row per query time and one column per
    (channel, free parameter), named ``"{channel}.{parameter}"``.
    """

    query_times: np.ndarray
    features: np.ndarray
    feature_names: List[str]
    diagnostics: List[CellDiagnostics] = field(default_factory=list)

    def __post_init__(self):
        self.query_times = np.asarray(self.query_times, dtype=float).ravel()
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim == 1:
            self.features = self.features.reshape(-1, 1)
        if self.features.shape != (self.query_times.size, len(self.feature_names)):
            raise ValidationError(f"features shape {self.features.shape} does not match "
                                  f"{self.query_times.size} queries x {len(self.feature_names)} names")

    @property
    def failed_cells(self) -> List[CellDiagnostics]:
        return [d for d in self.diagnostics if d.failed]

    def as_time_series(self) -> TimeSeries:
        return TimeSeries(self.query_times, self.features, list(self.feature_names))

    def to_frame(self, time_column: str = "time") -> pd.DataFrame:
        frame = pd.DataFrame(self.features, columns=self.feature_names)
        frame.insert(0, time_column, self.query_times)
        return frame

    def diagnostics_dict(self) -> Dict[str, Any]:
        return {
            "feature_names": list(self.feature_names),
            "n_queries": int(self.query_times.size),
            "failed_cells": len(self.failed_cells),
            "cells": [d.to_dict() for d in self.diagnostics],
        }
