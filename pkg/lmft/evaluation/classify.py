import numpy as np
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Hashable, List, Optional, Sequence, Tuple, Union
from lmft.evaluation.dtw import _as_sequence, dtw
from lmft.pipeline.series import FeatureSeries, TimeSeries
from lmft.utils.color import DistanceShade, Palette
from lmft.utils.errors import ValidationError
from lmft.utils.logging import logger


@dataclass
class ZScoreResult:
    items: List[Any]
    mean: np.ndarray
    std: np.ndarray
    zero_variance: List[int]


def _rebuild(item, values: np.ndarray):
    if isinstance(item, TimeSeries):
        return TimeSeries(item.times.copy(), values, list(item.channel_names))
    if isinstance(item, FeatureSeries):
        return FeatureSeries(item.query_times.copy(), values, list(item.feature_names),
                             list(item.diagnostics))
    return values


def zscore_channels(corpus: Sequence) -> ZScoreResult:
    """
    Standardize every column to mean 0 and (population) standard deviation 1 across the
    whole corpus. Zero-variance columns pass through unchanged and are reported.
    """
    if len(corpus) == 0:
        return ZScoreResult([], np.zeros(0), np.zeros(0), [])
    arrays = [_as_sequence(item) for item in corpus]
    widths = {a.shape[1] for a in arrays}
    if len(widths) != 1:
        raise ValidationError(f"Corpus items have different channel counts: {sorted(widths)}")
    pooled = np.vstack(arrays)
    if pooled.shape[0] < 2:
        raise ValidationError("zscore needs at least 2 values per column")
    mean = pooled.mean(axis=0)
    std = pooled.std(axis=0)
    zero = [int(c) for c in np.flatnonzero(~(std > 0))]
    for c in zero:
        logger.warning(f"column {c} has zero variance; left unscaled")
    shift = np.where(std > 0, mean, 0.0)
    scale = np.where(std > 0, std, 1.0)
    items = [_rebuild(item, (a - shift) / scale) for item, a in zip(corpus, arrays)]
    return ZScoreResult(items, mean, std, zero)


@dataclass
class NNResult:
    labels: List[Hashable]
    neighbor_index: List[int]
    distance: List[float]
    distances: np.ndarray

    def to_rows(self) -> List[Dict[str, Any]]:
        return [{"test_index": i, "predicted": str(label), "neighbor_index": j, "distance": d}
                for i, (label, j, d) in enumerate(zip(self.labels, self.neighbor_index, self.distance))]


def nn1_classify(train: Sequence[Tuple[Any, Hashable]], test: Sequence, scale: bool = False,
                 window: Optional[int] = None, threads: int = 1) -> NNResult:
    """1-nearest-neighbour under DTW; ties go to the lowest training index."""
    if len(train) == 0:
        raise ValidationError("nn1_classify needs at least one training item")
    train_items = [item for item, _ in train]
    train_labels = [label for _, label in train]
    test_items = list(test)
    if scale:
        scaled = zscore_channels(train_items + test_items).items
        train_items, test_items = scaled[:len(train_items)], scaled[len(train_items):]

    def _row(a) -> np.ndarray:
        return np.array([dtw(a, b, window) for b in train_items])

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as executor:
        rows = list(executor.map(_row, test_items))
    D = np.vstack(rows) if rows else np.zeros((0, len(train_items)))
    nearest = [int(np.argmin(row)) for row in D]
    return NNResult(
        labels=[train_labels[j] for j in nearest],
        neighbor_index=nearest,
        distance=[float(D[i, j]) for i, j in enumerate(nearest)],
        distances=D,
    )


def display_distance_matrix(D: np.ndarray, train_labels: Sequence, test_labels: Sequence = None,
                            nearest: Sequence[int] = None,
                            palette: Union[str, Palette] = Palette.PLAIN) -> str:
    """
    Text table of the test x train DTW distances, one row per test item. The nearest
    training item of a row carries ``*`` when its label matches the test label and ``x``
    when it does not; other cells are shaded by where they sit in the row range.
    """
    palette = Palette.try_parse(palette)
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if len(train_labels) != D.shape[1]:
        raise ValidationError(f"{len(train_labels)} train labels for {D.shape[1]} columns")
    output = [f"DTW distance matrix - {D.shape[0]} test x {D.shape[1]} train",
              " " * 12 + "".join(f"{str(label)[:9]:>11}" for label in train_labels)]
    for i, row in enumerate(D):
        tag = "" if test_labels is None else str(test_labels[i])[:6]
        line = DistanceShade.label(f"{i:4d} {tag:>6} ", palette)
        lo, hi = float(np.min(row)), float(np.max(row))
        span = hi - lo if hi > lo else 1.0
        for j, value in enumerate(row):
            cell = f"{value:10.3f}"
            if nearest is not None and nearest[i] == j:
                correct = None if test_labels is None else str(test_labels[i]) == str(train_labels[j])
                line += DistanceShade.nearest(cell, palette, correct)
            else:
                line += DistanceShade.cell(cell, palette, (value - lo) / span)
        output.append(line)
    return "\n".join(output) + "\n"


@dataclass
class DistanceTable:
    """Everything ``display_distance_matrix`` needs, kept from a classification run."""

    distances: np.ndarray
    train_labels: List[str]
    test_labels: List[str]
    nearest: List[int]

    def render(self, palette: Union[str, Palette] = Palette.PLAIN) -> str:
        return display_distance_matrix(self.distances, self.train_labels, self.test_labels,
                                       self.nearest, palette)
