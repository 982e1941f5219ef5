import numpy as np
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, List, Optional, Sequence
from sklearn.metrics import accuracy_score, confusion_matrix, precision_recall_fscore_support
from lmft.utils.errors import ValidationError


@dataclass
class ConfusionMatrix:
    """Counts indexed (true, predicted) over ``labels``."""

    labels: List[Hashable]
    counts: np.ndarray = field(default=None)

    def __post_init__(self):
        self.labels = list(self.labels)
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError(f"Duplicate labels: {self.labels}")
        k = len(self.labels)
        if self.counts is None:
            self.counts = np.zeros((k, k), dtype=int)
        self.counts = np.asarray(self.counts)
        if self.counts.shape != (k, k):
            raise ValidationError(f"counts shape {self.counts.shape} does not match {k} labels")
        if np.any(self.counts < 0) or not np.all(self.counts == np.round(self.counts)):
            raise ValidationError("counts must be nonnegative integers")
        self.counts = self.counts.astype(int)

    @staticmethod
    def from_predictions(y_true: Sequence, y_pred: Sequence,
                         labels: Optional[Sequence] = None) -> "ConfusionMatrix":
        if len(y_true) != len(y_pred):
            raise ValidationError(f"{len(y_true)} true labels but {len(y_pred)} predictions")
        if labels is None:
            labels = sorted(set(y_true) | set(y_pred), key=str)
        labels = list(labels)
        unknown = (set(y_true) | set(y_pred)) - set(labels)
        if unknown:
            raise ValidationError(f"Unknown labels {sorted(unknown, key=str)}", {"labels": labels})
        if len(y_true) == 0:
            return ConfusionMatrix(labels)
        index = {label: i for i, label in enumerate(labels)}
        counts = confusion_matrix([index[t] for t in y_true], [index[p] for p in y_pred],
                                  labels=list(range(len(labels))))
        return ConfusionMatrix(labels, counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def samples(self):
        """(true, predicted) label indices, one pair per counted item."""
        k = len(self.labels)
        y_true = np.repeat(np.arange(k), self.counts.sum(axis=1))
        y_pred = np.concatenate([np.repeat(np.arange(k), row) for row in self.counts]) if k else np.zeros(0, int)
        return y_true, y_pred

    def to_dict(self) -> Dict[str, Any]:
        return {"labels": [str(label) for label in self.labels], "counts": self.counts.tolist()}


def _present(value: float) -> Optional[float]:
    return None if np.isnan(value) else float(value)


def metrics(cm: ConfusionMatrix, positive: Optional[Hashable] = None) -> Dict[str, Optional[float]]:
    """
    Accuracy, and one-vs-rest precision, recall and f1 for ``positive``.

    Binary matrices default to the second label as positive. Undefined ratios are None.
    """
    if positive is None and len(cm.labels) == 2:
        positive = cm.labels[1]
    if positive is not None and positive not in cm.labels:
        raise ValidationError(f"Positive class {positive} is not a label")
    empty = {"accuracy": None, "precision": None, "recall": None, "f1": None}
    if cm.total == 0:
        return empty

    y_true, y_pred = cm.samples()
    result = {**empty, "accuracy": float(accuracy_score(y_true, y_pred))}
    if positive is None:
        return result
    precision, recall, f1, _ = precision_recall_fscore_support(
        y_true, y_pred, labels=[cm.labels.index(positive)], average=None, zero_division=np.nan)
    result.update(precision=_present(precision[0]), recall=_present(recall[0]), f1=_present(f1[0]))
    return result
