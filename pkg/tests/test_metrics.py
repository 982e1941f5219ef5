import pytest
from lmft.evaluation import ConfusionMatrix, metrics
from lmft.utils.errors import ValidationError


def test_binary_metrics_example():
    cm = ConfusionMatrix(["neg", "pos"], [[16, 3], [10, 9]])
    result = metrics(cm)
    print(result)
    assert result["accuracy"] == pytest.approx(25 / 38, abs=1e-15)
    assert result["precision"] == pytest.approx(0.75, abs=1e-15)
    assert result["recall"] == pytest.approx(9 / 19, abs=1e-15)
    assert result["f1"] == pytest.approx(2 * 0.75 * (9 / 19) / (0.75 + 9 / 19), abs=1e-15)


def test_explicit_positive_class():
    cm = ConfusionMatrix(["neg", "pos"], [[16, 3], [10, 9]])
    result = metrics(cm, positive="neg")
    assert result["precision"] == pytest.approx(16 / 26)
    assert result["recall"] == pytest.approx(16 / 19)


def test_undefined_ratios_are_none():
    cm = ConfusionMatrix(["a", "b"], [[5, 0], [0, 0]])
    result = metrics(cm)
    assert result["accuracy"] == 1.0
    assert result["precision"] is None
    assert result["recall"] is None
    assert result["f1"] is None
    assert metrics(ConfusionMatrix(["a", "b"]))["accuracy"] is None


def test_from_predictions():
    cm = ConfusionMatrix.from_predictions(["a", "b", "b", "c"], ["a", "b", "c", "c"])
    assert cm.labels == ["a", "b", "c"]
    assert cm.counts.tolist() == [[1, 0, 0], [0, 1, 1], [0, 0, 1]]
    assert cm.total == 4
    result = metrics(cm)
    assert result["accuracy"] == 0.75 and result["f1"] is None
    assert metrics(cm, positive="c")["precision"] == 0.5
    assert cm.to_dict()["counts"][1] == [0, 1, 1]


def test_invalid_confusion_matrix():
    with pytest.raises(ValidationError):
        ConfusionMatrix(["a", "a"])
    with pytest.raises(ValidationError):
        ConfusionMatrix(["a", "b"], [[1, -1], [0, 0]])
    with pytest.raises(ValidationError):
        ConfusionMatrix.from_predictions(["a"], ["a", "b"])
    with pytest.raises(ValidationError):
        metrics(ConfusionMatrix(["a", "b"]), positive="z")


def test_no_true_positives_gives_zero_f1():
    cm = ConfusionMatrix(["neg", "pos"], [[4, 2], [3, 0]])
    result = metrics(cm)
    assert result["precision"] == 0.0
    assert result["recall"] == 0.0
    assert result["f1"] == 0.0
    only_negatives = metrics(ConfusionMatrix(["neg", "pos"], [[4, 0], [3, 0]]))
    assert only_negatives["precision"] is None
    assert only_negatives["recall"] == 0.0
    assert only_negatives["accuracy"] == pytest.approx(4 / 7)


def test_labels_outside_the_list_rejected():
    with pytest.raises(ValidationError):
        ConfusionMatrix.from_predictions(["a", "b"], ["a", "z"], ["a", "b"])
    empty = ConfusionMatrix.from_predictions([], [], ["a", "b"])
    assert empty.total == 0 and empty.counts.shape == (2, 2)
