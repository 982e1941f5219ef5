import numpy as np
import pytest
from lmft.synth import (
    ClassSpec,
    GeneratorSpec,
    gen_labeled_segments,
    gen_variable_noise,
    gen_variable_period,
    generate,
    variable_noise_core,
    variable_noise_variance,
    variable_period_core,
)
from lmft.evaluation import nn1_classify
from lmft.utils.errors import ValidationError


def test_variable_noise_shape_and_window():
    series = gen_variable_noise(0)
    assert series.n_times == 1000
    assert series.channel_names == ["y"]
    assert variable_noise_variance([449.0, 450.0, 550.0, 551.0]).tolist() == [1.0, 5.0, 5.0, 1.0]
    core = (series.times >= 455) & (series.times <= 545)
    outside = (series.times < 450) | (series.times > 550)
    high, low = [], []
    for seed in range(10):
        sample = gen_variable_noise(seed)
        residual = sample.values[:, 0] - variable_noise_core(sample.times)
        high.append(float(np.var(residual[core])))
        low.append(float(np.var(residual[outside])))
    print(f"noise variance over [455, 545] {np.mean(high):.3f}, outside the window {np.mean(low):.3f}")
    assert 3.5 <= np.mean(high) <= 6.5
    assert 0.85 < np.mean(low) < 1.15


def test_variable_period_is_centred():
    series = gen_variable_period(0)
    assert series.n_times == 1001
    assert series.times[0] == -500 and series.times[-1] == 500
    residual = series.values[:, 0] - variable_period_core(series.times)
    assert 0.85 < float(np.var(residual)) < 1.15


def test_generators_are_seeded():
    assert np.array_equal(gen_variable_noise(3).values, gen_variable_noise(3).values)
    assert not np.array_equal(gen_variable_noise(3).values, gen_variable_noise(4).values)
    assert np.array_equal(generate(GeneratorSpec("variable_period", rng_seed=2, n=50)).values,
                          gen_variable_period(2, 50).values)


def test_labeled_segments_order_and_size():
    specs = [ClassSpec("low", 1.0, 25.0), ClassSpec("high", 5.0, 25.0)]
    corpus = gen_labeled_segments(specs, per_class=4, seg_len=60, seed=1)
    assert [label for _, label in corpus] == ["low"] * 4 + ["high"] * 4
    assert all(series.n_times == 60 for series, _ in corpus)
    low = np.mean([np.var(s.values) for s, label in corpus if label == "low"])
    high = np.mean([np.var(s.values) for s, label in corpus if label == "high"])
    assert high > 2 * low


def test_invalid_generator_inputs():
    with pytest.raises(ValidationError):
        gen_variable_noise(0, n=5)
    with pytest.raises(ValidationError):
        GeneratorSpec("variable_noise", n=3)
    with pytest.raises(ValidationError):
        GeneratorSpec("brownian")
    with pytest.raises(ValidationError):
        ClassSpec("bad", -1.0, 10.0)
    with pytest.raises(ValidationError):
        gen_labeled_segments([ClassSpec("only", 1.0, 10.0)], 2, 20)
    with pytest.raises(ValidationError):
        generate(GeneratorSpec("labeled_segments"))


def test_class_spec_dict_round_trip():
    spec = ClassSpec("a", 2.0, 30.0, amplitude=0.5)
    assert ClassSpec.from_dict(spec.to_dict()) == spec


def test_empty_corpus():
    specs = [ClassSpec("low", 1.0, 25.0), ClassSpec("high", 5.0, 25.0)]
    assert gen_labeled_segments(specs, per_class=0, seg_len=60, seed=0) == []


@pytest.mark.slow
def test_identical_classes_classify_at_chance():
    specs = [ClassSpec("a", 2.0, 12.0), ClassSpec("b", 2.0, 12.0)]
    accuracies = []
    for seed in range(3):
        corpus = gen_labeled_segments(specs, per_class=40, seg_len=30, seed=seed)
        train = [item for i, item in enumerate(corpus) if i % 40 < 20]
        test = [item for i, item in enumerate(corpus) if i % 40 >= 20]
        result = nn1_classify(train, [series for series, _ in test], threads=4)
        hits = sum(predicted == label for predicted, (_, label) in zip(result.labels, test))
        accuracies.append(hits / len(test))
    print(f"accuracy on indistinguishable classes: {accuracies}")
    assert 0.3 <= np.mean(accuracies) <= 0.7
