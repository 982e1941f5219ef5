import json
import pytest
from lmft.gpr import ObjectiveForm, WeightingMode
from lmft.io import ExperimentConfig, component_seed, load_config, parse_config
from lmft.pipeline import SeedVariant
from lmft.utils.errors import ValidationError
from .utils import ROOT_DIR

CONTRIVED_VARIANCE = {
    "data": {"generator": {"kind": "variable_noise"}},
    "kernel": {"family": "tricube", "h": 120},
    "covariance": {"sum": [{"prod": [{"cn": {"fixed": 64}}, {"rbf": {"fixed": 2}}]}, {"wn": {"free": 1.0}}]},
    "query": {"grid": "stride", "stride": 5},
}


def config_with(**changes) -> dict:
    data = json.loads(json.dumps(CONTRIVED_VARIANCE))
    data.update(changes)
    return data


def test_minimal_config_defaults():
    config = parse_config(config_with())
    assert config.schema_version == 1
    assert config.cov_expr().free_names() == ["wn"]
    assert config.kernel.to_spec().h == 120.0
    assert config.fit_options().mode == WeightingMode.FULL_DIAGONAL
    assert config.fit_options().form == ObjectiveForm.SIMPLIFIED
    assert config.seed_strategy().variant == SeedVariant.FIXED
    assert config.query.resolve(list(range(20))).tolist() == [0.0, 5.0, 10.0, 15.0]
    assert not config.data.is_corpus


@pytest.mark.parametrize("changes", [
    {"unexpected": 1},
    {"kernel": {"family": "tricube", "h": 120, "width": 3}},
    {"kernel": {"family": "epanechnikov", "h": 1}},
    {"kernel": {"family": "tricube", "h": -1}},
    {"covariance": {"wn": {"fixed": 1.0}}},
    {"covariance": {"matern": {"free": 1.0}}},
    {"data": {"path": "a.csv", "generator": {"kind": "variable_noise"}}},
    {"data": {"generator": {"kind": "labeled_segments", "classes": [
        {"label": "a", "noise_variance": 1, "period": 10}]}}},
    {"strategy": {"variant": "multiseed", "lo": 10, "hi": 1}},
    {"query": {"grid": "explicit"}},
    {"schema_version": 2},
    {"weighting_mode": "diagonal"},
])
def test_invalid_configs_rejected(changes):
    with pytest.raises(ValidationError) as e:
        parse_config(config_with(**changes))
    print(e.value.message)


def test_error_reports_location():
    with pytest.raises(ValidationError) as e:
        parse_config(config_with(strategy={"variant": "fixed", "tries": 3}))
    assert "strategy" in e.value.message
    assert e.value.details["errors"][0]["loc"].startswith("strategy")


def test_component_seeds_are_stable_and_distinct():
    assert component_seed(0, "synth") == component_seed(0, "synth")
    assert component_seed(0, "synth") != component_seed(0, "strategy")
    assert component_seed(0, "synth") != component_seed(1, "synth")
    a = parse_config(config_with(rng_seed=7, strategy={"variant": "multiseed", "count": 3}))
    assert a.seed_strategy().rng_seed == component_seed(7, "strategy")


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "config.json"
    config = parse_config(config_with(smoothing={"method": "loess", "kernel": {"family": "tricube", "h": 60}}))
    path.write_text(config.to_json(), encoding="utf-8")
    again = load_config(str(path))
    assert again == config
    assert again.smoothing.kernel.to_spec().h == 60.0


def test_corpus_config():
    config = parse_config(config_with(
        data={"generator": {"kind": "labeled_segments", "per_class": 4, "seg_len": 50, "classes": [
            {"label": "low", "noise_variance": 1, "period": 25},
            {"label": "high", "noise_variance": 5, "period": 25}]}},
        classification={"positive": "high"},
    ))
    assert config.data.is_corpus
    assert config.classification.scale
    assert isinstance(config, ExperimentConfig)


@pytest.mark.parametrize("name", ["contrived_variance.json", "contrived_period.json", "variance_classes.json"])
def test_shipped_configs_parse(name):
    config = load_config(str(ROOT_DIR / "configs" / name))
    assert config.cov_expr().n_free >= 1
